"""Network builders shared by the tests."""

import numpy as np

from multipath import Arc, Network, Path, build_grid

FIXTURES = __import__("pathlib").Path(__file__).resolve().parent.parent / "fixtures"


def merge_network(length=1.0):
    return Network(
        ["n1", "n2", "J", "n3"],
        [Arc("a1", "n1", "J", length), Arc("a2", "n2", "J", length), Arc("a3", "J", "n3", length)],
    )


def merge_grid(cells_per_arc=25, length=1.0):
    """Two paths a1->a3 and a2->a3. With one cell per arc this is the three-cell merge."""
    net = merge_network(length)
    return build_grid(net, [Path(1, ("a1", "a3")), Path(2, ("a2", "a3"))], length / cells_per_arc)


def diverge_grid(cells_per_arc=5):
    net = Network(
        ["s", "D", "e1", "e2"],
        [Arc("in", "s", "D", 1.0), Arc("l", "D", "e1", 1.0), Arc("r", "D", "e2", 1.0)],
    )
    return build_grid(net, [Path(1, ("in", "l")), Path(2, ("in", "r"))], 1.0 / cells_per_arc)


def three_in_one_grid(cells_per_arc=5):
    net = Network(
        ["n1", "n2", "n3", "J", "e"],
        [Arc(f"a{i}", f"n{i}", "J", 1.0) for i in (1, 2, 3)] + [Arc("out", "J", "e", 1.0)],
    )
    paths = [Path(i, (f"a{i}", "out")) for i in (1, 2, 3)]
    return build_grid(net, paths, 1.0 / cells_per_arc)


def twin_rings_grid(cells_per_arc=10):
    """Two periodic paths sharing arc ``a``: a merge at X and a diverge at Y, no boundaries."""
    net = Network(
        ["X", "Y"],
        [Arc("a", "X", "Y", 1.0), Arc("b", "Y", "X", 1.0), Arc("c", "Y", "X", 1.0)],
    )
    paths = [Path(1, ("a", "b"), periodic=True), Path(2, ("a", "c"), periodic=True)]
    return build_grid(net, paths, 1.0 / cells_per_arc)


def random_field(grid, rng, rho_max=1.0, boundary=None):
    """Admissible random sub-densities: draw omega per physical cell, split among aliases."""
    omega = rng.uniform(0.0, rho_max, grid.n_phys)
    mu = np.zeros(grid.n_cells)
    for c, members in grid.aliases().items():
        w = rng.dirichlet(np.ones(len(members)))
        for (pid, k), share in zip(members, w):
            mu[grid.cells(pid).start + k] = omega[c] * share
    f = grid.field(0.0, boundary)
    f.mu[:] = mu
    return f


def random_boundary(grid, rng, rho_max=1.0):
    """Random Dirichlet values with every shared arc end summing to at most rho_max."""
    ghosts = np.zeros(grid.n_ghosts)
    key = grid.ghost_phys
    for gp in np.unique(key):
        idx = np.flatnonzero(key == gp)
        total = rng.uniform(0.0, rho_max)
        ghosts[idx] = total * rng.dirichlet(np.ones(len(idx)))
    return ghosts
