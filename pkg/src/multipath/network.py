"""Road networks, paths, and the per-path grid with shared physical cells.

Every path is discretised as its own row of cells. Cells of different paths
that cover the same arc segment are aliases of one physical cell, and the
total density ``omega`` is computed once per physical cell.

Storage is flat: all path cells are concatenated in ascending path order, and
each path additionally owns one ghost cell at each open end holding a
Dirichlet value. Ghost cells at the same end of the same arc share a physical
id, so e.g. the downstream ghosts of a merge add up to the outgoing boundary
density.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ADMISSIBILITY_TOL = 1e-10


class NetworkError(ValueError):
    """Invalid topology or path definition."""


class GridError(ValueError):
    """Arc lengths incompatible with the requested cell size."""


@dataclass(frozen=True)
class Arc:
    id: str
    tail: str
    head: str
    length: float


@dataclass(frozen=True)
class Path:
    id: int
    arcs: tuple[str, ...]
    periodic: bool = False


@dataclass
class Network:
    nodes: list[str]
    arcs: list[Arc]

    def __post_init__(self):
        if not self.arcs:
            raise NetworkError("network needs at least one arc")
        if len(set(self.nodes)) != len(self.nodes):
            raise NetworkError("duplicate node id")
        known = set(self.nodes)
        seen = set()
        for a in self.arcs:
            if a.id in seen:
                raise NetworkError(f"duplicate arc id {a.id!r}")
            seen.add(a.id)
            for end in (a.tail, a.head):
                if end not in known:
                    raise NetworkError(f"arc {a.id!r} references unknown node {end!r}")
            if not a.length > 0:
                raise NetworkError(f"arc {a.id!r} has non-positive length {a.length}")
        self._by_id = {a.id: a for a in self.arcs}

    def arc(self, arc_id: str) -> Arc:
        try:
            return self._by_id[arc_id]
        except KeyError:
            raise NetworkError(f"unknown arc {arc_id!r}") from None

    def in_degree(self, node: str) -> int:
        return sum(a.head == node for a in self.arcs)

    def out_degree(self, node: str) -> int:
        return sum(a.tail == node for a in self.arcs)


def validate_path(network: Network, path: Path) -> None:
    if not path.arcs:
        raise NetworkError(f"path {path.id} has no arcs")
    if len(set(path.arcs)) != len(path.arcs):
        raise NetworkError(f"path {path.id} repeats an arc")
    arcs = [network.arc(a) for a in path.arcs]
    for prev, nxt in zip(arcs, arcs[1:]):
        if prev.head != nxt.tail:
            raise NetworkError(
                f"path {path.id} is disconnected between arcs {prev.id!r} and {nxt.id!r}"
            )
    if path.periodic and arcs[-1].head != arcs[0].tail:
        raise NetworkError(f"periodic path {path.id} does not close on itself")


@dataclass
class NetworkGrid:
    """Cell layout of all paths plus the physical-cell registry.

    Attributes:
        network: the underlying graph.
        paths: paths sorted by id.
        dx: cell size.
        offsets: ``offsets[i]:offsets[i+1]`` is the slice of path ``i`` in flat arrays.
        phys: physical cell id of every flat path cell.
        phys_arc: ``(arc id, segment index)`` of every physical cell.
        ghost_up, ghost_down: ghost index per path (``-1`` for periodic paths).
        ghost_phys: physical id of every ghost (numbered after the real cells).
        prev, next: neighbour of every flat cell in the extended array
            ``concat(cells, ghosts)``.
        junction_cells: node -> list of ``(path id, local index of first cell after node)``.
        r_inc: node -> number of distinct upstream feeders into the cell after it.
    """

    network: Network
    paths: list[Path]
    dx: float
    offsets: np.ndarray
    phys: np.ndarray
    phys_arc: list[tuple[str, int]]
    ghost_up: np.ndarray
    ghost_down: np.ndarray
    ghost_phys: np.ndarray
    prev: np.ndarray
    next: np.ndarray
    junction_cells: dict[str, list[tuple[int, int]]]
    r_inc: dict[str, int]
    _path_pos: dict[int, int] = field(default_factory=dict, repr=False)

    @property
    def n_cells(self) -> int:
        return int(self.offsets[-1])

    @property
    def n_phys(self) -> int:
        return len(self.phys_arc)

    @property
    def n_ghosts(self) -> int:
        return len(self.ghost_phys)

    @property
    def path_ids(self) -> list[int]:
        return [p.id for p in self.paths]

    def index(self, path_id: int) -> int:
        return self._path_pos[path_id]

    def cells(self, path_id: int) -> slice:
        i = self.index(path_id)
        return slice(int(self.offsets[i]), int(self.offsets[i + 1]))

    def n_path_cells(self, path_id: int) -> int:
        s = self.cells(path_id)
        return s.stop - s.start

    def aliases(self) -> dict[int, list[tuple[int, int]]]:
        """physical id -> ``(path id, local index)`` of every path cell on it."""
        out: dict[int, list[tuple[int, int]]] = {c: [] for c in range(self.n_phys)}
        for p in self.paths:
            s = self.cells(p.id)
            for k, c in enumerate(self.phys[s]):
                out[int(c)].append((p.id, k))
        return out

    def cell_centers(self, path_id: int) -> np.ndarray:
        n = self.n_path_cells(path_id)
        return (np.arange(n) + 0.5) * self.dx

    def junction_index(self, node: str, path_id: int) -> int:
        for pid, k in self.junction_cells.get(node, []):
            if pid == path_id:
                return k
        raise KeyError(f"path {path_id} does not cross node {node!r}")

    @property
    def max_r_inc(self) -> int:
        return max(self.r_inc.values(), default=1)

    # -- fields -------------------------------------------------------------

    def field(self, initial=0.0, boundary=None) -> DensityField:
        """A density field on this grid.

        Args:
            initial: scalar, ``{path id: scalar or per-cell array}``.
            boundary: ``{path id: (upstream, downstream)}`` Dirichlet values;
                missing paths get zeros.
        """
        mu = np.zeros(self.n_cells)
        if isinstance(initial, dict):
            for pid, val in initial.items():
                s = self.cells(pid)
                arr = np.broadcast_to(np.asarray(val, dtype=float), (s.stop - s.start,))
                mu[s] = arr
        else:
            mu[:] = float(initial)
        ghosts = np.zeros(self.n_ghosts)
        for pid, (up, down) in (boundary or {}).items():
            i = self.index(pid)
            if self.ghost_up[i] >= 0:
                ghosts[self.ghost_up[i]] = up
            if self.ghost_down[i] >= 0:
                ghosts[self.ghost_down[i]] = down
        return DensityField(mu=mu, ghosts=ghosts)

    @property
    def ext_phys(self) -> np.ndarray:
        """Physical id of every entry of ``concat(cells, ghosts)``."""
        return np.concatenate([self.phys, self.ghost_phys])


@dataclass
class DensityField:
    """Sub-densities of every path cell plus per-path ghost values.

    ``mu`` is flat in grid order; ``ghosts`` is indexed by
    ``grid.ghost_up`` / ``grid.ghost_down``.
    """

    mu: np.ndarray
    ghosts: np.ndarray
    n: int = 0

    def copy(self) -> DensityField:
        return DensityField(self.mu.copy(), self.ghosts.copy(), self.n)

    def path(self, grid: NetworkGrid, path_id: int) -> np.ndarray:
        return self.mu[grid.cells(path_id)]

    def boundary(self, grid: NetworkGrid, path_id: int) -> tuple[float, float]:
        i = grid.index(path_id)
        up = self.ghosts[grid.ghost_up[i]] if grid.ghost_up[i] >= 0 else float("nan")
        down = self.ghosts[grid.ghost_down[i]] if grid.ghost_down[i] >= 0 else float("nan")
        return float(up), float(down)

    @property
    def ext(self) -> np.ndarray:
        return np.concatenate([self.mu, self.ghosts])


def build_grid(network: Network, paths: Sequence[Path], dx: float) -> NetworkGrid:
    if not dx > 0:
        raise GridError(f"dx must be positive, got {dx}")
    if not paths:
        raise NetworkError("at least one path required")
    paths = sorted(paths, key=lambda p: p.id)
    if len({p.id for p in paths}) != len(paths):
        raise NetworkError("duplicate path id")
    for p in paths:
        validate_path(network, p)

    ncell: dict[str, int] = {}
    for a in network.arcs:
        ratio = a.length / dx
        n = int(round(ratio))
        if n < 1 or abs(ratio - n) > 1e-9 * max(ratio, 1.0):
            raise GridError(f"arc {a.id!r} length {a.length} is not a multiple of dx={dx}")
        ncell[a.id] = n

    phys_id: dict[tuple[str, int], int] = {}
    phys_arc: list[tuple[str, int]] = []

    def pid_of(key):
        if key not in phys_id:
            phys_id[key] = len(phys_arc)
            phys_arc.append(key)
        return phys_id[key]

    # physical cells in the order arcs are first used by paths
    phys_list, offsets = [], [0]
    for p in paths:
        for aid in p.arcs:
            for k in range(ncell[aid]):
                phys_list.append(pid_of((aid, k)))
        offsets.append(len(phys_list))
    phys = np.asarray(phys_list, dtype=np.intp)
    offsets = np.asarray(offsets, dtype=np.intp)
    n_cells = int(offsets[-1])
    n_phys = len(phys_arc)

    ghost_key: dict[tuple[str, str], int] = {}
    ghost_phys_list: list[int] = []
    ghost_up = np.full(len(paths), -1, dtype=np.intp)
    ghost_down = np.full(len(paths), -1, dtype=np.intp)
    prev = np.empty(n_cells, dtype=np.intp)
    nxt = np.empty(n_cells, dtype=np.intp)

    def ghost(key):
        if key not in ghost_key:
            ghost_key[key] = n_phys + len(ghost_key)
        ghost_phys_list.append(ghost_key[key])
        return len(ghost_phys_list) - 1

    for i, p in enumerate(paths):
        lo, hi = int(offsets[i]), int(offsets[i + 1])
        prev[lo + 1 : hi] = np.arange(lo, hi - 1)
        nxt[lo : hi - 1] = np.arange(lo + 1, hi)
        if p.periodic:
            prev[lo] = hi - 1
            nxt[hi - 1] = lo
        else:
            ghost_up[i] = ghost(("in", p.arcs[0]))
            ghost_down[i] = ghost(("out", p.arcs[-1]))
            prev[lo] = n_cells + ghost_up[i]
            nxt[hi - 1] = n_cells + ghost_down[i]
    ghost_phys = np.asarray(ghost_phys_list, dtype=np.intp)
    ext_phys = np.concatenate([phys, ghost_phys])

    # feeders of each physical cell: distinct upstream physical cells
    feeders: dict[int, set[int]] = {}
    for c in range(n_cells):
        feeders.setdefault(int(phys[c]), set()).add(int(ext_phys[prev[c]]))

    junction_cells: dict[str, list[tuple[int, int]]] = {}
    r_inc: dict[str, int] = {}
    for i, p in enumerate(paths):
        k = 0
        arcs = [network.arc(a) for a in p.arcs]
        for j, a in enumerate(arcs):
            if j > 0 or p.periodic:
                junction_cells.setdefault(a.tail, []).append((p.id, k))
            k += ncell[a.id]
    for a in network.arcs:
        c = phys_id.get((a.id, 0))
        if c is not None:
            r_inc[a.tail] = max(r_inc.get(a.tail, 1), len(feeders[c]))

    return NetworkGrid(
        network=network,
        paths=list(paths),
        dx=float(dx),
        offsets=offsets,
        phys=phys,
        phys_arc=phys_arc,
        ghost_up=ghost_up,
        ghost_down=ghost_down,
        ghost_phys=ghost_phys,
        prev=prev,
        next=nxt,
        junction_cells=junction_cells,
        r_inc=r_inc,
        _path_pos={p.id: i for i, p in enumerate(paths)},
    )


def _omega_ext(grid: NetworkGrid, mu_ext: np.ndarray, ext_phys: np.ndarray) -> np.ndarray:
    # bincount accumulates in flat order, i.e. ascending path id
    per_phys = np.bincount(ext_phys, weights=mu_ext, minlength=grid.n_phys + grid.n_ghosts)
    return per_phys[ext_phys]


def accumulate_omega(grid: NetworkGrid, field: DensityField) -> np.ndarray:
    """Total density at every flat path cell, identical across aliases."""
    if field.mu.shape != (grid.n_cells,) or field.ghosts.shape != (grid.n_ghosts,):
        raise ValueError("density field does not match grid")
    return _omega_ext(grid, field.ext, grid.ext_phys)[: grid.n_cells]


def phys_omega(grid: NetworkGrid, field: DensityField) -> np.ndarray:
    """Total density per physical cell (ghosts excluded)."""
    return np.bincount(grid.phys, weights=field.mu, minlength=grid.n_phys)


@dataclass
class AdmissibilityReport:
    max_omega: float
    offenders: list[tuple[int, int, float]]  # (path id, local index, omega)

    @property
    def admissible(self) -> bool:
        return not self.offenders


def check_admissible(grid: NetworkGrid, field: DensityField, rho_max: float = 1.0) -> AdmissibilityReport:
    omega = accumulate_omega(grid, field)
    max_omega = float(omega.max()) if omega.size else 0.0
    offenders = []
    for p in grid.paths:
        s = grid.cells(p.id)
        for k in np.flatnonzero(omega[s] > rho_max + ADMISSIBILITY_TOL):
            offenders.append((p.id, int(k), float(omega[s][k])))
    return AdmissibilityReport(max_omega, offenders)


def turning_fractions(grid: NetworkGrid, field: DensityField) -> np.ndarray:
    """pi^p = mu^p / omega per flat cell, with 0 where omega vanishes."""
    omega = accumulate_omega(grid, field)
    out = np.zeros_like(field.mu)
    np.divide(field.mu, omega, out=out, where=omega > 0)
    return out
