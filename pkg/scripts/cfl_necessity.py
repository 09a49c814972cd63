"""Why the time step must shrink with the number of roads entering a junction.

Usage: python scripts/cfl_necessity.py

On a one-cell-per-arc merge, both feeders sit at the critical density and the
exit is blocked. The step dt = dx / sup|f'| is stable on a single road, but
the junction cell then receives two full fluxes in one step and overflows.
Halving dt (the junction bound with two incoming roads) keeps it admissible.
"""

from multipath import Arc, FluxModel, Network, Path, build_grid, initial_state, max_stable_dt, step


def main():
    model = FluxModel.quadratic()
    net = Network(["n1", "n2", "J", "n3"],
                  [Arc("a1", "n1", "J", 1.0), Arc("a2", "n2", "J", 1.0), Arc("a3", "J", "n3", 1.0)])
    grid = build_grid(net, [Path(1, ("a1", "a3")), Path(2, ("a2", "a3"))], 1.0)
    field = grid.field({1: [0.5, 0.6], 2: [0.5, 0.0]}, {1: (0.5, 0.5), 2: (0.5, 0.5)})
    state = initial_state(grid, field)
    J = grid.junction_index("J", 1)
    single_road = grid.dx / model.max_speed()
    junction = max_stable_dt(grid, model)
    print(f"r_inc at J: {grid.r_inc['J']}")
    print(f"omega_J at t=0: {state.omega[J]:.4f}")
    for label, dt in (("single-road bound", single_road), ("junction bound", junction)):
        nxt = step(state, grid, model, dt, check=False)
        flag = "OVERFLOW" if nxt.omega[J] > model.rho_max else "ok"
        print(f"{label:18} dt={dt:.3f}: omega_J after one step = {nxt.omega[J]:.4f}  {flag}")


if __name__ == "__main__":
    main()
