"""Godunov-type update for the multi-path model and its time-stepping driver."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .flux import FluxModel
from .network import ADMISSIBILITY_TOL, DensityField, NetworkGrid, _omega_ext

log = logging.getLogger(__name__)


class AdmissibilityError(RuntimeError):
    """Total density left [0, rho_max]; the time step breaks the junction CFL bound."""


class CFLError(ValueError):
    """No stable time step can be derived."""


@dataclass
class SchemeConfig:
    """Time-stepping parameters.

    Either ``dt`` is given explicitly or it is derived as
    ``cfl_safety * max_stable_dt``.
    """

    t_final: float = 0.0
    dt: float | None = None
    cfl_safety: float = 0.9
    steady_tolerance: float = 1e-12
    max_steps: int = 1_000_000
    check_every_step: bool = True

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.t_final < 0:
            raise ValueError("t_final must be non-negative")

    def resolve_dt(self, grid: NetworkGrid, model: FluxModel) -> float:
        if self.dt is not None:
            return float(self.dt)
        return self.cfl_safety * max_stable_dt(grid, model)


def max_stable_dt(grid: NetworkGrid, model: FluxModel) -> float:
    """Largest dt with ``r_inc * dt/dx * sup|f'| <= 1`` over every junction."""
    speed = model.max_speed()
    if speed <= 0:
        raise CFLError("flux has zero characteristic speed everywhere")
    return grid.dx / (grid.max_r_inc * speed)


@dataclass
class SimState:
    field: DensityField
    t: float = 0.0
    omega: np.ndarray | None = None
    mass0: np.ndarray | None = None
    inflow: np.ndarray | None = None  # cumulative boundary mass entering, per path
    outflow: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.field.n


class _Stencil:
    """Precomputed index arrays for one grid; the step kernel works on these."""

    def __init__(self, grid: NetworkGrid):
        n = grid.n_cells
        self.n = n
        self.ext_phys = grid.ext_phys
        up = [(n + int(g), int(grid.offsets[i])) for i, g in enumerate(grid.ghost_up) if g >= 0]
        # a face flux is owned by its sending entry: every real cell plus upstream ghosts
        self.senders = np.concatenate([np.arange(n), [u for u, _ in up]]).astype(np.intp)
        self.receivers = np.concatenate([grid.next, [c for _, c in up]]).astype(np.intp)
        slot = np.full(n + grid.n_ghosts, -1, dtype=np.intp)
        slot[self.senders] = np.arange(len(self.senders))
        # incoming flux of cell c is the flux owned by prev[c]
        self.in_slot = slot[grid.prev]


def _stencil(grid: NetworkGrid) -> _Stencil:
    st = getattr(grid, "_stencil_cache", None)
    if st is None:
        st = _Stencil(grid)
        grid._stencil_cache = st
    return st


def face_fluxes(grid: NetworkGrid, model: FluxModel, field: DensityField):
    """Per-path fluxes across every face.

    Returns ``(omega_ext, flux)`` where ``flux[i]`` is the flux of the sender
    ``st.senders[i]`` into its downstream neighbour, i.e.
    ``(mu/omega)(sender) * G(omega(sender), omega(receiver))``.
    """
    st = _stencil(grid)
    mu_ext = np.concatenate([field.mu, field.ghosts])
    omega = _omega_ext(grid, mu_ext, st.ext_phys)
    s, r = st.senders, st.receivers
    ratio = np.zeros(len(s))
    np.divide(mu_ext[s], omega[s], out=ratio, where=omega[s] > 0)
    g = model.godunov(omega[s], omega[r])
    return omega, ratio * g


def step(state: SimState, grid: NetworkGrid, model: FluxModel, dt: float, check: bool = True) -> SimState:
    """Advance every path cell by one time step of size ``dt``.

    Boundary ghosts are held fixed. ``omega`` from time n is used for the whole
    update; the new ``omega`` is cached on the returned state.
    """
    st = _stencil(grid)
    f = state.field
    lam = dt / grid.dx
    omega, flux = face_fluxes(grid, model, f)
    n = st.n
    out_flux = flux[:n]
    in_flux = flux[st.in_slot]
    mu_new = f.mu - lam * (out_flux - in_flux)

    new_field = DensityField(mu_new, f.ghosts, f.n + 1)
    new_omega = _omega_ext(grid, np.concatenate([mu_new, f.ghosts]), st.ext_phys)[:n]
    if check:
        _assert_admissible(grid, model, new_field, new_omega)

    inflow = state.inflow.copy() if state.inflow is not None else np.zeros(len(grid.paths))
    outflow = state.outflow.copy() if state.outflow is not None else np.zeros(len(grid.paths))
    k_up = n  # fluxes of the upstream ghosts follow the cell fluxes
    for i, g in enumerate(grid.ghost_up):
        if g >= 0:
            inflow[i] += dt * flux[k_up]
            k_up += 1
        if grid.ghost_down[i] >= 0:
            outflow[i] += dt * out_flux[grid.offsets[i + 1] - 1]
    return SimState(
        field=new_field,
        t=state.t + dt,
        omega=new_omega,
        mass0=state.mass0 if state.mass0 is not None else total_mass(state, grid)[0],
        inflow=inflow,
        outflow=outflow,
    )


def _assert_admissible(grid, model, field, omega):
    top = float(omega.max()) if omega.size else 0.0
    low = float(field.mu.min()) if field.mu.size else 0.0
    if top > model.rho_max + ADMISSIBILITY_TOL or low < -ADMISSIBILITY_TOL:
        k = int(np.argmax(omega)) if top > model.rho_max + ADMISSIBILITY_TOL else int(np.argmin(field.mu))
        p = int(np.searchsorted(grid.offsets, k, side="right")) - 1
        pid = grid.paths[p].id
        raise AdmissibilityError(
            f"step {field.n}: density out of range at path {pid} cell {k - grid.offsets[p]} "
            f"(max omega {top:.6g}, min mu {low:.6g}); dt violates the junction CFL "
            f"condition r_inc*dt/dx*sup|f'| <= 1 (r_inc={grid.max_r_inc})"
        )


def initial_state(grid: NetworkGrid, field: DensityField) -> SimState:
    st = SimState(field=field.copy())
    st.omega = _omega_ext(grid, field.ext, grid.ext_phys)[: grid.n_cells]
    st.mass0 = total_mass(st, grid)[0]
    st.inflow = np.zeros(len(grid.paths))
    st.outflow = np.zeros(len(grid.paths))
    return st


def total_mass(state: SimState, grid: NetworkGrid) -> tuple[np.ndarray, float]:
    """Per-path mass ``sum_k mu_k dx`` and the global total."""
    per_path = np.add.reduceat(state.field.mu, grid.offsets[:-1]) * grid.dx
    return per_path, float(per_path.sum())


def bookkept_mass(state: SimState) -> np.ndarray:
    """Initial mass plus cumulative boundary inflow minus outflow."""
    return state.mass0 + state.inflow - state.outflow


@dataclass
class Snapshot:
    t: float
    n: int
    field: DensityField


@dataclass
class Trajectory:
    snapshots: list[Snapshot]
    mass: list[float] = field(default_factory=list)  # global mass after every step
    final: SimState | None = None


def run(
    state: SimState,
    grid: NetworkGrid,
    model: FluxModel,
    config: SchemeConfig,
    snapshot_times: Iterable[float] = (),
) -> Trajectory:
    """Step to ``config.t_final``, recording snapshots at the requested times.

    The step that would overshoot a snapshot time or ``t_final`` is shortened
    to land on it exactly. A snapshot at the initial time is always recorded.
    """
    dt = config.resolve_dt(grid, model)
    targets = sorted({float(t) for t in snapshot_times if state.t < t <= config.t_final})
    if config.t_final > state.t and (not targets or targets[-1] < config.t_final):
        targets.append(config.t_final)
    wanted = {float(t) for t in snapshot_times} | {config.t_final}
    traj = Trajectory(snapshots=[Snapshot(state.t, state.n, state.field.copy())])
    traj.mass.append(total_mass(state, grid)[1])
    for target in targets:
        while state.t < target - 1e-12 * max(1.0, target):
            h = min(dt, target - state.t)
            state = step(state, grid, model, h, check=config.check_every_step)
            traj.mass.append(total_mass(state, grid)[1])
        state.t = target
        if target in wanted:
            traj.snapshots.append(Snapshot(state.t, state.n, state.field.copy()))
    traj.final = state
    return traj


@dataclass
class SteadyResult:
    state: SimState
    steps: int
    converged: bool
    last_change: float


def run_to_steady(state: SimState, grid: NetworkGrid, model: FluxModel, config: SchemeConfig) -> SteadyResult:
    """Iterate until the max per-cell change in one step is below the tolerance.

    Reaching ``config.max_steps`` is reported through ``converged=False``.
    """
    dt = config.resolve_dt(grid, model)
    change = float("inf")
    for k in range(config.max_steps):
        nxt = step(state, grid, model, dt, check=config.check_every_step)
        change = float(np.max(np.abs(nxt.field.mu - state.field.mu))) if grid.n_cells else 0.0
        if change < config.steady_tolerance:
            # the last step moved nothing measurable; report the pre-step state
            return SteadyResult(state, k, True, change)
        state = nxt
    log.warning("run_to_steady hit the step cap (%d) with change %.3g", config.max_steps, change)
    return SteadyResult(state, config.max_steps, False, change)
