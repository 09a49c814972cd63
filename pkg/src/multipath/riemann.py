"""Riemann problems for concave fluxes, with equal or vertically shifted fluxes.

The centrepiece is :func:`solve_modified_merge`, which builds the wave
pattern of the merge seen as three half-line problems glued at a junction
cell ``[0, dx]`` whose flux is ``f + C(x, t)``. The construction is staged:
initial junction waves, their interaction inside the cell, and the waves
re-emitted when the interaction wave hits a cell edge.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .flux import FluxModel
from .junction import MergeBoundary, Region, RegionBoundaryError, classify_region

SHIFT_TOL = 1e-12


class UnsupportedWaveError(ValueError):
    """Equal characteristic slopes with different flux values: not a defined wave."""


class ConstructionError(RuntimeError):
    """A wave in the merge construction does not have the sign the construction needs."""


class WaveKind(str, enum.Enum):
    SHOCK = "shock"
    RAREFACTION = "rarefaction"
    NONE = "none"


class WaveSign(str, enum.Enum):
    NEGATIVE = "negative"
    ZERO = "zero"
    POSITIVE = "positive"
    SPANNING = "spanning"


@dataclass(frozen=True)
class ShiftedFlux:
    """``h(rho) = f(rho) + shift`` for a constant ``0 <= shift <= f(sigma)``."""

    base: FluxModel
    shift: float = 0.0

    def __post_init__(self):
        cap = self.base.capacity
        if not (-SHIFT_TOL <= self.shift <= cap + SHIFT_TOL):
            raise ValueError(f"flux shift {self.shift} outside [0, {cap}]")

    def __call__(self, rho):
        return self.base.f(rho) + self.shift

    def deriv(self, rho):
        return self.base.df(rho)

    def demand(self, rho):
        return self.base.demand(rho) + self.shift


@dataclass(frozen=True)
class Wave:
    kind: WaveKind
    sign: WaveSign
    left_flux: ShiftedFlux
    left: float
    right_flux: ShiftedFlux
    right: float
    speed: float | None = None  # shock speed
    speeds: tuple[float, float] | None = None  # rarefaction edge speeds


def _shock_sign(speed: float) -> WaveSign:
    if speed > 0:
        return WaveSign.POSITIVE
    if speed < 0:
        return WaveSign.NEGATIVE
    return WaveSign.ZERO


def two_flux_wave(h_l: ShiftedFlux, rho_l: float, h_r: ShiftedFlux, rho_r: float) -> Wave:
    """The single wave between ``(h_l, rho_l)`` on the left and ``(h_r, rho_r)`` on the right."""
    rho_l = h_l.base.check(rho_l)
    rho_r = h_r.base.check(rho_r)
    sl, sr = h_l.deriv(rho_l), h_r.deriv(rho_r)
    # both sides share f', which is strictly decreasing, so comparing slopes is
    # comparing densities; densities avoid rounding ties near equal states
    if rho_l < rho_r:
        speed = (h_r(rho_r) - h_l(rho_l)) / (rho_r - rho_l)
        return Wave(WaveKind.SHOCK, _shock_sign(speed), h_l, rho_l, h_r, rho_r, speed=speed)
    if rho_l > rho_r:
        if sl > 0:
            sign = WaveSign.POSITIVE
        elif sr < 0:
            sign = WaveSign.NEGATIVE
        else:
            sign = WaveSign.SPANNING
        return Wave(WaveKind.RAREFACTION, sign, h_l, rho_l, h_r, rho_r, speeds=(sl, sr))
    if abs(h_l(rho_l) - h_r(rho_r)) <= SHIFT_TOL:
        return Wave(WaveKind.NONE, WaveSign.ZERO, h_l, rho_l, h_r, rho_r, speed=0.0)
    raise UnsupportedWaveError(
        f"equal characteristic slopes with flux values {h_l(rho_l)} != {h_r(rho_r)}"
    )


def solve_riemann_classical(model: FluxModel, rho_l: float, rho_r: float) -> Wave:
    h = ShiftedFlux(model, 0.0)
    return two_flux_wave(h, rho_l, h, rho_r)


def rarefaction_profile(model: FluxModel, xi: float) -> float:
    """Density inside a rarefaction fan at self-similar coordinate ``xi = x/t``.

    Solves f'(rho) = xi; f' is strictly decreasing so bisection always brackets.
    """
    lo, hi = 0.0, model.rho_max
    if xi >= model.df(lo):
        return lo
    if xi <= model.df(hi):
        return hi
    if model.kind == "quadratic":
        return 0.5 * (model.rho_max - xi / model.scale)
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if model.df(mid) > xi:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def attainable_negative(model: FluxModel, rho_l: float) -> tuple[float, float]:
    """Right states reachable from ``rho_l`` through waves of non-positive speed."""
    rho_l = model.check(rho_l)
    if rho_l <= model.sigma:
        return (model.sharp(rho_l), model.rho_max)
    return (model.sigma, model.rho_max)


def attainable_positive(model: FluxModel, rho_r: float) -> tuple[float, float]:
    """Left states reachable from ``rho_r`` through waves of non-negative speed."""
    rho_r = model.check(rho_r)
    if rho_r <= model.sigma:
        return (0.0, model.sigma)
    return (0.0, model.sharp(rho_r))


# -- modified merge problem ---------------------------------------------------


@dataclass
class LoggedWave:
    """A wave of the merge construction, with where and why it was created.

    ``claim`` is the kind/sign the construction requires; :meth:`verify`
    recomputes the wave from its end states and compares.
    """

    label: str
    stage: int
    event: str
    x0: float
    t0: float
    edge: str  # "0-", "0+", "dx-", "dx+" or "interior"
    wave: Wave
    claim: tuple[WaveKind, WaveSign | None]

    def verify(self) -> bool:
        w = two_flux_wave(self.wave.left_flux, self.wave.left, self.wave.right_flux, self.wave.right)
        kind, sign = self.claim
        return w.kind == kind and (sign is None or w.sign == sign)

    def position(self, t: float) -> float:
        return self.x0 + (self.wave.speed or 0.0) * (t - self.t0)


@dataclass(frozen=True)
class StageTraces:
    """Boundary traces valid during ``[t_start, t_end)``."""

    stage: int
    t_start: float
    t_end: float
    u: float  # u(0-)
    v: float  # v(0-)
    z0: float  # z(0+)
    h0: ShiftedFlux
    zdx: float  # z(dx-)
    hdx: ShiftedFlux
    w: float  # w(dx+)


@dataclass
class MergeRiemannSolution:
    region: Region
    quadruplet: tuple[float, float, float, float]
    waves: list[LoggedWave]
    stages: list[StageTraces]
    dx: float
    interaction: tuple[float, float]  # (x, t) where L2 meets L3
    t_hit: float  # when L5 reaches a cell edge
    _pieces: list = field(default_factory=list, repr=False)

    def wave(self, label: str) -> LoggedWave:
        for w in self.waves:
            if w.label == label:
                return w
        raise KeyError(label)

    def flux_shift(self, x: float, t: float) -> float:
        """The constant C(x, t) of the junction-cell flux ``f + C``."""
        if not 0 <= x <= self.dx:
            raise ValueError(f"x={x} outside the junction cell [0, {self.dx}]")
        for stage_end, pieces in self._pieces:
            if t < stage_end:
                break
        for right_edge, shift in pieces:
            if right_edge is None or x < right_edge(t):
                return shift
        return pieces[-1][1]

    def flux_residuals(self) -> list[tuple[float, float]]:
        """Per stage: |inflow mismatch at x=0| and |outflow mismatch at x=dx|."""
        f = self.waves[0].wave.left_flux.base.f
        out = []
        for s in self.stages:
            r_in = f(s.u) + f(s.v) - s.h0(s.z0)
            r_out = s.hdx(s.zdx) - f(s.w)
            out.append((abs(r_in), abs(r_out)))
        return out

    def junction_flux_residuals(self) -> list[float]:
        """Max mismatch per stage between the traces' fluxes and the demand/supply minima."""
        model = self.waves[0].wave.left_flux.base
        d, sup, f = model.demand, model.supply, model.f
        out = []
        for s in self.stages:
            in_u = min(d(s.u), sup(s.z0))
            in_v = min(d(s.v), sup(s.z0))
            out_w = min(s.hdx.demand(s.zdx), sup(s.w))
            out.append(
                max(
                    abs(in_u - f(s.u)),
                    abs(in_v - f(s.v)),
                    abs(in_u + in_v - s.h0(s.z0)),
                    abs(out_w - s.hdx(s.zdx)),
                    abs(out_w - f(s.w)),
                )
            )
        return out

    def sign_discipline(self) -> bool:
        """Created waves at 0-/dx- move left, those at 0+/dx+ move right."""
        for lw in self.waves:
            if lw.wave.kind is WaveKind.NONE:
                continue
            if lw.edge in ("0-", "dx-") and lw.wave.sign is not WaveSign.NEGATIVE:
                return False
            if lw.edge in ("0+", "dx+") and lw.wave.sign is not WaveSign.POSITIVE:
                return False
        return True


_SWAP = {"L1u": "L1v", "L1v": "L1u", "L7u": "L7v", "L7v": "L7u"}


def solve_modified_merge(model: FluxModel, u_l: float, v_l: float, w_r: float, dx: float = 1.0) -> MergeRiemannSolution:
    """Wave pattern and asymptotic states of the merge with junction cell ``[0, dx]``.

    The junction cell starts at the critical density with flux ``f + f(sigma)``.
    """
    b = MergeBoundary(u_l, v_l, w_r)
    region = classify_region(model, b)
    if region is Region.BOUNDARY:
        raise RegionBoundaryError(
            f"boundary data {b} lie on a region interface; stationary states are not isolated"
        )
    if region is Region.B_PRIME:
        sol = solve_modified_merge(model, v_l, u_l, w_r, dx)
        for lw in sol.waves:
            lw.label = _SWAP.get(lw.label, lw.label)
        sol.waves.sort(key=lambda lw: (lw.stage, lw.label))
        sol.stages = [
            StageTraces(s.stage, s.t_start, s.t_end, s.v, s.u, s.z0, s.h0, s.zdx, s.hdx, s.w)
            for s in sol.stages
        ]
        qu, qv, qz, qw = sol.quadruplet
        sol.quadruplet = (qv, qu, qz, qw)
        sol.region = Region.B_PRIME
        return sol
    return _MergeBuilder(model, u_l, v_l, w_r, dx, region).build()


class _MergeBuilder:
    def __init__(self, model, u, v, w, dx, region):
        self.m = model
        self.u, self.v, self.w = u, v, w
        self.dx = dx
        self.region = region
        self.waves: list[LoggedWave] = []

    def shifted(self, c):
        return ShiftedFlux(self.m, c)

    def log(self, label, stage, event, x0, t0, edge, wave, kind, sign=None):
        lw = LoggedWave(label, stage, event, x0, t0, edge, wave, (kind, sign))
        if not lw.verify():
            raise ConstructionError(
                f"{label}: expected {kind.value}/{sign.value if sign else '-'}, "
                f"got {wave.kind.value}/{wave.sign.value}"
            )
        self.waves.append(lw)
        return lw

    def build(self) -> MergeRiemannSolution:
        m, u, v, w, dx = self.m, self.u, self.v, self.w, self.dx
        fu, fv, fw = m.f(u), m.f(v), m.f(w)
        f0 = self.shifted(0.0)
        hc = self.shifted(m.capacity)
        zc = m.sigma
        S, N = WaveKind.SHOCK, WaveKind.NONE
        POS, NEG = WaveSign.POSITIVE, WaveSign.NEGATIVE

        # traces just after t=0
        ut, vt, wh = u, v, w
        if self.region is Region.A:
            zh, zt = m.solve_level(fu + fv, "lower"), w
            hh = ht = f0
        elif self.region is Region.B:
            zh, zt = u, m.solve_level(fw - fv, "upper")
            hh = ht = self.shifted(fv)
        else:
            zh, zt = max(u, v), m.solve_level(0.5 * fw, "upper")
            hh, ht = self.shifted(min(fu, fv)), self.shifted(0.5 * fw)

        classical = lambda a, b: two_flux_wave(f0, a, f0, b)
        ev = "initial"
        self.log("L1u", 0, ev, 0.0, 0.0, "0-", classical(u, ut), N)
        self.log("L1v", 0, ev, 0.0, 0.0, "0-", classical(v, vt), N)
        L2 = self.log("L2", 0, ev, 0.0, 0.0, "0+", two_flux_wave(hh, zh, hc, zc), S, POS)
        L3 = self.log("L3", 0, ev, dx, 0.0, "dx-", two_flux_wave(hc, zc, ht, zt), S, NEG)
        self.log("L4", 0, ev, dx, 0.0, "dx+", classical(wh, w), N)

        s2, s3 = L2.wave.speed, L3.wave.speed
        t_star = dx / (s2 - s3)
        x_star = s2 * t_star
        l5_sign = POS if self.region is Region.A else NEG
        L5 = self.log(
            "L5", 1, "L2^L3 interaction", x_star, t_star, "interior",
            two_flux_wave(hh, zh, ht, zt), S, l5_sign,
        )
        s5 = L5.wave.speed
        ev = "boundary re-emission"
        if self.region is Region.A:
            t_hit = t_star + (dx - x_star) / s5
            zt2, wh2, ht2 = zh, zh, hh
            self.log("L6", 2, ev, dx, t_hit, "dx-", two_flux_wave(hh, zh, ht2, zt2), N)
            self.log("L7w", 2, ev, dx, t_hit, "dx+", classical(wh2, w), S, POS)
            final = StageTraces(2, t_hit, float("inf"), ut, vt, zh, hh, zt2, ht2, wh2)
            quad = (ut, vt, zh, wh2)
            last_shift = hh.shift
        else:
            t_hit = t_star - x_star / s5
            if self.region is Region.B:
                ut2 = m.solve_level(fw - fv, "upper")
                vt2 = v
            else:
                ut2 = vt2 = zt
            zh2, hh2 = ut2, ht
            self.log("L6", 2, ev, 0.0, t_hit, "0+", two_flux_wave(hh2, zh2, ht, zt), N)
            self.log("L7u", 2, ev, 0.0, t_hit, "0-", classical(ut, ut2), S, NEG)
            if self.region is Region.B:
                self.log("L7v", 2, ev, 0.0, t_hit, "0-", classical(vt, vt2), N)
            else:
                self.log("L7v", 2, ev, 0.0, t_hit, "0-", classical(vt, vt2), S, NEG)
            final = StageTraces(2, t_hit, float("inf"), ut2, vt2, zh2, hh2, zt, ht, wh)
            quad = (ut2, vt2, zt, wh)
            last_shift = ht.shift

        stages = [
            StageTraces(0, 0.0, t_star, ut, vt, zh, hh, zt, ht, wh),
            StageTraces(1, t_star, t_hit, ut, vt, zh, hh, zt, ht, wh),
            final,
        ]
        # piecewise C(x, t): (stage end, [(right edge as function of t or None, shift)])
        pieces = [
            (t_star, [(L2.position, hh.shift), (L3.position, hc.shift), (None, ht.shift)]),
            (t_hit, [(L5.position, hh.shift), (None, ht.shift)]),
            (float("inf"), [(None, last_shift)]),
        ]
        assert len(stages) - 1 <= 2, "construction must end after two interaction stages"
        return MergeRiemannSolution(
            region=self.region,
            quadruplet=tuple(float(q) for q in quad),
            waves=self.waves,
            stages=stages,
            dx=dx,
            interaction=(x_star, t_star),
            t_hit=t_hit,
            _pieces=pieces,
        )
