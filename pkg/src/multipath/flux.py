"""Concave flux functions and the Godunov numerical flux.

A :class:`FluxModel` is either the quadratic ``f(rho) = scale * rho * (rho_max - rho)``
or a tabulated concave flux interpolated with a monotone cubic (PCHIP). All
evaluation functions accept scalars or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
from scipy.interpolate import PchipInterpolator

# densities this far outside [0, rho_max] are clamped silently
CLAMP_TOL = 1e-12
# absolute tolerance on densities for bisection
ROOT_TOL = 1e-12

Branch = Literal["lower", "upper"]


class FluxDomainError(ValueError):
    """A density outside [0, rho_max] was passed to a flux function."""


class InfeasibleLevelError(ValueError):
    """Requested flux level exceeds the capacity f(sigma)."""


@dataclass(frozen=True)
class FluxModel:
    """A strictly concave flux on [0, rho_max].

    Use :meth:`quadratic` or :meth:`tabulated` to build one.
    """

    rho_max: float
    sigma: float
    kind: Literal["quadratic", "tabulated"]
    scale: float = 1.0
    grid: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    _interp: PchipInterpolator | None = field(default=None, repr=False, compare=False)
    _dinterp: object = field(default=None, repr=False, compare=False)

    @classmethod
    def quadratic(cls, rho_max: float = 1.0, scale: float = 1.0) -> FluxModel:
        if not rho_max > 0:
            raise ValueError(f"rho_max must be positive, got {rho_max}")
        if not scale > 0:
            raise ValueError(f"scale must be positive, got {scale}")
        return cls(rho_max=float(rho_max), sigma=0.5 * rho_max, kind="quadratic", scale=float(scale))

    @classmethod
    def tabulated(cls, grid, values) -> FluxModel:
        """Concave flux through the samples ``(grid[i], values[i])``.

        The grid must start at 0 and end at rho_max, values must vanish at both
        ends and the sample second differences must be strictly negative. The
        critical density is the sample with the largest value; PCHIP puts a
        zero slope there so it stays the exact maximiser of the interpolant.
        """
        g = np.asarray(grid, dtype=float)
        v = np.asarray(values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.size < 3:
            raise ValueError("tabulated flux needs matching 1-d grid/values with at least 3 samples")
        if g[0] != 0.0 or np.any(np.diff(g) <= 0):
            raise ValueError("tabulated grid must start at 0 and be strictly increasing")
        if abs(v[0]) > CLAMP_TOL or abs(v[-1]) > CLAMP_TOL:
            raise ValueError("tabulated flux must vanish at 0 and rho_max")
        slopes = np.diff(v) / np.diff(g)
        if np.any(np.diff(slopes) >= 0):
            raise ValueError("tabulated flux samples are not strictly concave")
        v = v.copy()
        v[0] = v[-1] = 0.0
        k = int(np.argmax(v))
        if k == 0 or k == g.size - 1:
            raise ValueError("tabulated flux maximum must be interior")
        interp = PchipInterpolator(g, v, extrapolate=False)
        return cls(
            rho_max=float(g[-1]),
            sigma=float(g[k]),
            kind="tabulated",
            grid=tuple(g.tolist()),
            values=tuple(v.tolist()),
            _interp=interp,
            _dinterp=interp.derivative(),
        )

    # -- domain handling -------------------------------------------------

    def check(self, rho):
        """Return ``rho`` clamped to [0, rho_max], raising on real violations."""
        if isinstance(rho, (float, int)):
            r = float(rho)
            if not -CLAMP_TOL <= r <= self.rho_max + CLAMP_TOL:
                raise FluxDomainError(f"density {r!r} outside [0, {self.rho_max}]")
            return min(max(r, 0.0), self.rho_max)
        r = np.asarray(rho, dtype=float)
        if r.size == 0:
            return r
        lo, hi = r.min(), r.max()
        # written so that NaN fails the test
        if not (lo >= -CLAMP_TOL and hi <= self.rho_max + CLAMP_TOL):
            bad = ~((r >= -CLAMP_TOL) & (r <= self.rho_max + CLAMP_TOL))
            raise FluxDomainError(f"density {r[bad].flat[0]!r} outside [0, {self.rho_max}]")
        if lo < 0.0 or hi > self.rho_max:
            r = np.clip(r, 0.0, self.rho_max)
        return r if r.ndim else float(r)

    # -- evaluation ------------------------------------------------------

    def f(self, rho):
        return self._f(self.check(rho))

    def _f(self, r):
        # r already checked
        if self.kind == "quadratic":
            return self.scale * r * (self.rho_max - r)
        out = self._interp(r)
        return out if np.ndim(out) else float(out)

    def df(self, rho):
        """f'(rho); at 0 and rho_max the one-sided derivative."""
        r = self.check(rho)
        if self.kind == "quadratic":
            return self.scale * (self.rho_max - 2.0 * r)
        out = self._dinterp(r)
        return out if np.ndim(out) else float(out)

    @cached_property
    def capacity(self) -> float:
        """f(sigma)."""
        return self.f(self.sigma)

    def max_speed(self, samples: int = 10001) -> float:
        """sup |f'| estimated on a dense grid including both endpoints."""
        rho = np.linspace(0.0, self.rho_max, samples)
        return float(np.max(np.abs(self.df(rho))))

    # -- inverse problems ------------------------------------------------

    def solve_level(self, level: float, branch: Branch) -> float:
        """The unique density on ``branch`` of sigma with f(rho) = level."""
        if branch not in ("lower", "upper"):
            raise ValueError(f"branch must be 'lower' or 'upper', got {branch!r}")
        cap = self.capacity
        if level > cap + CLAMP_TOL:
            raise InfeasibleLevelError(f"flux level {level} exceeds capacity {cap}")
        if level < -CLAMP_TOL:
            raise InfeasibleLevelError(f"flux level {level} is negative")
        level = min(max(level, 0.0), cap)
        if self.kind == "quadratic":
            disc = max(self.rho_max**2 - 4.0 * level / self.scale, 0.0)
            root = 0.5 * np.sqrt(disc)
            return float(self.sigma - root if branch == "lower" else self.sigma + root)
        if branch == "lower":
            lo, hi = 0.0, self.sigma  # f increasing
            increasing = True
        else:
            lo, hi = self.sigma, self.rho_max
            increasing = False
        while hi - lo > ROOT_TOL:
            mid = 0.5 * (lo + hi)
            below = self.f(mid) < level
            if below == increasing:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def sharp(self, rho):
        """The companion density: other side of sigma, same flux value.

        ``sharp(sigma) == sigma``; the endpoints 0 and rho_max swap.
        """
        r = self.check(rho)
        if self.kind == "quadratic":
            return self.rho_max - r
        if np.ndim(r):
            return np.array([self.sharp(float(x)) for x in r])
        if r == self.sigma:
            return r
        branch = "upper" if r < self.sigma else "lower"
        return self.solve_level(self.f(r), branch)

    # -- Godunov flux ----------------------------------------------------

    def demand(self, rho):
        """Maximum flow a cell at density rho can send: G(rho, sigma)."""
        r = self.check(rho)
        return np.where(r <= self.sigma, self.f(r), self.capacity) if np.ndim(r) else (
            self.f(r) if r <= self.sigma else self.capacity
        )

    def supply(self, rho):
        """Maximum flow a cell at density rho can accept: G(sigma, rho)."""
        r = self.check(rho)
        return np.where(r <= self.sigma, self.capacity, self.f(r)) if np.ndim(r) else (
            self.capacity if r <= self.sigma else self.f(r)
        )

    def godunov(self, rho_l, rho_r):
        """Godunov flux G(rho_l, rho_r), case by case."""
        a = self.check(rho_l)
        b = self.check(rho_r)
        fa, fb = self._f(a), self._f(b)
        if np.ndim(a) == 0 and np.ndim(b) == 0:
            if a <= b:
                return min(fa, fb)
            if a < self.sigma:
                return fa
            if b > self.sigma:
                return fb
            return self.capacity
        a, b = np.broadcast_arrays(a, b)
        fa, fb = np.broadcast_arrays(fa, fb)
        return np.where(
            a <= b,
            np.minimum(fa, fb),
            np.where(a < self.sigma, fa, np.where(b > self.sigma, fb, self.capacity)),
        )


def flux_eval(model: FluxModel, rho):
    return model.f(rho)


def flux_deriv(model: FluxModel, rho):
    return model.df(rho)


def sharp(model: FluxModel, rho):
    return model.sharp(rho)


def solve_flux_level(model: FluxModel, level: float, branch: Branch) -> float:
    return model.solve_level(level, branch)


def godunov_flux(model: FluxModel, rho_left, rho_right):
    return model.godunov(rho_left, rho_right)


def demand(model: FluxModel, rho):
    return model.demand(rho)


def supply(model: FluxModel, rho):
    return model.supply(rho)
