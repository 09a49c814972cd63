"""Stationary states of the scheme at a merge (two incoming roads, one outgoing).

The boundary data are the densities ``u_l``, ``v_l`` entering the two incoming
roads and the total density ``beta`` imposed downstream. The analysis works on
the three-unknown recursion for the last incoming cells ``x``, ``y`` and the
first outgoing cell ``z``:

    x <- x - lam * (G(x, z) - G(u_l, x))
    y <- y - lam * (G(y, z) - G(v_l, y))
    z <- z - lam * (G(z, beta) - G(x, z) - G(y, z))
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .flux import FluxModel

REGION_TOL = 1e-12


class UnsupportedRegimeError(ValueError):
    """Boundary data outside the regime covered by the merge analysis."""


class RegionBoundaryError(UnsupportedRegimeError):
    """Boundary data on a region interface, where stationary states are not isolated."""


class Region(str, enum.Enum):
    A = "A"  # no queue
    B = "B"  # queue on the first incoming road
    B_PRIME = "B'"  # queue on the second incoming road
    C = "C"  # queues on both incoming roads
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class MergeBoundary:
    u_l: float
    v_l: float
    beta: float
    beta1: float | None = None
    beta2: float | None = None

    @classmethod
    def from_components(cls, u_l: float, v_l: float, beta1: float, beta2: float) -> MergeBoundary:
        return cls(u_l, v_l, beta1 + beta2, beta1, beta2)

    def validate(self, model: FluxModel) -> None:
        s, rmax = model.sigma, model.rho_max
        if not (0 < self.u_l < s and 0 < self.v_l < s):
            raise UnsupportedRegimeError(
                f"incoming densities must lie in (0, {s}); got u_l={self.u_l}, v_l={self.v_l}"
            )
        if not (s <= self.beta < rmax):
            raise UnsupportedRegimeError(f"beta must lie in ({s}, {rmax}); got {self.beta}")

    def swapped(self) -> MergeBoundary:
        return MergeBoundary(self.v_l, self.u_l, self.beta, self.beta2, self.beta1)


@dataclass(frozen=True)
class StationaryMergeSolution:
    region: Region
    mu1_Jm1: float
    mu2_Jm1: float
    omega_J: float
    mu1_J: float
    mu2_J: float

    @property
    def triplet(self) -> tuple[float, float, float]:
        return (self.mu1_Jm1, self.mu2_Jm1, self.omega_J)


@dataclass(frozen=True)
class BufferFluxes:
    gamma_in: float
    gamma_out: float


def classify_region(model: FluxModel, b: MergeBoundary, tol: float = REGION_TOL) -> Region:
    b.validate(model)
    if abs(b.beta - model.sigma) <= tol:
        return Region.BOUNDARY
    fu, fv, fb = model.f(b.u_l), model.f(b.v_l), model.f(b.beta)
    excess = fu + fv - fb
    if abs(excess) <= tol:
        return Region.BOUNDARY
    if excess < 0:
        return Region.A
    half = 0.5 * fb
    if fv < half - tol:
        return Region.B
    if fu < half - tol:
        return Region.B_PRIME
    if fu > half + tol and fv > half + tol:
        return Region.C
    return Region.BOUNDARY


def stationary_merge(model: FluxModel, b: MergeBoundary) -> StationaryMergeSolution:
    """The unique stationary triplet and the split of cell J between the two paths."""
    region = classify_region(model, b)
    if region is Region.BOUNDARY:
        raise RegionBoundaryError(
            f"boundary data {b} lie on a region interface: the stationary set is a "
            "continuum (or beta equals sigma) and is not resolved"
        )
    if region is Region.B_PRIME:
        s = stationary_merge(model, b.swapped())
        return StationaryMergeSolution(
            Region.B_PRIME, s.mu2_Jm1, s.mu1_Jm1, s.omega_J, s.mu2_J, s.mu1_J
        )
    fu, fv, fb = model.f(b.u_l), model.f(b.v_l), model.f(b.beta)
    if region is Region.A:
        z = model.solve_level(fu + fv, "lower")
        x, y = b.u_l, b.v_l
        mu1 = z * fu / (fu + fv)
    elif region is Region.B:
        z = model.solve_level(fb - fv, "upper")
        x, y = z, b.v_l
        mu1 = z * (fb - fv) / fb
    else:
        z = model.solve_level(0.5 * fb, "upper")
        x = y = z
        mu1 = 0.5 * z
    return StationaryMergeSolution(region, x, y, z, mu1, z - mu1)


def merge_recursion(model: FluxModel, b: MergeBoundary, lam: float, x: float, y: float, z: float):
    """One step of the three-cell merge recursion."""
    G = model.godunov
    gxz, gyz = G(x, z), G(y, z)
    return (
        x - lam * (gxz - G(b.u_l, x)),
        y - lam * (gyz - G(b.v_l, y)),
        z - lam * (G(z, b.beta) - gxz - gyz),
    )


def stability_eigenvalues(model: FluxModel, solution: StationaryMergeSolution, lam: float):
    """Eigenvalues of the linearised merge recursion at a stationary triplet.

    The Jacobians are triangular in every region, so the eigenvalues are the
    diagonal entries.
    """
    x, y, z = solution.triplet
    dx, dy, dz = model.df(x), model.df(y), model.df(z)
    region = solution.region
    if region is Region.A:
        return (1 - lam * dx, 1 - lam * dy, 1 - lam * dz)
    if region is Region.B:
        return (1 + lam * dx, 1 - lam * dy, 1 + lam * dz)
    if region is Region.B_PRIME:
        return (1 - lam * dx, 1 + lam * dy, 1 + lam * dz)
    if region is Region.C:
        return (1 + lam * dx, 1 + lam * dy, 1 + 2 * lam * dz)
    raise RegionBoundaryError("no isolated stationary point on a region boundary")


def buffer_fluxes(model: FluxModel, omega_J, omega_Jp1, mu1_Jm1, mu2_Jm1) -> BufferFluxes:
    """Inflow into and outflow out of cell J read as a buffer."""
    d, s = model.demand, model.supply
    sup_J = s(omega_J)
    gamma_out = min(d(omega_J), s(omega_Jp1))
    gamma_in = min(d(mu1_Jm1), sup_J) + min(d(mu2_Jm1), sup_J)
    return BufferFluxes(float(gamma_in), float(gamma_out))


def buffer_step(model: FluxModel, omega_J, omega_Jp1, mu1_Jm1, mu2_Jm1, lam: float) -> float:
    bf = buffer_fluxes(model, omega_J, omega_Jp1, mu1_Jm1, mu2_Jm1)
    return omega_J + lam * (bf.gamma_in - bf.gamma_out)
