import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from multipath import (
    FluxModel,
    MergeBoundary,
    Region,
    RegionBoundaryError,
    UnsupportedRegimeError,
    buffer_fluxes,
    buffer_step,
    classify_region,
    merge_recursion,
    stability_eigenvalues,
    stationary_merge,
)
from oracles import merge_iterate

Q = FluxModel.quadratic()
incoming = st.floats(0.01, 0.49)
outgoing = st.floats(0.51, 0.99)


def separated(b, margin=1e-6):
    fu, fv, fb = Q.f(b.u_l), Q.f(b.v_l), Q.f(b.beta)
    return abs(fu + fv - fb) > margin and abs(fu - fb / 2) > margin and abs(fv - fb / 2) > margin


@pytest.mark.parametrize(
    "u,v,b1,b2,region,triplet,split",
    [
        (0.1, 0.15, 0.3, 0.3, Region.A, (0.1, 0.15, 0.3197224362268005), (0.13229893912833, 0.18742349709847)),
        (0.3, 0.1, 0.35, 0.25, Region.B, (0.816227766016838, 0.1, 0.816227766016838), (0.51014235376052, 0.30608541225631)),
        (0.2, 0.3, 0.3, 0.5, Region.C, (0.912310562561766,) * 3, (0.456155281280883,) * 2),
    ],
)
def test_merge_tests_frozen(u, v, b1, b2, region, triplet, split):
    sol = stationary_merge(Q, MergeBoundary.from_components(u, v, b1, b2))
    assert sol.region is region
    np.testing.assert_allclose(sol.triplet, triplet, atol=1e-12)
    np.testing.assert_allclose((sol.mu1_J, sol.mu2_J), split, atol=1e-12)


def test_classify_examples():
    assert classify_region(Q, MergeBoundary(0.1, 0.15, 0.6)) is Region.A
    assert classify_region(Q, MergeBoundary(0.3, 0.1, 0.6)) is Region.B
    assert classify_region(Q, MergeBoundary(0.1, 0.3, 0.6)) is Region.B_PRIME
    assert classify_region(Q, MergeBoundary(0.2, 0.3, 0.8)) is Region.C
    assert classify_region(Q, MergeBoundary(0.1, 0.1, 0.5)) is Region.BOUNDARY
    # f(u) + f(v) = f(beta) exactly: 0.09 + 0.15 = 0.24 = f(0.6)
    assert classify_region(Q, MergeBoundary(0.1, Q.solve_level(0.15, "lower"), 0.6)) is Region.BOUNDARY


def test_out_of_regime_inputs():
    with pytest.raises(UnsupportedRegimeError):
        classify_region(Q, MergeBoundary(0.6, 0.1, 0.7))
    with pytest.raises(UnsupportedRegimeError):
        classify_region(Q, MergeBoundary(0.1, 0.1, 0.3))
    with pytest.raises(RegionBoundaryError):
        stationary_merge(Q, MergeBoundary(0.1, 0.2, 0.5))


def test_eigenvalues_frozen():
    c = stationary_merge(Q, MergeBoundary(0.2, 0.3, 0.8))
    s = np.sqrt(0.17)  # f'(z) = -2 sqrt(0.17) in case C
    np.testing.assert_allclose(stability_eigenvalues(Q, c, 0.5), (1 - s, 1 - s, 1 - 2 * s), atol=1e-12)


@given(incoming, incoming, outgoing)
def test_stationary_is_fixed_point(u, v, beta):
    b = MergeBoundary(u, v, beta)
    assume(separated(b))
    sol = stationary_merge(Q, b)
    x, y, z = sol.triplet
    nx, ny, nz = merge_recursion(Q, b, 0.5, x, y, z)
    assert (nx, ny, nz) == pytest.approx((x, y, z), abs=1e-13)
    assert sol.mu1_J + sol.mu2_J == pytest.approx(z, abs=1e-15)
    assert 0 <= sol.mu1_J <= z and 0 <= sol.mu2_J <= z


@given(incoming, incoming, outgoing)
def test_swap_symmetry(u, v, beta):
    b = MergeBoundary(u, v, beta)
    assume(separated(b))
    a, s = stationary_merge(Q, b), stationary_merge(Q, b.swapped())
    assert (a.mu1_Jm1, a.mu2_Jm1, a.omega_J) == pytest.approx((s.mu2_Jm1, s.mu1_Jm1, s.omega_J))
    assert (a.mu1_J, a.mu2_J) == pytest.approx((s.mu2_J, s.mu1_J))
    mirror = {Region.B: Region.B_PRIME, Region.B_PRIME: Region.B}
    assert s.region is mirror.get(a.region, a.region)


@given(incoming, incoming, outgoing)
def test_eigenvalues_inside_unit_disk(u, v, beta):
    b = MergeBoundary(u, v, beta)
    assume(separated(b))
    assert max(abs(e) for e in stability_eigenvalues(Q, stationary_merge(Q, b), 0.5)) < 1


@pytest.mark.parametrize("b", [(0.1, 0.15, 0.6), (0.3, 0.1, 0.6), (0.1, 0.3, 0.6), (0.2, 0.3, 0.8), (0.45, 0.4, 0.55)])
def test_matches_iterated_recursion(b):
    sol = stationary_merge(Q, MergeBoundary(*b))
    np.testing.assert_allclose(sol.triplet, merge_iterate(*b, lam=0.5), atol=1e-10)


dens = st.floats(0.0, 1.0)


@given(dens, dens, dens, dens, st.floats(0.0, 0.5))
def test_buffer_step_matches_recursion(x, y, z, beta, lam):
    # the third component of the recursion does not depend on the upstream data
    b = MergeBoundary(0.1, 0.1, beta)
    expected = merge_recursion(Q, b, lam, x, y, z)[2]
    assert buffer_step(Q, z, beta, x, y, lam) == pytest.approx(expected, abs=1e-15)


def test_buffer_fluxes_values():
    bf = buffer_fluxes(Q, 0.6, 1.0, 0.5, 0.5)
    assert bf.gamma_out == 0.0
    assert bf.gamma_in == pytest.approx(0.48)


def test_buffer_examples():
    assert buffer_fluxes(Q, 0.5, 1.0, 0.2, 0.2).gamma_out == 0.0
    assert buffer_fluxes(Q, 0.3, 0.0, 0.5, 0.5).gamma_in == pytest.approx(0.5)
    assert buffer_step(Q, 0.5, 1.0, 0.5, 0.5, 0.25) == pytest.approx(0.625)
    s = stationary_merge(Q, MergeBoundary(0.1, 0.15, 0.6))
    bf = buffer_fluxes(Q, s.omega_J, 0.6, s.mu1_Jm1, s.mu2_Jm1)
    assert bf.gamma_in == pytest.approx(0.2175) and bf.gamma_out == pytest.approx(0.2175)
    assert buffer_step(Q, s.omega_J, 0.6, s.mu1_Jm1, s.mu2_Jm1, 0.5) == pytest.approx(s.omega_J)


@pytest.mark.parametrize("u", [0.05, 0.1, 0.2, 0.3, 0.35])
def test_case_c_split_is_half(u):
    s = stationary_merge(Q, MergeBoundary(u, 0.4, 0.9))
    assert s.region is Region.C and s.mu1_J == s.mu2_J


def test_a_b_interface_limits():
    beta, v = 0.6, 0.1
    # f(u) + f(v) = f(beta) at u = u_star
    u_star = Q.solve_level(Q.f(beta) - Q.f(v), "lower")
    below = stationary_merge(Q, MergeBoundary(u_star - 1e-6, v, beta))
    above = stationary_merge(Q, MergeBoundary(u_star + 1e-6, v, beta))
    assert below.region is Region.A and above.region is Region.B
    # the two one-sided limits are different points, both stationary on the interface
    lim_a = (u_star, v, Q.sharp(beta))
    lim_b = (Q.sharp(u_star), v, Q.sharp(u_star))
    np.testing.assert_allclose(below.triplet, lim_a, atol=1e-4)
    np.testing.assert_allclose(above.triplet, lim_b, atol=1e-4)
    b = MergeBoundary(u_star, v, beta)
    for lim in (lim_a, lim_b):
        assert merge_recursion(Q, b, 0.5, *lim) == pytest.approx(lim, abs=1e-12)
    # what is continuous is the flow through the junction
    assert Q.f(below.omega_J) == pytest.approx(Q.f(beta), abs=1e-6)
    assert Q.f(above.mu1_Jm1) + Q.f(v) == pytest.approx(Q.f(beta), abs=1e-6)
