import numpy as np
import pytest
from hypothesis import given, strategies as st

from multipath import FluxDomainError, FluxModel, InfeasibleLevelError
from oracles import godunov_minmax, level_roots

Q = FluxModel.quadratic()
dens = st.floats(0.0, 1.0, allow_nan=False)

# quadratic flux on [0, 1]: roots of rho(1 - rho) = level are 0.5 -+ sqrt(0.25 - level)
Z_TEST1 = 0.3197224362268005
X_TEST2 = 0.816227766016838
Z_TEST3 = 0.912310562561766


def test_quadratic_values():
    assert Q.f(0.3) == pytest.approx(0.21)
    assert Q.f(0.5) == 0.25
    assert Q.df(0.2) == pytest.approx(0.6)
    assert Q.df(0.8) == pytest.approx(-0.6)
    assert Q.capacity == 0.25
    assert Q.max_speed() == 1.0


def test_sharp():
    assert Q.sharp(0.3) == pytest.approx(0.7)
    assert Q.sharp(0.5) == 0.5
    assert Q.sharp(0.0) == 1.0


@pytest.mark.parametrize(
    "level,branch,expected",
    [(0.2175, "lower", Z_TEST1), (0.15, "upper", X_TEST2), (0.08, "upper", Z_TEST3), (0.25, "lower", 0.5)],
)
def test_solve_level_frozen(level, branch, expected):
    assert Q.solve_level(level, branch) == pytest.approx(expected, abs=1e-12)


def test_solve_level_rejects_infeasible():
    with pytest.raises(InfeasibleLevelError):
        Q.solve_level(0.3, "lower")
    with pytest.raises(ValueError):
        Q.solve_level(0.1, "middle")


def test_domain_errors_and_clamp():
    with pytest.raises(FluxDomainError):
        Q.f(1.2)
    with pytest.raises(FluxDomainError):
        Q.f(-0.01)
    assert Q.f(1.0 + 1e-13) == 0.0


@pytest.mark.parametrize(
    "a,b,expected",
    [(0.2, 0.8, 0.16), (0.2, 0.3, 0.16), (0.3, 0.2, 0.21), (0.8, 0.7, 0.21), (0.8, 0.2, 0.25)],
)
def test_godunov_cases(a, b, expected):
    assert Q.godunov(a, b) == pytest.approx(expected)


def test_godunov_vectorised_matches_scalar():
    a = np.linspace(0, 1, 41)
    A, B = np.meshgrid(a, a)
    vec = Q.godunov(A, B)
    for i in range(0, 41, 5):
        for j in range(0, 41, 3):
            assert vec[i, j] == Q.godunov(float(A[i, j]), float(B[i, j]))


@given(dens, dens)
def test_godunov_matches_minmax_oracle(a, b):
    assert Q.godunov(a, b) == pytest.approx(godunov_minmax(a, b), abs=1e-15)


@given(dens, dens)
def test_godunov_is_min_of_demand_supply(a, b):
    assert Q.godunov(a, b) == min(Q.demand(a), Q.supply(b))


@given(dens, dens, dens)
def test_godunov_monotone(a, b, d):
    # nondecreasing in the left state, nonincreasing in the right state
    lo, hi = sorted((a, d))
    assert Q.godunov(lo, b) <= Q.godunov(hi, b) + 1e-15
    assert Q.godunov(b, lo) >= Q.godunov(b, hi) - 1e-15


@given(dens)
def test_godunov_consistent(a):
    assert Q.godunov(a, a) == pytest.approx(Q.f(a), abs=1e-15)


@given(st.floats(0.0, 0.25), st.sampled_from(["lower", "upper"]))
def test_solve_level_inverts_flux(level, branch):
    rho = Q.solve_level(level, branch)
    assert Q.f(rho) == pytest.approx(level, abs=1e-12)
    assert (rho <= 0.5) if branch == "lower" else (rho >= 0.5)
    lo, hi = level_roots(level)
    assert rho == pytest.approx(lo if branch == "lower" else hi, abs=1e-7)


@given(dens)
def test_sharp_involution(r):
    assert Q.sharp(Q.sharp(r)) == pytest.approx(r, abs=1e-12)
    assert Q.f(Q.sharp(r)) == pytest.approx(Q.f(r), abs=1e-12)


@given(st.floats(0.5, 3.0), st.floats(0.5, 2.0), st.floats(0.0, 1.0))
def test_scaled_quadratic(rho_max, scale, t):
    m = FluxModel.quadratic(rho_max, scale)
    rho = t * rho_max
    assert m.sigma == 0.5 * rho_max
    assert m.f(rho) == pytest.approx(scale * rho * (rho_max - rho))
    assert m.max_speed() == pytest.approx(scale * rho_max)


# -- tabulated flux -------------------------------------------------------------

GRID = np.linspace(0.0, 1.0, 21)
TAB = FluxModel.tabulated(GRID, GRID * (1.0 - GRID))


def test_tabulated_reproduces_samples_and_sigma():
    assert TAB.sigma == 0.5
    np.testing.assert_allclose(TAB.f(GRID), GRID * (1 - GRID), atol=1e-15)
    assert TAB.df(0.5) == pytest.approx(0.0, abs=1e-12)
    assert TAB.f(0.33) == pytest.approx(0.33 * 0.67, abs=1e-3)


def test_tabulated_rejects_non_concave():
    with pytest.raises(ValueError, match="concave"):
        FluxModel.tabulated([0, 0.25, 0.5, 0.75, 1], [0, 0.1, 0.2, 0.1, 0])
    with pytest.raises(ValueError):
        FluxModel.tabulated([0, 0.5, 1], [0, 0.25, 0.1])


@given(st.floats(0.0, 0.25), st.sampled_from(["lower", "upper"]))
def test_tabulated_solve_level(level, branch):
    rho = TAB.solve_level(level, branch)
    assert TAB.f(rho) == pytest.approx(level, abs=1e-10)


@given(dens, dens)
def test_tabulated_godunov_is_min_of_demand_supply(a, b):
    assert TAB.godunov(a, b) == pytest.approx(min(TAB.demand(a), TAB.supply(b)), abs=1e-15)


def test_demand_supply_examples():
    assert Q.demand(0.3) == pytest.approx(0.21) and Q.supply(0.3) == 0.25
    assert Q.demand(0.5) == Q.supply(0.5) == 0.25
    assert Q.supply(1.0) == 0.0


def test_derivative_matches_finite_differences(rng):
    for model in (Q, FluxModel.quadratic(2.0, 0.7), TAB):
        rho = rng.uniform(0.01, 0.99, 1000) * model.rho_max
        h = 1e-6
        fd = (model.f(rho + h) - model.f(rho - h)) / (2 * h)
        np.testing.assert_allclose(model.df(rho), fd, atol=1e-6)


def test_sharp_and_level_round_trip(rng):
    for model in (Q, TAB):
        rho = rng.uniform(0, 1, 1000)
        s = model.sharp(rho)
        np.testing.assert_allclose(model.f(s), model.f(rho), atol=1e-10)
        np.testing.assert_allclose(model.sharp(s), rho, atol=1e-10)
        back = [model.solve_level(model.f(r), "lower" if r <= model.sigma else "upper") for r in rho[:200]]
        np.testing.assert_allclose(back, rho[:200], atol=1e-10)
