import random

import pytest
from gmpy2 import mpfr
from hypothesis import given, strategies as st

from quadspec.errors import InvalidArgument
from quadspec.precision import parse_real, to_big
from quadspec.ritz import ritz_converged
from quadspec.spectra import (OVERLAY_TOL, asymptotic_check, curve_violations, hellmann_feynman_residual,
                              level_hits, linear_grid, sweep, truncation_gaps, truncation_overlay)

scipy_integrate = pytest.importorskip("scipy.integrate")
scipy_optimize = pytest.importorskip("scipy.optimize")


def fmt(x):
    return f"{float(x):.10g}"


def test_ground_level_on_small_grid(root2):
    res = sweep(0, [-root2, 0, root2], 1)
    assert [fmt(w) for w in res.curves[0]] == ["4", "2", "-1.459587134"]
    assert res.violations == () and res.flagged == ()


def test_oscillator_levels():
    res = sweep(0, [0], 4)
    for j, w in enumerate([2, 6, 10, 14]):
        assert abs(res.curves[j][0] - w) < mpfr("1e-30")


def test_s1_grid(root6):
    res = sweep(1, [-root6, root6], 2)
    assert [fmt(res.curves[0][0]), fmt(res.curves[1][0])] == ["6", "9.80578409"]
    assert [fmt(res.curves[0][1]), fmt(res.curves[1][1])] == ["1.600357154", "6"]


def test_parallel_sweep_keeps_order():
    grid = linear_grid(-3, 3, 7)
    serial = sweep(0, grid, 3)
    parallel = sweep(0, grid, 3, workers=2)
    assert serial.curves == parallel.curves


def test_rows_layout():
    res = sweep(0, [0, 1], 2)
    rows = res.rows()
    assert rows[1][0] == 1 and rows[1][1] == [res.curves[0][1], res.curves[1][1]]


def test_sweep_arguments():
    with pytest.raises(InvalidArgument):
        sweep(0, [1, 0], 2)
    with pytest.raises(InvalidArgument):
        sweep(0, [0], 0)
    with pytest.raises(InvalidArgument):
        linear_grid(0, 1, 1)


def test_violations_detected():
    grid = [mpfr(0), mpfr(1)]
    assert curve_violations([[mpfr(1), mpfr(2)]], grid)
    assert curve_violations([[mpfr(2), mpfr(1)], [mpfr(1), mpfr(3)]], grid)
    assert curve_violations([[mpfr(2), None], [mpfr(3), mpfr(2)]], grid) == []


def test_unconverged_points_are_flagged():
    res = sweep(0, [7], 4, n_max=8)
    assert res.flagged and "not converged" in res.flagged[0][1]


@pytest.mark.parametrize("s", [0, "1/2", 1])
def test_overlay_residuals(s):
    points = truncation_overlay(s, 4)
    assert len(points) == sum(n + 1 for n in range(5))
    for p in points:
        assert p.ok, (p.n, p.i, float(p.residual))
        assert p.residual < OVERLAY_TOL


def test_overlay_from_curve_set():
    res = sweep(0, [0], 1, overlay_nmax=2)
    assert [(p.n, p.i) for p in res.truncation_points] == [(0, 1), (1, 1), (1, 2), (2, 1), (2, 2), (2, 3)]


def test_single_level_through_each_root():
    for sol in truncation_overlay(0, 3):
        hits = level_hits(0, sol.alpha, 3)
        assert (sol.n, sol.i - 1) in hits
        assert sum(1 for n, _ in hits if n == sol.n) == 1


def test_no_hits_between_roots():
    for lo, hi in truncation_gaps(0, 3):
        assert level_hits(0, (lo + hi) / 2, 3) == []


def test_seeded_random_alphas_have_no_hits():
    rng = random.Random(1234)
    for _ in range(5):
        assert level_hits(0, to_big(repr(rng.uniform(-5, 5))), 4) == []


def test_level_hits_argument_checks():
    with pytest.raises(InvalidArgument):
        truncation_overlay(0, -1)


@pytest.mark.parametrize("s,alpha,level", [(0, "0", 0), (1, "sqrt(6)", 1), (0, "-2.5", 2)])
def test_hellmann_feynman(s, alpha, level):
    hf = hellmann_feynman_residual(s, parse_real(alpha), level)
    assert hf.residual < mpfr("1e-8")
    assert hf.slope < 0 and hf.inv_y > 0


@given(st.fractions(min_value=-4, max_value=4))
def test_levels_lipschitz(alpha):
    # each level falls no faster than the largest <1/y> along the way
    a = to_big(str(alpha))
    h = mpfr("0.01")
    w0 = ritz_converged(0, a, 3).eigenvalues[:3]
    w1 = ritz_converged(0, a + h, 3).eigenvalues[:3]
    for lo, hi in zip(w0, w1):
        assert 0 < lo - hi < 10 * h


def _shoot(alpha, lo, hi, Y=3.0, y0=1e-8):
    def rhs(y, u):
        f, g = u
        return [g, -g / y - alpha / y * f + y * y * f]

    def tail(W):
        def full(y, u):
            d = rhs(y, u)
            return [d[0], d[1] - W * u[0]]
        sol = scipy_integrate.solve_ivp(full, (y0, Y), [1 - alpha * y0, -alpha], method="DOP853",
                                        rtol=1e-13, atol=1e-30)
        return sol.y[0, -1]

    return scipy_optimize.brentq(tail, lo, hi, xtol=1e-12)


def test_deep_ground_state_against_shooting():
    check = asymptotic_check(0, 0, 10)
    assert fmt(check.W) == "-99.98500496"
    assert abs(float(check.W) - _shoot(10.0, -101, -99)) < 1e-7
    assert abs(check.ratio - 1) < mpfr("1e-3")


def test_asymptotic_ratio_improves():
    r10 = asymptotic_check(0, 0, 10).ratio
    r20 = asymptotic_check(0, 0, 20).ratio
    assert abs(r20 - 1) < abs(r10 - 1)
