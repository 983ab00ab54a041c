import gmpy2
import pytest
from gmpy2 import mpfr
from hypothesis import given, strategies as st

from quadspec.errors import InvalidArgument
from quadspec.golden import compare, load_golden
from quadspec.precision import get_precision, to_big
from quadspec.rpm import (belongs_to, closed_form_roots, hankel_det, hankel_logdet, hankel_matrix,
                          riccati_series, root_family, rpm_converged, rpm_roots, rpm_table)
from quadspec.truncation import truncation_solutions


def fmt(x):
    return f"{float(x):.10g}"


def test_first_coefficients(root2):
    v = riccati_series(1, root2, 7, 5).coeffs
    assert v[0] == root2 / 3
    assert abs(v[1] - (v[0] ** 2 + 7) / 4) < mpfr(2) ** (4 - get_precision())


def test_exact_solution_series(root2):
    # W = 4 at alpha = sqrt(2): the logarithmic derivative is a rational
    # function whose Taylor coefficients are powers of sqrt(2) apart from v_1
    v = riccati_series(0, root2, 4, 12).coeffs
    tol = mpfr(2) ** (16 - get_precision())
    for j, vj in enumerate(v):
        want = mpfr(3) if j == 1 else root2 ** (j + 1)
        assert abs(vj - want) < tol * max(1, abs(want))


@given(st.sampled_from([0, "1/2", 1]))
def test_oscillator_series_is_linear(s):
    s = to_big(s)
    v = riccati_series(s, 0, 2 * s + 2, 10).coeffs
    assert v[1] == 1
    assert all(abs(vj) < mpfr(2) ** (8 - get_precision()) for j, vj in enumerate(v) if j != 1)


@given(st.fractions(min_value=-5, max_value=5), st.fractions(min_value=-5, max_value=20),
       st.sampled_from([0, "1/2", 1]))
def test_series_parity(alpha, W, s):
    a, w = to_big(str(alpha)), to_big(str(W))
    plus = riccati_series(s, a, w, 12).coeffs
    minus = riccati_series(s, -a, w, 12).coeffs
    tol = mpfr(2) ** (20 - get_precision())
    for j in range(13):
        assert abs(minus[j] - (-1) ** (j + 1) * plus[j]) <= tol * max(1, abs(plus[j]))


def test_series_arguments():
    with pytest.raises(InvalidArgument):
        riccati_series(0, 1, 1, 2)
    with pytest.raises(InvalidArgument):
        riccati_series(-1, 1, 1, 5)


def test_hankel_layout(root2):
    ser = riccati_series(0, root2, 5, 10)
    H = hankel_matrix(ser, 3)
    assert H[0][0] == ser.coeffs[1] and H[2][2] == ser.coeffs[5] and H[0][2] == H[1][1]
    with pytest.raises(InvalidArgument):
        hankel_matrix(ser, 6, 1)


def test_exact_case_determinant_vanishes(root2):
    assert hankel_logdet(riccati_series(0, root2, 4, 10), 3).sign == 0
    assert hankel_logdet(riccati_series(0, root2, "5.5", 10), 3).sign != 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("s", [0, 1])
def test_truncation_eigenvalues_zero_determinant(n, s):
    for sol in truncation_solutions(n, s):
        for D in (n + 2, n + 4):
            assert hankel_logdet(riccati_series(s, sol.alpha_root, sol.W, 2 * D + 2), D).sign == 0
        assert hankel_det(s, sol.alpha_root, sol.W + mpfr("0.37"), n + 2) != 0


def test_closed_form_roots_need_large_enough_determinant(root2):
    assert closed_form_roots(0, -root2, (-5, 20), 3) == [mpfr(4)]
    assert closed_form_roots(0, -root2, (-5, 20), 2) == []
    assert closed_form_roots(0, mpfr("1.3"), (-5, 20), 5) == []


def test_roots_at_d8_contain_published_values(root2):
    ref = load_golden("table3").rows[0][1]
    got = rpm_roots(0, -root2, 8)
    for cell in filter(None, ref):
        want = to_big(cell)
        assert min(abs(r.W - want) for r in got.roots) < mpfr("5e-9") * abs(want)
    exact = [r for r in got.roots if r.W == 4]
    assert exact and exact[0].stability_error == 0


def test_root_arguments():
    with pytest.raises(InvalidArgument):
        rpm_roots(0, 1, 1)
    with pytest.raises(InvalidArgument):
        rpm_roots(0, 1, 4, grid_points=50)
    with pytest.raises(InvalidArgument):
        rpm_roots(0, 1, 4, window=(3, 1))
    with pytest.raises(InvalidArgument):
        rpm_converged(0, 1, 2)


@pytest.mark.parametrize("alpha", ["0.7", "-2.3", "3.1"])
def test_root_sets_symmetric_in_alpha(alpha):
    a = to_big(alpha)
    plus = rpm_roots(0, a, 9, grid_points=200).roots
    minus = rpm_roots(0, -a, 9, grid_points=200).roots
    assert len(plus) == len(minus)
    for p, m in zip(plus, minus):
        assert abs(p.W - m.W) < mpfr("1e-20") * max(1, abs(p.W))


def test_converged_levels_minus_root2(rpm_minus_root2):
    levels = [fmt(r.W) for r in rpm_minus_root2.levels()[:4]]
    assert levels == ["4", "7.693978891", "11.50604238", "15.37592718"]


def test_converged_levels_plus_root2(rpm_plus_root2):
    levels = [fmt(r.W) for r in rpm_plus_root2.levels()[:4]]
    assert levels == ["-1.459587134", "4", "8.344349427", "12.5329013"]


def test_families_partition(rpm_plus_root2, rpm_minus_root2):
    plus = {fmt(r.W) for r in rpm_plus_root2.roots if r.family == -1}
    minus = {fmt(r.W) for r in rpm_minus_root2.levels()}
    assert {"7.693978891", "11.50604238"} <= plus
    assert "4" in minus
    shared = [r for r in rpm_plus_root2.roots if r.family == 0]
    assert [r.W for r in shared] == [mpfr(4)]


def test_s1_levels(rpm_s1_root6):
    levels = [fmt(r.W) for r in rpm_s1_root6.levels()]
    assert levels == ["1.600357154", "6", "10.2107281", "14.35078474"]
    minus = [fmt(r.W) for r in rpm_s1_root6.roots if r.family == -1]
    assert minus == ["9.80578409", "13.66928892", "17.56601881"]


def test_family_of_known_values(root2):
    assert root_family(0, root2, 4) == 0
    assert root_family(0, root2, "-1.459587134") == 1
    assert root_family(0, root2, "7.693978891") == -1
    assert root_family(0, root2, 6) is None
    assert belongs_to(0, 0, 2) and not belongs_to(0, 0, 4)


@pytest.mark.slow
@pytest.mark.parametrize("table,fixture", [("table3", "rpm_minus_root2"), ("table4", "rpm_plus_root2")])
def test_tables_reproduced(table, fixture, request):
    conv = request.getfixturevalue(fixture)
    assert compare(load_golden(table), rpm_table(conv, range(8, 16))) == []


@pytest.mark.parametrize("fixture", ["rpm_minus_root2", "rpm_plus_root2"])
def test_stability_shrinks_with_size(fixture, request):
    conv = request.getfixturevalue(fixture)
    rows = dict(rpm_table(conv, range(11, 16)))
    for level in range(3):
        errs = [abs(rows[D][level] - rows[D - 1][level]) for D in range(12, 16)]
        assert all(b <= a for a, b in zip(errs, errs[1:])), errs
