"""Spectral curves W_j(alpha), truncation overlays and consistency checks.

The converged Ritz eigenvalues trace each level as a smooth, strictly
decreasing function of alpha.  The polynomial solutions are isolated points
on these curves: at a truncation root exactly one level passes through
2(n+s+1), and between roots none does.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpfr

from .errors import InvalidArgument, NumericalError
from .precision import get_precision, set_precision, to_big
from .ritz import DEFAULT_NMAX, RitzProblem, expectation_inv_y, ritz_converged
from .rpm import rpm_converged
from .truncation import truncation_roots, truncation_solutions

OVERLAY_TOL = mpfr("1e-8")


@dataclass(frozen=True)
class OverlayPoint:
    n: int
    i: int
    alpha: mpfr
    W: mpfr
    ritz_W: mpfr
    residual: mpfr

    @property
    def ok(self) -> bool:
        # the Ritz value is an upper bound, so only roundoff may dip below zero
        slack = mpfr(2) ** (-(get_precision() // 2))
        return -slack <= self.residual <= OVERLAY_TOL


@dataclass(frozen=True)
class SpectralCurveSet:
    s: mpfr
    alpha_grid: tuple[mpfr, ...]
    levels: int
    curves: tuple[tuple[mpfr | None, ...], ...]
    flagged: tuple[tuple[int, str], ...] = ()
    violations: tuple[str, ...] = ()
    truncation_points: tuple[OverlayPoint, ...] = field(default=())

    def rows(self) -> list[tuple[mpfr, list[mpfr | None]]]:
        return [(a, [self.curves[j][k] for j in range(self.levels)])
                for k, a in enumerate(self.alpha_grid)]


def _sweep_point(args) -> tuple[list[mpfr] | None, str | None]:
    s, alpha, levels, n_max = args
    try:
        res = ritz_converged(s, alpha, max(levels, 4), n_max=n_max)
    except NumericalError as exc:
        return None, f"{type(exc).__name__}: {exc}"
    note = None if res.converged else f"not converged at N={res.N}"
    return list(res.eigenvalues[:levels]), note


def _parallel_map(func, items: list, workers: int) -> list:
    """Ordered map; results come back in input order whatever the worker count."""
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers, initializer=set_precision,
                             initargs=(get_precision(),)) as pool:
        return list(pool.map(func, items))


def curve_violations(curves: Sequence[Sequence[mpfr | None]], grid: Sequence[mpfr]) -> list[str]:
    out = []
    for j, curve in enumerate(curves):
        for k in range(1, len(grid)):
            a, b = curve[k - 1], curve[k]
            if a is not None and b is not None and not b < a:
                out.append(f"level {j} not decreasing between alpha={float(grid[k - 1]):.6g} "
                           f"and {float(grid[k]):.6g}")
    for j in range(1, len(curves)):
        for k in range(len(grid)):
            lo, hi = curves[j - 1][k], curves[j][k]
            if lo is not None and hi is not None and not lo < hi:
                out.append(f"levels {j - 1} and {j} cross at alpha={float(grid[k]):.6g}")
    return out


def sweep(s, alpha_grid: Sequence, levels: int, *, workers: int = 1,
          n_max: int = DEFAULT_NMAX, overlay_nmax: int | None = None) -> SpectralCurveSet:
    """Converged Ritz levels 0..levels-1 at every grid point.

    Points where the Ritz solve fails or does not settle by ``n_max`` are
    flagged and the sweep continues.  Monotonicity and ordering of the
    curves are checked and any violation is recorded.
    """
    if levels < 1:
        raise InvalidArgument("levels must be at least 1")
    s = to_big(s)
    grid = tuple(to_big(a) for a in alpha_grid)
    if any(not grid[k - 1] < grid[k] for k in range(1, len(grid))):
        raise InvalidArgument("alpha grid must be strictly ascending")
    results = _parallel_map(_sweep_point, [(s, a, levels, n_max) for a in grid], workers)
    curves = [[] for _ in range(levels)]
    flagged = []
    for k, (values, note) in enumerate(results):
        if note is not None:
            flagged.append((k, note))
        for j in range(levels):
            curves[j].append(values[j] if values is not None else None)
    curves_t = tuple(tuple(c) for c in curves)
    points = tuple(truncation_overlay(s, overlay_nmax, basis_max=n_max)) if overlay_nmax is not None else ()
    return SpectralCurveSet(s, grid, levels, curves_t, tuple(flagged),
                            tuple(curve_violations(curves_t, grid)), points)


def linear_grid(lo, hi, points: int) -> list[mpfr]:
    lo, hi = to_big(lo), to_big(hi)
    if points < 2:
        raise InvalidArgument("need at least two grid points")
    return [lo + (hi - lo) * k / (points - 1) for k in range(points)]


def truncation_overlay(source, n_max: int, *, basis_max: int = DEFAULT_NMAX) -> list[OverlayPoint]:
    """Compare every polynomial solution with degree <= n_max to its Ritz curve.

    ``source`` is a SpectralCurveSet or the value of s.  Solution (n, i)
    is checked against level i-1 at its own alpha; the residual is the Ritz
    value minus 2(n+s+1) and should be a tiny non-negative number.
    """
    if n_max < 0:
        raise InvalidArgument("n_max must be non-negative")
    s = source.s if isinstance(source, SpectralCurveSet) else to_big(source)
    points = []
    for n in range(n_max + 1):
        for sol in truncation_solutions(n, s):
            res = ritz_converged(s, sol.alpha_root, max(4, n + 1), n_max=basis_max)
            W = res.eigenvalues[sol.i - 1]
            points.append(OverlayPoint(n, sol.i, sol.alpha_root, sol.W, W, W - sol.W))
    return points


def level_hits(s, alpha, n_max: int, tol=mpfr("1e-6"), *, basis_max: int = DEFAULT_NMAX) -> list[tuple[int, int]]:
    """Pairs (n, j) for which Ritz level j sits within tol of 2(n+s+1).

    Only the lowest n+1 levels are examined for each n.
    """
    s, alpha, tol = to_big(s), to_big(alpha), to_big(tol)
    res = ritz_converged(s, alpha, max(4, n_max + 1), n_max=basis_max)
    hits = []
    for n in range(n_max + 1):
        target = 2 * (n + s + 1)
        for j in range(n + 1):
            if abs(res.eigenvalues[j] - target) < tol:
                hits.append((n, j))
    return hits


def truncation_gaps(s, n_max: int) -> list[tuple[mpfr, mpfr]]:
    """Open alpha intervals between consecutive truncation roots, over all n <= n_max."""
    roots = sorted({r for n in range(n_max + 1) for r in truncation_roots(n, to_big(s))})
    return list(zip(roots[:-1], roots[1:]))


@dataclass(frozen=True)
class HellmannFeynman:
    residual: mpfr
    slope: mpfr
    inv_y: mpfr
    N: int


def hellmann_feynman_residual(s, alpha, level: int, h=mpfr("1e-5")) -> HellmannFeynman:
    """Central-difference slope of a Ritz level against -<1/y>.

    Both sides use the basis size at which the level converged at alpha; the
    Ritz value in a fixed basis obeys the same derivative identity exactly,
    so the residual measures only the finite-difference error.
    """
    s, alpha, h = to_big(s), to_big(alpha), to_big(h)
    if h <= 0:
        raise InvalidArgument("h must be positive")
    res = ritz_converged(s, alpha, max(4, level + 1))
    N = res.N
    up = RitzProblem(s, alpha + h, N).eigenvalues(N)[level]
    down = RitzProblem(s, alpha - h, N).eigenvalues(N)[level]
    slope = (up - down) / (2 * h)
    inv_y = expectation_inv_y(res, level)
    return HellmannFeynman(abs(slope + inv_y), slope, inv_y, N)


@dataclass(frozen=True)
class AsymptoticCheck:
    W: mpfr
    reference: mpfr
    ratio: mpfr
    stability_error: mpfr


def asymptotic_check(s, level: int, alpha, *, D_max: int = 8, grid_points: int = 200) -> AsymptoticCheck:
    """Ratio of an RPM eigenvalue to the Coulomb limit -alpha^2/(2j+2s+1)^2.

    The window is centred on the limit, and the stationary point whose track
    settled best is taken.  At large alpha the determinants settle early and
    then drift as D grows, which is why a modest D_max is the default.
    """
    s, alpha = to_big(s), to_big(alpha)
    ref = -alpha * alpha / (2 * level + 2 * s + 1) ** 2
    half = abs(ref) / 4 + 2
    conv = rpm_converged(s, alpha, D_max, 0, (ref - half, ref + half), grid_points=grid_points)
    mine = conv.levels()
    if not mine:
        raise NumericalError(f"no converged RPM eigenvalue near {float(ref):.6g}")
    best = min(mine, key=lambda r: abs(r.W - ref))
    return AsymptoticCheck(best.W, ref, best.W / ref, best.stability_error)
