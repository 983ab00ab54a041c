"""Riccati-Padé eigenvalues from Hankel determinants of a log-derivative series.

With f = y**s * g and v = -g'/g the radial equation becomes the Riccati
equation v' = v**2 - (2s+1) v/y + alpha/y - y**2 + W, whose Taylor
coefficients v_j are polynomials in W.  Eigenvalues are located where the
Hankel determinants det[v_{i+j+d+1}] (i, j = 0..D-1) become stationary in W
and stay put as D grows.  Near every eigenvalue the determinant has a tight
cluster of roots, so the stationary point of the cluster is the estimate
that is followed from one D to the next.

The determinant is even in alpha (for d = 0), so every scan sees the
eigenvalues of both alpha and -alpha.  Converged values are attributed to a
sign of alpha with a shooting test on the Frobenius series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import gmpy2
from gmpy2 import mpfr

from .errors import InvalidArgument
from .precision import LogDet, det, get_precision, lu_logdet, to_big, working_precision
from .truncation import truncation_roots

DEFAULT_WINDOW = (-5, 20)
DEFAULT_GRID = 400
DEFAULT_STABILITY_TOL = mpfr("1e-6")
PLATEAU_TOL = mpfr("1e-12")
CLUSTER_RADIUS = mpfr("1e-3")


@dataclass(frozen=True)
class RiccatiSeries:
    s: mpfr
    alpha: mpfr
    W: mpfr
    coeffs: tuple[mpfr, ...]


def _series(s: mpfr, alpha: mpfr, W: mpfr, jmax: int) -> list[mpfr]:
    v = [alpha / (2 * s + 1)]
    for j in range(1, jmax + 1):
        acc = gmpy2.fsum(v[k] * v[j - 1 - k] for k in range(j))
        if j == 1:
            acc += W
        elif j == 3:
            acc -= 1
        v.append(acc / (j + 2 * s + 1))
    return v


def riccati_series(s, alpha, W, jmax: int) -> RiccatiSeries:
    if jmax < 3:
        raise InvalidArgument("jmax must be at least 3")
    s, alpha, W = to_big(s), to_big(alpha), to_big(W)
    if s < 0:
        raise InvalidArgument("s must be non-negative")
    return RiccatiSeries(s, alpha, W, tuple(_series(s, alpha, W, jmax)))


def _hankel(v: Sequence[mpfr], D: int, d: int) -> list[list[mpfr]]:
    return [[v[p + q + d + 1] for q in range(D)] for p in range(D)]


def hankel_matrix(series: RiccatiSeries, D: int, d: int = 0) -> list[list[mpfr]]:
    if D < 1 or d < 0:
        raise InvalidArgument("need D >= 1 and d >= 0")
    if len(series.coeffs) < 2 * D + d:
        raise InvalidArgument(
            f"series holds {len(series.coeffs)} coefficients, D={D}, d={d} needs {2 * D + d}")
    return _hankel(series.coeffs, D, d)


def hankel_logdet(series: RiccatiSeries, D: int, d: int = 0) -> LogDet:
    """Sign and log-magnitude of the D×D Hankel determinant with entries v_{d+1}..v_{2D+d-1}."""
    return lu_logdet(hankel_matrix(series, D, d))


def hankel_det(s, alpha, W, D: int, d: int = 0) -> mpfr:
    s, alpha, W = to_big(s), to_big(alpha), to_big(W)
    return det(_hankel(_series(s, alpha, W, 2 * D + d), D, d))


class _Determinants:
    """Hankel determinants of one (s, alpha, d), with the series cached per W."""

    def __init__(self, s: mpfr, alpha: mpfr, d: int, D_max: int):
        self.s, self.alpha, self.d = s, alpha, d
        self.jmax = 2 * D_max + d
        self._series: dict[mpfr, list[mpfr]] = {}
        prec = get_precision()
        self.h = mpfr(2) ** (-(prec // 5))
        self.step_tol = mpfr(2) ** (-(3 * prec // 8))

    def series(self, W: mpfr) -> list[mpfr]:
        v = self._series.get(W)
        if v is None:
            v = _series(self.s, self.alpha, W, self.jmax)
            if len(self._series) < 20000:
                self._series[W] = v
        return v

    def __call__(self, W: mpfr, D: int) -> mpfr:
        return det(_hankel(self.series(W), D, self.d))

    def derivatives(self, W: mpfr, D: int) -> tuple[mpfr, mpfr]:
        h = self.h
        lo, mid, hi = self(W - h, D), self(W, D), self(W + h, D)
        return (hi - lo) / (2 * h), (hi - 2 * mid + lo) / (h * h)

    def stationary_point(self, W: mpfr, D: int, radius) -> mpfr | None:
        """Newton iteration on dH/dW, abandoned if it strays beyond radius."""
        start = W
        for _ in range(60):
            d1, d2 = self.derivatives(W, D)
            if d2 == 0:
                return W if d1 == 0 else None
            nxt = W - d1 / d2
            if abs(nxt - start) > radius:
                return None
            if abs(nxt - W) <= self.step_tol * (1 + abs(W)):
                return nxt
            W = nxt
        return None

    def scan(self, D: int, lo: mpfr, hi: mpfr, points: int) -> list[mpfr]:
        """Stationary points of log|H| discovered from a uniform grid."""
        step = (hi - lo) / points
        grid = [lo + k * step for k in range(points + 1)]
        logs = []
        for w in grid:
            val = self(w, D)
            logs.append(gmpy2.log(abs(val)) if val != 0 else None)
        found = []
        for k in range(1, points):
            if logs[k] is None:
                found.append(grid[k])
                continue
            left, mid, right = logs[k - 1], logs[k], logs[k + 1]
            if left is None or right is None:
                continue
            if (mid < left and mid <= right) or (mid > left and mid >= right):
                w = self.stationary_point(grid[k], D, step)
                if w is not None and lo <= w <= hi:
                    found.append(w)
        return found


def closed_form_roots(s, alpha, window, D: int | None = None, tol=PLATEAU_TOL) -> list[mpfr]:
    """Truncation eigenvalues 2(n+s+1) in the window whose alpha root matches ±alpha.

    With d = 0 the determinant of size D vanishes identically at such a point
    once D >= n+2; ``D=None`` skips that restriction.
    """
    s, alpha = to_big(s), to_big(alpha)
    lo, hi = to_big(window[0]), to_big(window[1])
    tol = to_big(tol) * max(mpfr(1), abs(alpha))
    out = []
    n = 0
    while 2 * (n + s + 1) <= hi:
        W = 2 * (n + s + 1)
        if W >= lo and (D is None or D >= n + 2):
            if any(abs(abs(alpha) - abs(r)) <= tol for r in truncation_roots(n, s)):
                out.append(W)
        n += 1
    return out


@dataclass(frozen=True)
class RpmRoot:
    W: mpfr
    stability_error: mpfr | None


@dataclass(frozen=True)
class RpmResult:
    D: int
    d: int
    roots: tuple[RpmRoot, ...]


def _dedupe(values: list[mpfr]) -> list[mpfr]:
    values = sorted(values)
    out: list[mpfr] = []
    for w in values:
        if not out or abs(w - out[-1]) > mpfr("1e-25") * (1 + abs(w)):
            out.append(w)
    return out


def _merge_closed_forms(cands: list[mpfr], exact: list[mpfr]) -> list[mpfr]:
    if not exact:
        return cands
    kept = [w for w in cands
            if all(abs(w - e) > CLUSTER_RADIUS * max(mpfr(1), abs(e)) for e in exact)]
    return sorted(kept + exact)


def _window(window) -> tuple[mpfr, mpfr]:
    lo, hi = to_big(window[0]), to_big(window[1])
    if not lo < hi:
        raise InvalidArgument("window must satisfy W_lo < W_hi")
    return lo, hi


def rpm_roots(s, alpha, D: int, d: int = 0, window=DEFAULT_WINDOW,
              grid_points: int = DEFAULT_GRID) -> RpmResult:
    """Stationary points of the size-D determinant inside the window.

    Each value carries |W(D) - W(D-1)|, the distance to the stationary point
    of the size-(D-1) determinant reached from it, or None when there is
    none nearby.  Exact truncation eigenvalues are reported with error 0.
    """
    if D < 2:
        raise InvalidArgument("D must be at least 2")
    if grid_points < 100:
        raise InvalidArgument("grid_points must be at least 100")
    s, alpha = to_big(s), to_big(alpha)
    lo, hi = _window(window)
    dets = _Determinants(s, alpha, d, D)
    exact = closed_form_roots(s, alpha, (lo, hi), D) if d == 0 else []
    cands = _merge_closed_forms(_dedupe(dets.scan(D, lo, hi, grid_points)), exact)
    roots = []
    for w in cands:
        if w in exact:
            roots.append(RpmRoot(w, mpfr(0)))
            continue
        prev = dets.stationary_point(w, D - 1, mpfr(1)) if D > 2 else None
        roots.append(RpmRoot(w, abs(w - prev) if prev is not None else None))
    return RpmResult(D, d, tuple(roots))


@dataclass
class RpmTracking:
    """Stationary points followed across determinant sizes."""
    s: mpfr
    alpha: mpfr
    d: int
    window: tuple[mpfr, mpfr]
    candidates: dict[int, list[mpfr]] = field(default_factory=dict)
    tracks: list[dict[int, mpfr]] = field(default_factory=list)


def rpm_track(s, alpha, D_max: int, d: int = 0, window=DEFAULT_WINDOW,
              grid_points: int = DEFAULT_GRID, D_min: int = 2) -> RpmTracking:
    """Follow stationary points from D_min to D_max by mutual nearest neighbours.

    At each D the candidates are the grid-discovered stationary points plus
    the points reached by Newton from every live track.  A track is extended
    only when its nearest candidate also has it as nearest live track; other
    candidates open new tracks.
    """
    if D_min < 2 or D_max < D_min:
        raise InvalidArgument("need 2 <= D_min <= D_max")
    s, alpha = to_big(s), to_big(alpha)
    lo, hi = _window(window)
    dets = _Determinants(s, alpha, d, D_max)
    out = RpmTracking(s, alpha, d, (lo, hi))
    for D in range(D_min, D_max + 1):
        cands = dets.scan(D, lo, hi, grid_points)
        live = [tr for tr in out.tracks if D - 1 in tr]
        for tr in live:
            w = dets.stationary_point(tr[D - 1], D, mpfr(1))
            if w is not None and lo <= w <= hi:
                cands.append(w)
        exact = closed_form_roots(s, alpha, (lo, hi), D) if d == 0 else []
        cands = _merge_closed_forms(_dedupe(cands), exact)
        out.candidates[D] = cands
        used: set[int] = set()
        for tr in live:
            if not cands:
                break
            prev = tr[D - 1]
            j = min(range(len(cands)), key=lambda k: abs(cands[k] - prev))
            back = min(live, key=lambda t: abs(t[D - 1] - cands[j]))
            if back is tr and j not in used:
                tr[D] = cands[j]
                used.add(j)
        for j, w in enumerate(cands):
            if j not in used:
                out.tracks.append({D: w})
    return out


@dataclass(frozen=True)
class ConvergedRoot:
    W: mpfr
    stability_error: mpfr
    D: int
    family: int


@dataclass(frozen=True)
class RpmConverged:
    s: mpfr
    alpha: mpfr
    roots: tuple[ConvergedRoot, ...]
    tracking: RpmTracking

    def levels(self) -> list[ConvergedRoot]:
        """Roots belonging to the spectrum of this alpha, ascending."""
        return [r for r in self.roots if r.family in (0, 1)]


def _best_point(track: dict[int, mpfr]) -> tuple[int, mpfr] | None:
    best = None
    for D in sorted(track):
        if D - 1 in track:
            err = abs(track[D] - track[D - 1])
            if best is None or err < best[1]:
                best = (D, err)
    return best


def _tail_value(s: mpfr, alpha: mpfr, W: mpfr, Y: mpfr) -> mpfr:
    """Frobenius series of the regular solution summed at y = Y (without y^s e^{-y^2/2})."""
    nu = W - 2 * s - 2
    tiny = mpfr(2) ** (-get_precision())
    prev, cur = mpfr(0), mpfr(1)
    total = power = peak = mpfr(1)
    quiet = 0
    j = -1
    while True:
        nxt = (-alpha * cur + (2 * j - nu) * prev) / ((j + 2) * (j + 2 * s + 2))
        power *= Y
        term = nxt * power
        total += term
        peak = max(peak, abs(term))
        prev, cur = cur, nxt
        j += 1
        quiet = quiet + 1 if j > 2 * Y * Y + 10 and abs(term) < peak * tiny else 0
        if quiet >= 2:
            return total


def _sign(x: mpfr) -> int:
    return (x > 0) - (x < 0)


def belongs_to(s, alpha, W, eps=None) -> bool:
    """True when [W-eps, W+eps] holds an odd number of eigenvalues of this alpha.

    Shooting test: the regular series solution, evaluated well past the
    classical turning point, is dominated by its growing part, whose sign
    flips at every eigenvalue.
    """
    s, alpha, W = to_big(s), to_big(alpha), to_big(W)
    eps = mpfr("1e-5") * max(mpfr(1), abs(W)) if eps is None else to_big(eps)
    Y = gmpy2.sqrt(max(W, mpfr(0))) + 5
    extra = int(float(Y * Y) * 2 / math.log(2)) + 64
    with working_precision(get_precision() + extra):
        lo = _tail_value(s, alpha, W - eps, Y)
        hi = _tail_value(s, alpha, W + eps, Y)
    return _sign(lo) * _sign(hi) < 0


def root_family(s, alpha, W, eps=None) -> int | None:
    """+1 for the spectrum of alpha, -1 for that of -alpha, 0 for both, None for neither."""
    plus = belongs_to(s, alpha, W, eps)
    minus = belongs_to(s, -to_big(alpha), W, eps)
    if plus and minus:
        return 0
    if plus:
        return 1
    if minus:
        return -1
    return None


def rpm_converged(s, alpha, D_max: int = 15, d: int = 0, window=DEFAULT_WINDOW, *,
                  grid_points: int = DEFAULT_GRID, tol=DEFAULT_STABILITY_TOL) -> RpmConverged:
    """Stable stationary points with their error estimates and spectrum labels.

    A track is summarized at the D where it moved least between consecutive
    sizes; it counts as converged when that move is below ``tol``.  Values
    that belong to neither alpha nor -alpha are discarded.
    """
    if D_max < 3:
        raise InvalidArgument("D_max must be at least 3")
    s, alpha = to_big(s), to_big(alpha)
    tol = to_big(tol)
    tracking = rpm_track(s, alpha, D_max, d, window, grid_points)
    found: list[ConvergedRoot] = []
    for tr in tracking.tracks:
        best = _best_point(tr)
        if best is None or best[1] > tol:
            continue
        D, err = best
        found.append(ConvergedRoot(tr[D], err, D, 0))
    found.sort(key=lambda r: r.W)
    merged: list[ConvergedRoot] = []
    for r in found:
        if merged and abs(r.W - merged[-1].W) <= 10 * tol * max(mpfr(1), abs(r.W)):
            if r.stability_error < merged[-1].stability_error:
                merged[-1] = r
            continue
        merged.append(r)
    roots = []
    for r in merged:
        fam = root_family(s, alpha, r.W)
        if fam is not None:
            roots.append(ConvergedRoot(r.W, r.stability_error, r.D, fam))
    return RpmConverged(s, alpha, tuple(roots), tracking)


def rpm_table(conv: RpmConverged, D_rows: Sequence[int], levels: int = 4) -> list[tuple[int, list[mpfr | None]]]:
    """Per-D estimates of the lowest ``levels`` eigenvalues of this alpha.

    Every candidate at size D is attributed to the nearest converged value of
    either sign of alpha; a level's entry is the attributed candidate closest
    to it, or None when nothing was attributed.
    """
    targets = [r.W for r in conv.roots]
    wanted = [r.W for r in conv.levels()][:levels]
    rows = []
    for D in D_rows:
        cands = conv.tracking.candidates.get(D, [])
        owner: dict[mpfr, list[mpfr]] = {t: [] for t in targets}
        for w in cands:
            if targets:
                owner[min(targets, key=lambda t: abs(t - w))].append(w)
        row: list[mpfr | None] = []
        for t in wanted:
            mine = owner[t]
            row.append(min(mine, key=lambda w: abs(w - t)) if mine else None)
        row.extend([None] * (levels - len(row)))
        rows.append((D, row))
    return rows
