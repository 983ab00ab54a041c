"""Polynomial solutions obtained by truncating the Frobenius series.

Writing the radial function as ``y**s * H(y) * exp(-y**2/2)`` with
``H = sum a_j y**j`` gives a three-term recurrence for the ``a_j``.  The
series stops at degree n only when ``W = 2(n+s+1)`` and, at the same time,
``a_{n+1}`` (a polynomial of degree n+1 in alpha) vanishes.  Each of its n+1
real roots yields one exact eigenpair, and the root index orders the
solutions by node count.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import gmpy2
from gmpy2 import mpfr

from .errors import EmptyResult, InvalidArgument
from .precision import cauchy_bound, get_precision, poly_deriv, poly_eval, poly_real_roots, to_big


def recurrence_coeffs(s, alpha, W, jmax: int) -> list[mpfr]:
    """Series coefficients a_0..a_jmax with a_0 = 1."""
    if jmax < 0:
        raise InvalidArgument("jmax must be non-negative")
    s, alpha, W = to_big(s), to_big(alpha), to_big(W)
    nu = W - 2 * s - 2
    a = [mpfr(1)]
    prev = mpfr(0)
    # j runs from -1: a_{j+2} from a_{j+1} and a_j
    for j in range(-1, jmax - 1):
        denom = (j + 2) * (j + 2 * s + 2)
        nxt = (-alpha * a[j + 1] + (2 * j - nu) * (a[j] if j >= 0 else prev)) / denom
        a.append(nxt)
    return a[: jmax + 1]


def truncation_alpha_polynomial(n: int, s) -> list[mpfr]:
    """Coefficients (ascending powers of alpha) of a_{n+1} at W = 2(n+s+1)."""
    if n < 0:
        raise InvalidArgument("n must be non-negative")
    s = to_big(s)
    nu = 2 * n
    polys: list[list[mpfr]] = [[mpfr(1)]]
    prev: list[mpfr] = []
    for j in range(-1, n):
        denom = (j + 2) * (j + 2 * s + 2)
        cur = polys[j + 1]
        back = polys[j] if j >= 0 else prev
        out = [mpfr(0)] * (len(cur) + 1)
        for k, c in enumerate(cur):
            out[k + 1] -= c
        for k, c in enumerate(back):
            out[k] += (2 * j - nu) * c
        polys.append([c / denom for c in out])
    return polys[n + 1]


@dataclass(frozen=True)
class TruncationSolution:
    n: int
    i: int
    s: mpfr
    alpha_root: mpfr
    W: mpfr
    nu: mpfr
    coeffs: tuple[mpfr, ...]

    def polynomial(self, y) -> mpfr:
        return poly_eval(self.coeffs, to_big(y))


@lru_cache(maxsize=256)
def _alpha_roots(n: int, s: mpfr, prec: int) -> tuple[mpfr, ...]:
    poly = truncation_alpha_polynomial(n, s)
    roots = poly_real_roots(poly)
    return tuple(r.value for r in roots for _ in range(r.multiplicity))


def truncation_roots(n: int, s) -> tuple[mpfr, ...]:
    """The alpha values (ascending) admitting a degree-n polynomial solution."""
    return _alpha_roots(n, to_big(s), get_precision())


def truncation_solutions(n: int, s) -> list[TruncationSolution]:
    if n < 0:
        raise InvalidArgument("n must be non-negative")
    s = to_big(s)
    if s < 0:
        raise InvalidArgument("s must be non-negative")
    W = 2 * (n + s + 1)
    out = []
    for i, alpha in enumerate(truncation_roots(n, s), start=1):
        coeffs = recurrence_coeffs(s, alpha, W, n)
        out.append(TruncationSolution(n, i, s, alpha, W, W - 2 * s - 2, tuple(coeffs)))
    return out


def count_nodes(sol: TruncationSolution) -> int:
    """Distinct zeros of the polynomial factor on the positive half-line."""
    coeffs = list(sol.coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) <= 1:
        return 0
    try:
        roots = poly_real_roots(coeffs, (mpfr(0), cauchy_bound(coeffs)))
    except EmptyResult:
        return 0
    return sum(1 for r in roots if r.value > 0)


def eval_eigenfunction(sol: TruncationSolution, y) -> mpfr:
    y = to_big(y)
    if y < 0:
        raise InvalidArgument("y must be non-negative")
    if y == 0:
        return mpfr(1) if sol.s == 0 else mpfr(0)
    return y ** sol.s * sol.polynomial(y) * gmpy2.exp(-y * y / 2)


def radial_residual(sol: TruncationSolution, y) -> mpfr:
    """Left-hand side of the radial equation evaluated on the exact solution.

    Uses exact polynomial derivatives; for y*s*H*exp(-y^2/2) the operator
    reduces to y^s exp(-y^2/2) [H'' + ((2s+1)/y - 2y) H' + (alpha/y + W - 2s - 2) H].
    """
    y = to_big(y)
    h = list(sol.coeffs)
    h1 = poly_deriv(h) or [mpfr(0)]
    h2 = poly_deriv(h1) or [mpfr(0)]
    s = sol.s
    inner = (poly_eval(h2, y) + ((2 * s + 1) / y - 2 * y) * poly_eval(h1, y)
             + (sol.alpha_root / y + sol.W - 2 * s - 2) * poly_eval(h, y))
    return y ** s * gmpy2.exp(-y * y / 2) * inner
