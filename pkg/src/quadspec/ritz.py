"""Rayleigh-Ritz eigenvalues in the basis y**(s+j) * exp(-y**2/2).

All matrix elements reduce to the moments
``I(p) = int_0^inf y**p exp(-y**2) dy = Gamma((p+1)/2) / 2``.  The
generalized problem H c = W S c is reduced by Cholesky congruence and
diagonalized with Jacobi rotations.  Because the bases are nested, the
leading N×N block of the transformed matrix built for a large basis is the
transformed matrix of the size-N basis, so one factorization serves a whole
convergence study.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import mpmath
from gmpy2 import mpfr

from .errors import InvalidArgument, QuadratureFailure
from .precision import (SymMatrix, cholesky, get_precision, solve_lower, solve_upper_transposed,
                        sym_eigen, to_big)

DEFAULT_NMAX = 24
CONVERGENCE_TOL = mpfr("1e-10")


class _Moments:
    """J(m) = I(2s + m) by upward recursion from Gamma seeds."""

    def __init__(self, s: mpfr):
        self.s = s
        self._cache: dict[int, mpfr] = {}

    def __call__(self, m: int) -> mpfr:
        if m in self._cache:
            return self._cache[m]
        if m <= 1:
            # Gamma(s + (m+1)/2) / 2, only ever requested for m >= -1
            val = gmpy2.gamma(self.s + mpfr(m + 1) / 2) / 2
        else:
            val = (self.s + mpfr(m - 1) / 2) * self(m - 2)
        self._cache[m] = val
        return val


def _check(N: int, s) -> mpfr:
    if N < 1:
        raise InvalidArgument("basis size must be at least 1")
    s = to_big(s)
    if s < 0:
        raise InvalidArgument("s must be non-negative")
    return s


def overlap_matrix(N: int, s) -> SymMatrix:
    s = _check(N, s)
    J = _Moments(s)
    return SymMatrix.from_function(N, lambda i, j: J(i + j + 1))


def inverse_y_matrix(N: int, s) -> SymMatrix:
    """Matrix of 1/y in the basis."""
    s = _check(N, s)
    J = _Moments(s)
    return SymMatrix.from_function(N, lambda i, j: J(i + j))


def _hamiltonian(N: int, s: mpfr, alpha: mpfr, J: _Moments) -> SymMatrix:
    def entry(i: int, j: int) -> mpfr:
        k = i + j
        val = -alpha * J(k) - (2 * s + k) * J(k + 1) + 2 * J(k + 3)
        c = (s + i) * (s + j) + s * s
        # c vanishes exactly where the moment J(k-1) would diverge
        if c != 0:
            val += c * J(k - 1)
        return val

    return SymMatrix.from_function(N, entry)


def hamiltonian_matrix(N: int, s, alpha) -> SymMatrix:
    s = _check(N, s)
    return _hamiltonian(N, s, to_big(alpha), _Moments(s))


@dataclass(frozen=True)
class RitzResult:
    N: int
    s: mpfr
    alpha: mpfr
    eigenvalues: tuple[mpfr, ...]
    eigenvectors: tuple[tuple[mpfr, ...], ...]
    gram_condition_log: float
    converged: bool = True


class RitzProblem:
    """Factorized Ritz problem for one (s, alpha) up to a maximal basis size."""

    def __init__(self, s, alpha, n_max: int = DEFAULT_NMAX):
        self.s = _check(n_max, s)
        self.alpha = to_big(alpha)
        self.n_max = n_max
        J = _Moments(self.s)
        self.S = SymMatrix.from_function(n_max, lambda i, j: J(i + j + 1))
        self.H = _hamiltonian(n_max, self.s, self.alpha, J)
        self.L = cholesky(self.S)
        # C = L^-1 H L^-T, built column by column
        X = [solve_lower(self.L, [self.H.entry(r, c) for r in range(n_max)]) for c in range(n_max)]
        # X[c] is column c of L^-1 H; row r of (L^-1 H) is [X[c][r] for c]
        cols = [solve_lower(self.L, [X[c][r] for c in range(n_max)]) for r in range(n_max)]
        self.C = SymMatrix.from_function(n_max, lambda i, j: (cols[j][i] + cols[i][j]) / 2)

    def condition_log(self, N: int) -> float:
        values, _ = sym_eigen(self.S.leading(N), vectors=False)
        return float(gmpy2.log10(values[-1] / values[0]))

    def eigenvalues(self, N: int) -> list[mpfr]:
        values, _ = sym_eigen(self.C.leading(N), vectors=False)
        return values

    def result(self, N: int, converged: bool = True) -> RitzResult:
        values, vecs = sym_eigen(self.C.leading(N))
        L = [row[:N] for row in self.L[:N]]
        coeffs = tuple(tuple(solve_upper_transposed(L, v)) for v in vecs)
        return RitzResult(N, self.s, self.alpha, tuple(values), coeffs,
                          self.condition_log(N), converged)


def ritz_spectrum(s, alpha, N: int) -> RitzResult:
    return RitzProblem(s, alpha, N).result(N)


def ritz_table(s, alpha, n_max: int, n_min: int = 2) -> list[tuple[int, list[mpfr]]]:
    """Eigenvalues for every basis size n_min..n_max from one factorization."""
    prob = RitzProblem(s, alpha, n_max)
    return [(N, prob.eigenvalues(N)) for N in range(n_min, n_max + 1)]


def ritz_converged(s, alpha, levels: int = 4, *, tol=CONVERGENCE_TOL,
                   n_max: int = DEFAULT_NMAX) -> RitzResult:
    """Grow the basis until the lowest ``levels`` eigenvalues settle.

    Stops at the first N for which each of those eigenvalues moved by less
    than ``tol`` from N-1.  When the cap is reached first, the result for
    ``n_max`` is returned with ``converged=False``.
    """
    levels = max(1, levels)
    if n_max < levels + 1:
        raise InvalidArgument("n_max too small for the requested number of levels")
    tol = to_big(tol)
    prob = RitzProblem(s, alpha, n_max)
    prev = prob.eigenvalues(levels)
    for N in range(levels + 1, n_max + 1):
        cur = prob.eigenvalues(N)
        if all(abs(cur[j] - prev[j]) < tol for j in range(levels)):
            return prob.result(N)
        prev = cur
    return prob.result(n_max, converged=False)


def expectation_inv_y(result: RitzResult, j: int) -> mpfr:
    """<1/y> in the Ritz eigenvector of level j."""
    if not 0 <= j < result.N:
        raise InvalidArgument(f"level {j} outside basis of size {result.N}")
    c = result.eigenvectors[j]
    T = inverse_y_matrix(result.N, result.s)
    S = overlap_matrix(result.N, result.s)
    n = result.N
    num = gmpy2.fsum(c[a] * T.entry(a, b) * c[b] for a in range(n) for b in range(n))
    den = gmpy2.fsum(c[a] * S.entry(a, b) * c[b] for a in range(n) for b in range(n))
    return num / den


QUAD_BREAKPOINTS = (0, 1, 2, 4, 8, 16, 40)


def quadrature_oracle(i: int, j: int, s, alpha, rel_tol: float = 1e-30) -> tuple[mpfr, mpfr]:
    """Overlap and Hamiltonian elements by tanh-sinh quadrature on [0, 40].

    Integrates the symmetric form u_i' u_j' + (s^2/y^2 - alpha/y + y^2) u_i u_j
    with weight y directly, independently of the closed-form moments.
    """
    s, alpha = to_big(s), to_big(alpha)
    with mpmath.workprec(get_precision() + 32):
        ms = mpmath.mpf(s.as_integer_ratio()[0]) / s.as_integer_ratio()[1]
        ma = mpmath.mpf(alpha.as_integer_ratio()[0]) / alpha.as_integer_ratio()[1]
        pi_, pj = ms + i, ms + j

        def u(p, y):
            return y ** p * mpmath.exp(-y * y / 2)

        def du(p, y):
            lead = p * y ** (p - 1) if p != 0 else 0
            return (lead - y ** (p + 1)) * mpmath.exp(-y * y / 2)

        def overlap(y):
            return u(pi_, y) * u(pj, y) * y

        def energy(y):
            pot = -ma / y + y * y
            if ms != 0:
                pot += ms * ms / (y * y)
            return (du(pi_, y) * du(pj, y) + pot * u(pi_, y) * u(pj, y)) * y

        out = []
        for f in (overlap, energy):
            val, err = mpmath.quad(f, QUAD_BREAKPOINTS, error=True)
            if err > rel_tol * max(abs(val), mpmath.mpf(10) ** -40):
                raise QuadratureFailure(f"quadrature error {mpmath.nstr(err, 3)} above tolerance")
            out.append(mpfr(mpmath.nstr(val, mpmath.mp.dps + 5, strip_zeros=False)))
    return out[0], out[1]
