"""Extended-precision scalars and the small dense kernels the solvers share.

Scalars are MPFR numbers (``gmpy2.mpfr``).  The working precision lives in
the gmpy2 context of the calling thread and defaults to 256 bits, or to the
value of the ``QUADSPEC_PRECISION`` environment variable.  Invalid operations
and division by zero are trapped, so a NaN never leaks out of a kernel.
"""

from __future__ import annotations

import ast
import math
import os
from contextlib import contextmanager
from fractions import Fraction
from typing import Callable, Iterator, NamedTuple, Sequence

import gmpy2
from gmpy2 import mpfr

from .errors import EmptyResult, InvalidArgument, IterationLimit, NotPositiveDefinite

BigReal = mpfr

DEFAULT_PRECISION = 256
PRECISION_ENV = "QUADSPEC_PRECISION"
MIN_PRECISION = 53


def default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_PRECISION
    try:
        bits = int(raw)
    except ValueError:
        raise InvalidArgument(f"{PRECISION_ENV}={raw!r} is not an integer") from None
    if bits < MIN_PRECISION:
        raise InvalidArgument(f"{PRECISION_ENV} must be at least {MIN_PRECISION}")
    return bits


def _configure(ctx, bits: int) -> None:
    ctx.precision = bits
    ctx.trap_invalid = True
    ctx.trap_divzero = True


def set_precision(bits: int) -> None:
    """Set the working precision (in bits) of the current thread."""
    if bits < MIN_PRECISION:
        raise InvalidArgument(f"precision must be at least {MIN_PRECISION} bits, got {bits}")
    _configure(gmpy2.get_context(), int(bits))


def get_precision() -> int:
    return gmpy2.get_context().precision


@contextmanager
def working_precision(bits: int) -> Iterator[None]:
    """Temporarily change the working precision."""
    if bits < MIN_PRECISION:
        raise InvalidArgument(f"precision must be at least {MIN_PRECISION} bits, got {bits}")
    with gmpy2.context(gmpy2.get_context(), precision=int(bits)):
        yield


def epsilon() -> mpfr:
    """Unit roundoff of the working precision."""
    return mpfr(2) ** (-get_precision())


def to_big(x) -> mpfr:
    """Convert ints, floats, strings, fractions and mpfr values to the working precision."""
    if isinstance(x, Fraction):
        return mpfr(x.numerator) / x.denominator
    if isinstance(x, str):
        return parse_real(x)
    if isinstance(x, bool):
        raise InvalidArgument("booleans are not real numbers here")
    try:
        return mpfr(x)
    except (TypeError, ValueError) as exc:
        raise InvalidArgument(f"cannot convert {x!r} to a real number") from exc


def pi() -> mpfr:
    return gmpy2.const_pi()


_FUNCS: dict[str, Callable[[mpfr], mpfr]] = {"sqrt": gmpy2.sqrt}
_CONSTS: dict[str, Callable[[], mpfr]] = {"pi": gmpy2.const_pi}


def parse_real(text: str) -> mpfr:
    """Evaluate a small real expression such as ``-sqrt(2)`` or ``1/3`` at full precision.

    Decimal literals are read from their source text, so ``0.1`` is the
    correctly rounded binary value at the working precision, not a double.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError:
        raise InvalidArgument(f"cannot parse real number {text!r}") from None

    def ev(node) -> mpfr:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return mpfr(ast.get_source_segment(text.strip(), node))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                return a / b
            if isinstance(node.op, ast.Pow):
                return a ** b
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]()
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise InvalidArgument(f"unsupported expression in {text!r}")

    try:
        return ev(tree)
    except (ArithmeticError, gmpy2.InvalidOperationError):
        raise InvalidArgument(f"{text!r} does not evaluate to a real number") from None


class SymMatrix:
    """Symmetric matrix keeping one stored copy of each off-diagonal pair."""

    __slots__ = ("_rows",)

    def __init__(self, lower_rows: Sequence[Sequence]):
        rows = tuple(tuple(to_big(x) for x in row) for row in lower_rows)
        for i, row in enumerate(rows):
            if len(row) != i + 1:
                raise InvalidArgument("lower-triangular storage expects row i to hold i+1 entries")
        if not rows:
            raise InvalidArgument("dimension must be positive")
        self._rows = rows

    @classmethod
    def from_function(cls, n: int, entry: Callable[[int, int], object]) -> "SymMatrix":
        return cls([[entry(i, j) for j in range(i + 1)] for i in range(n)])

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "SymMatrix":
        n = len(rows)
        for i in range(n):
            if len(rows[i]) != n:
                raise InvalidArgument("matrix is not square")
            for j in range(i):
                if to_big(rows[i][j]) != to_big(rows[j][i]):
                    raise InvalidArgument(f"matrix is not symmetric at ({i}, {j})")
        return cls([[rows[i][j] for j in range(i + 1)] for i in range(n)])

    @property
    def dimension(self) -> int:
        return len(self._rows)

    def entry(self, i: int, j: int) -> mpfr:
        return self._rows[i][j] if j <= i else self._rows[j][i]

    def __getitem__(self, ij: tuple[int, int]) -> mpfr:
        return self.entry(*ij)

    def leading(self, n: int) -> "SymMatrix":
        """Top-left n×n block."""
        return SymMatrix(self._rows[:n])

    def to_dense(self) -> list[list[mpfr]]:
        n = self.dimension
        return [[self.entry(i, j) for j in range(n)] for i in range(n)]

    def __repr__(self) -> str:
        return f"SymMatrix(dimension={self.dimension})"


def _dense(A) -> list[list[mpfr]]:
    if isinstance(A, SymMatrix):
        return A.to_dense()
    return [[to_big(x) for x in row] for row in A]


def cholesky(S: SymMatrix) -> list[list[mpfr]]:
    """Lower-triangular L with L·Lᵀ = S."""
    n = S.dimension
    L = [[mpfr(0)] * n for _ in range(n)]
    for j in range(n):
        d = S.entry(j, j) - gmpy2.fsum(L[j][k] * L[j][k] for k in range(j))
        if d <= 0:
            raise NotPositiveDefinite(
                f"pivot {j} is {float(d):.3e}; raise the precision or shrink the basis")
        ljj = gmpy2.sqrt(d)
        L[j][j] = ljj
        for i in range(j + 1, n):
            L[i][j] = (S.entry(i, j) - gmpy2.fsum(L[i][k] * L[j][k] for k in range(j))) / ljj
    return L


def solve_lower(L: Sequence[Sequence[mpfr]], b: Sequence[mpfr]) -> list[mpfr]:
    n = len(b)
    x = [mpfr(0)] * n
    for i in range(n):
        x[i] = (b[i] - gmpy2.fsum(L[i][k] * x[k] for k in range(i))) / L[i][i]
    return x


def solve_upper_transposed(L: Sequence[Sequence[mpfr]], b: Sequence[mpfr]) -> list[mpfr]:
    """Solve Lᵀ x = b for lower-triangular L."""
    n = len(b)
    x = [mpfr(0)] * n
    for i in reversed(range(n)):
        x[i] = (b[i] - gmpy2.fsum(L[k][i] * x[k] for k in range(i + 1, n))) / L[i][i]
    return x


def sym_eigen(A, *, vectors: bool = True, max_sweeps: int = 80):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.

    Cyclic Jacobi rotations.  Returns ``(values, vecs)`` where ``vecs[k]`` is
    the eigenvector of ``values[k]``; ``vecs`` is None when vectors=False.
    """
    a = _dense(A)
    n = len(a)
    v = [[mpfr(1) if i == j else mpfr(0) for j in range(n)] for i in range(n)] if vectors else None
    eps = epsilon()
    for _ in range(max_sweeps):
        off = gmpy2.fsum(a[p][q] * a[p][q] for p in range(n) for q in range(p + 1, n))
        total = gmpy2.fsum(a[i][i] * a[i][i] for i in range(n)) + 2 * off
        if off <= eps * eps * total:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0:
                    continue
                app, aqq = a[p][p], a[q][q]
                if abs(apq) <= eps * (abs(app) + abs(aqq)) * mpfr("1e-3"):
                    a[p][q] = a[q][p] = mpfr(0)
                    continue
                theta = (aqq - app) / (2 * apq)
                t = 1 / (abs(theta) + gmpy2.sqrt(theta * theta + 1))
                if theta < 0:
                    t = -t
                c = 1 / gmpy2.sqrt(t * t + 1)
                sn = t * c
                tau = sn / (1 + c)
                a[p][p] = app - t * apq
                a[q][q] = aqq + t * apq
                a[p][q] = a[q][p] = mpfr(0)
                for r in range(n):
                    if r == p or r == q:
                        continue
                    g, h = a[r][p], a[r][q]
                    a[r][p] = a[p][r] = g - sn * (h + g * tau)
                    a[r][q] = a[q][r] = h + sn * (g - h * tau)
                if v is not None:
                    for r in range(n):
                        g, h = v[r][p], v[r][q]
                        v[r][p] = g - sn * (h + g * tau)
                        v[r][q] = h + sn * (g - h * tau)
    else:
        raise IterationLimit(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    order = sorted(range(n), key=lambda k: a[k][k])
    values = [a[k][k] for k in order]
    if v is None:
        return values, None
    return values, [[v[r][k] for r in range(n)] for k in order]


class LogDet(NamedTuple):
    sign: int
    log_abs: mpfr


def lu_logdet(M) -> LogDet:
    """Sign and log|det| by LU with partial pivoting.

    Alongside each entry the elimination tracks the largest magnitude that
    flowed into it.  A pivot column that has cancelled down to within 2^32
    roundoff units of that scale is treated as an exact zero, which is how
    identically vanishing determinants are told apart from merely tiny ones.
    """
    a = _dense(M)
    n = len(a)
    if any(len(row) != n for row in a):
        raise InvalidArgument("matrix is not square")
    scale = [[abs(x) for x in row] for row in a]
    cut = mpfr(2) ** (32 - get_precision())
    sign = 1
    log_abs = mpfr(0)
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(a[i][k]))
        piv = a[p][k]
        if piv == 0 or all(abs(a[i][k]) <= cut * scale[i][k] for i in range(k, n)):
            return LogDet(0, mpfr("-inf"))
        if p != k:
            a[p], a[k] = a[k], a[p]
            scale[p], scale[k] = scale[k], scale[p]
            sign = -sign
        if piv < 0:
            sign = -sign
        log_abs += gmpy2.log(abs(piv))
        rk, sk = a[k], scale[k]
        for i in range(k + 1, n):
            f = a[i][k] / piv
            if f == 0:
                continue
            ri, si = a[i], scale[i]
            af = abs(f)
            for j in range(k + 1, n):
                ri[j] -= f * rk[j]
                t = af * sk[j]
                if t > si[j]:
                    si[j] = t
    return LogDet(sign, log_abs)


def det(M) -> mpfr:
    """Plain determinant by partial-pivot LU; no exact-zero classification."""
    a = [[x if type(x) is mpfr else to_big(x) for x in row] for row in M]
    n = len(a)
    d = mpfr(1)
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(a[i][k]))
        piv = a[p][k]
        if piv == 0:
            return mpfr(0)
        if p != k:
            a[p], a[k] = a[k], a[p]
            d = -d
        d *= piv
        rk = a[k]
        for i in range(k + 1, n):
            f = a[i][k] / piv
            if f:
                ri = a[i]
                for j in range(k + 1, n):
                    ri[j] -= f * rk[j]
    return d


# Polynomials are coefficient lists in ascending powers.

def poly_eval(coeffs: Sequence[mpfr], x) -> mpfr:
    acc = mpfr(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_deriv(coeffs: Sequence[mpfr]) -> list[mpfr]:
    return [k * coeffs[k] for k in range(1, len(coeffs))]


def _trim(coeffs: Sequence[mpfr]) -> list[mpfr]:
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return out


def _normalized(p: list[mpfr]) -> list[mpfr]:
    m = max(abs(c) for c in p)
    return [c / m for c in p]


def _neg_rem(a: list[mpfr], b: list[mpfr]) -> list[mpfr]:
    """−(a mod b), with roundoff-level coefficients flushed to zero."""
    r = list(a)
    db = len(b) - 1
    lead = b[-1]
    ref = max(max(abs(c) for c in a), max(abs(c) for c in b))
    for k in range(len(r) - 1, db - 1, -1):
        q = r[k] / lead
        if q:
            for j in range(db + 1):
                r[k - db + j] -= q * b[j]
        r[k] = mpfr(0)
    tol = ref * mpfr(2) ** (-(get_precision() // 2))
    r = [c if abs(c) > tol else mpfr(0) for c in r[:db]]
    return [-c for c in _trim(r)]


def _sturm_chain(p: list[mpfr]) -> list[list[mpfr]]:
    chain = [_normalized(p)]
    dp = _trim(poly_deriv(p))
    if not dp:
        return chain
    chain.append(_normalized(dp))
    while len(chain[-1]) > 1:
        r = _neg_rem(chain[-2], chain[-1])
        if not r:
            break
        chain.append(_normalized(r))
    return chain


def _sign_changes(chain: list[list[mpfr]], x) -> int:
    changes = 0
    last = 0
    for q in chain:
        v = poly_eval(q, x)
        s = (v > 0) - (v < 0)
        if s == 0:
            continue
        if last and s != last:
            changes += 1
        last = s
    return changes


class RealRoot(NamedTuple):
    value: mpfr
    multiplicity: int


def _multiplicity(chain: list[list[mpfr]], x) -> int:
    g = chain[-1]
    if len(g) <= 1:
        return 1
    scale = gmpy2.fsum(abs(c) * abs(x) ** k for k, c in enumerate(g))
    if abs(poly_eval(g, x)) > scale * mpfr(2) ** (-(get_precision() // 4)):
        return 1
    return 1 + _multiplicity(_sturm_chain(g), x)


def cauchy_bound(coeffs: Sequence[mpfr]) -> mpfr:
    lead = abs(coeffs[-1])
    return 1 + max(abs(c) / lead for c in coeffs[:-1])


def poly_real_roots(coeffs: Sequence, interval: tuple | None = None) -> list[RealRoot]:
    """Real roots of a polynomial inside a half-open interval (lo, hi], ascending.

    Roots are isolated with a Sturm chain and narrowed by bisection on the
    root count, which also works for roots of even multiplicity.  Simple
    roots are then polished by Newton steps kept inside their bracket.
    """
    p = _trim([to_big(c) for c in coeffs])
    if len(p) <= 1:
        raise EmptyResult("a constant polynomial has no roots to find")
    bound = cauchy_bound(p)
    lo, hi = (-bound, bound) if interval is None else (to_big(interval[0]), to_big(interval[1]))
    if lo >= hi:
        raise InvalidArgument("empty root interval")
    if gmpy2.is_infinite(lo):
        lo = -bound
    if gmpy2.is_infinite(hi):
        hi = bound
    chain = _sturm_chain(p)
    dp = poly_deriv(p)
    rel = mpfr(2) ** (-(get_precision() // 2) - 8)
    roots: list[RealRoot] = []

    def count(a, b) -> int:
        return _sign_changes(chain, a) - _sign_changes(chain, b)

    stack = [(lo, hi, count(lo, hi))]
    while stack:
        a, b, k = stack.pop()
        if k <= 0:
            continue
        if b - a <= rel * max(abs(a), abs(b), mpfr(1)) or k == 1:
            if k == 1:
                while b - a > rel * max(abs(a), abs(b), mpfr(1)):
                    mid = (a + b) / 2
                    if count(a, mid) == 1:
                        b = mid
                    else:
                        a = mid
            x = (a + b) / 2
            mult = _multiplicity(chain, x)
            if mult == 1:
                x = _polish(p, dp, x, a, b)
            roots.append(RealRoot(x, mult))
            continue
        mid = (a + b) / 2
        stack.append((mid, b, count(mid, b)))
        stack.append((a, mid, count(a, mid)))
    roots.sort(key=lambda r: r.value)
    return roots


def _polish(p, dp, x, a, b) -> mpfr:
    w = b - a
    a, b = a - w, b + w
    for _ in range(8):
        d = poly_eval(dp, x)
        if d == 0:
            break
        step = poly_eval(p, x) / d
        nx = x - step
        if not (a <= nx <= b):
            break
        if nx == x:
            break
        x = nx
    return x


def log10_abs(x: mpfr) -> float:
    return float(gmpy2.log10(abs(x))) if x != 0 else -math.inf


set_precision(default_precision())
