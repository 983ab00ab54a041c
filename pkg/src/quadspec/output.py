"""Number formatting and CSV emission."""

from __future__ import annotations

import csv
import io
from decimal import ROUND_HALF_EVEN, Context, Decimal
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpfr

from .errors import InternalError

SIG_DIGITS = 10


def _decimal(x) -> Decimal:
    if isinstance(x, (int, Decimal)):
        return Decimal(x)
    x = mpfr(x)
    if x == 0:
        return Decimal(0)
    if not gmpy2.is_finite(x):
        raise InternalError(f"cannot format non-finite value {x}")
    mant, exp, _ = x.digits(10, 40)
    neg = mant.startswith("-")
    digits = mant.lstrip("-")
    return Decimal(f"{'-' if neg else ''}{digits}E{exp - len(digits)}")


def format_sig(x, digits: int = SIG_DIGITS) -> str:
    """Round half-even to ``digits`` significant digits, keeping trailing zeros.

    Plain notation is used for magnitudes in [1e-4, 1e10); anything else is
    written in scientific notation.
    """
    d = Context(prec=digits, rounding=ROUND_HALF_EVEN).plus(_decimal(x))
    if d == 0:
        return "0." + "0" * (digits - 1)
    exponent = d.adjusted()
    if -4 <= exponent < 10:
        places = max(digits - 1 - exponent, 0)
        return f"{d:.{places}f}"
    return f"{d:.{digits - 1}e}"


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return format_sig(value)


def emit_csv(rows: Iterable[Sequence], header: Sequence[str]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise InternalError(f"row has {len(row)} cells, header has {len(header)}")
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue().encode("ascii")
