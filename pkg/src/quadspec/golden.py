"""Reference tables shipped with the package and comparison against them."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from decimal import Decimal
from importlib import resources
from typing import Sequence

from gmpy2 import mpfr

from .precision import to_big

GOLDEN_REL_TOL = Decimal("5e-10")
TABLES = ("table1", "table2", "table3", "table4")


@dataclass(frozen=True)
class GoldenTable:
    name: str
    header: tuple[str, ...]
    rows: tuple[tuple[int, tuple[str, ...]], ...]


def load_golden(name: str) -> GoldenTable:
    text = resources.files("quadspec").joinpath("data", f"{name}.csv").read_text()
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = csv.reader(lines)
    header = tuple(next(reader))
    rows = tuple((int(r[0]), tuple(c.strip() for c in r[1:])) for r in reader)
    return GoldenTable(name, header, rows)


def compare(table: GoldenTable, computed: Sequence[tuple[int, Sequence[mpfr | None]]],
            rel_tol: Decimal = GOLDEN_REL_TOL) -> list[str]:
    """Human-readable mismatches; an empty list means every cell agrees."""
    problems = []
    got = {key: list(vals) for key, vals in computed}
    for key, cells in table.rows:
        if key not in got:
            problems.append(f"{table.name}: row {key} missing")
            continue
        row = got[key]
        for col, ref in enumerate(cells):
            val = row[col] if col < len(row) else None
            label = f"{table.name}: row {key}, {table.header[col + 1]}"
            if ref == "":
                if val is not None:
                    problems.append(f"{label}: expected blank, got {float(val):.10g}")
                continue
            if val is None:
                problems.append(f"{label}: expected {ref}, got blank")
                continue
            ref_v = to_big(ref)
            if abs(val - ref_v) > to_big(str(rel_tol)) * abs(ref_v):
                problems.append(f"{label}: expected {ref}, got {float(val):.12g}")
    extra = sorted(set(got) - {k for k, _ in table.rows})
    if extra:
        problems.append(f"{table.name}: unexpected rows {extra}")
    return problems
