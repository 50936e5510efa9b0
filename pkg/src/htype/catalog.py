"""Dimensions of the nonsymmetric spaces S, by center dimension k.

For each k the modules are sums of j irreducible blocks (m = j d(k)), so the
dimensions m + k + 1 form an arithmetic progression with stride d(k).  The
symmetric cases are the Iwasawa ones: every module for k = 1, isotypic
modules for k = 3, and the isotypic module with m = 8 for k = 7.  Whenever a
nonsymmetric module exists with j blocks, one exists with j + 1 blocks, so
only the first admissible j depends on k.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass

from .algebra import CliffordSpec, has_chirality, min_dimension

__all__ = [
    "TableRow",
    "VERIFIED_K_RANGE",
    "first_nonsymmetric_multiple",
    "table_row",
    "nonsymmetric_dims",
    "render_table",
    "expected_symmetric",
    "specs_up_to_dim",
]

VERIFIED_K_RANGE = range(1, 9)


def first_nonsymmetric_multiple(k: int) -> int | None:
    """Smallest number of irreducible blocks admitting a nonsymmetric S."""
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return None
    if k in (3, 7):
        return 2
    return 1


@dataclass(frozen=True)
class TableRow:
    k: int
    base: int | None
    stride: int | None
    note: str

    @property
    def descriptor(self) -> str:
        if self.base is None:
            return "—"
        return f"{self.base}+{self.stride}n"

    def values(self, n_max: int) -> list:
        if self.base is None:
            return []
        return [self.base + self.stride * n for n in range(n_max + 1)]


def _note(k: int) -> str:
    if k == 1:
        note = "all symmetric (complex hyperbolic)"
    elif k == 3:
        note = "isotypic modules symmetric (quaternionic hyperbolic)"
    elif k == 7:
        note = "isotypic m=8 symmetric (octonionic hyperbolic plane)"
    else:
        note = "no symmetric members"
    if k not in VERIFIED_K_RANGE:
        note += "; extrapolated beyond k = 8"
    return note


def table_row(k: int) -> TableRow:
    d = min_dimension(k)
    j = first_nonsymmetric_multiple(k)
    if j is None:
        return TableRow(k, None, None, _note(k))
    return TableRow(k, j * d + k + 1, d, _note(k))


def nonsymmetric_dims(k: int, n_max: int) -> list:
    """dim S of nonsymmetric spaces with center dimension k, for n = 0..n_max."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    return table_row(k).values(n_max)


def render_table(n_max: int, fmt: str = "text", ks=VERIFIED_K_RANGE) -> str:
    """The dimension table as aligned text, CSV (k,n,dim) or JSON."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    rows = [table_row(k) for k in ks]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "n", "dim"])
        for row in rows:
            for n, dim in enumerate(row.values(n_max)):
                writer.writerow([row.k, n, dim])
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "n_max": n_max,
            "rows": [
                {**asdict(row), "descriptor": row.descriptor, "dims": row.values(n_max)}
                for row in rows
            ],
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [f"{'k':>3}  {'dim S':<8}  values (n = 0..{n_max})"]
    for row in rows:
        vals = ", ".join(map(str, row.values(n_max))) or "—"
        lines.append(f"{row.k:>3}  {row.descriptor:<8}  {vals}")
    return "\n".join(lines) + "\n"


def expected_symmetric(spec: CliffordSpec) -> bool:
    """Whether the module is of Iwasawa type, hence S symmetric."""
    if spec.k == 1:
        return True
    if spec.k == 3:
        return spec.isotypic
    if spec.k == 7:
        return spec.isotypic and spec.m == 8
    return False


def specs_up_to_dim(max_dim: int) -> list:
    """Every CliffordSpec (up to block order) with m + k + 1 <= max_dim."""
    out = []
    for k in range(1, max_dim):
        d = min_dimension(k)
        j = 1
        while j * d + k + 1 <= max_dim:
            if has_chirality(k):
                for n_plus in range(j, -1, -1):
                    out.append(CliffordSpec(k, (n_plus, j - n_plus)))
            else:
                out.append(CliffordSpec(k, j))
            j += 1
    return out


