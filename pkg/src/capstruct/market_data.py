"""Market quote files.

A quote directory holds four files:

- ``cds.csv``     with header ``tenor_years,mid_bps``
- ``vols.csv``    with header ``maturity_days,moneyness,implied_vol``
- ``yields.csv``  with header ``tenor,yield_decimal``
- ``meta.json``   with keys ``date`` and ``stock_price`` (optionally
  ``shares_outstanding`` for balance-sheet conversions)

Writers reuse the same schemas with shortest-repr floats: emitted files
parse back to bit-identical values and re-emitting a loaded file is
idempotent.  Maturities are converted with ACT/365.  Loaders point at
the offending file and line.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import SchemaError

__all__ = [
    "CdsQuote",
    "VolQuote",
    "YieldQuote",
    "QuoteSet",
    "load_cds_csv",
    "load_vols_csv",
    "load_yields_csv",
    "load_quote_dir",
    "apply_quote_filters",
    "rows_to_csv",
    "write_cds_csv",
    "write_vols_csv",
    "write_yields_csv",
    "DAYS_PER_YEAR",
]

DAYS_PER_YEAR = 365.0

# quotes at the posted edges of the vol grid and ultra-short maturities
# are unreliable and excluded from calibration
_EDGE_MONEYNESS = (0.4, 1.5)
_MIN_MATURITY_DAYS = 60.0


@dataclass(frozen=True)
class CdsQuote:
    tenor_years: float
    mid_bps: float

    @property
    def spread(self) -> float:
        return self.mid_bps / 1e4


@dataclass(frozen=True)
class VolQuote:
    maturity_days: float
    moneyness: float
    implied_vol: float

    @property
    def maturity_years(self) -> float:
        return self.maturity_days / DAYS_PER_YEAR


@dataclass(frozen=True)
class YieldQuote:
    tenor: float
    yield_decimal: float


@dataclass(frozen=True)
class QuoteSet:
    """One market snapshot: CDS curve, vol grid, yields and spot."""

    date: str
    stock_price: float
    cds: tuple
    vols: tuple
    yields: tuple
    shares_outstanding: float | None = None


def _read_rows(path, expected_header):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    rows = list(csv.reader(text.splitlines()))
    if not rows or rows[0] != list(expected_header):
        raise SchemaError(
            f"{path}:1: expected header {','.join(expected_header)!r}"
        )
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(expected_header):
            raise SchemaError(f"{path}:{lineno}: expected {len(expected_header)} fields")
        try:
            values = [float(cell) for cell in row]
        except ValueError:
            raise SchemaError(f"{path}:{lineno}: non-numeric field") from None
        if not all(math.isfinite(v) for v in values):
            raise SchemaError(f"{path}:{lineno}: non-finite value")
        out.append((lineno, values))
    return path, out


def load_cds_csv(path) -> tuple:
    path, rows = _read_rows(path, ("tenor_years", "mid_bps"))
    quotes = []
    last = 0.0
    for lineno, (tenor, bps) in rows:
        if tenor <= 0.0 or bps < 0.0:
            raise SchemaError(f"{path}:{lineno}: tenor must be > 0 and spread >= 0")
        if tenor <= last:
            raise SchemaError(f"{path}:{lineno}: tenors must be strictly increasing")
        last = tenor
        quotes.append(CdsQuote(tenor, bps))
    return tuple(quotes)


def load_vols_csv(path) -> tuple:
    path, rows = _read_rows(path, ("maturity_days", "moneyness", "implied_vol"))
    quotes = []
    for lineno, (days, m, iv) in rows:
        if days <= 0.0 or m <= 0.0 or iv <= 0.0:
            raise SchemaError(f"{path}:{lineno}: fields must be positive")
        quotes.append(VolQuote(days, m, iv))
    return tuple(quotes)


def load_yields_csv(path) -> tuple:
    path, rows = _read_rows(path, ("tenor", "yield_decimal"))
    quotes = []
    last = 0.0
    for lineno, (tenor, rate) in rows:
        if tenor <= last:
            raise SchemaError(f"{path}:{lineno}: tenors must be strictly increasing")
        last = tenor
        quotes.append(YieldQuote(tenor, rate))
    return tuple(quotes)


def load_quote_dir(directory) -> QuoteSet:
    """Load a full quote directory (see module docstring for layout)."""
    directory = Path(directory)
    meta_path = directory / "meta.json"
    try:
        meta = json.loads(meta_path.read_text())
    except OSError as exc:
        raise SchemaError(f"{meta_path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{meta_path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    for key in ("date", "stock_price"):
        if key not in meta:
            raise SchemaError(f"{meta_path}: missing key {key!r}")
    spot = meta["stock_price"]
    if not isinstance(spot, (int, float)) or not spot > 0.0:
        raise SchemaError(f"{meta_path}: stock_price must be a positive number")
    shares = meta.get("shares_outstanding")
    if shares is not None and not (isinstance(shares, (int, float)) and shares > 0):
        raise SchemaError(f"{meta_path}: shares_outstanding must be positive")
    return QuoteSet(
        date=str(meta["date"]),
        stock_price=float(spot),
        cds=load_cds_csv(directory / "cds.csv"),
        vols=load_vols_csv(directory / "vols.csv"),
        yields=load_yields_csv(directory / "yields.csv"),
        shares_outstanding=None if shares is None else float(shares),
    )


def apply_quote_filters(quotes: QuoteSet) -> QuoteSet:
    """Drop edge-of-grid moneyness and sub-60-day vol quotes."""
    kept = tuple(
        q
        for q in quotes.vols
        if q.maturity_days >= _MIN_MATURITY_DAYS
        and not any(abs(q.moneyness - edge) < 1e-12 for edge in _EDGE_MONEYNESS)
    )
    return replace(quotes, vols=kept)


# --------------------------------------------------------------------- writers


def rows_to_csv(header, rows) -> str:
    """CSV text with shortest-repr floats (stable under reload/re-emit)."""
    lines = [",".join(header)]
    lines.extend(",".join(str(float(v)) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _write_rows(path, header, rows) -> None:
    Path(path).write_text(rows_to_csv(header, rows))


def write_cds_csv(path, quotes) -> None:
    _write_rows(path, ("tenor_years", "mid_bps"),
                [(q.tenor_years, q.mid_bps) for q in quotes])


def write_vols_csv(path, quotes) -> None:
    _write_rows(path, ("maturity_days", "moneyness", "implied_vol"),
                [(q.maturity_days, q.moneyness, q.implied_vol) for q in quotes])


def write_yields_csv(path, quotes) -> None:
    _write_rows(path, ("tenor", "yield_decimal"),
                [(q.tenor, q.yield_decimal) for q in quotes])
