"""Quote file round-trips, schema validation, and liquidity filters."""

import json

import pytest

from capstruct.errors import SchemaError
from capstruct.market_data import (
    CdsQuote,
    DAYS_PER_YEAR,
    QuoteSet,
    VolQuote,
    YieldQuote,
    apply_quote_filters,
    load_cds_csv,
    load_quote_dir,
    load_vols_csv,
    load_yields_csv,
    rows_to_csv,
    write_cds_csv,
    write_vols_csv,
    write_yields_csv,
)

CDS = (CdsQuote(1.0, 83.0), CdsQuote(5.0, 269.65), CdsQuote(10.0, 341.2))
VOLS = (
    VolQuote(30, 0.4, 0.52),
    VolQuote(93, 1.0, 0.3292),
    VolQuote(338, 1.5, 0.31),
    VolQuote(338, 1.2, 0.3279),
)
YIELDS = (YieldQuote(0.25, 0.0013), YieldQuote(1.0, 0.0029), YieldQuote(10.0, 0.0358))


def _write_quote_dir(path, shares=None):
    write_cds_csv(path / "cds.csv", CDS)
    write_vols_csv(path / "vols.csv", VOLS)
    write_yields_csv(path / "yields.csv", YIELDS)
    meta = {"date": "2011-02-16", "stock_price": 16.05}
    if shares is not None:
        meta["shares_outstanding"] = shares
    (path / "meta.json").write_text(json.dumps(meta))


def test_units():
    assert CdsQuote(5.0, 250.0).spread == pytest.approx(0.025)
    assert VolQuote(365, 1.0, 0.3).maturity_years == pytest.approx(1.0)
    assert DAYS_PER_YEAR == 365.0


def test_round_trip_is_bit_identical(tmp_path):
    _write_quote_dir(tmp_path, shares=3.8e9)
    quotes = load_quote_dir(tmp_path)
    assert quotes.date == "2011-02-16"
    assert quotes.stock_price == 16.05
    assert quotes.shares_outstanding == 3.8e9
    assert quotes.cds == CDS
    assert quotes.vols == VOLS
    assert quotes.yields == YIELDS
    # re-serialising what was loaded reproduces the files byte for byte
    first = (tmp_path / "cds.csv").read_text()
    write_cds_csv(tmp_path / "cds.csv", quotes.cds)
    assert (tmp_path / "cds.csv").read_text() == first


def test_shares_outstanding_is_optional(tmp_path):
    _write_quote_dir(tmp_path)
    assert load_quote_dir(tmp_path).shares_outstanding is None


def test_rows_to_csv_shortest_repr():
    text = rows_to_csv(("a", "b"), [(0.1, 2.0), (1e-9, 341.157222)])
    assert text.splitlines()[0] == "a,b"
    assert "0.1,2" in text
    assert "1e-09,341.157222" in text


def test_header_mismatch(tmp_path):
    path = tmp_path / "cds.csv"
    path.write_text("tenor,mid_bps\n5,100\n")
    with pytest.raises(SchemaError, match="header"):
        load_cds_csv(path)


def test_bad_number_reports_file_and_line(tmp_path):
    path = tmp_path / "cds.csv"
    path.write_text("tenor_years,mid_bps\n1,83\nfive,100\n")
    with pytest.raises(SchemaError, match=r"cds\.csv:3"):
        load_cds_csv(path)


def test_wrong_field_count(tmp_path):
    path = tmp_path / "vols.csv"
    path.write_text("maturity_days,moneyness,implied_vol\n30,1.0\n")
    with pytest.raises(SchemaError, match=r"vols\.csv:2"):
        load_vols_csv(path)


def test_value_validation(tmp_path):
    path = tmp_path / "cds.csv"
    path.write_text("tenor_years,mid_bps\n0,83\n")
    with pytest.raises(SchemaError):
        load_cds_csv(path)
    path.write_text("tenor_years,mid_bps\n1,-5\n")
    with pytest.raises(SchemaError):
        load_cds_csv(path)
    path.write_text("tenor_years,mid_bps\n5,83\n1,100\n")
    with pytest.raises(SchemaError, match="increasing"):
        load_cds_csv(path)
    vols = tmp_path / "vols.csv"
    vols.write_text("maturity_days,moneyness,implied_vol\n30,1.0,0\n")
    with pytest.raises(SchemaError):
        load_vols_csv(vols)
    yields = tmp_path / "yields.csv"
    yields.write_text("tenor,yield_decimal\n1,nan\n")
    with pytest.raises(SchemaError):
        load_yields_csv(yields)


def test_missing_meta_keys(tmp_path):
    _write_quote_dir(tmp_path)
    (tmp_path / "meta.json").write_text(json.dumps({"date": "2011-02-16"}))
    with pytest.raises(SchemaError, match="stock_price"):
        load_quote_dir(tmp_path)
    (tmp_path / "meta.json").write_text(json.dumps({"date": "2011-02-16", "stock_price": -3}))
    with pytest.raises(SchemaError):
        load_quote_dir(tmp_path)


def test_missing_file(tmp_path):
    _write_quote_dir(tmp_path)
    (tmp_path / "vols.csv").unlink()
    with pytest.raises(SchemaError):
        load_quote_dir(tmp_path)


def test_liquidity_filters():
    quotes = QuoteSet(date="2011-02-16", stock_price=16.05, cds=CDS, vols=VOLS, yields=YIELDS)
    kept = apply_quote_filters(quotes).vols
    # extreme moneyness and sub-60-day maturities are dropped, the rest kept
    assert kept == (VolQuote(93, 1.0, 0.3292), VolQuote(338, 1.2, 0.3279))
    assert apply_quote_filters(quotes).cds == CDS
