"""Command line front end.

Exit codes: 0 success, 2 malformed inputs, 3 numerical-quality failure,
4 calibration non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .barrier import barrier_call, survival_curve
from .calibration import CalibrationProblem, calibrate
from .credit import YieldCurve, cds_curve
from .equity import vol_surface
from .errors import CapstructError, ConvergenceError, NumericError, SchemaError
from .fourier import covering_grid
from .market_data import (
    DAYS_PER_YEAR,
    apply_quote_filters,
    load_quote_dir,
    load_yields_csv,
    rows_to_csv,
)
from .mc import mc_call
from .model import ModelParams, TimeChange

_PARAM_KEYS = ("sigma_v", "sigma_d", "rho", "v0", "d0")


def _fail_schema(message: str) -> "SchemaError":
    return SchemaError(message)


def load_params_json(path) -> ModelParams:
    """Model parameters from a params.json file."""
    path = Path(path)
    try:
        blob = json.loads(path.read_text())
    except OSError as exc:
        raise _fail_schema(f"{path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise _fail_schema(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(blob, dict):
        raise _fail_schema(f"{path}: expected a JSON object")
    kind = blob.get("model")
    if kind not in ("gbm", "vg", "exp"):
        raise _fail_schema(f"{path}: key 'model' must be one of gbm, vg, exp")
    for key in _PARAM_KEYS:
        if not isinstance(blob.get(key), (int, float)):
            raise _fail_schema(f"{path}: missing or non-numeric key {key!r}")
    if kind == "gbm":
        tc = TimeChange.deterministic()
    else:
        for key in ("b", "c"):
            if not isinstance(blob.get(key), (int, float)):
                raise _fail_schema(f"{path}: model {kind!r} needs numeric key {key!r}")
        maker = TimeChange.vg if kind == "vg" else TimeChange.exp_jumps
        try:
            tc = maker(float(blob["b"]), float(blob["c"]))
        except ValueError as exc:
            raise _fail_schema(f"{path}: {exc}") from None
    recovery = blob.get("recovery", 0.0)
    if not isinstance(recovery, (int, float)):
        raise _fail_schema(f"{path}: key 'recovery' must be numeric")
    try:
        return ModelParams(
            sigma_v=float(blob["sigma_v"]),
            sigma_d=float(blob["sigma_d"]),
            rho=float(blob["rho"]),
            v0=float(blob["v0"]),
            d0=float(blob["d0"]),
            tc=tc,
            recovery=float(recovery),
        )
    except ValueError as exc:
        raise _fail_schema(f"{path}: {exc}") from None


def _curve_from_args(args) -> YieldCurve:
    if args.yields is None:
        return YieldCurve.flat(0.0)
    quotes = load_yields_csv(args.yields)
    return YieldCurve.from_par_quotes(
        [q.tenor for q in quotes], [q.yield_decimal for q in quotes]
    )


def _float_list(text: str, name: str) -> list:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise _fail_schema(f"--{name} must be a comma-separated list of numbers") from None
    if not values:
        raise _fail_schema(f"--{name} must list at least one value")
    return values


def _emit(text: str, out_path) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text)


# ------------------------------------------------------------------ commands


def cmd_price_call(args) -> int:
    params = load_params_json(args.params)
    curve = _curve_from_args(args)
    discount = float(curve.discount(args.maturity))
    decomposition = barrier_call(params, args.maturity, args.strike, discount)
    value = {
        "vanilla": decomposition.vanilla,
        "down-out": decomposition.down_out,
        "down-in": decomposition.down_in,
    }[args.type]
    print(f"{value:.10g}")
    return 0


def cmd_survival(args) -> int:
    params = load_params_json(args.params)
    tenors = _float_list(args.tenors, "tenors")
    if any(t <= 0.0 for t in tenors):
        raise _fail_schema("--tenors must be positive")
    probs = survival_curve(params, tenors)
    _emit(rows_to_csv(("tenor_years", "survival_probability"),
                      list(zip(tenors, probs))), args.out)
    return 0


def cmd_cds_curve(args) -> int:
    params = load_params_json(args.params)
    curve = _curve_from_args(args)
    tenors = _float_list(args.tenors, "tenors")
    spreads = cds_curve(params, tenors, curve)
    rows = [(t, s * 1e4) for t, s in zip(tenors, spreads)]
    _emit(rows_to_csv(("tenor_years", "mid_bps"), rows), args.out)
    return 0


def cmd_surface(args) -> int:
    params = load_params_json(args.params)
    curve = _curve_from_args(args)
    days = _float_list(args.maturities_days, "maturities-days")
    moneyness = _float_list(args.moneyness, "moneyness")
    if any(d <= 0.0 for d in days) or any(m <= 0.0 for m in moneyness):
        raise _fail_schema("maturities and moneyness must be positive")
    surface = vol_surface(params, [d / DAYS_PER_YEAR for d in days], moneyness, curve)
    rows = [
        (d, m, surface[i, j])
        for i, d in enumerate(days)
        for j, m in enumerate(moneyness)
    ]
    _emit(rows_to_csv(("maturity_days", "moneyness", "implied_vol"), rows), args.out)
    return 0


def cmd_calibrate(args) -> int:
    quotes = apply_quote_filters(load_quote_dir(args.quotes))
    problem = CalibrationProblem.from_quotes(quotes)
    result = calibrate(
        problem, args.model, starts=args.starts, seed=args.seed, maxiter=args.maxiter
    )
    blob = json.dumps(result.to_json_dict(), indent=2, sort_keys=True) + "\n"
    _emit(blob, args.out)
    print(
        f"calibrated model={result.kind} rmse={result.rmse:.6f} "
        f"objective={result.objective:.6e} evaluations={result.n_evaluations}",
        file=sys.stderr,
    )
    return 0


def cmd_mc_validate(args) -> int:
    params = load_params_json(args.params)
    curve = _curve_from_args(args)
    discount = float(curve.discount(args.maturity))
    grid = covering_grid(params, args.maturity, [args.strike], discount, mirror=True)
    decomposition = barrier_call(params, args.maturity, args.strike, discount, grid=grid)
    engine = decomposition.down_out if args.knockout else decomposition.vanilla
    estimate = mc_call(
        params,
        args.maturity,
        args.strike,
        discount,
        knockout=args.knockout,
        n_paths=args.paths,
        seed=args.seed,
    )
    z = abs(engine - estimate.value) / max(estimate.std_error, 1e-300)
    print(
        f"engine={engine:.8g} mc={estimate.value:.8g} "
        f"se={estimate.std_error:.3g} z={z:.2f}"
    )
    if z > args.z_max:
        raise NumericError(
            f"transform price differs from simulation by {z:.2f} standard errors"
        )
    return 0


# -------------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capstruct",
        description="Structural credit-equity model: pricing and calibration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_params_and_curve(p):
        p.add_argument("--params", required=True, help="params.json file")
        p.add_argument("--yields", help="yields.csv (flat zero curve if omitted)")

    p = sub.add_parser("price-call", help="equity call with optional knockout")
    add_params_and_curve(p)
    p.add_argument("--strike", type=float, required=True)
    p.add_argument("--maturity", type=float, required=True, help="years")
    p.add_argument("--type", choices=("vanilla", "down-out", "down-in"),
                   default="vanilla")
    p.set_defaults(handler=cmd_price_call)

    p = sub.add_parser("survival", help="survival probabilities")
    p.add_argument("--params", required=True)
    p.add_argument("--tenors", required=True, help="comma-separated years")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_survival)

    p = sub.add_parser("cds-curve", help="par CDS spreads in basis points")
    add_params_and_curve(p)
    p.add_argument("--tenors", required=True, help="comma-separated years")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_cds_curve)

    p = sub.add_parser("surface", help="model implied-volatility surface")
    add_params_and_curve(p)
    p.add_argument("--maturities-days", required=True, help="comma-separated days")
    p.add_argument("--moneyness", required=True, help="comma-separated strike/spot")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_surface)

    p = sub.add_parser("calibrate", help="fit parameters to a quote directory")
    p.add_argument("--quotes", required=True,
                   help="directory with cds.csv, vols.csv, yields.csv, meta.json")
    p.add_argument("--model", choices=("gbm", "vg", "exp"), default="vg")
    p.add_argument("--starts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--maxiter", type=int, default=150)
    p.add_argument("--out", help="write params.json here (stdout if omitted)")
    p.set_defaults(handler=cmd_calibrate)

    p = sub.add_parser("mc-validate", help="cross-check one price by simulation")
    add_params_and_curve(p)
    p.add_argument("--strike", type=float, required=True)
    p.add_argument("--maturity", type=float, required=True)
    p.add_argument("--knockout", action="store_true")
    p.add_argument("--paths", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--z-max", type=float, default=3.0)
    p.set_defaults(handler=cmd_mc_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (NumericError, CapstructError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
