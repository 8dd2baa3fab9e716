"""Command line interface.

Subcommands: ``rates``, ``estimate``, ``mc-risk``, ``risk-sweep``,
``test-power``, ``chi2``, ``sigma-hat``, ``report``.  Data-emitting commands
write CSV or JSON; only ``report`` renders figures (next to its CSVs).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import calibration
from .errors import SparseFuncError
from .estimators import (
    EstimatorSpec,
    NoiseModel,
    Variant,
    apply_estimator,
    estimate_quadratic_positive_part,
    estimate_sigma_hat,
    trimmed_count,
)
from .harness import ExperimentConfig, risk_sweep, risk_report_to_json, monte_carlo_risk
from .lower_bounds import divergence_summary
from .model import (
    ObservationBatch,
    ParameterVector,
    SparsityClass,
    load_vector_schema,
    vectors_from_csv,
    worst_case_configs,
)
from .rates import (
    Functional,
    effective_sparsity,
    rate_l2norm,
    rate_l2norm_bq,
    rate_linear_b0,
    rate_linear_bq,
    rate_quadratic,
    rate_quadratic_bq,
)
from .testing import TestSpec, chebyshev_risk_bound, evaluate_test_risk

_FUNCTIONALS = {"L": Functional.LINEAR, "Q": Functional.QUADRATIC, "norm": Functional.L2_NORM}


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _out_stream(path: str | None):
    return open(path, "w", encoding="utf-8", newline="") if path else sys.stdout


def _emit(obj, args):
    text = json.dumps(obj, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _read_vector(path: str) -> tuple[np.ndarray, float | None]:
    """Read (y, sigma_or_None) from a JSON record or a one-vector CSV line."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        import jsonschema

        record = json.loads(text)
        try:
            jsonschema.validate(record, load_vector_schema())
        except jsonschema.ValidationError as exc:
            raise SparseFuncError(f"invalid vector record {path}: {exc.message}") from exc
        y = np.asarray(record.get("y", record.get("theta")), dtype=float)
        return y, float(record["sigma"]) if "sigma" in record else None
    vectors = vectors_from_csv(text)
    if not vectors:
        raise SparseFuncError(f"no vector found in {path}")
    return vectors[0], None


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------


def _cmd_rates(args) -> int:
    rows = []
    for d in args.d:
        for sigma in args.sigma:
            for s in args.s or [None]:
                row = {"d": d, "s": s, "sigma": sigma, "q": args.q, "r": args.r, "kappa": args.kappa}
                if s is not None:
                    lin = rate_linear_b0(s, d, sigma)
                    norm = rate_l2norm(s, d, sigma)
                    row.update(
                        psi_linear=lin.value,
                        zone_linear=lin.zone.value,
                        psi_l2norm=norm.value,
                        zone_l2norm=norm.zone.value,
                    )
                    if args.kappa is not None:
                        quad = rate_quadratic(s, d, sigma, args.kappa)
                        row.update(psi_quadratic=quad.value, zone_quadratic=quad.zone.value)
                if args.q is not None and args.r is not None:
                    row["m"] = effective_sparsity(args.r, sigma, args.q, d)
                    if args.q <= 1:
                        lq = rate_linear_bq(args.r, sigma, args.q, d)
                        row.update(psi_linear_lq=lq.value, zone_linear_lq=lq.zone.value)
                    if args.q < 2:
                        qq = rate_quadratic_bq(args.r, sigma, args.q, d)
                        nn = rate_l2norm_bq(args.r, sigma, args.q, d)
                        row.update(
                            psi_quadratic_lq=qq.value,
                            zone_quadratic_lq=qq.zone.value,
                            psi_l2norm_lq=nn.value,
                            zone_l2norm_lq=nn.zone.value,
                        )
                rows.append(row)
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    fh = _out_stream(args.out)
    try:
        if args.format == "csv":
            writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        elif args.format == "json":
            fh.write(json.dumps(rows, indent=2) + "\n")
        else:
            widths = {c: max(len(c), *(len(_cell(r.get(c))) for r in rows)) for c in columns}
            fh.write("  ".join(c.ljust(widths[c]) for c in columns) + "\n")
            for row in rows:
                fh.write("  ".join(_cell(row.get(c)).ljust(widths[c]) for c in columns) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------


def _cmd_estimate(args) -> int:
    y, sigma_from_file = _read_vector(args.input)
    unknown = args.sigma == "unknown"
    sigma = None if unknown else (float(args.sigma) if args.sigma else sigma_from_file)
    if not unknown and sigma is None:
        raise SparseFuncError("known-noise estimation needs --sigma or a sigma field in the input")

    functional = _FUNCTIONALS[args.functional]
    if args.cls == "b0":
        if args.s is None:
            raise SparseFuncError("class b0 needs --s")
        cls = SparsityClass.b0(args.s)
    elif args.cls == "bq":
        if args.q is None or args.r is None:
            raise SparseFuncError("class bq needs --q and --r")
        cls = SparsityClass.bq(args.q, args.r)
    else:
        if args.kappa is None or args.s is None:
            raise SparseFuncError("class b2b0 needs --kappa and --s")
        cls = SparsityClass.b2_cap_b0(args.kappa, args.s)
    spec = EstimatorSpec(
        functional=functional,
        class_params=cls,
        noise=NoiseModel.UNKNOWN if unknown else NoiseModel.KNOWN,
        variant=Variant.ADAPTIVE_LOGD if args.adaptive else Variant.EXACT_RATE,
    )
    obs = ObservationBatch(y, sigma if sigma is not None else 1.0)
    detail = apply_estimator(spec, obs)
    value = detail.value
    if args.positive_part and functional == Functional.QUADRATIC and not unknown:
        value = estimate_quadratic_positive_part(obs, cls.s, cls.kappa)
    _emit(
        {
            "estimate": value,
            "branch": detail.branch,
            "threshold": detail.threshold,
            "functional": args.functional,
            "class": args.cls,
            "d": int(y.size),
            "sigma": "unknown" if unknown else sigma,
        },
        args,
    )
    return 0


# ---------------------------------------------------------------------------
# mc-risk / risk-sweep
# ---------------------------------------------------------------------------


def _load_config(record: dict) -> ExperimentConfig:
    import jsonschema

    try:
        return ExperimentConfig.from_json(record)
    except jsonschema.ValidationError as exc:
        raise SparseFuncError(f"invalid experiment config: {exc.message}") from exc
    except ValueError as exc:
        raise SparseFuncError(f"invalid experiment config: {exc}") from exc


def _cmd_mc_risk(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        config = _load_config(json.load(fh))
    if args.theta:
        with open(args.theta, "r", encoding="utf-8") as fh:
            theta = ParameterVector.from_record(json.load(fh))
        thetas = [theta]
    else:
        thetas = config.witnesses()
    reports = {
        t.label or "theta": risk_report_to_json(monte_carlo_risk(config, t, workers=args.workers))
        for t in thetas
    }
    if args.out is None and config.output:
        args.out = config.output
    _emit(reports, args)
    return 0


def _cmd_risk_sweep(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    records = payload["configs"] if isinstance(payload, dict) else payload
    grid = [_load_config(rec) for rec in records]
    result = risk_sweep(grid, workers=args.workers)
    out_path = args.out or next((c.output for c in grid if c.output), None)
    fh = _out_stream(out_path)
    try:
        result.write_csv_file(fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


# ---------------------------------------------------------------------------
# test-power
# ---------------------------------------------------------------------------

POWER_COLUMNS = ["A", "type_one", "max_type_two", "total", "stderr_total"]


def _power_alternative(args) -> SparsityClass:
    if args.alt == "theta-qu":
        u = args.u if args.u is not None else args.s
        if u is None:
            raise SparseFuncError("theta-qu needs --u (or --s when q = 0)")
        return SparsityClass.theta_qu(args.q or 0.0, u, delta=1.0)
    if args.s is None:
        raise SparseFuncError(f"{args.alt} needs --s")
    if args.alt == "theta-s":
        return SparsityClass.theta_s(args.s, delta=1.0)
    return SparsityClass.theta_s_star(args.s, delta=1.0)


def power_curve_rows(
    alternative: SparsityClass,
    d: int,
    sigma: float,
    a_grid: list[float],
    reps: int,
    seed: int,
    workers: int = 1,
) -> list[dict]:
    """Empirical risk at each separation multiplier A; reused by `report`."""
    rows = []
    for A in a_grid:
        spec = TestSpec(alternative=alternative, amplitude_multiplier=A, sigma=sigma, d=d)
        witnesses = worst_case_configs(spec.concrete_alternative(), sigma, d)
        report = evaluate_test_risk(spec, witnesses, reps, seed, workers=workers)
        rows.append(
            {
                "A": A,
                "type_one": report.type_one,
                "max_type_two": report.max_type_two,
                "total": report.total,
                "stderr_total": report.stderr_total(),
            }
        )
    return rows


def _cmd_test_power(args) -> int:
    alternative = _power_alternative(args)
    rows = power_curve_rows(
        alternative, args.d, args.sigma, args.A_grid, args.reps, args.seed, workers=args.workers
    )
    fh = _out_stream(args.out)
    try:
        writer = csv.DictWriter(fh, fieldnames=POWER_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


# ---------------------------------------------------------------------------
# chi2 / sigma-hat / report
# ---------------------------------------------------------------------------


def _cmd_chi2(args) -> int:
    try:
        summary = divergence_summary(
            args.s, args.d, args.rho, signed=args.signed, include_exact=args.exact
        )
    except ValueError as exc:
        raise SparseFuncError(str(exc)) from exc
    _emit(summary.to_json(), args)
    return 0


def _cmd_sigma_hat(args) -> int:
    y, _ = _read_vector(args.input)
    _emit(
        {"sigma_hat": estimate_sigma_hat(y), "d": int(y.size), "trimmed_count": trimmed_count(y.size)},
        args,
    )
    return 0


def _cmd_report(args) -> int:
    from . import report

    paths = report.render_report(
        out_dir=args.out or "report",
        seed=args.seed,
        reps=args.reps,
        c_star=calibration.c_star(),
    )
    for path in paths:
        print(path)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsefunc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--out", help="output path (default: stdout)")
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("rates", parents=[common], help="tabulate rate values and zones")
    p.add_argument(
        "--format", choices=["csv", "json", "text"], default="csv", help="table format"
    )
    p.add_argument("--d", type=_int_list, required=True)
    p.add_argument("--s", type=_int_list)
    p.add_argument("--sigma", type=_float_list, default=[1.0])
    p.add_argument("--q", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--kappa", type=float)
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("estimate", parents=[common, fmt], help="run one estimator on one batch")
    p.add_argument("--input", required=True, help="JSON record or one-vector CSV")
    p.add_argument("--functional", choices=sorted(_FUNCTIONALS), required=True)
    p.add_argument("--class", dest="cls", choices=["b0", "bq", "b2b0"], required=True)
    p.add_argument("--s", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--sigma", help="noise level, or the word 'unknown'")
    p.add_argument("--adaptive", action="store_true", help="fully data-driven threshold")
    p.add_argument("--positive-part", action="store_true")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("mc-risk", parents=[common, fmt], help="Monte Carlo risk of one config")
    p.add_argument("--config", required=True)
    p.add_argument("--theta", help="JSON record; defaults to the config's witness list")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_mc_risk)

    p = sub.add_parser("risk-sweep", parents=[common, fmt], help="risk table over a config grid")
    p.add_argument("--config", required=True, help='JSON: {"configs": [...]} or a list')
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_risk_sweep)

    p = sub.add_parser("test-power", parents=[common, fmt], help="empirical testing risk curve")
    p.add_argument("--alt", choices=["theta-qu", "theta-s", "theta-s-star"], required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--s", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--u", type=float)
    p.add_argument("--A-grid", dest="A_grid", type=_float_list, default=[0.25, 0.5, 1, 2, 4, 8])
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_test_power)

    p = sub.add_parser("chi2", parents=[common, fmt], help="divergence bound (and exact value)")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--signed", action="store_true")
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=_cmd_chi2)

    p = sub.add_parser("sigma-hat", parents=[common, fmt], help="noise-level over-estimate")
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_sigma_hat)

    p = sub.add_parser("report", parents=[common, fmt], help="CSV outputs plus rendered figures")
    p.add_argument("--reps", type=int, default=500)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SparseFuncError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
