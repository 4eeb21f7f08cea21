"""Command-line interface: ``select``, ``simulate``, and ``asymptotics``.

CSV in, JSON/CSV out. Exit codes: 0 success, 2 validation failure (bad flag
values, missing columns, non-finite cells), 3 I/O failure (unreadable or
malformed files). Runs that draw tie-break uniforms require an explicit
``--seed``; repeating a command with the same seed reproduces its output
byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import sys



from . import __version__, io
from .asymptotics import asymptotic_fdr_power, population_sample_from_scores
from .dgps import SETTING_IDS, DgpSetting
from .errors import ContractError, IngestionError
from .pipeline import ThresholdSpec, select
from .scores import ScoreRule
from .sim import (
    McConfig,
    dgp_population,
    mixture_population,
    monte_carlo,
    pure_null_population,
    separated_population,
)

_SCORE_BY_FLAG = {
    "res": "residual",
    "clip": "clipped",
    "clip-threshold": "clipped_threshold",
}

_METHOD_BY_FLAG = {
    "rand": "randomized",
    "dtm": "deterministic",
    "sub": "same_class",
}


def _score_rule(args) -> ScoreRule:
    return ScoreRule(kind=_SCORE_BY_FLAG[args.score], clip_m=args.clip_m)


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ContractError(f"{flag} must be a comma-separated list of numbers") from None


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ContractError(f"{flag} must be a comma-separated list of integers") from None


# ---------------------------------------------------------------------------
# select
# ---------------------------------------------------------------------------


def cmd_select(args) -> int:
    if sum(x is not None for x in (args.threshold_col, args.threshold_const, args.group_quantile)) > 1:
        raise ContractError(
            "--threshold-col, --threshold-const and --group-quantile are mutually exclusive"
        )
    if args.group_quantile is not None:
        if args.group is None:
            raise ContractError("--group-quantile requires --group")
        if args.train is None:
            raise ContractError("--group-quantile requires --train (training outcomes per group)")
        if args.outcome is None:
            raise ContractError("--group-quantile requires --outcome (outcome column name)")
        spec = ThresholdSpec(
            mode="group_quantile", q_pop=args.group_quantile, group_column=args.group
        )
        training_outcomes = io.read_grouped_outcomes(args.train, args.outcome, args.group)
    elif args.threshold_col is not None:
        spec = ThresholdSpec(mode="per_sample", column=args.threshold_col)
        training_outcomes = None
    else:
        const = 0.0 if args.threshold_const is None else args.threshold_const
        spec = ThresholdSpec(
            mode="constant",
            constant=const,
            declared_calibration_dependent=args.calibration_dependent_threshold,
        )
        training_outcomes = None

    data = io.read_dataset(
        args.calib,
        args.test,
        pred_col=args.pred,
        outcome_col=args.outcome,
        threshold_col=args.threshold_col,
        group_col=args.group,
    )
    report = select(
        data,
        _score_rule(args),
        spec,
        method=_METHOD_BY_FLAG[args.method],
        q=args.q,
        seed=args.seed,
        training_outcomes=training_outcomes,
    )
    config = {
        "command": "select",
        "calib": str(args.calib),
        "test": str(args.test),
        "pred": args.pred,
        "outcome": args.outcome,
        "group": args.group,
        "train": str(args.train) if args.train else None,
        "score": args.score,
        "clip_m": args.clip_m,
        "method": args.method,
        "q": args.q,
        "seed": args.seed,
        "threshold": spec.describe(),
    }
    io.write_json_atomic(args.out, io.selection_payload(report, config))
    print(
        f"selected {report.result.n_selected} of {report.n_test} units "
        f"(k*={report.result.k_star}, tau_hat={report.result.tau_hat:.6g}, "
        f"q={report.q}) -> {args.out}"
    )
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    if args.setting is not None:
        setting_ids = [args.setting]
    elif args.settings is not None:
        setting_ids = _parse_int_list(args.settings, "--settings")
    else:
        setting_ids = list(SETTING_IDS)
    bad = [s for s in setting_ids if s not in SETTING_IDS]
    if bad:
        raise ContractError(f"setting id(s) out of range 1..8: {bad}")
    sigmas = _parse_float_list(args.sigma, "--sigma")
    if not sigmas or any(s <= 0 for s in sigmas):
        raise ContractError("--sigma values must be positive")
    scores = tuple(s.strip() for s in args.scores.split(",") if s.strip())

    reports = []
    for sid in setting_ids:
        for sigma in sigmas:
            cfg = McConfig(
                setting=DgpSetting(setting_id=sid, sigma=sigma),
                n_calib=args.n_calib,
                n_test=args.n_test,
                q=args.q,
                scores=scores,
                predictor=args.predictor,
                n_train=args.n_train,
                knn_k=args.knn_k,
                n_reps=args.reps,
                seed=args.seed,
            )
            print(
                f"setting {sid} sigma {sigma}: {args.reps} reps x {len(scores)} scores",
                file=sys.stderr,
            )
            reports.append(monte_carlo(cfg))

    config = {
        "command": "simulate",
        "settings": setting_ids,
        "sigma": sigmas,
        "scores": list(scores),
        "q": args.q,
        "n_calib": args.n_calib,
        "n_test": args.n_test,
        "reps": args.reps,
        "predictor": args.predictor,
        "seed": args.seed,
    }
    records = io.mc_records(reports)
    io.write_csv_atomic(args.out_csv, io.MC_CSV_COLUMNS, records)
    print(f"wrote {len(records)} rows -> {args.out_csv}")
    if args.out_json:
        io.write_json_atomic(args.out_json, io.mc_payload(reports, config))
    if args.emit_plot_data:
        io.write_csv_atomic(
            args.emit_plot_data, io.PLOT_DATA_COLUMNS, io.plot_data_records(reports)
        )
    if args.figure_dir:
        from .figures import render_simulation_figures

        paths = render_simulation_figures(records, args.figure_dir, q=args.q)
        print("figures: " + ", ".join(str(p) for p in paths))
    return 0


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------


def cmd_asymptotics(args) -> int:
    sources = sum(
        x is not None for x in (args.population, args.generator, args.setting)
    )
    if sources != 1:
        raise ContractError(
            "exactly one of --population, --generator, --setting must be given"
        )
    rule = _score_rule(args)
    c = args.threshold_const

    if args.population is not None:
        header, rows = io.read_table(args.population)
        pred = io.numeric_column(header, rows, args.pred, args.population)
        outcome = io.numeric_column(header, rows, args.outcome, args.population)
        if args.threshold_col is not None:
            c = io.numeric_column(header, rows, args.threshold_col, args.population)
    elif args.generator is not None:
        if args.generator == "mixture":
            pred, outcome = mixture_population(args.pi0, args.n_pop, args.seed + 1)
        elif args.generator == "separated":
            pred, outcome = separated_population(args.pi0, args.n_pop, args.seed + 1)
        else:
            pred, outcome = pure_null_population(args.n_pop, args.seed + 1)
    else:
        if args.setting not in SETTING_IDS:
            raise ContractError(f"setting id out of range 1..8: {args.setting}")
        pred, outcome = dgp_population(
            DgpSetting(setting_id=args.setting, sigma=args.dgp_sigma),
            args.n_pop,
            args.seed + 1,
        )

    pop = population_sample_from_scores(rule, pred, outcome, c)
    report = asymptotic_fdr_power(pop, args.q, args.seed)
    config = {
        "command": "asymptotics",
        "population": str(args.population) if args.population else None,
        "generator": args.generator,
        "setting": args.setting,
        "pi0": args.pi0,
        "n_pop": args.n_pop,
        "score": args.score,
        "clip_m": args.clip_m,
        "threshold_const": args.threshold_const,
        "q": args.q,
        "seed": args.seed,
    }
    io.write_json_atomic(args.out, io.asymptotic_payload(report, config))
    print(
        f"t_star={report.t_star:.6g} fdr_limit={report.fdr_limit:.6g} "
        f"power_limit={report.power_limit:.6g} -> {args.out}"
    )
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confselect",
        description="Calibrated shortlisting with false discovery rate control.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sel = sub.add_parser("select", help="run one selection on CSV inputs")
    p_sel.add_argument("--calib", required=True, help="calibration CSV (labeled rows)")
    p_sel.add_argument("--test", required=True, help="test CSV (rows to screen)")
    p_sel.add_argument("--pred", required=True, help="prediction column name")
    p_sel.add_argument("--outcome", help="outcome column name")
    p_sel.add_argument("--group", help="group column name")
    p_sel.add_argument("--threshold-col", help="per-sample threshold column")
    p_sel.add_argument("--threshold-const", type=float, help="constant threshold (default 0)")
    p_sel.add_argument(
        "--group-quantile", type=float,
        help="per-group quantile level of training outcomes",
    )
    p_sel.add_argument(
        "--train",
        help="training CSV supplying per-group outcomes for --group-quantile",
    )
    p_sel.add_argument("--score", choices=sorted(_SCORE_BY_FLAG), default="clip")
    p_sel.add_argument("--clip-M", dest="clip_m", type=float, default=100.0)
    p_sel.add_argument("--method", choices=sorted(_METHOD_BY_FLAG), default="rand")
    p_sel.add_argument("--q", type=float, required=True, help="target FDR level in (0,1)")
    p_sel.add_argument("--seed", type=int, help="tie-break seed (required unless --method dtm)")
    p_sel.add_argument("--out", required=True, help="output report JSON path")
    p_sel.add_argument(
        "--calibration-dependent-threshold",
        action="store_true",
        help="declare that the constant threshold was derived from calibration data",
    )
    p_sel.set_defaults(func=cmd_select)

    p_sim = sub.add_parser("simulate", help="Monte Carlo error/power estimates")
    p_sim.add_argument("--setting", type=int, help="single setting id (1..8)")
    p_sim.add_argument("--settings", help="comma-separated setting ids (default all 8)")
    p_sim.add_argument("--sigma", default="1.0", help="comma-separated noise scales")
    p_sim.add_argument("--q", type=float, default=0.1)
    p_sim.add_argument("--scores", default="res,clip,sub")
    p_sim.add_argument("--n-calib", type=int, default=200)
    p_sim.add_argument("--n-test", type=int, default=200)
    p_sim.add_argument("--reps", type=int, default=500)
    p_sim.add_argument("--predictor", choices=("oracle", "knn"), default="oracle")
    p_sim.add_argument("--n-train", type=int, default=200)
    p_sim.add_argument("--knn-k", type=int, default=20)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--out-csv", required=True)
    p_sim.add_argument("--out-json")
    p_sim.add_argument("--emit-plot-data", help="tidy long-format CSV for figures")
    p_sim.add_argument("--figure-dir", help="render metric figures into this directory")
    p_sim.set_defaults(func=cmd_simulate)

    p_asym = sub.add_parser("asymptotics", help="limiting threshold, FDR and power")
    p_asym.add_argument("--population", help="population CSV of (pred, outcome) rows")
    p_asym.add_argument("--pred", default="pred")
    p_asym.add_argument("--outcome", default="outcome")
    p_asym.add_argument("--threshold-col", help="per-row threshold column in --population")
    p_asym.add_argument(
        "--generator", choices=("mixture", "separated", "pure-null"),
        help="built-in analytic population",
    )
    p_asym.add_argument("--setting", type=int, help="draw the population from a DGP (1..8)")
    p_asym.add_argument("--dgp-sigma", type=float, default=1.0)
    p_asym.add_argument("--pi0", type=float, default=0.5)
    p_asym.add_argument("--n-pop", type=int, default=200_000)
    p_asym.add_argument("--score", choices=sorted(_SCORE_BY_FLAG), default="res")
    p_asym.add_argument("--clip-M", dest="clip_m", type=float, default=100.0)
    p_asym.add_argument("--threshold-const", type=float, default=0.0)
    p_asym.add_argument("--q", type=float, required=True)
    p_asym.add_argument("--seed", type=int, required=True)
    p_asym.add_argument("--out", required=True)
    p_asym.set_defaults(func=cmd_asymptotics)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ContractError, IngestionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OSError, csv.Error, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
