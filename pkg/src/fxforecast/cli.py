"""
Command-line interface.

Every subcommand writes JSON (and, where tabular, CSV) into ``--out`` and
prints the path of the main JSON file.  Exit codes: 0 success, 1 usage or
input error, 2 numerical failure (divergence, non-convergence, singular or
degenerate data).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments, metrics, stattests, volatility
from .ann import TrainingDivergence
from .config import CONFIG_SCHEMA, ConfigError, PipelineConfig, load_config
from .dataio import (
    DataError,
    DegenerateRangeError,
    TimeSeriesFrame,
    ZeroVarianceError,
    describe,
    first_difference,
    load_frame,
    simple_returns,
)
from .narx import NarxModel, NarxSpec, evaluate_partitions, mlffnn_spec, train_narx
from .simulate import business_dates
from .volatility import ConvergenceError, GarchParams, GarchSpec

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for numerical failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ------------------------------------------------------------ helpers


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> Path:
    path.write_text(experiments.report_json(obj) + "\n")
    return path


def _write_text(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _frame(args, cfg: PipelineConfig) -> TimeSeriesFrame:
    if getattr(args, "data", None):
        return load_frame(args.data, getattr(args, "date_column", None))
    return experiments.load_pipeline_frame(cfg)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _test_csv(results) -> str:
    rows = [[r.test, r.spec or "", repr(float(r.statistic)), repr(float(r.p_value)), r.nuisance if r.nuisance is not None else "",
             r.decision, stattests.significance_stars(r.p_value)] for r in results]
    return _rows_csv(["test", "spec", "statistic", "p_value", "nuisance", "decision", "stars"], rows)


# -------------------------------------------------------- subcommands


def cmd_ingest(args, cfg):
    frame = _frame(args, cfg)
    new = {}
    for col in args.returns or []:
        r = simple_returns(frame[col], log=args.log)
        new[f"{col}_{'logret' if args.log else 'ret'}"] = np.concatenate([[np.nan], r])
    for col in args.difference or []:
        new[f"{col}_diff"] = np.concatenate([[np.nan], first_difference(frame[col])])
    if new:
        cols = {k: np.asarray(v)[1:] for k, v in {**frame.columns, **new}.items()}
        frame = TimeSeriesFrame(frame.dates[1:], cols, frame.dropped)
    out = _out_dir(args)
    frame.to_csv(out / "frame.csv")
    meta = {"n": frame.n, "columns": frame.names, "dropped_rows": frame.dropped,
            "first_date": str(frame.dates[0]), "last_date": str(frame.dates[-1])}
    return _write_json(out / "ingest.json", meta)


def cmd_describe(args, cfg):
    frame = _frame(args, cfg)
    names = args.columns or frame.names
    stats = {name: describe(frame[name]) for name in names}
    jb = {name: stattests.jarque_bera(frame[name]) for name in names}
    out = _out_dir(args)
    rows = []
    for name, d in stats.items():
        rows.append([name] + [repr(float(v)) for v in (d.mean, d.median, d.max, d.min, d.std_dev, d.skewness, d.kurtosis)]
                    + [repr(float(jb[name].statistic)), repr(float(jb[name].p_value)), d.n])
    _write_text(out / "describe.csv", _rows_csv(
        ["column", "mean", "median", "max", "min", "std_dev", "skewness", "kurtosis", "jarque_bera", "jb_p_value", "n"], rows))
    body = {name: {**stats[name].to_dict(), "jarque_bera": jb[name].to_dict()} for name in names}
    return _write_json(out / "describe.json", body)


def cmd_stattest(args, cfg):
    frame = _frame(args, cfg)
    st = cfg.raw["stattests"]
    level = args.level if args.level is not None else st["level"]
    cols = args.columns or [cfg.target]
    results = []
    for col in cols:
        x = frame[col]
        if args.test == "jb":
            res = stattests.jarque_bera(x, level)
        elif args.test == "adf":
            sel = args.lag_selection or st["adf_lag_selection"]
            if args.lags is not None and args.lag_selection is None:
                sel = "fixed"
            res = stattests.adf_test(x, args.spec or st["adf_spec"], max_lag=args.lags, lag_selection=sel, level=level)
        elif args.test == "pp":
            res = stattests.pp_test(x, args.spec or st["pp_spec"], bandwidth=args.bandwidth, level=level)
        else:
            res = stattests.arch_lm_test(x, args.lags or st["archlm_lags"], level)
        results.append(res)
    out = _out_dir(args)
    _write_text(out / f"stattest_{args.test}.csv", _test_csv(results))
    body = {col: {**r.to_dict(), "extra": r.extra} for col, r in zip(cols, results)}
    return _write_json(out / f"stattest_{args.test}.json", body)


def _train_common(args, cfg, spec):
    frame = _frame(args, cfg)
    algorithm = args.algorithm or cfg.algorithms[0]
    tc = cfg.train_config(algorithm)
    model = train_narx(frame, spec, args.neurons, tc, seed=cfg.seed, split=cfg.split, scaling=cfg.raw["scaling"])
    parts = evaluate_partitions(model, frame)
    out = _out_dir(args)
    _write_text(out / "model.json", model.to_json() + "\n")
    _write_text(out / "history.csv", model.history.to_csv())
    _write_text(out / "metrics.csv", metrics.reports_to_csv(parts.values()))
    body = {
        "spec": spec.to_dict(),
        "neurons": args.neurons,
        "algorithm": tc.algorithm,
        "seed": cfg.seed,
        "stop_reason": model.history.stop_reason,
        "epochs": model.history.epochs,
        "best_epoch": model.history.best_epoch,
        "metrics": {k: v.to_dict() for k, v in parts.items()},
    }
    return _write_json(out / "train.json", body)


def cmd_train_mlffnn(args, cfg):
    spec = mlffnn_spec(args.exogenous or cfg.exogenous, args.target or cfg.target)
    return _train_common(args, cfg, spec)


def cmd_train_narx(args, cfg):
    nx = dict(cfg.raw["narx"])
    for k in ("input_delay", "output_delay", "feedback_mode"):
        if getattr(args, k) is not None:
            nx[k] = getattr(args, k)
    spec = NarxSpec(tuple(args.exogenous or cfg.exogenous), args.target or cfg.target, **nx)
    return _train_common(args, cfg, spec)


def cmd_fit_garch(args, cfg):
    frame = _frame(args, cfg)
    if args.family:
        specs = [GarchSpec(args.family, args.p, args.q, tuple(args.regressors if args.regressors is not None else cfg.exogenous),
                           target=args.target or cfg.target, difference=tuple(args.difference or ()),
                           literal_leverage=args.literal_leverage)]
    else:
        specs = cfg.garch_specs()
    out = _out_dir(args)
    fits, rows = [], []
    for spec in specs:
        f = volatility.fit(spec, frame, seed=cfg.seed, restarts=cfg.raw["garch_restarts"])
        z_stats, z_jb = volatility.residual_diagnostics(f)
        fits.append({**f.to_dict(), "residual_diagnostics": {**z_stats.to_dict(), "jarque_bera": z_jb.to_dict()}})
        for c in f.to_dict()["coefficients"]:
            rows.append([spec.name, c["name"], c["estimate"], c["std_error"], c["z"], c["p_value"], c["stars"]])
        tag = spec.name.replace("(", "_").replace(",", "_").replace(")", "")
        _write_text(out / f"variance_{tag}.csv",
                    _rows_csv(["date", "h", "std_resid"], [[str(d), repr(float(h)), repr(float(z))] for d, h, z in zip(f.dates, f.h, f.std_resid)]))
    _write_text(out / "coefficients.csv", _rows_csv(["model", "name", "estimate", "std_error", "z", "p_value", "stars"], rows))
    return _write_json(out / "garch.json", fits)


def cmd_evaluate(args, cfg):
    frame = _frame(args, cfg)
    out = _out_dir(args)
    if args.model:
        model = NarxModel.from_json(Path(args.model).read_text())
        model.split = cfg.split
        reports = list(evaluate_partitions(model, frame).values())
    else:
        if not (args.actual and args.predicted):
            raise UsageError("evaluate needs --model or both --actual and --predicted")
        reports = [metrics.evaluate(frame[args.actual], frame[args.predicted], "all")]
    _write_text(out / "evaluate.csv", metrics.reports_to_csv(reports))
    return _write_json(out / "evaluate.json", [r.to_dict() for r in reports])


def cmd_grid(args, cfg):
    frame = _frame(args, cfg)
    fams = [args.family] if args.family else list(cfg.families)
    out = _out_dir(args)
    body, all_recs = {}, []
    for fam in fams:
        recs = experiments.run_grid(frame, fam, cfg.target, cfg.exogenous, cfg.split, cfg.train_config(), cfg.seed,
                                    cfg.neurons, cfg.algorithms, cfg.raw["narx"], cfg.raw["scaling"], cfg.raw["n_jobs"])
        all_recs += recs
        summary = experiments.summarize_grid(recs)
        _write_text(out / f"summary_{fam}.csv", summary.to_csv())
        body[fam] = {"records": [r.to_dict() for r in recs], "summary": summary.to_dict()}
    _write_text(out / "records.csv", experiments.records_to_csv(all_recs))
    return _write_json(out / "grid.json", body)


def _load_records(path) -> list[dict]:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        groups = [v["records"] for v in data.values() if isinstance(v, dict) and "records" in v]
        if "grids" in data:
            groups = [v["records"] for v in data["grids"].values()]
        data = [r for g in groups for r in g]
    flat = []
    for r in data:
        test, train = r.get("test") or {}, r.get("train") or {}
        flat.append({"family": r["family"], "neurons": r["neurons"], "algorithm": r["algorithm"], "failed": r.get("failed", False),
                     "test_mse": test.get("mse"), "train_mse": train.get("mse"), "test_r": test.get("r"), "train_r": train.get("r")})
    return flat


def cmd_ancova(args, cfg):
    recs = _load_records(args.records)
    fams = sorted({r["family"] for r in recs})
    if args.family:
        fams = [args.family]
    out = _out_dir(args)
    body = {}
    for fam in fams:
        table = experiments.ancova([r for r in recs if r["family"] == fam], response=args.response,
                                   covariate=None if args.one_way else "neurons",
                                   covariate_as_factor=args.covariate_as_factor)
        _write_text(out / f"ancova_{fam}.csv", table.to_csv())
        body[fam] = table.to_dict()
    return _write_json(out / "ancova.json", body)


def cmd_compare(args, cfg):
    frame = _frame(args, cfg)
    report = experiments.run_pipeline(cfg, frame)
    out = _out_dir(args)
    comp = report.get("comparison", {})
    if "chart" in comp:
        _write_text(out / "chart.csv", _rows_csv(["model", "mse"], [[c["model"], repr(c["mse"])] for c in comp["chart"]]))
        _write_text(out / "garch_forecast.csv", _rows_csv(["model", "mse", "theil"], [[g["model"], repr(g["mse"]), repr(g["theil"])] for g in comp["garch"]]))
    return _write_json(out / "report.json", report)


def cmd_simulate(args, cfg):
    out = _out_dir(args)
    seed = cfg.seed
    if args.process == "garch":
        params = GarchParams(args.omega, np.array(args.alpha), np.array(args.beta), gamma=np.array(args.gamma or []))
        family = "EGARCH" if args.egarch else "GARCH"
        gen = experiments.gen_egarch if args.egarch else experiments.gen_garch
        eps = gen(params, args.n, seed)
        frame = TimeSeriesFrame(business_dates(args.n), {"eps": eps})
        meta = {"process": family, "omega": args.omega, "alpha": args.alpha, "beta": args.beta, "gamma": args.gamma or [], "n": args.n, "seed": seed}
    elif args.process == "rw":
        frame = TimeSeriesFrame(business_dates(args.n), {"y": experiments.gen_random_walk(args.n, args.drift, seed)})
        meta = {"process": "random_walk", "drift": args.drift, "n": args.n, "seed": seed}
    else:
        frame = experiments.gen_narx_process(args.n, seed, noise_sd=args.noise_sd)
        meta = {"process": "narx", "noise_sd": args.noise_sd, "n": args.n, "seed": seed}
    frame.to_csv(out / "simulated.csv")
    return _write_json(out / "simulate.json", meta)


def cmd_schema(args, cfg):
    print(json.dumps(CONFIG_SCHEMA, indent=2))
    return None


# ------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config JSON (see `fxforecast schema`)")
    common.add_argument("--seed", type=int, help="base seed; overrides the config")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", help="input CSV; defaults to the config's data source")
    data.add_argument("--date-column", help="name of the date column (default: first column)")

    p = _Parser(prog="fxforecast", description="Exchange-rate forecasting: neural networks vs GARCH-family models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ingest", parents=[common, data], help="load a CSV, derive returns/differences, write a clean frame")
    s.add_argument("--returns", nargs="+", metavar="COL")
    s.add_argument("--log", action="store_true", help="log returns instead of simple returns")
    s.add_argument("--difference", nargs="+", metavar="COL")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("describe", parents=[common, data], help="descriptive statistics and Jarque-Bera per column")
    s.add_argument("--columns", nargs="+")
    s.set_defaults(func=cmd_describe)

    s = sub.add_parser("stattest", parents=[common, data], help="run one hypothesis test on columns")
    s.add_argument("test", choices=["jb", "adf", "pp", "archlm"])
    s.add_argument("--columns", nargs="+")
    s.add_argument("--spec", choices=["n", "c", "ct"], help="deterministic terms (adf/pp)")
    s.add_argument("--lags", type=int, help="ADF max lag (fixed if no --lag-selection) or ARCH-LM lags")
    s.add_argument("--lag-selection", choices=["aic", "bic", "fixed"])
    s.add_argument("--bandwidth", type=int, help="Newey-West bandwidth for PP")
    s.add_argument("--level", type=float)
    s.set_defaults(func=cmd_stattest)

    for name, func, narx in (("train-mlffnn", cmd_train_mlffnn, False), ("train-narx", cmd_train_narx, True)):
        s = sub.add_parser(name, parents=[common, data], help=f"train one {'NARX' if narx else 'feed-forward'} network")
        s.add_argument("--target")
        s.add_argument("--exogenous", nargs="+")
        s.add_argument("--neurons", type=int, default=10)
        s.add_argument("--algorithm", help="LM, SCG, CG_PB, CG_FR or CG_PR")
        if narx:
            s.add_argument("--input-delay", type=int)
            s.add_argument("--output-delay", type=int)
            s.add_argument("--feedback-mode", choices=["exogenous_only", "output_feedback"])
        s.set_defaults(func=func)

    s = sub.add_parser("fit-garch", parents=[common, data], help="fit GARCH/EGARCH models (config list or one via flags)")
    s.add_argument("--family", choices=["GARCH", "EGARCH"])
    s.add_argument("--p", type=int, default=1)
    s.add_argument("--q", type=int, default=1)
    s.add_argument("--target")
    s.add_argument("--regressors", nargs="*")
    s.add_argument("--difference", nargs="+", metavar="COL")
    s.add_argument("--literal-leverage", action="store_true")
    s.set_defaults(func=cmd_fit_garch)

    s = sub.add_parser("evaluate", parents=[common, data], help="MSE / R / Theil of a saved model or two columns")
    s.add_argument("--model", help="model.json written by train-mlffnn / train-narx")
    s.add_argument("--actual")
    s.add_argument("--predicted")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("grid", parents=[common, data], help="neurons x algorithms grid")
    s.add_argument("--family", choices=list(experiments.FAMILIES))
    s.set_defaults(func=cmd_grid)

    s = sub.add_parser("ancova", parents=[common], help="Type III ANCOVA on grid records")
    s.add_argument("--records", required=True, help="grid.json or report.json")
    s.add_argument("--family", choices=list(experiments.FAMILIES))
    s.add_argument("--response", default="test_mse", choices=["test_mse", "train_mse", "test_r", "train_r"])
    g = s.add_mutually_exclusive_group()
    g.add_argument("--covariate-as-factor", action="store_true")
    g.add_argument("--one-way", action="store_true")
    s.set_defaults(func=cmd_ancova)

    s = sub.add_parser("compare", parents=[common, data], help="full pipeline: tests, grids, GARCH fits, comparison")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("simulate", parents=[common], help="simulate an oracle process to CSV")
    s.add_argument("process", choices=["garch", "rw", "narx"])
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--omega", type=float, default=0.1)
    s.add_argument("--alpha", type=float, nargs="+", default=[0.1])
    s.add_argument("--beta", type=float, nargs="*", default=[0.8])
    s.add_argument("--gamma", type=float, nargs="*")
    s.add_argument("--egarch", action="store_true")
    s.add_argument("--drift", type=float, default=0.0)
    s.add_argument("--noise-sd", type=float, default=0.01)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("schema", help="print the config JSON schema")
    s.add_argument("--config", help=argparse.SUPPRESS)
    s.add_argument("--seed", type=int, help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_schema)
    return p


_NUMERIC = (ConvergenceError, TrainingDivergence, FloatingPointError, np.linalg.LinAlgError,
            ZeroVarianceError, DegenerateRangeError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config(args)
        path = args.func(args, cfg)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except _NUMERIC as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, DataError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    if path is not None:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
