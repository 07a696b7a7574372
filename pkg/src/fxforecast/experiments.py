"""
The comparative experiment: a neurons x algorithms grid for each network
family, ANCOVA on the grid's test MSEs, the GARCH-family fits, and the
cross-family comparison with a Welch t-test.

Everything here is deterministic given the base seed, including the JSON
produced by :func:`run_pipeline`; timings are kept out of the serialised
output for that reason.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import metrics, stattests, volatility
from .ann import SHORT_NAMES, TrainConfig, canonical_algorithm
from .config import PipelineConfig
from .dataio import DataError, SplitSpec, TimeSeriesFrame, fit_scaling, load_frame
from .narx import NarxSpec, evaluate_partitions, mlffnn_spec, partition_labels, train_narx
from .simulate import (  # noqa: F401  re-exported oracles
    FX_COLUMNS,
    gen_egarch,
    gen_fx_regime,
    gen_garch,
    gen_narx_process,
    gen_random_walk,
)
from .stattests import TestResult

__all__ = [
    "FAMILIES",
    "DEFAULT_NEURONS",
    "DEFAULT_ALGORITHMS",
    "TrialRecord",
    "SummaryRow",
    "GridSummary",
    "AncovaRow",
    "AncovaTable",
    "GarchEvaluation",
    "ComparisonReport",
    "FairComparisonError",
    "RankDeficientDesignError",
    "grid_cells",
    "run_grid",
    "summarize_grid",
    "ancova",
    "welch_t_test",
    "evaluate_garch",
    "compare",
    "partition_fingerprint",
    "run_pipeline",
    "report_json",
    "gen_garch",
    "gen_egarch",
    "gen_random_walk",
    "gen_narx_process",
    "gen_fx_regime",
]

FAMILIES = ("MLFFNN", "NARX")
DEFAULT_NEURONS = (10, 20, 30, 40)
DEFAULT_ALGORITHMS = ("LM", "SCG", "CG_PB", "CG_FR", "CG_PR")


class FairComparisonError(ValueError):
    """Models were evaluated on different test rows or scalings."""


class RankDeficientDesignError(np.linalg.LinAlgError):
    pass


def _num(x):
    """JSON-safe float (NaN/inf become ``None``)."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


# ------------------------------------------------------------------ grid


def partition_fingerprint(frame: TimeSeriesFrame, split: SplitSpec, target: str, scaling) -> str:
    """Hash of the test dates and the target's scaling.

    Two evaluations are comparable only when their fingerprints agree.
    """
    labels = partition_labels(frame.n, split)
    dates = [str(d) for d in frame.dates[labels == 2]]
    lo, hi = scaling.apply([0.0, 1.0], target)
    payload = json.dumps({"test_dates": dates, "target": target, "scale": [repr(float(lo)), repr(float(hi))]})
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class TrialRecord:
    """One grid cell.  ``wall_seconds`` is informational and not serialised."""

    family: str
    neurons: int
    algorithm: str
    seed: int
    train: metrics.ForecastReport | None = None
    test: metrics.ForecastReport | None = None
    wall_seconds: float = 0.0
    failed: bool = False
    error: str | None = None
    fingerprint: str | None = None
    stop_reason: str | None = None
    epochs: int = 0

    def to_dict(self) -> dict:
        def rep(r):
            if r is None:
                return None
            return {"n": r.n, "mse": _num(r.mse), "r": _num(r.r), "theil": _num(r.theil)}

        return {
            "family": self.family,
            "neurons": self.neurons,
            "algorithm": self.algorithm,
            "seed": self.seed,
            "train": rep(self.train),
            "test": rep(self.test),
            "failed": self.failed,
            "error": self.error,
            "fingerprint": self.fingerprint,
            "stop_reason": self.stop_reason,
            "epochs": self.epochs,
        }


def grid_cells(neurons=DEFAULT_NEURONS, algorithms=DEFAULT_ALGORITHMS) -> list[tuple[int, str]]:
    """Cells in row-major (neurons, algorithm) order; duplicates are rejected."""
    neurons = [int(n) for n in neurons]
    algorithms = [SHORT_NAMES[canonical_algorithm(a)] for a in algorithms]
    if len(set(neurons)) != len(neurons) or len(set(algorithms)) != len(algorithms):
        raise ValueError("grid levels must be distinct")
    return [(n, a) for n in neurons for a in algorithms]


def _cell_seeds(base_seed: int, n_cells: int) -> list[int]:
    children = np.random.SeedSequence(base_seed).spawn(n_cells)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def _family_spec(family: str, target: str, exogenous, narx: dict | None) -> NarxSpec:
    if family == "MLFFNN":
        return mlffnn_spec(exogenous, target)
    if family == "NARX":
        return NarxSpec(tuple(exogenous), target, **(narx or {}))
    raise ValueError(f"family must be one of {FAMILIES}")


def _run_cell(args) -> TrialRecord:
    frame, family, spec, neurons, algorithm, seed, config, split, scaling = args
    rec = TrialRecord(family, neurons, algorithm, seed)
    t0 = time.perf_counter()
    try:
        model = train_narx(frame, spec, neurons, config.with_algorithm(algorithm), seed=seed, split=split, scaling=scaling)
        parts = evaluate_partitions(model, frame)
        rec.train, rec.test = parts["train"], parts["test"]
        rec.fingerprint = partition_fingerprint(frame, split, spec.target, model.scaling)
        rec.stop_reason = model.history.stop_reason
        rec.epochs = model.history.epochs
    except (FloatingPointError, np.linalg.LinAlgError, ValueError) as exc:
        rec.failed, rec.error = True, f"{type(exc).__name__}: {exc}"
    rec.wall_seconds = time.perf_counter() - t0
    return rec


def run_grid(
    frame: TimeSeriesFrame,
    family: str,
    target: str,
    exogenous,
    split: SplitSpec = SplitSpec(),
    config: TrainConfig = TrainConfig(),
    base_seed: int = 0,
    neurons=DEFAULT_NEURONS,
    algorithms=DEFAULT_ALGORITHMS,
    narx: dict | None = None,
    scaling: str = "full",
    n_jobs: int = 1,
) -> list[TrialRecord]:
    """Train one network per (neurons, algorithm) cell.

    Each cell gets its own seed spawned from ``base_seed``, so results do not
    depend on execution order and ``n_jobs > 1`` (process pool) reproduces
    the serial run.  A diverging cell is recorded with ``failed=True``.
    """
    spec = _family_spec(family, target, exogenous, narx)
    cells = grid_cells(neurons, algorithms)
    seeds = _cell_seeds(base_seed, len(cells))
    jobs = [(frame, family, spec, n, a, s, config, split, scaling) for (n, a), s in zip(cells, seeds)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(_run_cell, jobs))
    return [_run_cell(j) for j in jobs]


@dataclass(frozen=True)
class SummaryRow:
    statistic: str  # Min / Max / Average
    r: float
    mse: float


@dataclass
class GridSummary:
    """Min/max/average of R and MSE per partition over the successful cells."""

    family: str
    train: list[SummaryRow]
    test: list[SummaryRow]
    n_trials: int
    n_failed: int

    def to_dict(self) -> dict:
        def rows(rs):
            return [{"statistic": r.statistic, "r": _num(r.r), "mse": _num(r.mse)} for r in rs]

        return {"family": self.family, "train": rows(self.train), "test": rows(self.test),
                "n_trials": self.n_trials, "n_failed": self.n_failed}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["family", "partition", "statistic", "r", "mse"])
        for part, rs in (("train", self.train), ("test", self.test)):
            for r in rs:
                w.writerow([self.family, part, r.statistic, repr(r.r), repr(r.mse)])
        return buf.getvalue()


def summarize_grid(records: list[TrialRecord]) -> GridSummary:
    ok = [r for r in records if not r.failed]
    families = {r.family for r in records}
    family = families.pop() if len(families) == 1 else "mixed"

    def table(part):
        reps = [getattr(r, part) for r in ok]
        rs = np.array([np.nan if x.r is None else x.r for x in reps], dtype=float)
        ms = np.array([x.mse for x in reps], dtype=float)
        if not reps:
            return [SummaryRow(s, float("nan"), float("nan")) for s in ("Min", "Max", "Average")]
        with np.errstate(invalid="ignore"):
            return [
                SummaryRow("Min", float(np.nanmin(rs)) if np.any(np.isfinite(rs)) else float("nan"), float(ms.min())),
                SummaryRow("Max", float(np.nanmax(rs)) if np.any(np.isfinite(rs)) else float("nan"), float(ms.max())),
                SummaryRow("Average", float(np.nanmean(rs)) if np.any(np.isfinite(rs)) else float("nan"), float(ms.mean())),
            ]

    return GridSummary(family, table("train"), table("test"), len(records), len(records) - len(ok))


def records_to_csv(records: list[TrialRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "neurons", "algorithm", "seed", "train_mse", "train_r", "test_mse", "test_r", "test_theil", "failed"])
    for r in records:
        tr, te = r.train, r.test
        w.writerow([
            r.family, r.neurons, r.algorithm, r.seed,
            "" if tr is None else repr(tr.mse), "" if tr is None or tr.r is None else repr(tr.r),
            "" if te is None else repr(te.mse), "" if te is None or te.r is None else repr(te.r),
            "" if te is None or te.theil is None else repr(te.theil), int(r.failed),
        ])
    return buf.getvalue()


# --------------------------------------------------------------- ANCOVA


@dataclass(frozen=True)
class AncovaRow:
    source: str
    ss: float
    df: int
    ms: float | None = None
    f: float | None = None
    p: float | None = None
    partial_eta2: float | None = None

    def to_dict(self) -> dict:
        return {"source": self.source, "ss": _num(self.ss), "df": self.df, "ms": _num(self.ms),
                "f": _num(self.f), "p": _num(self.p), "partial_eta2": _num(self.partial_eta2)}


@dataclass
class AncovaTable:
    """Type III between-subjects table.

    Rows, in order: Corrected Model, Intercept, <covariate>, <factor>, Error,
    Total, Corrected Total (the covariate row is absent for a one-way model).
    """

    rows: list[AncovaRow]
    response: str = "test_mse"
    n_excluded: int = 0

    def __getitem__(self, source: str) -> AncovaRow:
        for r in self.rows:
            if r.source == source:
                return r
        raise KeyError(source)

    @property
    def sources(self) -> list[str]:
        return [r.source for r in self.rows]

    @property
    def df(self) -> tuple[int, ...]:
        return tuple(r.df for r in self.rows)

    def to_dict(self) -> dict:
        return {"response": self.response, "n_excluded": self.n_excluded, "rows": [r.to_dict() for r in self.rows]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["source", "type_iii_ss", "df", "mean_square", "F", "sig", "partial_eta_squared"])
        for r in self.rows:
            w.writerow([r.source, repr(r.ss), r.df] + ["" if v is None else repr(v) for v in (r.ms, r.f, r.p, r.partial_eta2)])
        return buf.getvalue()


def _effect_coding(labels) -> tuple[np.ndarray, list]:
    """Sum-to-zero coding: level i -> e_i, last level -> -1 row."""
    levels = sorted(set(labels), key=lambda v: (str(type(v)), v))
    k = len(levels)
    idx = {v: i for i, v in enumerate(levels)}
    Z = np.zeros((len(labels), k - 1))
    for row, v in enumerate(labels):
        i = idx[v]
        if i < k - 1:
            Z[row, i] = 1.0
        else:
            Z[row, :] = -1.0
    return Z, levels


def _sse(y, X) -> tuple[float, int]:
    if X.shape[1] == 0:
        return float(y @ y), 0
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    r = y - X @ coef
    return float(r @ r), int(rank)


def ancova(
    records,
    response: str = "test_mse",
    factor: str = "algorithm",
    covariate: str | None = "neurons",
    covariate_as_factor: bool = False,
) -> AncovaTable:
    """Analysis of covariance with Type III sums of squares.

    Parameters
    ----------
    records : list of TrialRecord or of dicts
        Failed trials are dropped and counted in ``n_excluded``.
    response : {"test_mse", "train_mse", "test_r", "train_r"} or a dict key
    factor : str
        Attribute holding the fixed factor (effect coded).
    covariate : str or None
        Numeric covariate; ``None`` gives a one-way ANOVA.  With
        ``covariate_as_factor`` it is effect coded like a second factor.

    Each effect's SS is the increase in residual SS when its columns are
    removed from the full model.  An effect whose SS is numerically zero gets
    ``F = 0`` and ``p = 1``.
    """
    rows_in, excluded = [], 0
    for r in records:
        d = r if isinstance(r, dict) else _record_fields(r)
        if d.get("failed"):
            excluded += 1
            continue
        rows_in.append(d)
    n = len(rows_in)
    y = np.array([float(d[response]) for d in rows_in])
    if not np.all(np.isfinite(y)):
        raise ValueError("response has non-finite values")
    f_labels = [d[factor] for d in rows_in]
    counts = {v: f_labels.count(v) for v in set(f_labels)}
    if len(counts) < 2 or min(counts.values()) < 2:
        raise ValueError("need at least 2 factor levels with at least 2 observations each")

    blocks = {"Intercept": np.ones((n, 1))}
    if covariate is not None:
        c = [d[covariate] for d in rows_in]
        if covariate_as_factor:
            blocks[covariate] = _effect_coding(c)[0]
        else:
            blocks[covariate] = np.asarray(c, dtype=float)[:, None]
    blocks[factor] = _effect_coding(f_labels)[0]

    X = np.hstack(list(blocks.values()))
    sse_full, rank = _sse(y, X)
    if rank < X.shape[1]:
        raise RankDeficientDesignError(f"design matrix has rank {rank} < {X.shape[1]} columns")
    df_err = n - rank
    if df_err < 1:
        raise RankDeficientDesignError("no residual degrees of freedom")
    tol = 1e-12 * max(float(y @ y), np.finfo(float).tiny)
    sse_full = max(sse_full, 0.0)
    ms_err = sse_full / df_err

    def effect(name, ss, df):
        ss = max(ss, 0.0)
        ms = ss / df
        if ss <= tol:
            f, p = 0.0, 1.0
        elif ms_err <= 0:
            f, p = math.inf, 0.0
        else:
            f = ms / ms_err
            p = float(stats.f.sf(f, df, df_err))
        denom = ss + sse_full
        eta = ss / denom if denom > 0 else 0.0
        return AncovaRow(name, ss, df, ms, f, p, eta)

    sst_c = float(np.sum((y - y.mean()) ** 2))
    out = [effect("Corrected Model", sst_c - sse_full, rank - 1)]
    names = list(blocks)
    for name in names:
        reduced = np.hstack([blocks[k] for k in names if k != name])
        sse_red, _ = _sse(y, reduced)
        out.append(effect(name, sse_red - sse_full, blocks[name].shape[1]))
    out.append(AncovaRow("Error", sse_full, df_err, ms_err))
    out.append(AncovaRow("Total", float(y @ y), n))
    out.append(AncovaRow("Corrected Total", sst_c, n - 1))
    return AncovaTable(out, response, excluded)


def _record_fields(r: TrialRecord) -> dict:
    def get(rep, attr):
        if rep is None:
            return float("nan")
        v = getattr(rep, attr)
        return float("nan") if v is None else v

    return {
        "family": r.family,
        "neurons": r.neurons,
        "algorithm": r.algorithm,
        "seed": r.seed,
        "failed": r.failed,
        "train_mse": get(r.train, "mse"),
        "test_mse": get(r.test, "mse"),
        "train_r": get(r.train, "r"),
        "test_r": get(r.test, "r"),
    }


# ------------------------------------------------------------ t-test


def welch_t_test(sample_a, sample_b, level: float = 0.05) -> TestResult:
    """Two-sided Welch unequal-variance t-test.

    ``extra`` holds the Welch-Satterthwaite ``df`` and both sample means.
    When both samples have zero variance the test is only defined for equal
    means (``t = 0``, ``p = 1``).
    """
    a = np.asarray(sample_a, dtype=float).ravel()
    b = np.asarray(sample_b, dtype=float).ravel()
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise ValueError("each sample needs at least 2 values")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("samples must be finite")
    na, nb = a.shape[0], b.shape[0]
    va, vb = a.var(ddof=1) / na, b.var(ddof=1) / nb
    diff = a.mean() - b.mean()
    se2 = va + vb
    if se2 == 0:
        if diff != 0:
            raise ValueError("degenerate samples: zero variance with different means")
        t, df, p = 0.0, float(na + nb - 2), 1.0
    else:
        t = diff / math.sqrt(se2)
        df = se2**2 / (va**2 / (na - 1) + vb**2 / (nb - 1))
        p = float(min(1.0, 2.0 * stats.t.sf(abs(t), df)))
    return TestResult("welch_t", float(t), p, level, nuisance=float(df), spec="two-sided",
                      extra={"df": float(df), "mean_a": float(a.mean()), "mean_b": float(b.mean()), "n_a": na, "n_b": nb})


# -------------------------------------------------------- comparison


@dataclass
class GarchEvaluation:
    """Test-partition accuracy of one volatility model's static mean forecast."""

    model: str
    test: metrics.ForecastReport
    fingerprint: str
    fit: volatility.GarchFit | None = None

    def to_dict(self) -> dict:
        return {"model": self.model, "mse": _num(self.test.mse), "theil": _num(self.test.theil),
                "r": _num(self.test.r), "n": self.test.n, "fingerprint": self.fingerprint}


def evaluate_garch(
    spec: volatility.GarchSpec,
    frame: TimeSeriesFrame,
    split: SplitSpec = SplitSpec(),
    scaling: str = "full",
    seed: int = 0,
    restarts: int = 5,
) -> GarchEvaluation:
    """Fit on the training and validation rows, score on the test rows.

    Predictions are the static one-step mean ``c + x_t' b`` on the observed
    test regressors.  Actual and predicted targets are min-max rescaled with
    the same transform the networks use, so the MSE is on the ``[0, 1]``
    scale.
    """
    labels = partition_labels(frame.n, split)
    fit_rows = frame.rows(labels < 2)
    fitted = volatility.fit(spec, fit_rows, seed=seed, restarts=restarts)
    names = (spec.target,)
    transform = fit_scaling(frame, names, fit_rows=labels == 0 if scaling == "train" else None)
    dates, pred = volatility.static_mean_prediction(fitted, frame)
    test_dates = frame.dates[labels == 2]
    mask = np.isin(dates, test_dates)
    if int(mask.sum()) != test_dates.shape[0]:
        raise DataError("volatility model does not cover every test row")
    actual = np.asarray(frame[spec.target], dtype=float)[labels == 2]
    rep = metrics.evaluate(transform.apply(actual, spec.target), transform.apply(pred[mask], spec.target), "test")
    return GarchEvaluation(spec.name, rep, partition_fingerprint(frame, split, spec.target, transform), fitted)


@dataclass
class ComparisonReport:
    ann_summaries: dict[str, GridSummary]
    garch_rows: list[GarchEvaluation]
    t_test: TestResult
    chart: list[dict]
    ann_mse: list[float] = field(default_factory=list)
    garch_mse: list[float] = field(default_factory=list)

    @property
    def significant(self) -> bool:
        return self.t_test.reject

    @property
    def verdict(self) -> str:
        if not self.significant:
            return "no significant difference"
        return "ANN better" if self.t_test.extra["mean_a"] < self.t_test.extra["mean_b"] else "GARCH family better"

    def to_dict(self) -> dict:
        tt = self.t_test.to_dict()
        tt.update({"df": _num(self.t_test.extra["df"]), "stars": stattests.significance_stars(self.t_test.p_value),
                   "n_ann": self.t_test.extra["n_a"], "n_garch": self.t_test.extra["n_b"],
                   "ann_inputs": "per-trial test MSE of every successful grid cell",
                   "garch_inputs": "test MSE of each volatility model"})
        return {
            "ann_summaries": {k: v.to_dict() for k, v in sorted(self.ann_summaries.items())},
            "garch": [g.to_dict() for g in self.garch_rows],
            "t_test": tt,
            "verdict": self.verdict,
            "chart": self.chart,
        }

    def garch_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "mse", "theil"])
        for g in self.garch_rows:
            w.writerow([g.model, repr(g.test.mse), "" if g.test.theil is None else repr(g.test.theil)])
        return buf.getvalue()

    def chart_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "mse"])
        for c in self.chart:
            w.writerow([c["model"], repr(c["mse"])])
        return buf.getvalue()


def compare(records: list[TrialRecord], garch: list[GarchEvaluation], level: float = 0.05) -> ComparisonReport:
    """Cross-family comparison on a shared test partition.

    Raises :class:`FairComparisonError` if any successful record or volatility
    evaluation carries a different test-partition fingerprint.
    """
    ok = [r for r in records if not r.failed]
    if not ok or not garch:
        raise ValueError("need at least one successful network trial and one volatility model")
    prints = {r.fingerprint for r in ok} | {g.fingerprint for g in garch}
    if len(prints) != 1:
        raise FairComparisonError("models were evaluated on different test rows or scalings")

    summaries = {}
    for fam in sorted({r.family for r in ok}):
        summaries[fam] = summarize_grid([r for r in records if r.family == fam])
    ann_mse = [r.test.mse for r in ok]
    garch_mse = [g.test.mse for g in garch]
    tt = welch_t_test(ann_mse, garch_mse, level)
    chart = [{"model": fam, "mse": summaries[fam].test[2].mse} for fam in summaries]
    chart += [{"model": g.model, "mse": g.test.mse} for g in garch]
    return ComparisonReport(summaries, list(garch), tt, chart, ann_mse, garch_mse)


# ---------------------------------------------------------- pipeline


def load_pipeline_frame(cfg: PipelineConfig) -> TimeSeriesFrame:
    data = cfg.raw["data"]
    if "csv" in data:
        return load_frame(data["csv"], data.get("date_column"))
    syn = data["synthetic"]
    gen = syn["generator"]
    if gen == "fx_regime":
        return gen_fx_regime(syn.get("n", 1783), syn.get("seed", 0))
    return gen_narx_process(syn.get("n", 2000), syn.get("seed", 0))


def _safe_test(fn, *args, **kw):
    try:
        return fn(*args, **kw).to_dict()
    except (ValueError, np.linalg.LinAlgError) as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}


def pretest_battery(frame: TimeSeriesFrame, cfg: PipelineConfig) -> dict:
    """Normality and unit-root tests per column; ARCH-LM on the OLS mean residuals."""
    from ._ols import ols

    st = cfg.raw["stattests"]
    out = {}
    for name in (cfg.target,) + cfg.exogenous:
        x = frame[name]
        out[name] = {
            "jb": _safe_test(stattests.jarque_bera, x, st["level"]),
            "adf": _safe_test(stattests.adf_test, x, st["adf_spec"], lag_selection=st["adf_lag_selection"], level=st["level"]),
            "pp": _safe_test(stattests.pp_test, x, st["pp_spec"], level=st["level"]),
        }
    X = np.column_stack([np.ones(frame.n), frame.matrix(cfg.exogenous)])
    try:
        resid = ols(frame[cfg.target], X).resid
        out["archlm_mean_residuals"] = _safe_test(stattests.arch_lm_test, resid, st["archlm_lags"], st["level"])
    except np.linalg.LinAlgError as exc:
        out["archlm_mean_residuals"] = {"error": str(exc)}
    return out


def run_pipeline(cfg: PipelineConfig, frame: TimeSeriesFrame | None = None) -> dict:
    """Load, test, run both grids, fit the volatility models and compare.

    The returned dict is plain JSON data; :func:`report_json` serialises it
    byte-for-byte reproducibly.
    """
    if frame is None:
        frame = load_pipeline_frame(cfg)
    split = cfg.split
    scaling = cfg.raw["scaling"]
    base = cfg.train_config()
    seeds = _cell_seeds(cfg.seed, len(cfg.families) + 1)

    report = {
        "config": cfg.raw,
        "data": {"n": frame.n, "first_date": str(frame.dates[0]), "last_date": str(frame.dates[-1]),
                 "dropped_rows": frame.dropped},
        "pretests": pretest_battery(frame, cfg),
        "grids": {},
    }
    all_records = []
    for fam, fam_seed in zip(cfg.families, seeds):
        recs = run_grid(frame, fam, cfg.target, cfg.exogenous, split, base, fam_seed,
                        cfg.neurons, cfg.algorithms, cfg.raw["narx"], scaling, cfg.raw["n_jobs"])
        all_records += recs
        entry = {"records": [r.to_dict() for r in recs], "summary": summarize_grid(recs).to_dict()}
        try:
            entry["ancova"] = ancova(recs).to_dict()
        except (ValueError, np.linalg.LinAlgError) as exc:
            entry["ancova"] = {"error": f"{type(exc).__name__}: {exc}"}
        report["grids"][fam] = entry

    garch_evals, garch_out = [], []
    for spec in cfg.garch_specs():
        try:
            ev = evaluate_garch(spec, frame, split, scaling, seed=seeds[-1], restarts=cfg.raw["garch_restarts"])
        except (ValueError, FloatingPointError, RuntimeError, np.linalg.LinAlgError) as exc:
            garch_out.append({"model": spec.name, "error": f"{type(exc).__name__}: {exc}"})
            continue
        garch_evals.append(ev)
        garch_out.append({"model": spec.name, "fit": ev.fit.to_dict(), "test": ev.to_dict()})
    report["garch"] = garch_out
    try:
        report["comparison"] = compare(all_records, garch_evals, cfg.raw["stattests"]["level"]).to_dict()
    except ValueError as exc:
        report["comparison"] = {"error": f"{type(exc).__name__}: {exc}"}
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False, default=_json_default)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return _num(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")
