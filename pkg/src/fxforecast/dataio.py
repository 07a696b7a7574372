"""
Loading, transforming and summarising daily market data.

The universal carrier is :class:`TimeSeriesFrame`, an immutable bundle of
strictly increasing dates and equally long float columns.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

__all__ = [
    "DataError",
    "DegenerateRangeError",
    "ZeroVarianceError",
    "TimeSeriesFrame",
    "DescriptiveStats",
    "ScalingTransform",
    "SplitSpec",
    "load_frame",
    "simple_returns",
    "first_difference",
    "minmax_rescale",
    "fit_scaling",
    "split_chronological",
    "split_sizes",
    "describe",
    "describe_frame",
]


class DataError(ValueError):
    """Raised for malformed input data."""


class DegenerateRangeError(DataError):
    """Raised when a series has max == min and cannot be rescaled."""


class ZeroVarianceError(DataError):
    """Raised when a statistic needs a non-constant series."""


def _as_vector(series, name="series", min_len=1) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise DataError(f"{name} must be one-dimensional")
    if x.shape[0] < min_len:
        raise DataError(f"{name} needs at least {min_len} values, got {x.shape[0]}")
    return x


@dataclass(frozen=True)
class TimeSeriesFrame:
    """Dated, named real-valued columns.

    Parameters
    ----------
    dates : array of datetime64[D]
        Strictly increasing observation dates.
    columns : mapping of name to 1-d float array
        Every column has exactly ``len(dates)`` finite values.
    dropped : int
        Number of rows removed at load time because of missing cells.
    """

    dates: np.ndarray
    columns: Mapping[str, np.ndarray]
    dropped: int = 0

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        if dates.ndim != 1 or dates.shape[0] < 2:
            raise DataError("a frame needs at least 2 rows")
        if np.any(np.diff(dates) <= np.timedelta64(0, "D")):
            raise DataError("dates must be strictly increasing")
        cols = {}
        for name, values in self.columns.items():
            v = np.array(values, dtype=float)
            if v.shape != dates.shape:
                raise DataError(f"column {name!r} has {v.shape[0]} values, expected {dates.shape[0]}")
            if not np.all(np.isfinite(v)):
                raise DataError(f"column {name!r} contains non-finite values")
            v.flags.writeable = False
            cols[name] = v
        dates.flags.writeable = False
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "columns", cols)

    @property
    def n(self) -> int:
        return int(self.dates.shape[0])

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise KeyError(f"missing column {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self.columns

    def matrix(self, names: Sequence[str]) -> np.ndarray:
        """Stack the named columns into an ``(n, len(names))`` array."""
        if len(names) == 0:
            return np.empty((self.n, 0))
        return np.column_stack([self[name] for name in names])

    def rows(self, index) -> "TimeSeriesFrame":
        """Sub-frame by slice, integer array or boolean mask."""
        return TimeSeriesFrame(self.dates[index], {k: v[index] for k, v in self.columns.items()})

    def select(self, names: Iterable[str]) -> "TimeSeriesFrame":
        return TimeSeriesFrame(self.dates, {k: self[k] for k in names}, self.dropped)

    def with_columns(self, **new) -> "TimeSeriesFrame":
        cols = dict(self.columns)
        cols.update(new)
        return TimeSeriesFrame(self.dates, cols, self.dropped)

    def to_pandas(self) -> pd.DataFrame:
        df = pd.DataFrame({k: np.array(v) for k, v in self.columns.items()})
        df.insert(0, "date", pd.to_datetime(self.dates))
        return df

    def to_csv(self, path) -> None:
        df = self.to_pandas()
        df["date"] = df["date"].dt.strftime("%Y-%m-%d")
        df.to_csv(path, index=False, float_format="%.17g")


def load_frame(path, date_column: str | None = None) -> TimeSeriesFrame:
    """Read a CSV file into a :class:`TimeSeriesFrame`.

    The date column defaults to the first column.  Rows with any blank cell
    are dropped (the count is stored in ``frame.dropped``); rows are sorted
    ascending by date.  Non-blank cells that do not parse as numbers, duplicate
    dates, or fewer than two clean rows raise :class:`DataError`.
    """
    path = Path(path)
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if raw.shape[1] < 1:
        raise DataError(f"{path} has no columns")
    if date_column is None:
        date_column = raw.columns[0]
    if date_column not in raw.columns:
        raise DataError(f"date column {date_column!r} not in header")

    raw = raw.apply(lambda col: col.str.strip())
    missing = (raw == "").any(axis=1)
    dropped = int(missing.sum())
    clean = raw.loc[~missing]

    try:
        dates = pd.to_datetime(clean[date_column], format="ISO8601").to_numpy().astype("datetime64[D]")
    except (ValueError, TypeError) as exc:
        raise DataError(f"unparseable date in {date_column!r}: {exc}") from exc

    columns = {}
    for name in clean.columns:
        if name == date_column:
            continue
        try:
            # Python's float() rounds correctly, so CSVs written with 17 digits round-trip
            columns[name] = np.array([float(v) for v in clean[name]], dtype=float)
        except ValueError as exc:
            raise DataError(f"unparseable cell in column {name!r}: {exc}") from exc

    if dates.shape[0] < 2:
        raise DataError("fewer than 2 clean rows")
    order = np.argsort(dates, kind="stable")
    dates = dates[order]
    if np.any(dates[1:] == dates[:-1]):
        raise DataError("duplicate dates")
    columns = {k: v[order] for k, v in columns.items()}
    return TimeSeriesFrame(dates, columns, dropped)


def simple_returns(series, log: bool = False) -> np.ndarray:
    """Period-over-period returns, ``(p_t - p_{t-1}) / p_{t-1}`` or ``ln(p_t / p_{t-1})``."""
    p = _as_vector(series, min_len=2)
    if np.any(p[:-1] == 0):
        raise DataError("zero price: returns undefined")
    if log:
        return np.log(p[1:] / p[:-1])
    return (p[1:] - p[:-1]) / p[:-1]


def first_difference(series) -> np.ndarray:
    y = _as_vector(series, min_len=2)
    return np.diff(y)


@dataclass(frozen=True)
class ScalingTransform:
    """Per-column min-max scaling to ``[0, 1]``.

    ``mins`` and ``maxs`` are recorded at fit time; ``names`` is optional and
    lets a frame be scaled column by column.
    """

    mins: np.ndarray
    maxs: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        mins = np.atleast_1d(np.asarray(self.mins, dtype=float))
        maxs = np.atleast_1d(np.asarray(self.maxs, dtype=float))
        if mins.shape != maxs.shape:
            raise DataError("mins and maxs must have the same shape")
        if np.any(~(maxs > mins)):
            raise DegenerateRangeError("degenerate range: max must exceed min")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def span(self) -> np.ndarray:
        return self.maxs - self.mins

    def _pick(self, column):
        if column is None:
            return self.mins, self.span
        i = self.names.index(column) if isinstance(column, str) else int(column)
        return self.mins[i], self.span[i]

    def apply(self, x, column=None) -> np.ndarray:
        lo, span = self._pick(column)
        return (np.asarray(x, dtype=float) - lo) / span

    def invert(self, x, column=None) -> np.ndarray:
        lo, span = self._pick(column)
        return np.asarray(x, dtype=float) * span + lo

    def apply_frame(self, frame: TimeSeriesFrame) -> TimeSeriesFrame:
        """Scale the named columns of ``frame``; other columns pass through."""
        new = {name: self.apply(frame[name], name) for name in self.names}
        return frame.with_columns(**new)

    def to_dict(self) -> dict:
        return {"names": list(self.names), "mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, d) -> "ScalingTransform":
        return cls(np.array(d["mins"]), np.array(d["maxs"]), tuple(d.get("names", ())))


def minmax_rescale(series) -> tuple[np.ndarray, ScalingTransform]:
    """Rescale a vector to ``[0, 1]`` and return the fitted transform."""
    x = _as_vector(series)
    transform = ScalingTransform(np.array([x.min()]), np.array([x.max()]))
    return transform.apply(x, 0), transform


def fit_scaling(frame: TimeSeriesFrame, names: Sequence[str], fit_rows=None) -> ScalingTransform:
    """Fit a per-column transform on ``frame``.

    By default the full series is used so that every partition lands on one
    comparable ``[0, 1]`` scale.  Pass ``fit_rows`` (slice or mask, e.g. the
    training block) for the leakage-free variant.
    """
    sub = frame if fit_rows is None else frame.rows(fit_rows)
    m = sub.matrix(names)
    return ScalingTransform(m.min(axis=0), m.max(axis=0), tuple(names))


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.70
    val_frac: float = 0.15
    test_frac: float = 0.15

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(not (0.0 < f < 1.0) for f in fracs):
            raise DataError("split fractions must lie in (0, 1)")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise DataError(f"split fractions sum to {sum(fracs)}, not 1")


def split_sizes(n: int, spec: SplitSpec) -> tuple[int, int, int]:
    """Block sizes ``(floor(train*n), floor(val*n), remainder)``."""
    # 1e-9 guards floor() against 0.7*10 == 6.999999... style representation error
    n_train = int(math.floor(spec.train_frac * n + 1e-9))
    n_val = int(math.floor(spec.val_frac * n + 1e-9))
    return n_train, n_val, n - n_train - n_val


def split_chronological(frame: TimeSeriesFrame, spec: SplitSpec = SplitSpec()):
    """Split a frame into contiguous train / validation / test blocks.

    Leftover rows from the floor arithmetic go to the test block.  Every block
    must hold at least two rows to be a valid frame.
    """
    if frame.n < 10:
        raise DataError("need at least 10 rows to split")
    n_train, n_val, n_test = split_sizes(frame.n, spec)
    if min(n_train, n_val, n_test) < 2:
        raise DataError(f"split of {frame.n} rows leaves a block with fewer than 2 rows")
    a, b = n_train, n_train + n_val
    return frame.rows(slice(0, a)), frame.rows(slice(a, b)), frame.rows(slice(b, frame.n))


@dataclass(frozen=True)
class DescriptiveStats:
    mean: float
    median: float
    max: float
    min: float
    std_dev: float
    skewness: float
    kurtosis: float
    n: int = field(default=0)

    @property
    def excess_kurtosis(self) -> float:
        return self.kurtosis - 3.0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "median": self.median,
            "max": self.max,
            "min": self.min,
            "std_dev": self.std_dev,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
        }


def describe(series) -> DescriptiveStats:
    """Table-style moments.

    ``std_dev`` uses the ``n - 1`` denominator.  Skewness and kurtosis are the
    moment ratios ``m3 / m2**1.5`` and ``m4 / m2**2`` with biased central
    moments; kurtosis is raw, so a normal sample gives about 3.
    """
    x = _as_vector(series, min_len=2)
    n = x.shape[0]
    mean = x.mean()
    d = x - mean
    m2 = np.mean(d**2)
    if m2 <= 0.0 or m2 <= (np.finfo(float).eps * max(abs(mean), 1.0)) ** 2:
        raise ZeroVarianceError("zero variance: skewness and kurtosis undefined")
    return DescriptiveStats(
        mean=float(mean),
        median=float(np.median(x)),
        max=float(x.max()),
        min=float(x.min()),
        std_dev=float(np.sqrt(m2 * n / (n - 1))),
        skewness=float(np.mean(d**3) / m2**1.5),
        kurtosis=float(np.mean(d**4) / m2**2),
        n=n,
    )


def describe_frame(frame: TimeSeriesFrame, names: Sequence[str] | None = None) -> str:
    """JSON object keyed by column name with the descriptive statistics."""
    names = frame.names if names is None else names
    out = {name: describe(frame[name]).to_dict() for name in names}
    return json.dumps(out, indent=2)
