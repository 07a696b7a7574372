"""
NARX modelling on top of the feed-forward network.

Regressors are tapped delay lines of the exogenous inputs (and optionally of
the target).  Training is series-parallel, i.e. with the observed past
targets in the feedback slots; :func:`predict_closed_loop` feeds the model's
own predictions back instead.

A plain feed-forward regression on contemporaneous inputs is the special case
``input_delay = output_delay = 0`` in ``exogenous_only`` mode, see
:func:`mlffnn_spec`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .ann import Network, NetworkSpec, TrainConfig, TrainHistory, init_network, predict, train
from .dataio import DataError, ScalingTransform, SplitSpec, TimeSeriesFrame, fit_scaling, split_sizes

FORMAT_VERSION = 1
FEEDBACK_MODES = ("exogenous_only", "output_feedback")


@dataclass(frozen=True)
class NarxSpec:
    """Tapped-delay layout.

    Each exogenous column contributes ``x(t), x(t-1), ..., x(t-input_delay)``
    (``x(t)`` is left out when ``strict_lag``); in ``output_feedback`` mode
    ``y(t-1), ..., y(t-output_delay)`` follow.
    """

    exogenous: tuple[str, ...]
    target: str
    input_delay: int = 2
    output_delay: int = 2
    feedback_mode: str = "output_feedback"
    strict_lag: bool = False

    def __post_init__(self):
        object.__setattr__(self, "exogenous", tuple(self.exogenous))
        if self.input_delay < 0 or self.output_delay < 0:
            raise ValueError("delays must be non-negative")
        if self.feedback_mode not in FEEDBACK_MODES:
            raise ValueError(f"feedback_mode must be one of {FEEDBACK_MODES}")
        if self.n_regressors == 0:
            raise ValueError("spec produces no regressors")

    @property
    def feedback(self) -> bool:
        return self.feedback_mode == "output_feedback"

    @property
    def exog_lags(self) -> range:
        return range(1 if self.strict_lag else 0, self.input_delay + 1)

    @property
    def lag_depth(self) -> int:
        """Rows lost at the start of the sample."""
        return max(self.input_delay, self.output_delay if self.feedback else 0)

    @property
    def n_regressors(self) -> int:
        return len(self.exogenous) * len(self.exog_lags) + (self.output_delay if self.feedback else 0)

    @property
    def regressor_names(self) -> list[str]:
        names = [f"{c}(t)" if j == 0 else f"{c}(t-{j})" for c in self.exogenous for j in self.exog_lags]
        if self.feedback:
            names += [f"{self.target}(t-{j})" for j in range(1, self.output_delay + 1)]
        return names

    def to_dict(self) -> dict:
        return {
            "exogenous": list(self.exogenous),
            "target": self.target,
            "input_delay": self.input_delay,
            "output_delay": self.output_delay,
            "feedback_mode": self.feedback_mode,
            "strict_lag": self.strict_lag,
        }


def mlffnn_spec(exogenous, target: str) -> NarxSpec:
    """Static feed-forward regression of ``target(t)`` on ``exogenous(t)``."""
    return NarxSpec(tuple(exogenous), target, 0, 0, "exogenous_only")


def _lagged_block(X: np.ndarray, y: np.ndarray, spec: NarxSpec, rows: np.ndarray) -> np.ndarray:
    """Regressor rows for absolute time indices ``rows``."""
    cols = [X[rows - j, i] for i in range(X.shape[1]) for j in spec.exog_lags]
    if spec.feedback:
        cols += [y[rows - j] for j in range(1, spec.output_delay + 1)]
    return np.column_stack(cols) if cols else np.empty((rows.shape[0], 0))


def build_regressors(frame: TimeSeriesFrame, spec: NarxSpec):
    """Design matrix, target vector and the dates of the target rows.

    The first ``spec.lag_depth`` rows of the frame are consumed by the lags.
    """
    missing = [c for c in spec.exogenous + (spec.target,) if c not in frame]
    if missing:
        raise KeyError(f"missing column(s): {missing}")
    depth = spec.lag_depth
    if frame.n <= depth:
        raise DataError(f"need more than {depth} rows for the requested delays")
    X = frame.matrix(spec.exogenous)
    y = np.asarray(frame[spec.target], dtype=float)
    rows = np.arange(depth, frame.n)
    return _lagged_block(X, y, spec, rows), y[rows], frame.dates[rows]


def partition_labels(n: int, split: SplitSpec) -> np.ndarray:
    """Per-row partition code (0 train, 1 validation, 2 test) for a frame of ``n`` rows."""
    n_train, n_val, _ = split_sizes(n, split)
    labels = np.full(n, 2)
    labels[:n_train] = 0
    labels[n_train: n_train + n_val] = 1
    return labels


@dataclass
class NarxModel:
    spec: NarxSpec
    network: Network
    scaling: ScalingTransform
    history: TrainHistory = field(default_factory=TrainHistory)
    split: SplitSpec = field(default_factory=SplitSpec)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "narx_spec": self.spec.to_dict(),
            "network": self.network.to_dict(),
            "scaling": self.scaling.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "NarxModel":
        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported NARX model format {d.get('format_version')!r}")
        return cls(NarxSpec(**d["narx_spec"]), Network.from_dict(d["network"]), ScalingTransform.from_dict(d["scaling"]))

    @classmethod
    def from_json(cls, text: str) -> "NarxModel":
        return cls.from_dict(json.loads(text))


def train_narx(
    frame: TimeSeriesFrame,
    spec: NarxSpec,
    hidden_size: int = 10,
    config: TrainConfig = TrainConfig(),
    seed: int = 0,
    split: SplitSpec = SplitSpec(),
    scaling: str = "full",
) -> NarxModel:
    """Fit a NARX network (series-parallel) on ``frame``.

    Inputs and target are min-max scaled first: on the whole frame with
    ``scaling="full"``, on the training block only with ``scaling="train"``.
    The frame's rows are split chronologically, so every model trained on
    the same frame and split shares the same test dates regardless of delays.
    """
    names = tuple(dict.fromkeys(spec.exogenous + (spec.target,)))
    labels = partition_labels(frame.n, split)
    if scaling == "full":
        transform = fit_scaling(frame, names)
    elif scaling == "train":
        transform = fit_scaling(frame, names, fit_rows=labels == 0)
    else:
        raise ValueError("scaling must be 'full' or 'train'")
    scaled = transform.apply_frame(frame)
    X, y, _ = build_regressors(scaled, spec)
    row_labels = labels[spec.lag_depth:]
    parts = [(X[row_labels == k], y[row_labels == k]) for k in range(3)]
    if any(p[0].shape[0] == 0 for p in parts):
        raise DataError("a partition is empty after removing lagged rows")
    net = init_network(NetworkSpec(spec.n_regressors, (hidden_size,), 1), seed)
    trained, history = train(net, parts[0], parts[1], parts[2], config)
    return NarxModel(spec, trained, transform, history, split)


def predict_one_step(model: NarxModel, frame: TimeSeriesFrame, rescaled: bool = False) -> np.ndarray:
    """Open-loop predictions for rows ``lag_depth .. n-1`` of ``frame``.

    Returned in the target's original units unless ``rescaled``.
    """
    scaled = model.scaling.apply_frame(frame)
    X, _, _ = build_regressors(scaled, model.spec)
    pred = predict(model.network, X)
    return pred if rescaled else model.scaling.invert(pred, model.spec.target)


def predict_closed_loop(model: NarxModel, history, exogenous_future, horizon: int, rescaled: bool = False) -> np.ndarray:
    """Recursive multi-step forecast.

    Parameters
    ----------
    history : array_like
        Observed targets; the last ``output_delay`` values seed the feedback
        slots.
    exogenous_future : array_like or mapping
        ``(horizon + input_delay, n_exogenous)`` rows in chronological order;
        the first ``input_delay`` rows are the lag context for the first step.
        A mapping is read column-wise by the exogenous names.
    horizon : int
        Number of steps.
    """
    spec = model.spec
    if horizon <= 0:
        return np.empty(0)
    if isinstance(exogenous_future, dict) or hasattr(exogenous_future, "columns"):
        U = np.column_stack([np.asarray(exogenous_future[c], dtype=float) for c in spec.exogenous])
    else:
        U = np.asarray(exogenous_future, dtype=float).reshape(-1, len(spec.exogenous))
    if U.shape[0] < horizon + spec.input_delay:
        raise DataError(f"exogenous rows cover {U.shape[0]} steps, need {horizon + spec.input_delay}")
    hist = np.asarray(history, dtype=float)
    if spec.feedback and hist.shape[0] < spec.output_delay:
        raise DataError(f"need at least {spec.output_delay} history values")

    cols = list(spec.exogenous)
    U = np.column_stack([model.scaling.apply(U[:, i], c) for i, c in enumerate(cols)])
    d_y = spec.output_delay if spec.feedback else 0
    buf = list(model.scaling.apply(hist[hist.shape[0] - d_y:], spec.target)) if d_y else []
    out = np.empty(horizon)
    for k in range(horizon):
        t = k + spec.input_delay
        row = [U[t - j, i] for i in range(U.shape[1]) for j in spec.exog_lags]
        row += [buf[-j] for j in range(1, d_y + 1)]
        out[k] = predict(model.network, np.asarray(row)[None, :])[0]
        buf.append(out[k])
    return out if rescaled else model.scaling.invert(out, spec.target)


def evaluate_partitions(model: NarxModel, frame: TimeSeriesFrame) -> dict[str, metrics.ForecastReport]:
    """Open-loop MSE / R / Theil on the ``[0, 1]`` scale for each partition."""
    scaled = model.scaling.apply_frame(frame)
    X, y, _ = build_regressors(scaled, model.spec)
    pred = predict(model.network, X)
    labels = partition_labels(frame.n, model.split)[model.spec.lag_depth:]
    out = {}
    for code, name in enumerate(("train", "validation", "test")):
        mask = labels == code
        out[name] = metrics.evaluate(y[mask], pred[mask], name)
    return out
