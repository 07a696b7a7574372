"""Feed-forward networks (tansig hidden, purelin output) and their trainers."""
from .network import (
    FORMAT_VERSION,
    Network,
    NetworkSpec,
    ShapeError,
    forward,
    gradient,
    init_network,
    jacobian,
    mse_loss,
    predict,
)
from .training import (
    ALGORITHMS,
    SHORT_NAMES,
    STOP_REASONS,
    TrainConfig,
    TrainHistory,
    TrainingDivergence,
    canonical_algorithm,
    train,
)

__all__ = [
    "FORMAT_VERSION",
    "Network",
    "NetworkSpec",
    "ShapeError",
    "forward",
    "gradient",
    "init_network",
    "jacobian",
    "mse_loss",
    "predict",
    "ALGORITHMS",
    "SHORT_NAMES",
    "STOP_REASONS",
    "TrainConfig",
    "TrainHistory",
    "TrainingDivergence",
    "canonical_algorithm",
    "train",
]
