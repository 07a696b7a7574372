"""Exchange-rate forecasting with feed-forward/NARX networks and GARCH-family models."""
from . import ann, dataio, experiments, metrics, narx, simulate, stattests, volatility
from .ann import Network, NetworkSpec, TrainConfig, init_network, train
from .config import PipelineConfig, load_config
from .dataio import SplitSpec, TimeSeriesFrame, describe, load_frame
from .experiments import ancova, compare, run_grid, run_pipeline, welch_t_test
from .metrics import correlation, mse, theil
from .narx import NarxSpec, train_narx
from .stattests import TestResult, adf_test, arch_lm_test, jarque_bera, pp_test
from .volatility import GarchParams, GarchSpec

__version__ = "0.1.0"

__all__ = [
    "ann", "dataio", "experiments", "metrics", "narx", "simulate", "stattests", "volatility",
    "Network", "NetworkSpec", "TrainConfig", "init_network", "train",
    "PipelineConfig", "load_config",
    "SplitSpec", "TimeSeriesFrame", "describe", "load_frame",
    "ancova", "compare", "run_grid", "run_pipeline", "welch_t_test",
    "correlation", "mse", "theil",
    "NarxSpec", "train_narx",
    "TestResult", "adf_test", "arch_lm_test", "jarque_bera", "pp_test",
    "GarchParams", "GarchSpec",
]
