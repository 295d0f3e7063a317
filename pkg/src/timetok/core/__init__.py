from .dataset import DatasetManifest, IngestionError, load_dataset
from .dfa import assign_level_dfa, default_window_sizes, dfa_exponent
from .reducers import (
    ReducerKind,
    UnsupportedOperatorError,
    gaussian_kernel,
    recoarsen,
    reduce,
    smooth,
)
from .schedule import GranularitySchedule, level_sigma, tokens_for_level
from .series import DomainError, NormalizationStats, TimeSeries
from .stats import turning_point_rate

__all__ = [
    "DatasetManifest",
    "DomainError",
    "GranularitySchedule",
    "IngestionError",
    "NormalizationStats",
    "ReducerKind",
    "TimeSeries",
    "UnsupportedOperatorError",
    "assign_level_dfa",
    "default_window_sizes",
    "dfa_exponent",
    "gaussian_kernel",
    "level_sigma",
    "load_dataset",
    "recoarsen",
    "reduce",
    "smooth",
    "tokens_for_level",
    "turning_point_rate",
]
