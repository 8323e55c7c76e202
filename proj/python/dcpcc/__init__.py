"""Polyhedral conic CTR prediction."""

from ._core import (
    ConfigError,
    DataError,
    NumericError,
    ShapeError,
    auc,
    boundary_crossing,
    certify,
    cone_scores,
    evaluate,
    exact_log_volume,
    logloss,
    mc_volume,
    relaimp,
    reproduce_table,
    synthetic,
    train,
)

__all__ = [
    "ConfigError",
    "DataError",
    "NumericError",
    "ShapeError",
    "auc",
    "boundary_crossing",
    "certify",
    "cone_scores",
    "evaluate",
    "exact_log_volume",
    "logloss",
    "mc_volume",
    "relaimp",
    "reproduce_table",
    "synthetic",
    "train",
]
