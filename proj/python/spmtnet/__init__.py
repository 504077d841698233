"""SPMT electrochemical-thermal battery model with hybrid neural-network correction."""

from ._core import (
    DimensionError,
    DivergenceError,
    DomainError,
    Error,
    FormatError,
    SaturationError,
    capacity_ah,
    evaluate,
    gen_data,
    parameters_hash,
    rer,
    rmse_mv,
    simulate,
    train,
)

__all__ = [
    "DimensionError",
    "DivergenceError",
    "DomainError",
    "Error",
    "FormatError",
    "SaturationError",
    "capacity_ah",
    "evaluate",
    "gen_data",
    "parameters_hash",
    "rer",
    "rmse_mv",
    "simulate",
    "train",
]
