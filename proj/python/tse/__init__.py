"""Python access to the traffic state estimation core.

The heavy lifting happens in the compiled ``_tse`` extension; this package
only re-exports it.
"""

from ._tse import (
    Config,
    ConfigError,
    ContractError,
    DomainError,
    NumericError,
    config_keys,
    evaluate,
    generate,
    lwr_residual,
    relative_error,
    simulate,
    sweep,
    train,
)

__all__ = [
    "Config",
    "ConfigError",
    "ContractError",
    "DomainError",
    "NumericError",
    "config_keys",
    "evaluate",
    "generate",
    "lwr_residual",
    "relative_error",
    "simulate",
    "sweep",
    "train",
]
