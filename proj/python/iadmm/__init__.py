"""Python access to the inexact multi-block ADMM core."""

from ._core import (
    ConfigError,
    DomainError,
    NumericError,
    Problem,
    StructuralError,
    group_shrink,
    load,
    soft_threshold,
    solve,
    suite_names,
    verify,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "NumericError",
    "Problem",
    "StructuralError",
    "group_shrink",
    "load",
    "soft_threshold",
    "solve",
    "suite_names",
    "verify",
]
