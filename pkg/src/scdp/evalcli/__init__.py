"""Metrics, normalization, evaluation harness, and the command line.

Import the heavy pieces (harness, cli) from their submodules directly; this
package root only re-exports the lightweight metric functions used across
the codebase.
"""

from scdp.evalcli.metrics import (
    TransparencyParams,
    detachment,
    efficiency,
    success,
    transparency,
    w_amb,
)
from scdp.evalcli.normalize import Normalizer, fit_normalizer

__all__ = [
    "TransparencyParams",
    "detachment",
    "efficiency",
    "success",
    "transparency",
    "w_amb",
    "Normalizer",
    "fit_normalizer",
]
