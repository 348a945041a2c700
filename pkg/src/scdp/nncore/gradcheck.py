"""Central finite-difference verification of analytic gradients.

The loss callable must run the forward AND backward pass of the fragment
under test, accumulating into each parameter's ``grad``, and return the
scalar loss. Verification perturbs parameter entries in place, so fragments
should be built at float64 for the stated tolerances to be meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from scdp.nncore.layers import Parameter
from scdp.nncore.optim import zero_grads


@dataclass
class GradCheckReport:
    """Max relative error per parameter and the overall verdict."""

    tolerance: float
    step: float
    max_rel_error: dict[str, float] = field(default_factory=dict)

    @property
    def worst(self) -> float:
        return max(self.max_rel_error.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst < self.tolerance

    def __str__(self) -> str:
        lines = [
            f"  {name}: {err:.3e}" for name, err in sorted(self.max_rel_error.items())
        ]
        verdict = "PASS" if self.passed else "FAIL"
        header = f"gradient check [{verdict}] tol={self.tolerance:g} step={self.step:g}"
        return "\n".join([header] + lines)


def gradient_check(
    loss_fn: Callable[[], float],
    params: list[Parameter],
    *,
    step: float = 1e-5,
    tolerance: float = 1e-4,
    max_entries: int = 2048,
) -> GradCheckReport:
    """Compare analytic gradients against central finite differences.

    Relative error per entry is |a - n| / max(|a| + |n|, 1e-3): entries with
    gradients below 1e-3 are in effect checked absolutely, which keeps
    finite-difference roundoff (~1e-9 for float64 losses of order <= 1e3)
    from masquerading as error on null directions (a per-channel bias feeding
    a normalization is exactly such a direction). A parameter with more than
    ``max_entries`` entries is checked on an evenly strided subset.
    """
    zero_grads(params)
    loss_fn()
    analytic = {p.name: p.grad.copy() for p in params}

    report = GradCheckReport(tolerance=tolerance, step=step)
    for p in params:
        flat = p.data.reshape(-1)
        a = analytic[p.name].reshape(-1)
        n_entries = flat.size
        stride = max(1, n_entries // max_entries)
        worst = 0.0
        for i in range(0, n_entries, stride):
            orig = flat[i]
            flat[i] = orig + step
            lp = loss_fn()
            flat[i] = orig - step
            lm = loss_fn()
            flat[i] = orig
            numeric = (lp - lm) / (2.0 * step)
            denom = max(abs(a[i]) + abs(numeric), 1e-3)
            worst = max(worst, abs(a[i] - numeric) / denom)
        report.max_rel_error[p.name] = worst
    return report
