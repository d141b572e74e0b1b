"""Unbiased parameter estimators and the confidence radius.

Arms produce i.i.d. samples in [0, 1]; the target parameter of arm i is
either the mean or the variance of its distribution. Both estimators change
by at most 1/s when a single one of the s samples is replaced, which is what
drives the concentration behind the confidence radius.
"""

from __future__ import annotations

import enum
import math
from typing import Sequence

from .core import ConfidenceBox
from .errors import DomainError, UsageError

#: Sanity bound: variance estimates below this are a bug, not cancellation.
_GROSS_NEGATIVE = -1e-6


class EstimatorKind(enum.Enum):
    """Which parameter of the arm distribution is being estimated."""

    MEAN = 1
    VARIANCE = 2

    @property
    def tau(self) -> int:
        """Minimum number of samples the estimator needs (1 or 2)."""
        return self.value


def estimate(kind: EstimatorKind, samples: Sequence[float]) -> float:
    """Unbiased estimate of the mean or variance from samples in [0, 1].

    The mean estimator is the sample average. The variance estimator is
    ``(sum(x^2) - (sum(x))^2 / s) / (s - 1)``; it needs at least two samples.
    Tiny negative variance values produced by cancellation on (near-)constant
    samples are clamped to zero.
    """
    s = len(samples)
    if s < kind.tau:
        raise UsageError(f"{kind.name.lower()} estimator needs >= {kind.tau} samples, got {s}")
    total = 0.0
    total_sq = 0.0
    for x in samples:
        if not (0.0 <= x <= 1.0):
            raise DomainError(f"sample {x!r} outside [0, 1]")
        total += x
        total_sq += x * x
    return estimate_from_sums(kind, total, total_sq, s)


def estimate_from_sums(kind: EstimatorKind, total: float, total_sq: float, s: int) -> float:
    """Estimate from running sums; yields the same value as :func:`estimate`
    on the underlying samples accumulated in the same order."""
    if kind is EstimatorKind.MEAN:
        return total / s
    value = (total_sq - total * total / s) / (s - 1)
    if value < 0.0:
        # The estimator is nonnegative in exact arithmetic; negatives are
        # floating-point cancellation on (near-)constant samples.
        if value < _GROSS_NEGATIVE:
            raise AssertionError(f"variance estimate {value!r} is negative beyond cancellation")
        value = 0.0
    return value


def confidence_radius(t: int, pulls: int, tau: int, delta: float) -> float:
    """Confidence radius sqrt(ln(4 t^3 / (tau delta)) / (2 pulls)).

    ``t`` is the global round index (total samples so far), ``pulls`` the
    number of samples of the arm in question. Natural logarithm; the radius
    is strictly increasing in t and scales as 1/sqrt(pulls).
    """
    if not (0.0 < delta < 1.0):
        raise UsageError(f"delta must be in (0, 1), got {delta!r}")
    if tau not in (1, 2):
        raise UsageError(f"tau must be 1 or 2, got {tau!r}")
    if t < tau or pulls < tau:
        raise UsageError(f"need t >= tau and pulls >= tau, got t={t}, pulls={pulls}")
    arg = 4.0 * t * t * t / (tau * delta)
    if arg <= 0.0:  # unreachable under the checks above
        raise AssertionError("nonpositive log argument in confidence_radius")
    return math.sqrt(math.log(arg) / (2.0 * pulls))


def clamp_box(
    estimates: Sequence[float],
    radii: Sequence[float],
    cap: float = 1.0,
) -> ConfidenceBox:
    """Build the confidence box: per-arm intervals clipped to [0, cap].

    ``cap`` defaults to 1 (the full parameter cube). Variance parameters of
    [0, 1]-valued arms actually live in [0, 0.25]; pass ``cap=0.25`` to use
    that tighter box. The default keeps the plain [0, 1] clamp.
    """
    if len(estimates) != len(radii):
        raise UsageError("estimates and radii must have equal length")
    if not (0.0 < cap <= 1.0):
        raise UsageError(f"cap must be in (0, 1], got {cap!r}")
    lower = []
    upper = []
    for e, r in zip(estimates, radii):
        if r <= 0.0:
            raise UsageError(f"radius {r!r} is not positive")
        lower.append(max(0.0, min(cap, e - r)))
        upper.append(min(cap, max(0.0, e + r)))
    return ConfidenceBox(tuple(lower), tuple(upper))
