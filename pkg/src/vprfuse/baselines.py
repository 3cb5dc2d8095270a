"""Non-Bayesian comparison methods built on the minimum-distance principle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distance import DistanceStack
from .errors import ValidationError
from .likelihood import _as_distances
from .selection import SelectionResult


@dataclass(frozen=True)
class ScoredDecision:
    """A place pick with a sweepable confidence (comparable within one method)."""

    place: int
    confidence: float
    method: str

    def __post_init__(self):
        if not np.isfinite(self.confidence):
            raise ValidationError("decision confidence must be finite")


def min_value_match(d: np.ndarray, method: str = "min-value") -> ScoredDecision:
    """Pick the place with the smallest distance; confidence is its negation.

    Ties break toward the lowest place index.
    """
    arr = _as_distances(d)
    place = int(np.argmin(arr))
    return ScoredDecision(place=place, confidence=-float(arr[place]), method=method)


def min_ensemble_match(
    stack: DistanceStack, method: str = "baseline-fusion"
) -> ScoredDecision:
    """Pick the place minimizing the mean distance over all reference sets.

    The mean (rather than the total) keeps confidences comparable across
    different ensemble sizes; the argmin is identical either way.
    """
    means = stack.values.mean(axis=0)
    place = int(np.argmin(means))
    return ScoredDecision(place=place, confidence=-float(means[place]), method=method)


def baseline_selective_match(
    stack: DistanceStack,
    selection: SelectionResult,
    method: str = "baseline-selective",
) -> ScoredDecision:
    """Mean-distance matching restricted to the selected reference sets."""
    sub = DistanceStack(stack.values[list(selection.selected)])
    return min_ensemble_match(sub, method=method)
