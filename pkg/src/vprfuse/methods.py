"""Registry of place-matching methods behind one scoring interface.

Every method maps a query's distance stack to a per-place score row (higher
is better).  The decision for a query is the row argmax and the row maximum
is its confidence for precision-recall sweeps.  Belief methods score with the
normalized posterior (their confidence is a probability, sweepable as the
decision threshold); distance methods score with negative mean distance.

Selector strings are the single roster of implemented methods:

    bayes-selective      selection + Bayesian fusion (default)
    bayes-full           Bayesian fusion of every reference set
    baseline-fusion      minimum mean distance over every reference set
    baseline-selective   minimum mean distance over the selected sets
    bayes-single:<u>     Bayesian fusion of reference set u alone
    min-value:<u>        minimum distance within reference set u alone

``<u>`` is a zero-based reference-set index or a condition label, and
``all`` expands to every method above (single-reference variants once per
reference set).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .distance import DistanceStack
from .errors import NoInformationError, ValidationError
from .fusion import posterior, uniform_prior
from .selection import (
    DEFAULT_GAMMA,
    SelectionResult,
    select_all,
    select_references,
    select_single,
)

BELIEF = "belief"
DISTANCE = "distance"

Selector = Callable[[DistanceStack, float], SelectionResult]


@dataclass(frozen=True)
class Method:
    """A named selector plus a scoring convention (belief or distance)."""

    name: str
    kind: str
    selector: Selector

    def select(self, stack: DistanceStack, gamma: float = DEFAULT_GAMMA) -> SelectionResult:
        return self.selector(stack, gamma)

    def fuse(self, stack: DistanceStack, selection: SelectionResult) -> np.ndarray:
        """Score row for an already-computed selection."""
        if self.kind == BELIEF:
            try:
                return posterior(stack, selection, uniform_prior(stack.n_places)).normalized
            except NoInformationError:
                # No usable likelihood: the posterior falls back to the prior.
                return uniform_prior(stack.n_places)
        means = stack.values[list(selection.selected)].mean(axis=0)
        return -means

    def score_row(self, stack: DistanceStack, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
        return self.fuse(stack, self.select(stack, gamma))


def _gamma_selector(stack: DistanceStack, gamma: float) -> SelectionResult:
    return select_references(stack, gamma)


def _all_selector(stack: DistanceStack, gamma: float) -> SelectionResult:
    return select_all(stack)


def _single_selector(index: int) -> Selector:
    def selector(stack: DistanceStack, gamma: float) -> SelectionResult:
        return select_single(stack, index)

    return selector


_FUSION_METHODS = {
    "bayes-selective": (BELIEF, _gamma_selector),
    "bayes-full": (BELIEF, _all_selector),
    "baseline-fusion": (DISTANCE, _all_selector),
    "baseline-selective": (DISTANCE, _gamma_selector),
}

_SINGLE_PREFIXES = {"bayes-single": BELIEF, "min-value": DISTANCE}


def _resolve_ref(token: str, labels: Sequence[str]) -> int:
    try:
        index = int(token)
    except ValueError:
        matches = [u for u, label in enumerate(labels) if label == token]
        if len(matches) != 1:
            raise ValidationError(
                f"reference {token!r} does not name exactly one of {list(labels)}"
            )
        return matches[0]
    if not 0 <= index < len(labels):
        raise ValidationError(
            f"reference index {index} out of range for {len(labels)} sets"
        )
    return index


def _single_name(prefix: str, index: int, labels: Sequence[str]) -> str:
    label = labels[index]
    if label and list(labels).count(label) == 1:
        return f"{prefix}:{label}"
    return f"{prefix}:{index}"


def resolve_method(name: str, labels: Sequence[str]) -> Method:
    """Resolve one selector string against a dataset's reference labels."""
    if name in _FUSION_METHODS:
        kind, selector = _FUSION_METHODS[name]
        return Method(name=name, kind=kind, selector=selector)
    prefix, sep, token = name.partition(":")
    if sep and prefix in _SINGLE_PREFIXES:
        index = _resolve_ref(token, labels)
        return Method(
            name=_single_name(prefix, index, labels),
            kind=_SINGLE_PREFIXES[prefix],
            selector=_single_selector(index),
        )
    raise ValidationError(f"unknown method {name!r}; see 'all' for the roster")


def expand_methods(name: str, labels: Sequence[str]) -> list[Method]:
    """Resolve a selector string, expanding ``all`` to the full roster."""
    if name != "all":
        return [resolve_method(name, labels)]
    methods = [resolve_method(name, labels) for name in _FUSION_METHODS]
    for prefix in _SINGLE_PREFIXES:
        methods.extend(
            resolve_method(f"{prefix}:{u}", labels) for u in range(len(labels))
        )
    return methods
