"""The method registry and cross-method consistency."""

import numpy as np
import pytest

from vprfuse import (
    DistanceStack,
    baseline_selective_match,
    expand_methods,
    min_ensemble_match,
    min_value_match,
    posterior,
    resolve_method,
    select_references,
    select_single,
    uniform_prior,
)
from vprfuse.errors import ValidationError
from vprfuse.methods import BELIEF, DISTANCE

LABELS = ["winter", "summer", "night"]


def random_stack(rng, n_refs=3, n_places=20):
    return DistanceStack(rng.uniform(0.3, 2.0, size=(n_refs, n_places)))


class TestRegistry:
    def test_fusion_method_names(self):
        for name, kind in [
            ("bayes-selective", BELIEF),
            ("bayes-full", BELIEF),
            ("baseline-fusion", DISTANCE),
            ("baseline-selective", DISTANCE),
        ]:
            m = resolve_method(name, LABELS)
            assert m.name == name and m.kind == kind

    def test_single_reference_by_index_and_label(self):
        by_index = resolve_method("min-value:2", LABELS)
        by_label = resolve_method("min-value:night", LABELS)
        assert by_index.name == by_label.name == "min-value:night"

    def test_unknown_method_rejected(self):
        with pytest.raises(ValidationError):
            resolve_method("nope", LABELS)
        with pytest.raises(ValidationError):
            resolve_method("min-value:7", LABELS)
        with pytest.raises(ValidationError):
            resolve_method("min-value:dusk", LABELS)

    def test_duplicate_labels_fall_back_to_index_names(self):
        m = resolve_method("bayes-single:1", ["x", "x"])
        assert m.name == "bayes-single:1"
        with pytest.raises(ValidationError):
            resolve_method("bayes-single:x", ["x", "x"])

    def test_expand_all(self):
        methods = expand_methods("all", LABELS)
        names = [m.name for m in methods]
        assert names[:4] == [
            "bayes-selective",
            "bayes-full",
            "baseline-fusion",
            "baseline-selective",
        ]
        assert "bayes-single:winter" in names and "min-value:night" in names
        assert len(names) == 4 + 2 * len(LABELS)

    def test_expand_single(self):
        methods = expand_methods("bayes-full", LABELS)
        assert [m.name for m in methods] == ["bayes-full"]


class TestRowConsistency:
    def test_bayes_selective_row_is_the_posterior(self, rng):
        stack = random_stack(rng)
        m = resolve_method("bayes-selective", LABELS)
        row = m.score_row(stack, gamma=0.1)
        sel = select_references(stack, gamma=0.1)
        want = posterior(stack, sel, uniform_prior(stack.n_places)).normalized
        np.testing.assert_array_equal(row, want)

    def test_min_value_row_is_negated_distances(self, rng):
        stack = random_stack(rng)
        m = resolve_method("min-value:1", LABELS)
        row = m.score_row(stack)
        np.testing.assert_array_equal(row, -stack.values[1])
        d = min_value_match(stack.values[1])
        assert int(np.argmax(row)) == d.place
        assert row.max() == d.confidence

    def test_baseline_fusion_row_matches_decision(self, rng):
        stack = random_stack(rng)
        row = resolve_method("baseline-fusion", LABELS).score_row(stack)
        d = min_ensemble_match(stack)
        assert int(np.argmax(row)) == d.place
        assert row.max() == pytest.approx(d.confidence)

    def test_baseline_selective_row_matches_decision(self, rng):
        stack = random_stack(rng)
        row = resolve_method("baseline-selective", LABELS).score_row(stack, gamma=0.04)
        sel = select_references(stack, gamma=0.04)
        d = baseline_selective_match(stack, sel)
        assert int(np.argmax(row)) == d.place
        assert row.max() == pytest.approx(d.confidence)

    def test_single_reference_all_methods_agree_on_ranking(self, rng):
        # With one reference set every method ranks places from the same
        # distance vector; min-value and the ensemble agree exactly.
        stack = random_stack(rng, n_refs=1)
        mv = resolve_method("min-value:0", ["only"]).score_row(stack)
        ens = resolve_method("baseline-fusion", ["only"]).score_row(stack)
        np.testing.assert_array_equal(mv, ens)
        bayes = resolve_method("bayes-single:0", ["only"]).score_row(stack)
        sel = select_single(stack, 0)
        want = posterior(stack, sel, uniform_prior(stack.n_places)).normalized
        np.testing.assert_array_equal(bayes, want)

    def test_degenerate_stack_falls_back_to_prior(self):
        stack = DistanceStack(np.ones((2, 6)))
        row = resolve_method("bayes-full", ["a", "b"]).score_row(stack)
        np.testing.assert_array_equal(row, uniform_prior(6))
