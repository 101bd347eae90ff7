import pytest
from hypothesis import given
from hypothesis import strategies as st

from phantomrla.scenario import (
    BallotCounts,
    HaltInconsistentBounds,
    HaltStuffingEvidence,
    Proceed,
    classify,
    decision_to_json,
)


class TestWorkedCounts:
    def test_known_true_count(self):
        d = classify(BallotCounts(22_371, 23_000, n_oracle=23_000), 5_000)
        assert isinstance(d, Proceed)
        assert d.sampling_upper_bound == 23_000
        assert d.phantom_count == 629

    def test_upper_bound_only(self):
        d = classify(BallotCounts(22_371, 24_000), 5_000)
        assert isinstance(d, Proceed)
        assert d.sampling_upper_bound == 24_000
        assert d.phantom_count == 1_629

    def test_true_count_wins_over_upper_bound(self):
        with_both = classify(BallotCounts(22_371, 24_000, n_oracle=23_000), 5_000)
        assert with_both.sampling_upper_bound == 23_000
        assert with_both.phantom_count == 629


class TestHalts:
    def test_manifest_exceeds_true_count(self):
        d = classify(BallotCounts(23_500, 24_000, n_oracle=23_000), 5_000)
        assert isinstance(d, HaltStuffingEvidence)
        assert d.excess == 500
        assert "stuffing" in d.reason

    def test_manifest_exceeds_upper_bound(self):
        d = classify(BallotCounts(24_500, 24_000), 5_000)
        assert isinstance(d, HaltStuffingEvidence)
        assert d.excess == 500

    def test_contradictory_bounds(self):
        d = classify(BallotCounts(22_000, 22_500, n_oracle=23_000), 5_000)
        assert isinstance(d, HaltInconsistentBounds)

    def test_exact_match_is_not_stuffing(self):
        d = classify(BallotCounts(23_000, 23_000, n_oracle=23_000), 5_000)
        assert isinstance(d, Proceed)
        assert d.phantom_count == 0


class TestMarginWarning:
    def test_at_risk_when_phantoms_reach_margin(self):
        d = classify(BallotCounts(22_371, 23_000, n_oracle=23_000), 629)
        assert d.margin_warning.outcome_at_risk is True

    def test_not_at_risk_below_margin(self):
        d = classify(BallotCounts(22_371, 23_000, n_oracle=23_000), 630)
        assert d.margin_warning.outcome_at_risk is False

    def test_warning_carries_both_numbers(self):
        d = classify(BallotCounts(22_371, 24_000), 500)
        assert d.margin_warning.missing_ballots == 1_629
        assert d.margin_warning.smallest_pairwise_margin_votes == 500


class TestValidation:
    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            BallotCounts(-1, 10)
        with pytest.raises(ValueError):
            BallotCounts(1, -10)
        with pytest.raises(ValueError):
            BallotCounts(1, 10, n_oracle=-1)

    def test_negative_margin_rejected(self):
        with pytest.raises(ValueError):
            classify(BallotCounts(10, 10), -1)


def test_decision_json_kinds():
    proceed = decision_to_json(classify(BallotCounts(80, 100), 5))
    assert proceed["kind"] == "proceed"
    assert proceed["phantom_count"] == 20
    stuffing = decision_to_json(classify(BallotCounts(120, 100), 5))
    assert stuffing["kind"] == "halt_stuffing_evidence"
    bounds = decision_to_json(classify(BallotCounts(80, 90, n_oracle=100), 5))
    assert bounds["kind"] == "halt_inconsistent_bounds"


@given(
    n_m=st.integers(0, 2_000),
    n_u=st.integers(0, 2_000),
    oracle=st.one_of(st.none(), st.integers(0, 2_000)),
    margin=st.integers(0, 500),
)
def test_classify_is_total_and_consistent(n_m, n_u, oracle, margin):
    d = classify(BallotCounts(n_m, n_u, n_oracle=oracle), margin)
    if isinstance(d, Proceed):
        assert d.sampling_upper_bound >= n_m
        assert d.phantom_count == d.sampling_upper_bound - n_m
        if oracle is not None:
            assert d.sampling_upper_bound == oracle
        else:
            assert d.sampling_upper_bound == n_u
        assert d.margin_warning.outcome_at_risk == (d.phantom_count >= margin)
    elif isinstance(d, HaltStuffingEvidence):
        assert d.excess > 0
    else:
        assert isinstance(d, HaltInconsistentBounds)
        assert oracle is not None and n_u < oracle
