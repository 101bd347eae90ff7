import pytest

from phantomrla.contest import (
    INVALID,
    OVERVOTE,
    UNDERVOTE,
    ContestError,
    ContestSetup,
    Interpretation,
    Provenance,
    UnknownCandidate,
    contest_from_json,
    contest_to_json,
    entry_from_json,
    entry_to_json,
    interpretation_from_json,
    interpretation_to_json,
    smallest_margin_across,
)


def make(k_seats=1, winners=frozenset({"a"}), tallies=None):
    return ContestSetup(
        contest_id="c",
        candidates=("a", "b", "c"),
        winners=winners,
        reported_tallies=tallies or {"a": 50, "b": 30, "c": 20},
        k_seats=k_seats,
    )


class TestSetup:
    def test_pairs_and_margins(self):
        c = make()
        assert c.pairs == (("a", "b"), ("a", "c"))
        assert c.margin_votes("a", "b") == 20
        assert c.margin_votes("a", "c") == 30
        assert c.smallest_margin_votes == 20

    def test_multiwinner_pairs(self):
        c = make(k_seats=2, winners=frozenset({"a", "b"}))
        assert c.pairs == (("a", "c"), ("b", "c"))
        assert c.smallest_margin_votes == 10

    def test_smallest_across_contests(self):
        other = ContestSetup(
            contest_id="d",
            candidates=("x", "y"),
            winners=frozenset({"x"}),
            reported_tallies={"x": 41, "y": 36},
        )
        assert smallest_margin_across([make(), other]) == 5

    def test_winner_must_beat_every_loser(self):
        with pytest.raises(ContestError):
            make(tallies={"a": 30, "b": 30, "c": 20})

    def test_winner_count_must_match_seats(self):
        with pytest.raises(ContestError):
            make(k_seats=2)

    def test_unknown_winner(self):
        with pytest.raises(UnknownCandidate):
            make(winners=frozenset({"zz"}))

    def test_all_winners_rejected(self):
        with pytest.raises(ContestError):
            ContestSetup(
                contest_id="c",
                candidates=("a",),
                winners=frozenset({"a"}),
                reported_tallies={"a": 10},
            )

    def test_margin_lookup_roles(self):
        c = make()
        with pytest.raises(UnknownCandidate):
            c.margin_votes("b", "a")


class TestInterpretation:
    def test_entry_defaults_to_undervote(self):
        interp = Interpretation(contests={})
        assert interp.entry("anything") is UNDERVOTE
        assert interp.provenance is Provenance.HUMAN

    def test_entry_json_round_trip(self):
        for entry in (frozenset({"a"}), frozenset({"a", "b"}), frozenset(),
                      UNDERVOTE, OVERVOTE, INVALID):
            assert entry_from_json(entry_to_json(entry)) == entry

    def test_votes_json_is_sorted(self):
        assert entry_to_json(frozenset({"b", "a"})) == {"votes": ["a", "b"]}

    def test_interpretation_json_round_trip(self):
        interp = Interpretation(
            contests={"c": frozenset({"a"}), "d": OVERVOTE},
            provenance=Provenance.MACHINE,
        )
        again = interpretation_from_json(interpretation_to_json(interp))
        assert again == interp

    def test_from_json_defaults_to_human(self):
        interp = interpretation_from_json({"contests": {"c": {"votes": ["a"]}}})
        assert interp.provenance is Provenance.HUMAN

    def test_malformed_rejected(self):
        with pytest.raises(ContestError):
            interpretation_from_json({"no_contests": {}})
        with pytest.raises(ContestError):
            entry_from_json({"bogus": 1})


def test_contest_json_round_trip():
    c = make(k_seats=2, winners=frozenset({"a", "b"}))
    assert contest_from_json(contest_to_json(c)) == c
