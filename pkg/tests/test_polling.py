import math
import random

import mpmath as mp
import pytest

from phantomrla.contest import (
    OVERVOTE,
    UNDERVOTE,
    ContestSetup,
    Interpretation,
    Provenance,
    UnknownCandidate,
)
from phantomrla.polling import (
    NO_VALID_VOTE,
    ZOMBIE_ALL_LOSERS,
    InfeasiblePolling,
    PollingSetup,
    PollingState,
    VoteFor,
    observations_from_interpretation,
    pair_p_value,
    polling_p_value,
    polling_update,
    polling_update_ballot,
    zombie_interpretation_polling,
)

MAYOR = ContestSetup(
    contest_id="mayor",
    candidates=("w", "l", "x"),
    winners=frozenset({"w"}),
    reported_tallies={"w": 55, "l": 40, "x": 5},
)
BOND = ContestSetup(
    contest_id="bond",
    candidates=("yes", "no"),
    winners=frozenset({"yes"}),
    reported_tallies={"yes": 60, "no": 35},
)


def fresh(*contests):
    return PollingState(setup=PollingSetup.from_contests(contests or (MAYOR, BOND)))


class TestSetup:
    def test_shares(self):
        setup = PollingSetup.from_contests([MAYOR, BOND])
        assert setup.shares[("mayor", "w", "l")] == pytest.approx(55 / 95)
        assert setup.shares[("mayor", "w", "x")] == pytest.approx(55 / 60)
        assert setup.shares[("bond", "yes", "no")] == pytest.approx(60 / 95)
        assert set(setup.pair_keys()) == set(setup.shares)

    def test_reported_tie_refused_upstream(self):
        # a tied pair never reaches the polling setup: the contest itself
        # refuses a winner who does not strictly beat every loser, which
        # is exactly what keeps every share above 1/2 here
        with pytest.raises(ValueError):
            ContestSetup(
                contest_id="t",
                candidates=("a", "b", "z"),
                winners=frozenset({"a"}),
                reported_tallies={"a": 50, "b": 49, "z": 50},
            )

    def test_shares_strictly_above_half_for_any_valid_contest(self):
        rng = random.Random(7)
        for _ in range(100):
            vl = rng.randint(0, 500)
            vw = vl + rng.randint(1, 500)
            contest = ContestSetup(
                contest_id="c",
                candidates=("w", "l"),
                winners=frozenset({"w"}),
                reported_tallies={"w": vw, "l": vl},
            )
            setup = PollingSetup.from_contests([contest])
            assert setup.shares[("c", "w", "l")] > 0.5

    def test_no_contests_refused(self):
        with pytest.raises(InfeasiblePolling):
            PollingSetup.from_contests([])


class TestUpdates:
    def test_winner_vote_direction(self):
        state = polling_update(fresh(), VoteFor("mayor", "w"))
        assert state.log_t_total(("mayor", "w", "l")) > 0
        assert state.log_t_total(("mayor", "w", "x")) > 0
        assert state.log_t_total(("bond", "yes", "no")) == 0.0
        assert state.n_sampled == 1

    def test_loser_vote_direction(self):
        state = polling_update(fresh(), VoteFor("mayor", "l"))
        assert state.log_t_total(("mayor", "w", "l")) < 0
        # x's pair is untouched by a vote for l
        assert state.log_t_total(("mayor", "w", "x")) == 0.0

    def test_exact_terms(self):
        s = 55 / 95
        state = polling_update(fresh(), VoteFor("mayor", "w"))
        assert state.log_t_total(("mayor", "w", "l")) == pytest.approx(
            math.log(2 * s), rel=1e-15
        )
        state = polling_update(state, VoteFor("mayor", "l"))
        assert state.log_t_total(("mayor", "w", "l")) == pytest.approx(
            math.log(2 * s) + math.log(2 * (1 - s)), rel=1e-15
        )

    def test_no_valid_vote_moves_nothing(self):
        state = polling_update(fresh(), NO_VALID_VOTE)
        assert state.n_sampled == 1
        assert state.no_valid_seen == 1
        assert all(state.log_t_total(k) == 0.0 for k in state.setup.shares)

    def test_zombie_hits_every_pair(self):
        state = polling_update(fresh(), ZOMBIE_ALL_LOSERS)
        assert state.zombies_seen == 1
        for key, s in state.setup.shares.items():
            assert state.log_t_total(key) == pytest.approx(
                math.log(2 * (1 - s)), rel=1e-15
            )

    def test_vote_outside_audit_ignored(self):
        state = polling_update(fresh(), VoteFor("school", "someone"))
        assert all(state.log_t_total(k) == 0.0 for k in state.setup.shares)
        assert state.n_sampled == 1

    def test_unknown_candidate_raises(self):
        with pytest.raises(UnknownCandidate):
            polling_update(fresh(), VoteFor("mayor", "imposter"))

    def test_updates_are_pure(self):
        s0 = fresh()
        s1 = polling_update(s0, VoteFor("mayor", "w"))
        assert s0.n_sampled == 0 and s0.log_t_total(("mayor", "w", "l")) == 0.0
        assert s1.n_sampled == 1

    def test_tallies_seen(self):
        state = fresh()
        for _ in range(3):
            state = polling_update(state, VoteFor("mayor", "w"))
        state = polling_update(state, VoteFor("mayor", "x"))
        assert state.tallies_seen[("mayor", "w")] == 3
        assert state.tallies_seen[("mayor", "x")] == 1
        assert ("mayor", "l") not in state.tallies_seen


class TestBallotSemantics:
    def test_one_ballot_many_contests(self):
        state = polling_update_ballot(
            fresh(), [VoteFor("mayor", "w"), VoteFor("bond", "no")]
        )
        assert state.n_sampled == 1
        assert state.log_t_total(("mayor", "w", "l")) > 0
        assert state.log_t_total(("bond", "yes", "no")) < 0

    def test_ballot_equals_observation_sequence_in_log_space(self):
        obs = [VoteFor("mayor", "w"), VoteFor("bond", "no")]
        one = polling_update_ballot(fresh(), obs)
        two = fresh()
        for o in obs:
            two = polling_update(two, o)
        for key in one.setup.shares:
            assert one.log_t_total(key) == two.log_t_total(key)
        assert one.n_sampled == 1 and two.n_sampled == 2


def oracle_pair_p(s, n_winner, n_loser_and_zombies):
    with mp.workdps(60):
        s = mp.mpf(s)
        log_t = n_winner * mp.log(2 * s) + n_loser_and_zombies * mp.log(2 * (1 - s))
        if log_t <= 0:
            return mp.mpf(1)
        return mp.exp(-log_t)


class TestOracleEquivalence:
    def test_random_cases(self):
        rng = random.Random(20240818)
        for _ in range(200):
            vw = rng.randint(2, 10_000)
            vl = rng.randint(1, vw - 1)
            contest = ContestSetup(
                contest_id="c",
                candidates=("w", "l"),
                winners=frozenset({"w"}),
                reported_tallies={"w": vw, "l": vl},
            )
            state = PollingState(setup=PollingSetup.from_contests([contest]))
            n_w = rng.randint(0, 400)
            n_l = rng.randint(0, 400)
            n_z = rng.randint(0, 50)
            n_b = rng.randint(0, 50)
            obs = ([VoteFor("c", "w")] * n_w + [VoteFor("c", "l")] * n_l
                   + [ZOMBIE_ALL_LOSERS] * n_z + [NO_VALID_VOTE] * n_b)
            rng.shuffle(obs)
            for o in obs:
                state = polling_update(state, o)
            s = vw / (vw + vl)
            with mp.workdps(60):
                oracle = oracle_pair_p(s, n_w, n_l + n_z)
                got = polling_p_value(state)
                if oracle == 1:
                    assert got == 1.0
                elif oracle > mp.mpf("1e-300"):
                    assert got == pytest.approx(float(oracle), rel=1e-12)
                else:
                    # compare in log space when the value leaves float range
                    key = ("c", "w", "l")
                    rel = abs(
                        mp.exp(-mp.mpf(state.log_t_total(key))
                               - mp.log(oracle)) - 1
                    )
                    assert rel < 1e-12

    def test_multi_pair_max(self):
        state = fresh()
        for _ in range(5):
            state = polling_update(state, VoteFor("mayor", "w"))
        for _ in range(3):
            state = polling_update(state, VoteFor("bond", "no"))
        per_pair = [pair_p_value(state, k) for k in state.setup.shares]
        assert polling_p_value(state) == max(per_pair)
        # the bond pair is losing ground, so it is the binding one
        assert polling_p_value(state) == 1.0


class TestZombieWorstCase:
    def test_weakly_maximal_on_share_grid(self):
        # single-ballot outcomes vs the substitute, every pair, coarse grid
        for s_milli in range(501, 991, 35):
            vw = s_milli
            vl = 1000 - s_milli
            contest = ContestSetup(
                contest_id="c",
                candidates=("w", "l", "z"),
                winners=frozenset({"w"}),
                reported_tallies={"w": vw, "l": vl, "z": min(vl - 1, vw - 1)},
            )
            base = PollingState(setup=PollingSetup.from_contests([contest]))
            outcomes = [
                [VoteFor("c", "w")],
                [VoteFor("c", "l")],
                [VoteFor("c", "z")],
                [NO_VALID_VOTE],
            ]
            zombie = polling_update_ballot(base, [ZOMBIE_ALL_LOSERS])
            for obs in outcomes:
                real = polling_update_ballot(base, obs)
                for key in base.setup.shares:
                    assert pair_p_value(zombie, key) >= pair_p_value(real, key)

    def test_zombie_constant(self):
        assert zombie_interpretation_polling() is ZOMBIE_ALL_LOSERS


class TestInterpretationBridge:
    def test_votes_become_observations(self):
        setup = PollingSetup.from_contests([MAYOR, BOND])
        interp = Interpretation(
            contests={"mayor": frozenset({"w"}), "bond": frozenset({"no"})}
        )
        obs = observations_from_interpretation(interp, setup)
        assert obs == [VoteFor("mayor", "w"), VoteFor("bond", "no")]

    def test_marks_and_overvotes_drop_out(self):
        setup = PollingSetup.from_contests([MAYOR, BOND])
        interp = Interpretation(
            contests={"mayor": UNDERVOTE, "bond": frozenset({"yes", "no"})}
        )
        assert observations_from_interpretation(interp, setup) == [NO_VALID_VOTE]

    def test_overvote_mark(self):
        setup = PollingSetup.from_contests([MAYOR])
        interp = Interpretation(contests={"mayor": OVERVOTE})
        assert observations_from_interpretation(interp, setup) == [NO_VALID_VOTE]

    def test_zombie_provenance_wins(self):
        setup = PollingSetup.from_contests([MAYOR])
        interp = Interpretation(
            contests={"mayor": frozenset({"w"})}, provenance=Provenance.ZOMBIE
        )
        assert observations_from_interpretation(interp, setup) == [ZOMBIE_ALL_LOSERS]

    def test_unknown_candidate_rejected(self):
        setup = PollingSetup.from_contests([MAYOR])
        interp = Interpretation(contests={"mayor": frozenset({"imposter"})})
        with pytest.raises(UnknownCandidate):
            observations_from_interpretation(interp, setup)


def test_empty_state_p_value_is_one():
    assert polling_p_value(fresh()) == 1.0
