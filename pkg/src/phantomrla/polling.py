"""Ballot-polling audit: paired sequential tests without machine data.

For each (winner, loser) pair the audit runs a Wald-style sequential
probability ratio test of "the winner really beat this loser" against a
tie.  Let s be the winner's reported share of the votes the pair received
between them (strictly above one half, or the reported outcome would not
show a win).  Each sampled ballot updates the pair's log test statistic:

    vote for the winner:  log T += log(2 s)       (> 0, evidence for)
    vote for the loser:   log T += log(2 (1 - s)) (< 0, evidence against)
    anything else:        no change

The pair's P-value is min(1, exp(-log T)) and the audit's P-value is the
worst pair's, since every pair must be confirmed.

A ballot that cannot be produced gets the worst-case substitute: a vote
for the loser in every pair of every contest.  log(2(1-s)) is the most
negative per-pair update available, so the substitution never understates
any P-value.  No single real ballot could vote for every loser at once;
the zombie is deliberately more pessimal than any genuine interpretation.

Accumulators run per pair in log space with Neumaier compensation, same
as the comparison side.  A ballot with valid votes for several candidates
in a vote-for-k contest applies each candidate's update independently
while still counting as one sampled ballot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Iterable

from .contest import (
    ContestSetup,
    Interpretation,
    Mark,
    Provenance,
    UnknownCandidate,
)


class PollingError(ValueError):
    """Base class for polling-audit errors."""


class InfeasiblePolling(PollingError):
    """Reported tallies under which the paired tests cannot run."""


@dataclass(frozen=True)
class VoteFor:
    """Ballot shows a valid vote for this candidate in this contest."""

    contest_id: str
    candidate: str


@dataclass(frozen=True)
class NoValidVote:
    """Ballot shows no valid vote in any contest under audit."""


@dataclass(frozen=True)
class ZombieAllLosers:
    """Worst-case substitute: a vote for the loser of every pair."""


PollingObservation = VoteFor | NoValidVote | ZombieAllLosers

NO_VALID_VOTE = NoValidVote()
ZOMBIE_ALL_LOSERS = ZombieAllLosers()

PairKey = tuple[str, str, str]  # (contest_id, winner, loser)

LogParts = tuple[float, float]  # rounded head + residual; sum is the term


def _log_parts(x: float) -> LogParts:
    """Split log(x) into a rounded head plus residual for an exact float x.

    Each pair's two update terms are constants of the reported share, so
    they are computed once in 40-digit arithmetic and carried as two
    floats.  Folding both parts through the compensated accumulator keeps
    a long trajectory from drifting by the half ulp per term that a
    single rounded constant allows.
    """
    with localcontext() as ctx:
        ctx.prec = 40
        exact = Decimal(x).ln()
        hi = float(exact)
        lo = float(exact - Decimal(hi))
    return hi, lo


@dataclass(frozen=True)
class PollingSetup:
    """Per-pair reported winner shares, precomputed from the tallies.

    shares[(contest, w, l)] = tally(w) / (tally(w) + tally(l)), required
    to be strictly above one half for every pair.  log_terms carries each
    pair's (log 2s, log 2(1-s)) as head-plus-residual float pairs.
    """

    contests: tuple[ContestSetup, ...]
    shares: dict[PairKey, float]
    log_terms: dict[PairKey, tuple[LogParts, LogParts]]

    @classmethod
    def from_contests(cls, contests: Iterable[ContestSetup]) -> "PollingSetup":
        contests = tuple(contests)
        if not contests:
            raise InfeasiblePolling("no contests under audit")
        shares: dict[PairKey, float] = {}
        log_terms: dict[PairKey, tuple[LogParts, LogParts]] = {}
        for contest in contests:
            for w, loser in contest.pairs:
                vw = contest.tally(w)
                vl = contest.tally(loser)
                if vw + vl <= 0:
                    raise InfeasiblePolling(
                        f"{contest.contest_id}: pair ({w}, {loser}) has no reported votes"
                    )
                s = vw / (vw + vl)
                if s <= 0.5:
                    raise InfeasiblePolling(
                        f"{contest.contest_id}: reported share for {w} over {loser}"
                        f" is {s:.4f}, not above 1/2"
                    )
                key = (contest.contest_id, w, loser)
                shares[key] = s
                # 2s and 2(1-s) are exact: doubling never rounds and the
                # subtraction is exact for s in [0.5, 1).
                log_terms[key] = (_log_parts(2.0 * s), _log_parts(2.0 * (1.0 - s)))
        return cls(contests=contests, shares=shares, log_terms=log_terms)

    def pair_keys(self) -> tuple[PairKey, ...]:
        return tuple(self.shares)


@dataclass(frozen=True)
class PollingState:
    """Sequential polling state: one log test statistic per pair.

    log_t plus its carry (Neumaier compensation) is each pair's
    accumulated log T.  tallies_seen counts applied VoteFor updates per
    (contest_id, candidate); n_sampled counts ballots, so a multi-vote
    ballot adds one to n_sampled but several tally entries.  Updates
    return new states.
    """

    setup: PollingSetup
    n_sampled: int = 0
    log_t: dict[PairKey, float] = field(default_factory=dict)
    log_t_carry: dict[PairKey, float] = field(default_factory=dict)
    tallies_seen: dict[tuple[str, str], int] = field(default_factory=dict)
    zombies_seen: int = 0
    no_valid_seen: int = 0

    def __post_init__(self):
        if not self.log_t:
            object.__setattr__(self, "log_t", {k: 0.0 for k in self.setup.shares})
        if not self.log_t_carry:
            object.__setattr__(
                self, "log_t_carry", {k: 0.0 for k in self.setup.shares}
            )

    def log_t_total(self, key: PairKey) -> float:
        return self.log_t[key] + self.log_t_carry[key]


def _accumulate(
    log_t: dict[PairKey, float],
    carry: dict[PairKey, float],
    key: PairKey,
    parts: LogParts,
) -> None:
    s = log_t[key]
    c = carry[key]
    for term in parts:
        t = s + term
        if abs(s) >= abs(term):
            c += (s - t) + term
        else:
            c += (term - t) + s
        s = t
    log_t[key] = s
    carry[key] = c


class _Scratch:
    """Mutable working copy of the per-pair accumulators and counters."""

    def __init__(self, state: PollingState):
        self.setup = state.setup
        self.log_t = dict(state.log_t)
        self.carry = dict(state.log_t_carry)
        self.tallies = dict(state.tallies_seen)
        self.zombies = state.zombies_seen
        self.no_valid = state.no_valid_seen

    def apply(self, obs: PollingObservation) -> None:
        setup = self.setup
        if isinstance(obs, NoValidVote):
            self.no_valid += 1
            return
        if isinstance(obs, ZombieAllLosers):
            self.zombies += 1
            for key, (_, lose_parts) in setup.log_terms.items():
                _accumulate(self.log_t, self.carry, key, lose_parts)
            return
        contest = next(
            (c for c in setup.contests if c.contest_id == obs.contest_id), None
        )
        if contest is None:
            # A vote in a contest not under audit moves no pair.
            return
        if obs.candidate not in contest.candidates:
            raise UnknownCandidate(
                f"{obs.contest_id}: vote for unknown candidate {obs.candidate!r}"
            )
        tk = (contest.contest_id, obs.candidate)
        self.tallies[tk] = self.tallies.get(tk, 0) + 1
        for w, loser in contest.pairs:
            key = (contest.contest_id, w, loser)
            win_parts, lose_parts = setup.log_terms[key]
            if obs.candidate == w:
                _accumulate(self.log_t, self.carry, key, win_parts)
            elif obs.candidate == loser:
                _accumulate(self.log_t, self.carry, key, lose_parts)

    def freeze(self, n_sampled: int) -> PollingState:
        return PollingState(
            setup=self.setup,
            n_sampled=n_sampled,
            log_t=self.log_t,
            log_t_carry=self.carry,
            tallies_seen=self.tallies,
            zombies_seen=self.zombies,
            no_valid_seen=self.no_valid,
        )


def polling_update(state: PollingState, obs: PollingObservation) -> PollingState:
    """Fold one observed ballot (a single observation) into the state."""
    scratch = _Scratch(state)
    scratch.apply(obs)
    return scratch.freeze(state.n_sampled + 1)


def polling_update_ballot(
    state: PollingState, observations: Iterable[PollingObservation]
) -> PollingState:
    """Fold one ballot carrying several observations: each is applied, the
    sample count grows by one."""
    scratch = _Scratch(state)
    for obs in observations:
        scratch.apply(obs)
    return scratch.freeze(state.n_sampled + 1)


def pair_p_value(state: PollingState, key: PairKey) -> float:
    """min(1, exp(-log T)) for one pair."""
    total = state.log_t_total(key)
    if total <= 0.0:
        return 1.0
    return math.exp(-total)


def polling_p_value(state: PollingState) -> float:
    """The audit's P-value: the maximum over pairs, since the reported
    outcome stands only if every pairwise win is confirmed."""
    return max(pair_p_value(state, key) for key in state.setup.shares)


def zombie_interpretation_polling() -> ZombieAllLosers:
    """The substitute observation for a ballot the audit cannot produce."""
    return ZOMBIE_ALL_LOSERS


def observations_from_interpretation(
    interp: Interpretation, setup: PollingSetup
) -> list[PollingObservation]:
    """Translate a full ballot interpretation into polling observations.

    Each contest entry with a valid votes set (nonempty, within the seat
    limit) yields one VoteFor per named candidate; marks and empty or
    oversized sets yield nothing.  Zombie provenance yields the all-losers
    substitute regardless of content.
    """
    if interp.provenance is Provenance.ZOMBIE:
        return [ZOMBIE_ALL_LOSERS]
    out: list[PollingObservation] = []
    for contest in setup.contests:
        entry = interp.entry(contest.contest_id)
        if isinstance(entry, Mark):
            continue
        votes = entry
        if not votes or len(votes) > contest.k_seats:
            continue
        for name in sorted(votes):
            if name not in contest.candidates:
                raise UnknownCandidate(
                    f"{contest.contest_id}: vote for unknown candidate {name!r}"
                )
            out.append(VoteFor(contest.contest_id, name))
    if not out:
        return [NO_VALID_VOTE]
    return out
