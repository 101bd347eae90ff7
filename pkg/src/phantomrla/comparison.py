"""Ballot-level comparison audit: overstatement scoring and the sequential
Kaplan-Markov P-value.

Scoring.  For one (winner, loser) pair, a ballot interpretation scores +1
if it shows a valid vote for the winner and not the loser, -1 for the
loser and not the winner, and 0 otherwise (undervote, overvote, invalid,
or votes for both).  The overstatement of the pair's margin on a ballot is
the machine score minus the human score, an integer in -2..2: correcting
the machine interpretation to match the human one changes any pairwise
margin by at most 2 votes.  A ballot's (maximum) overstatement is the
worst such value over every pair in every contest under audit, so a
machine-reported winner vote that a manual read reveals as a loser vote is
a 2-vote overstatement no matter what happens to other pairs.

P-value.  With diluted margin mu (smallest pairwise margin in votes
divided by the number of ballots in the sampling universe) and error
inflation gamma, let U = 2*gamma/mu.  Each sampled ballot with maximum
overstatement o multiplies the running P-value by

    (1 - 1/U) / (1 - o/(2*gamma))

the conservative Kaplan-Markov factor.  Overstatements of 2 increase the
P-value the most, 1-vote overstatements increase it less, and 0/-1/-2
decrease it.  Substituting o = 2 for any ballot therefore never lowers the
P-value, which is what makes the worst-case phantom substitution sound.

Accumulation runs in natural-log space with Neumaier-compensated
summation, so a 10,000-draw trajectory reproduces the direct product to
much better than 1e-12 relative; the cap at 1 is applied only when the
P-value is read, never to the accumulator, so sampling past an excursion
above 1 behaves correctly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from functools import lru_cache

from .contest import (
    ContestSetup,
    Interpretation,
    Mark,
    Provenance,
    UnknownCandidate,
    UnknownContest,
    smallest_margin_across,
)

OVERSTATEMENT_VALUES = (-2, -1, 0, 1, 2)

DEFAULT_GAMMA = 1.03905
GAMMA_MIN = 1.01
GAMMA_MAX = 2.0


class ComparisonError(ValueError):
    """Base class for comparison-audit errors."""


class InfeasibleParams(ComparisonError):
    """Parameters under which the KM test cannot make progress."""


@dataclass(frozen=True)
class ComparisonParams:
    """Diluted margin, error inflation gamma, and the derived bound U.

    The diluted margin divides by the sampling upper bound -- the phantom
    ballots are part of the sampled universe, so they dilute the margin;
    dividing by the manifest total instead would understate the universe.
    """

    diluted_margin: float
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if not (0.0 < self.diluted_margin <= 1.0):
            raise InfeasibleParams(
                f"diluted margin must be in (0, 1], got {self.diluted_margin}"
            )
        if not (GAMMA_MIN <= self.gamma <= GAMMA_MAX):
            raise InfeasibleParams(
                f"gamma must be in [{GAMMA_MIN}, {GAMMA_MAX}], got {self.gamma}"
            )
        if self.u_factor <= 1.0:
            raise InfeasibleParams(f"U = {self.u_factor} <= 1: audit infeasible")

    @property
    def u_factor(self) -> float:
        return 2.0 * self.gamma / self.diluted_margin

    @classmethod
    def from_contests(
        cls,
        contests: list[ContestSetup],
        sampling_upper_bound: int,
        gamma: float = DEFAULT_GAMMA,
    ) -> "ComparisonParams":
        """Diluted margin for auditing all contests with one shared sample:
        the minimum pairwise margin across contests over the sampling bound.
        """
        if sampling_upper_bound < 1:
            raise InfeasibleParams("sampling upper bound must be >= 1")
        margin = smallest_margin_across(contests)
        return cls(diluted_margin=margin / sampling_upper_bound, gamma=gamma)


def _pair_score(entry, contest: ContestSetup, w: str, loser: str) -> int:
    if isinstance(entry, Mark):
        return 0
    votes = entry
    for name in votes:
        if name not in contest.candidates:
            raise UnknownCandidate(
                f"{contest.contest_id}: vote for unknown candidate {name!r}"
            )
    if len(votes) > contest.k_seats:
        return 0  # effectively an overvote
    if w in votes and loser not in votes:
        return 1
    if loser in votes and w not in votes:
        return -1
    return 0


def pair_overstatement(
    machine: Interpretation,
    human: Interpretation,
    contest: ContestSetup,
    winner: str,
    loser: str,
) -> int:
    """Overstatement of the (winner, loser) margin on one ballot: the
    machine's pair score minus the human's, in -2..2."""
    if winner not in contest.winners:
        raise UnknownCandidate(f"{contest.contest_id}: {winner!r} is not a reported winner")
    if loser not in set(contest.losers):
        raise UnknownCandidate(f"{contest.contest_id}: {loser!r} is not a reported loser")
    if human.provenance is Provenance.ZOMBIE:
        # substitution rule, not a physical reading: an unproducible ballot
        # is charged the worst value regardless of what the machine said
        return 2
    m = _pair_score(machine.entry(contest.contest_id), contest, winner, loser)
    h = _pair_score(human.entry(contest.contest_id), contest, winner, loser)
    return m - h


def max_overstatement(
    machine: Interpretation,
    human: Interpretation,
    contests: list[ContestSetup],
) -> int:
    """The ballot's maximum overstatement over all pairs in all contests.

    A contest missing from an interpretation counts as an undervote in
    that contest.
    """
    if not contests:
        raise UnknownContest("no contests under audit")
    return max(
        pair_overstatement(machine, human, contest, w, loser)
        for contest in contests
        for w, loser in contest.pairs
    )


def zombie_interpretation_comparison() -> int:
    """Worst-case substitute for a ballot the audit cannot find: a 2-vote
    overstatement, the value that increases the P-value the most."""
    return 2


ZOMBIE_COMPARISON = Interpretation(contests={}, provenance=Provenance.ZOMBIE)


@lru_cache(maxsize=4096)
def _km_term_parts(gamma: float, diluted_margin: float, o: int) -> tuple[float, float]:
    """log((1 - 1/U) / (1 - o/(2 gamma))) as a rounded head plus residual.

    The per-ballot log factor is a constant of (gamma, margin, o), so it is
    computed once in 40-digit arithmetic and split into two floats whose sum
    carries the value to far below one ulp.  Folding both parts through the
    compensated accumulator keeps a 10,000-term trajectory from drifting by
    the half ulp per term that a single rounded constant allows, which is
    what lets the accumulated log P track the direct product to better than
    1e-12 relative.  o = 2 with gamma near 1 makes 1 - o/(2 gamma) tiny, so
    plain float evaluation would also amplify the division rounding there.
    """
    with localcontext() as ctx:
        ctx.prec = 40
        two_gamma = 2 * Decimal(gamma)
        # o <= 2 and gamma > 1 keep the denominator 1 - o/(2 gamma) positive.
        term = (1 - Decimal(diluted_margin) / two_gamma).ln()
        term -= (1 - Decimal(o) / two_gamma).ln()
        hi = float(term)
        lo = float(term - Decimal(hi))
    return hi, lo


def log_km_factor(o: int, params: ComparisonParams) -> float:
    """Natural log of the per-ballot Kaplan-Markov factor for overstatement o."""
    if o not in OVERSTATEMENT_VALUES:
        raise ComparisonError(f"overstatement must be in -2..2, got {o}")
    return _km_term_parts(params.gamma, params.diluted_margin, o)[0]


def km_factor(o: int, params: ComparisonParams) -> float:
    """The per-ballot multiplicative factor (1 - 1/U) / (1 - o/(2 gamma))."""
    return math.exp(log_km_factor(o, params))


def _fresh_counts() -> dict[int, int]:
    return {o: 0 for o in OVERSTATEMENT_VALUES}


@dataclass(frozen=True)
class ComparisonState:
    """Sequential comparison-audit state.

    `log_p` plus `log_p_carry` (the Neumaier compensation term) is the
    accumulated natural-log P-value; the cap at 1 is applied by `p_value`
    at read time only.  Updates return new states, so callers may keep
    snapshots freely.
    """

    n_sampled: int = 0
    counts: dict[int, int] = field(default_factory=_fresh_counts)
    log_p: float = 0.0
    log_p_carry: float = 0.0

    @property
    def log_p_total(self) -> float:
        return self.log_p + self.log_p_carry


def km_update(state: ComparisonState, o: int, params: ComparisonParams) -> ComparisonState:
    """Fold one ballot's maximum overstatement into the running P-value:
    log P += log(1 - 1/U) - log(1 - o/(2 gamma))."""
    if o not in OVERSTATEMENT_VALUES:
        raise ComparisonError(f"overstatement must be in -2..2, got {o}")
    s, carry = state.log_p, state.log_p_carry
    for term in _km_term_parts(params.gamma, params.diluted_margin, o):
        t = s + term
        if abs(s) >= abs(term):
            carry += (s - t) + term
        else:
            carry += (term - t) + s
        s = t
    counts = dict(state.counts)
    counts[o] += 1
    return ComparisonState(
        n_sampled=state.n_sampled + 1,
        counts=counts,
        log_p=s,
        log_p_carry=carry,
    )


def p_value(state: ComparisonState) -> float:
    """min(1, exp(log P)); fresh state gives exactly 1."""
    total = state.log_p_total
    if total >= 0.0:
        return 1.0
    return math.exp(total)


def initial_sample_size(params: ComparisonParams, alpha: float) -> int:
    """Smallest n with (1 - 1/U)^n <= alpha: the error-free stopping size.

    Planning convenience only; the audit itself keeps drawing until the
    running P-value reaches the risk limit.
    """
    if not (0.0 < alpha < 1.0):
        raise InfeasibleParams(f"risk limit must be in (0, 1), got {alpha}")
    per_draw = math.log1p(-1.0 / params.u_factor)
    return max(1, math.ceil(math.log(alpha) / per_draw))
