"""Classify the audit scenario from the manifest total and the known or
bounded true ballot count.

The case analysis:

* true count N_O known, manifest total exceeds it -> halt: prima facie
  evidence of ballot-box stuffing or some other serious problem.  The
  engine offers no statistical correction for that case; it hands back a
  structured diagnostic and stops.
* N_O known, manifest total at or below it -> proceed, sampling from
  1..N_O, with N_O - N_M phantom ballots conceptually appended.
* only an upper bound N_U known, N_U below the manifest total -> halt, as
  above.
* otherwise -> proceed, sampling from 1..N_U with N_U - N_M phantoms.

Every proceed decision carries a margin-erasure warning: if the phantom
count reaches the smallest pairwise margin, the unlisted ballots could in
principle have altered the outcome.  That calls for careful investigation
and possibly a full manual check, but the audit math stays conservative
either way, so the engine proceeds once the operator explicitly
acknowledges the risk (policy stays with the humans, math with the
engine).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class BallotCounts:
    """Ballot totals: manifest total, optional true count, upper bound.

    `n_oracle` is the true number of ballots cast when known (e.g. from
    ballot accounting plus a compliance audit); `n_upper` is an upper
    bound on the true count and is always required.
    """

    n_manifest: int
    n_upper: int
    n_oracle: int | None = None

    def __post_init__(self):
        if self.n_manifest < 0 or self.n_upper < 0:
            raise ValueError("ballot counts must be >= 0")
        if self.n_oracle is not None and self.n_oracle < 0:
            raise ValueError("n_oracle must be >= 0")


@dataclass(frozen=True)
class MarginErasureWarning:
    """How the phantom count compares to the smallest pairwise margin."""

    missing_ballots: int
    smallest_pairwise_margin_votes: int
    outcome_at_risk: bool


@dataclass(frozen=True)
class Proceed:
    """Go-decision: sample from 1..sampling_upper_bound with phantoms."""

    sampling_upper_bound: int
    phantom_count: int
    margin_warning: MarginErasureWarning

    def __post_init__(self):
        if self.phantom_count < 0:
            raise ValueError("phantom_count must be >= 0")


@dataclass(frozen=True)
class HaltStuffingEvidence:
    """The manifest claims more ballots than can exist: halt and investigate.

    Recommended response is recounting the groups and inspecting the
    ballots for evidence of fraud -- not statistics.
    """

    excess: int
    reason: str

    def __post_init__(self):
        if self.excess <= 0:
            raise ValueError("stuffing excess must be > 0")


@dataclass(frozen=True)
class HaltInconsistentBounds:
    """Caller supplied n_upper < n_oracle: the inputs contradict each other."""

    reason: str


ScenarioDecision = Proceed | HaltStuffingEvidence | HaltInconsistentBounds


def classify(counts: BallotCounts, smallest_margin_votes: int) -> ScenarioDecision:
    """Classify (N_M, N_O?, N_U) into proceed or halt.

    Total and pure: every valid input maps to exactly one decision, and
    halts are returned values, not exceptions.  When the true count is
    known it takes precedence over the upper bound, so supplying a
    consistent n_upper alongside n_oracle never changes the decision.
    """
    if smallest_margin_votes < 0:
        raise ValueError("smallest_margin_votes must be >= 0")
    n_m = counts.n_manifest
    if counts.n_oracle is not None:
        n_o = counts.n_oracle
        if n_m > n_o:
            return HaltStuffingEvidence(
                excess=n_m - n_o,
                reason=(
                    f"manifest lists {n_m} ballots but only {n_o} are known to have "
                    "been cast: prima facie evidence of ballot-box stuffing or "
                    "another serious problem; recount the groups and inspect the "
                    "ballots for evidence of fraud"
                ),
            )
        if counts.n_upper < n_o:
            return HaltInconsistentBounds(
                reason=(
                    f"upper bound {counts.n_upper} is below the known true count "
                    f"{n_o}; the supplied bounds contradict each other"
                ),
            )
        bound = n_o
    else:
        if counts.n_upper < n_m:
            return HaltStuffingEvidence(
                excess=n_m - counts.n_upper,
                reason=(
                    f"manifest lists {n_m} ballots but at most {counts.n_upper} "
                    "were cast: prima facie evidence of ballot-box stuffing or "
                    "another serious problem; recount the groups and inspect the "
                    "ballots for evidence of fraud"
                ),
            )
        bound = counts.n_upper
    phantoms = bound - n_m
    warning = MarginErasureWarning(
        missing_ballots=phantoms,
        smallest_pairwise_margin_votes=smallest_margin_votes,
        outcome_at_risk=phantoms >= smallest_margin_votes,
    )
    return Proceed(sampling_upper_bound=bound, phantom_count=phantoms, margin_warning=warning)


def decision_to_json(decision: ScenarioDecision) -> dict:
    """Serialize a decision for the session log."""
    if isinstance(decision, Proceed):
        return {
            "kind": "proceed",
            "sampling_upper_bound": decision.sampling_upper_bound,
            "phantom_count": decision.phantom_count,
            "margin_warning": {
                "missing_ballots": decision.margin_warning.missing_ballots,
                "smallest_pairwise_margin_votes": decision.margin_warning.smallest_pairwise_margin_votes,
                "outcome_at_risk": decision.margin_warning.outcome_at_risk,
            },
        }
    if isinstance(decision, HaltStuffingEvidence):
        return {"kind": "halt_stuffing_evidence", "excess": decision.excess, "reason": decision.reason}
    return {"kind": "halt_inconsistent_bounds", "reason": decision.reason}
