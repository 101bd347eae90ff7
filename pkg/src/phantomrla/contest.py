"""Contest definitions and per-ballot vote interpretations.

A contest allows voters to select k of n candidates; the k reported
winners are paired with each of the n - k reported losers, giving k(n-k)
pairwise margins.  Both audit methods confirm every (winner, loser) pair.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class ContestError(ValueError):
    """Base class for contest setup and lookup errors."""


class UnknownContest(ContestError):
    pass


class UnknownCandidate(ContestError):
    pass


class Mark(enum.Enum):
    """Non-vote interpretations of a contest on a ballot."""

    UNDERVOTE = "undervote"
    OVERVOTE = "overvote"
    INVALID = "invalid"


UNDERVOTE = Mark.UNDERVOTE
OVERVOTE = Mark.OVERVOTE
INVALID = Mark.INVALID

# A contest entry is either a set of voted candidates or a non-vote mark.
# A votes set larger than k_seats is scored as an overvote by the
# classifier rather than rejected here.
ContestEntry = frozenset[str] | Mark


class Provenance(enum.Enum):
    MACHINE = "machine"
    HUMAN = "human"
    ZOMBIE = "zombie"


@dataclass(frozen=True)
class ContestSetup:
    """A contest under audit: candidates, reported tallies, winners."""

    contest_id: str
    candidates: tuple[str, ...]
    winners: frozenset[str]
    reported_tallies: dict[str, int]
    k_seats: int = 1

    def __post_init__(self):
        if not self.contest_id:
            raise ContestError("contest_id must be non-empty")
        if len(set(self.candidates)) != len(self.candidates):
            raise ContestError(f"{self.contest_id}: duplicate candidate names")
        if not self.winners <= set(self.candidates):
            raise UnknownCandidate(
                f"{self.contest_id}: winners {sorted(self.winners)} not all candidates"
            )
        if len(self.winners) != self.k_seats:
            raise ContestError(
                f"{self.contest_id}: {len(self.winners)} winners for {self.k_seats} seats"
            )
        if not self.losers:
            raise ContestError(f"{self.contest_id}: contest has no losers to pair against")
        for c in self.candidates:
            if self.reported_tallies.get(c, 0) < 0:
                raise ContestError(f"{self.contest_id}: negative tally for {c}")
        for w in self.winners:
            for loser in self.losers:
                if self.tally(w) <= self.tally(loser):
                    raise ContestError(
                        f"{self.contest_id}: reported winner {w} does not beat {loser}"
                        f" ({self.tally(w)} vs {self.tally(loser)})"
                    )

    @property
    def losers(self) -> tuple[str, ...]:
        return tuple(c for c in self.candidates if c not in self.winners)

    def tally(self, candidate: str) -> int:
        if candidate not in self.candidates:
            raise UnknownCandidate(f"{self.contest_id}: unknown candidate {candidate!r}")
        return self.reported_tallies.get(candidate, 0)

    @property
    def pairs(self) -> tuple[tuple[str, str], ...]:
        """All k(n-k) (winner, loser) pairs, in candidate order."""
        ws = tuple(c for c in self.candidates if c in self.winners)
        return tuple((w, loser) for w in ws for loser in self.losers)

    def margin_votes(self, winner: str, loser: str) -> int:
        if winner not in self.winners:
            raise UnknownCandidate(f"{self.contest_id}: {winner!r} is not a reported winner")
        if loser not in set(self.losers):
            raise UnknownCandidate(f"{self.contest_id}: {loser!r} is not a reported loser")
        return self.tally(winner) - self.tally(loser)

    @property
    def smallest_margin_votes(self) -> int:
        return min(self.margin_votes(w, loser) for w, loser in self.pairs)


def smallest_margin_across(contests: list[ContestSetup]) -> int:
    """Smallest pairwise margin in votes over every contest under audit."""
    if not contests:
        raise ContestError("at least one contest is required")
    return min(c.smallest_margin_votes for c in contests)


@dataclass(frozen=True)
class Interpretation:
    """One reading of a ballot: a contest entry per contest, plus provenance.

    A contest absent from `contests` is treated as an undervote in that
    contest when scoring (the ballot simply does not contain the contest).
    """

    contests: dict[str, ContestEntry] = field(default_factory=dict)
    provenance: Provenance = Provenance.HUMAN

    def entry(self, contest_id: str) -> ContestEntry:
        return self.contests.get(contest_id, UNDERVOTE)


def entry_to_json(entry: ContestEntry):
    if isinstance(entry, Mark):
        return entry.value
    return {"votes": sorted(entry)}


def entry_from_json(value) -> ContestEntry:
    if isinstance(value, str):
        try:
            return Mark(value)
        except ValueError:
            raise ContestError(f"unknown contest entry {value!r}") from None
    if isinstance(value, dict) and "votes" in value and isinstance(value["votes"], list):
        return frozenset(str(v) for v in value["votes"])
    raise ContestError(f"malformed contest entry {value!r}")


def interpretation_to_json(interp: Interpretation) -> dict:
    return {
        "contests": {cid: entry_to_json(e) for cid, e in sorted(interp.contests.items())},
        "provenance": interp.provenance.value,
    }


def interpretation_from_json(obj: dict) -> Interpretation:
    if not isinstance(obj, dict) or "contests" not in obj:
        raise ContestError(f"malformed interpretation {obj!r}")
    provenance = Provenance(obj.get("provenance", "human"))
    return Interpretation(
        contests={str(cid): entry_from_json(v) for cid, v in obj["contests"].items()},
        provenance=provenance,
    )


def contest_to_json(c: ContestSetup) -> dict:
    return {
        "contest_id": c.contest_id,
        "candidates": list(c.candidates),
        "winners": sorted(c.winners),
        "reported_tallies": {cand: c.tally(cand) for cand in c.candidates},
        "k_seats": c.k_seats,
    }


def contest_from_json(obj: dict) -> ContestSetup:
    return ContestSetup(
        contest_id=str(obj["contest_id"]),
        candidates=tuple(str(c) for c in obj["candidates"]),
        winners=frozenset(str(w) for w in obj["winners"]),
        reported_tallies={str(k): int(v) for k, v in obj["reported_tallies"].items()},
        k_seats=int(obj.get("k_seats", 1)),
    )
