import json

import pytest

from phantomrla import (
    AuditConfig,
    AuditMethod,
    AuditSeed,
    BallotCounts,
    ContestSetup,
    parse_cvr_lines,
    parse_manifest,
)


@pytest.fixture
def mayor_contest():
    # 90 ballots cast, 85 listed; reported margin 40 over the runner-up
    return ContestSetup(
        contest_id="mayor",
        candidates=("alice", "bob", "carol"),
        winners=frozenset({"alice"}),
        reported_tallies={"alice": 62, "bob": 22, "carol": 6},
    )


@pytest.fixture
def small_manifest():
    return parse_manifest("group_id,ballot_count\nbox-1,40\nbox-2,45\n")


def cvr_lines_for(groups, vote_of):
    """One machine record per listed ballot; vote_of(group_id, index) -> candidate or None."""
    lines = []
    for gid, n in groups:
        for i in range(1, n + 1):
            cand = vote_of(gid, i)
            contests = {"mayor": {"votes": [cand]}} if cand else {"mayor": {"votes": []}}
            lines.append(
                json.dumps({"group_id": gid, "index": i, "contests": contests})
            )
    return lines


def small_vote_of(gid, i):
    # 60 alice / 20 bob / 5 carol across the 85 listed ballots
    pos = (0 if gid == "box-1" else 40) + i - 1
    if pos < 60:
        return "alice"
    if pos < 80:
        return "bob"
    return "carol"


@pytest.fixture
def small_cvr(mayor_contest):
    return parse_cvr_lines(cvr_lines_for([("box-1", 40), ("box-2", 45)], small_vote_of))


@pytest.fixture
def comparison_config(small_manifest, mayor_contest, small_cvr):
    return AuditConfig(
        method=AuditMethod.COMPARISON,
        manifest=small_manifest,
        contests=(mayor_contest,),
        counts=BallotCounts(n_manifest=85, n_upper=90),
        alpha=0.10,
        seed=AuditSeed.from_hex("deadbeefcafef00d", origin_note="test"),
        cvr=small_cvr,
    )


@pytest.fixture
def polling_config(small_manifest, mayor_contest):
    return AuditConfig(
        method=AuditMethod.POLLING,
        manifest=small_manifest,
        contests=(mayor_contest,),
        counts=BallotCounts(n_manifest=85, n_upper=90),
        alpha=0.10,
        seed=AuditSeed.from_hex("deadbeefcafef00d", origin_note="test"),
    )
