import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phantomrla.manifest import (
    BallotManifest,
    DrawOutOfRange,
    DuplicateGroupId,
    EmptyManifest,
    Listed,
    MalformedRow,
    ManifestGroup,
    NegativeCount,
    UnlistedPhantom,
    UpperBoundBelowManifest,
    parse_manifest,
    serialize_manifest,
)

CSV = "group_id,ballot_count\nbox-1,40\nbox-2,0\nbox-3,45\n"


class TestParsing:
    def test_basic(self):
        m = parse_manifest(CSV)
        assert [g.group_id for g in m.groups] == ["box-1", "box-2", "box-3"]
        assert [g.claimed_count for g in m.groups] == [40, 0, 45]
        assert m.total_listed == 85
        assert m.cumulative == (40, 40, 85)

    def test_stream_and_text_agree(self):
        assert parse_manifest(io.StringIO(CSV)).groups == parse_manifest(CSV).groups

    def test_header_required(self):
        with pytest.raises(MalformedRow):
            parse_manifest("box-1,40\n")

    def test_bad_count(self):
        with pytest.raises(MalformedRow):
            parse_manifest("group_id,ballot_count\nbox-1,forty\n")

    def test_negative_count(self):
        with pytest.raises(NegativeCount):
            parse_manifest("group_id,ballot_count\nbox-1,-1\n")

    def test_duplicate_group(self):
        with pytest.raises(DuplicateGroupId):
            parse_manifest("group_id,ballot_count\nbox-1,40\nbox-1,2\n")

    def test_empty(self):
        with pytest.raises(EmptyManifest):
            parse_manifest("group_id,ballot_count\n")

    def test_missing_field(self):
        with pytest.raises(MalformedRow):
            parse_manifest("group_id,ballot_count\nbox-1\n")

    def test_round_trip(self):
        m = parse_manifest(CSV)
        assert parse_manifest(serialize_manifest(m)).groups == m.groups


class TestLocate:
    def test_first_and_last_of_each_group(self):
        m = parse_manifest(CSV)
        assert m.locate(1, 90) == Listed(1, 1, "box-1")
        assert m.locate(40, 90) == Listed(1, 40, "box-1")
        # box-2 is empty, draw 41 lands in box-3
        assert m.locate(41, 90) == Listed(3, 1, "box-3")
        assert m.locate(85, 90) == Listed(3, 45, "box-3")

    def test_phantom_tail(self):
        m = parse_manifest(CSV)
        assert m.locate(86, 90) == UnlistedPhantom(86)
        assert m.locate(90, 90) == UnlistedPhantom(90)

    def test_out_of_range(self):
        m = parse_manifest(CSV)
        with pytest.raises(DrawOutOfRange):
            m.locate(0, 90)
        with pytest.raises(DrawOutOfRange):
            m.locate(91, 90)

    def test_upper_bound_below_listing(self):
        m = parse_manifest(CSV)
        with pytest.raises(UpperBoundBelowManifest):
            m.locate(1, 84)

    def test_worked_example(self):
        # first 88 groups hold 17,114 ballots; draw 17,256 is ballot 142 of group 89
        counts = [194] * 87 + [236, 250, 250]
        assert sum(counts[:88]) == 17_114
        m = BallotManifest(
            groups=tuple(
                ManifestGroup(f"g{i + 1}", c) for i, c in enumerate(counts)
            )
        )
        loc = m.locate(17_256, m.total_listed)
        assert loc == Listed(89, 142, "g89")


@st.composite
def manifests(draw):
    counts = draw(st.lists(st.integers(0, 50), min_size=1, max_size=30))
    groups = tuple(ManifestGroup(f"g{i}", c) for i, c in enumerate(counts))
    return BallotManifest(groups=groups)


@given(manifests())
@settings(max_examples=200)
def test_locate_is_a_bijection_on_listed_draws(m):
    n_upper = m.total_listed + 3
    seen = set()
    for d in range(1, n_upper + 1):
        loc = m.locate(d, n_upper)
        if d <= m.total_listed:
            assert isinstance(loc, Listed)
            group = m.groups[loc.group_ordinal - 1]
            assert group.group_id == loc.group_id
            assert 1 <= loc.index_within_group <= group.claimed_count
            seen.add((loc.group_ordinal, loc.index_within_group))
        else:
            assert loc == UnlistedPhantom(d)
    assert len(seen) == m.total_listed


@given(manifests())
@settings(max_examples=100)
def test_serialize_parse_round_trip(m):
    assert parse_manifest(serialize_manifest(m)).groups == m.groups
