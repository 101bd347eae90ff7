"""Ballot manifest parsing, validation, and draw-number lookup.

A ballot manifest lists the groups (containers) of ballots and how many
ballots each group is claimed to hold.  Groups are kept in file order --
that order is the canonical order, and together with the within-group
ordering it defines a numbering of the listed ballots from 1 to the
manifest total.  `locate` inverts that numbering: given a draw number it
returns the group and the index of the ballot within the group, or a
phantom marker for draw numbers beyond the manifest total.
"""

from __future__ import annotations

import io
from bisect import bisect_left
from dataclasses import dataclass, field


class ManifestError(ValueError):
    """Base class for manifest parsing and lookup errors."""


class MalformedRow(ManifestError):
    """A CSV row with the wrong column count or a non-integer count."""


class DuplicateGroupId(ManifestError):
    """The same group id appears in more than one row."""


class NegativeCount(ManifestError):
    """A group claims a negative number of ballots."""


class EmptyManifest(ManifestError):
    """The manifest lists no groups at all."""


class DrawOutOfRange(ManifestError):
    """Draw number outside 1..n_upper."""


class UpperBoundBelowManifest(ManifestError):
    """n_upper < manifest total: prima facie evidence of ballot-box stuffing.

    Lookup refuses to proceed; see `scenario.classify` for the full case
    analysis and the structured halt decision.
    """


CSV_HEADER = "group_id,ballot_count"


@dataclass(frozen=True)
class ManifestGroup:
    """One container of ballots: an opaque id and a claimed count."""

    group_id: str
    claimed_count: int

    def __post_init__(self):
        if not self.group_id:
            raise MalformedRow("group_id must be non-empty")
        if self.claimed_count < 0:
            raise NegativeCount(
                f"group {self.group_id!r} claims {self.claimed_count} ballots"
            )


@dataclass(frozen=True)
class Listed:
    """A draw that resolves to a listed ballot.

    `group_ordinal` and `index_within_group` are 1-based, matching the
    convention of numbering ballots from 1.
    """

    group_ordinal: int
    index_within_group: int
    group_id: str


@dataclass(frozen=True)
class UnlistedPhantom:
    """A draw number beyond the manifest total.

    The phantom group is conceptual: it is never materialized in the stored
    group list, so the persisted manifest always equals the official input.
    """

    draw_number: int


BallotLocation = Listed | UnlistedPhantom


@dataclass(frozen=True)
class BallotManifest:
    """Ordered ballot groups with derived prefix sums.

    Immutable after construction; safe to share across concurrent readers.
    """

    groups: tuple[ManifestGroup, ...]
    cumulative: tuple[int, ...] = field(init=False)
    total_listed: int = field(init=False)

    def __post_init__(self):
        if not self.groups:
            raise EmptyManifest("a manifest must list at least one group")
        seen = set()
        for g in self.groups:
            if g.group_id in seen:
                raise DuplicateGroupId(f"group id {g.group_id!r} appears more than once")
            seen.add(g.group_id)
        cum = []
        running = 0
        for g in self.groups:
            running += g.claimed_count
            cum.append(running)
        object.__setattr__(self, "cumulative", tuple(cum))
        object.__setattr__(self, "total_listed", running)

    def locate(self, draw_number: int, n_upper: int) -> BallotLocation:
        """Map a draw number to a ballot location.

        Draws 1..total_listed resolve via binary search over the prefix
        sums to (group, index within group); draws in
        total_listed+1..n_upper resolve to the conceptual phantom group.
        """
        return locate(self, draw_number, n_upper)

    def group_offset(self, ordinal: int) -> int:
        """Number of listed ballots before the 1-based `ordinal` group."""
        return self.cumulative[ordinal - 2] if ordinal > 1 else 0


def parse_manifest(source: io.TextIOBase | str) -> BallotManifest:
    """Parse the manifest CSV format into a BallotManifest.

    Expected format: UTF-8 text, header line ``group_id,ballot_count``,
    one group per row.  Ids may not contain commas (there is no quoting),
    so any row splitting into more than two fields is malformed.  LF and
    CRLF line endings are both accepted; blank trailing lines are ignored.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    lines = source.read().split("\n")
    lines = [line.rstrip("\r") for line in lines]
    if not lines or lines[0].lstrip("﻿").strip() != CSV_HEADER:
        raise MalformedRow(
            f"first line must be the header {CSV_HEADER!r}"
            + (f", got {lines[0]!r}" if lines else "")
        )
    groups = []
    for lineno, line in enumerate(lines[1:], start=2):
        if line.strip() == "":
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise MalformedRow(
                f"line {lineno}: expected 2 comma-separated fields, got {len(fields)}"
                " (group ids containing commas are rejected)"
            )
        gid, count_text = fields[0].strip(), fields[1].strip()
        if not gid:
            raise MalformedRow(f"line {lineno}: empty group id")
        try:
            count = int(count_text)
        except ValueError:
            raise MalformedRow(
                f"line {lineno}: ballot_count {count_text!r} is not an integer"
            ) from None
        if count < 0:
            raise NegativeCount(f"line {lineno}: group {gid!r} claims {count} ballots")
        groups.append(ManifestGroup(gid, count))
    return BallotManifest(tuple(groups))


def serialize_manifest(manifest: BallotManifest) -> str:
    """Render a manifest back to its CSV form (round-trips with parse)."""
    lines = [CSV_HEADER]
    lines.extend(f"{g.group_id},{g.claimed_count}" for g in manifest.groups)
    return "\n".join(lines) + "\n"


def locate(manifest: BallotManifest, draw_number: int, n_upper: int) -> BallotLocation:
    """Resolve a draw number to a physical ballot location or a phantom.

    For draw_number <= total_listed, returns Listed(g, j) where g is the
    first group whose cumulative count reaches draw_number and j is the
    1-based index within that group.  For draw numbers above the manifest
    total (but within n_upper) returns UnlistedPhantom: the draw landed in
    the conceptual group of ballots the manifest may have omitted.

    Pure function of its inputs.  Raises DrawOutOfRange for draws outside
    1..n_upper and UpperBoundBelowManifest when n_upper < total_listed
    (the stuffing case -- lookup refuses rather than guessing).
    """
    if n_upper < manifest.total_listed:
        raise UpperBoundBelowManifest(
            f"n_upper {n_upper} is below the manifest total {manifest.total_listed}"
        )
    if draw_number < 1 or draw_number > n_upper:
        raise DrawOutOfRange(f"draw {draw_number} outside 1..{n_upper}")
    if draw_number > manifest.total_listed:
        return UnlistedPhantom(draw_number)
    g = bisect_left(manifest.cumulative, draw_number)
    before = manifest.cumulative[g - 1] if g > 0 else 0
    return Listed(
        group_ordinal=g + 1,
        index_within_group=draw_number - before,
        group_id=manifest.groups[g].group_id,
    )
