"""Cast-vote-record files: the machine interpretations for a comparison audit.

Format is JSON Lines.  Each line is one object:

    {"group_id": "box-12", "index": 3, "contests": {"mayor": {"votes": ["alice"]}}}

`index` is 1-based within the group, matching ballot locations; contest
entries use the same encoding as interpretations ({"votes": [...]} or one
of "undervote"/"overvote"/"invalid").  The (group_id, index) pair must be
unique across the file.

A drawn ballot with no record in the file is scored as a machine
undervote in every contest by default: the comparison factor then depends
only on what the manual read shows, and the miss is counted so the audit
can report how much of the sample lacked machine data.  Strict mode turns
a miss into an error instead, for jurisdictions asserting complete
machine data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .contest import Interpretation, Provenance, interpretation_from_json


class CvrError(ValueError):
    """Base class for cast-vote-record file errors."""


class MalformedCvrLine(CvrError):
    """A line is not valid JSON or lacks required fields."""


class DuplicateCvrKey(CvrError):
    """Two records claim the same (group_id, index)."""


class MissingCvr(CvrError):
    """Strict mode: a drawn ballot has no machine record."""


MACHINE_UNDERVOTE = Interpretation(contests={}, provenance=Provenance.MACHINE)


@dataclass
class CvrFile:
    """Machine interpretations keyed by (group_id, index within group)."""

    records: dict[tuple[str, int], Interpretation]
    strict: bool = False
    miss_count: int = field(default=0, init=False)

    def lookup(self, group_id: str, index_within_group: int) -> Interpretation:
        """The machine interpretation for one ballot location.

        Misses raise in strict mode; otherwise they count toward
        `miss_count` and come back as an all-contest machine undervote.
        """
        key = (group_id, index_within_group)
        record = self.records.get(key)
        if record is not None:
            return record
        if self.strict:
            raise MissingCvr(f"no machine record for group {group_id!r} index {index_within_group}")
        self.miss_count += 1
        return MACHINE_UNDERVOTE

    def __len__(self) -> int:
        return len(self.records)


def parse_cvr_lines(lines, strict: bool = False) -> CvrFile:
    """Parse JSON Lines into a CvrFile.  Blank lines are skipped."""
    records: dict[tuple[str, int], Interpretation] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedCvrLine(f"line {lineno}: {exc}") from exc
        if not isinstance(obj, dict):
            raise MalformedCvrLine(f"line {lineno}: expected an object")
        try:
            group_id = obj["group_id"]
            index = obj["index"]
            contests = obj["contests"]
        except KeyError as exc:
            raise MalformedCvrLine(f"line {lineno}: missing field {exc}") from exc
        if not isinstance(group_id, str) or not group_id:
            raise MalformedCvrLine(f"line {lineno}: group_id must be a nonempty string")
        if not isinstance(index, int) or isinstance(index, bool) or index < 1:
            raise MalformedCvrLine(f"line {lineno}: index must be a positive integer")
        if not isinstance(contests, dict):
            raise MalformedCvrLine(f"line {lineno}: contests must be an object")
        key = (group_id, index)
        if key in records:
            raise DuplicateCvrKey(
                f"line {lineno}: duplicate record for group {group_id!r} index {index}"
            )
        try:
            interp = interpretation_from_json(
                {"contests": contests, "provenance": "machine"}
            )
        except (ValueError, TypeError) as exc:
            raise MalformedCvrLine(f"line {lineno}: {exc}") from exc
        records[key] = interp
    return CvrFile(records=records, strict=strict)


def parse_cvr_path(path, strict: bool = False) -> CvrFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_cvr_lines(fh, strict=strict)


def cvr_record_to_json(group_id: str, index: int, interp: Interpretation) -> str:
    from .contest import entry_to_json

    return json.dumps(
        {
            "group_id": group_id,
            "index": index,
            "contests": {
                cid: entry_to_json(entry) for cid, entry in sorted(interp.contests.items())
            },
        },
        separators=(",", ":"),
    )
