"""Append-only audit log with a per-record digest chain.

Each log line is one JSON object carrying a `digest` field: the SHA-256
of the previous record's digest plus the canonical serialization of the
record without its own digest.  Canonical means sorted keys, compact
separators, ASCII escapes; the first record chains from a genesis digest
of 64 zeros.  Any edit, deletion, or reordering of an earlier line breaks
every digest after it, so replay can pinpoint the first bad record.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field


GENESIS_DIGEST = "0" * 64


class LogCorrupt(ValueError):
    """The log is not a valid chain: bad JSON, bad digest, or truncation."""


def canonical_json(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def chain_digest(previous_digest: str, record_without_digest: dict) -> str:
    payload = previous_digest.encode("ascii") + b"\n" + canonical_json(
        record_without_digest
    ).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


@dataclass
class LogChain:
    """In-memory view of a digest-chained log.

    `append` fills in the digest and returns the completed record; the
    caller decides where lines are stored.  `from_lines` re-verifies the
    whole chain and refuses anything inconsistent.
    """

    records: list[dict] = field(default_factory=list)
    last_digest: str = GENESIS_DIGEST

    def append(self, record: dict) -> dict:
        if "digest" in record:
            raise LogCorrupt("record already carries a digest")
        digest = chain_digest(self.last_digest, record)
        full = dict(record)
        full["digest"] = digest
        self.records.append(full)
        self.last_digest = digest
        return full

    def to_lines(self) -> list[str]:
        return [canonical_json(r) for r in self.records]

    @classmethod
    def from_lines(cls, lines) -> "LogChain":
        chain = cls()
        for lineno, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LogCorrupt(f"line {lineno}: not valid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise LogCorrupt(f"line {lineno}: expected an object")
            claimed = record.pop("digest", None)
            if not isinstance(claimed, str):
                raise LogCorrupt(f"line {lineno}: missing digest")
            expected = chain_digest(chain.last_digest, record)
            if claimed != expected:
                raise LogCorrupt(
                    f"line {lineno}: digest mismatch, record altered or out of order"
                )
            record["digest"] = claimed
            chain.records.append(record)
            chain.last_digest = claimed
        return chain
