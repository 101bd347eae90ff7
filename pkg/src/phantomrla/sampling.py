"""Seed-driven uniform draws from {1, ..., n_upper}, with replacement.

The generator is a SHA-256 counter construction chosen so that any third
party can recompute every draw from the published seed:

    attempt 0:      SHA-256(seed_material || decimal(counter))
    attempt r >= 1: SHA-256(seed_material || decimal(counter) || "." || decimal(r))

The first 8 bytes of the digest, read big-endian, give an unsigned 64-bit
integer v.  Values of v at or above the largest multiple of n_upper that
fits in 2^64 are rejected (retrying with the next attempt number), which
removes modulo bias; accepted values map to (v mod n_upper) + 1.  Retries
stay inside the counter's message space, so draw k never depends on how
many retries earlier draws needed.  The full construction is normative and
documented in docs/sampling.md.

Draws depend only on (seed, counter, n_upper) -- never on manifest
content -- and the functions here are stateless, so disjoint counter
ranges can be generated in parallel.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

_U64 = 1 << 64


class SamplingError(ValueError):
    """Base class for sampling errors."""


class InvalidUpperBound(SamplingError):
    """n_upper < 1: there is nothing to draw from."""


class EmptySeed(SamplingError):
    """Seed material must be non-empty."""


@dataclass(frozen=True)
class AuditSeed:
    """Seed material for the draw sequence.

    The engine never self-seeds in audit mode: the seed is supplied
    externally, e.g. from a public dice-roll ceremony, and `origin_note`
    records where it came from.  At least 16 bytes are recommended.
    """

    seed_material: bytes
    origin_note: str = ""

    def __post_init__(self):
        if not self.seed_material:
            raise EmptySeed("seed_material must be non-empty")

    @classmethod
    def from_hex(cls, hex_text: str, origin_note: str = "") -> "AuditSeed":
        try:
            material = bytes.fromhex(hex_text.strip())
        except ValueError:
            raise EmptySeed(f"seed is not valid hex text: {hex_text!r}") from None
        return cls(material, origin_note)

    def hex(self) -> str:
        return self.seed_material.hex()


def draw_next(seed: AuditSeed, counter: int, n_upper: int) -> int:
    """Return draw number `counter` (0-based) of the sequence for this seed.

    Deterministic: the same (seed, counter, n_upper) always yields the same
    value in 1..n_upper, and each value has probability exactly 1/n_upper
    under the idealized uniform digest model (rejection removes the modulo
    bias).
    """
    if n_upper < 1:
        raise InvalidUpperBound(f"n_upper must be >= 1, got {n_upper}")
    if counter < 0:
        raise SamplingError(f"counter must be >= 0, got {counter}")
    threshold = _U64 - (_U64 % n_upper)
    attempt = 0
    base = seed.seed_material + str(counter).encode("ascii")
    while True:
        message = base if attempt == 0 else base + b"." + str(attempt).encode("ascii")
        v = int.from_bytes(hashlib.sha256(message).digest()[:8], "big")
        if v < threshold:
            return v % n_upper + 1
        attempt += 1


def draw_batch(seed: AuditSeed, start_counter: int, count: int, n_upper: int) -> list[int]:
    """Draws for counters start_counter .. start_counter+count-1.

    Exactly equivalent to calling draw_next for each counter, so batch and
    streaming generation agree and prefixes/offsets are consistent.
    """
    if count < 0:
        raise SamplingError(f"count must be >= 0, got {count}")
    return [draw_next(seed, start_counter + i, n_upper) for i in range(count)]


@dataclass
class DrawSequence:
    """A materialized prefix of the draw sequence for one seed and bound."""

    seed: AuditSeed
    n_upper: int
    draws: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.n_upper < 1:
            raise InvalidUpperBound(f"n_upper must be >= 1, got {self.n_upper}")

    @property
    def next_counter(self) -> int:
        return len(self.draws)

    def next(self) -> int:
        """Generate and record the next draw."""
        d = draw_next(self.seed, self.next_counter, self.n_upper)
        self.draws.append(d)
        return d

    def take(self, count: int) -> list[int]:
        """Generate and record the next `count` draws."""
        batch = draw_batch(self.seed, self.next_counter, count, self.n_upper)
        self.draws.extend(batch)
        return batch


def derive_seed(master: AuditSeed, index: int, origin_note: str = "") -> AuditSeed:
    """Derive an independent sub-seed (e.g. one per simulation replicate).

    Uses the same SHA-256 construction as the draw generator so derived
    seeds are reproducible from the published master seed:
    SHA-256(master || "." || decimal(index)), full 32-byte digest.
    """
    if index < 0:
        raise SamplingError(f"index must be >= 0, got {index}")
    digest = hashlib.sha256(
        master.seed_material + b"." + str(index).encode("ascii")
    ).digest()
    note = origin_note or f"derived #{index} from {master.origin_note or 'master'}"
    return AuditSeed(digest, note)
