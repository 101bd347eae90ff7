"""The live-audit state machine.

A session plans the audit, issues random draws, directs the auditor to
physical ballots, accepts interpretations or NotFound reports, applies
zombie substitution, and evaluates stop/continue/escalate.  Every event
is appended to a digest-chained log (see logchain) that is sufficient on
its own to replay the session: the header embeds the full configuration,
including the manifest text and machine records, so `replay` can re-run
the exact state machine against the logged inputs and verify that every
draw, update, and decision matches what was recorded.

Sequencing is strict: at most one draw is pending at any time.  A draw
beyond the manifest total resolves to the conceptual phantom group and is
zombie-substituted immediately, with no operator involvement -- there is
no physical ballot to search for.  A listed draw that the crew cannot
produce must be reported NotFound explicitly; it then receives the same
worst-case substitution.  NotFound is irreversible in the log; a
correction is a new annotated record, never an edit.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Iterable

from . import comparison as cmp
from . import polling as pol
from .contest import (
    ContestSetup,
    Interpretation,
    Provenance,
    contest_from_json,
    contest_to_json,
    interpretation_from_json,
    interpretation_to_json,
)
from .cvr import CvrFile, cvr_record_to_json, parse_cvr_lines
from .logchain import LogChain, LogCorrupt, canonical_json
from .manifest import BallotManifest, Listed, UnlistedPhantom, parse_manifest, serialize_manifest
from .sampling import AuditSeed, DrawSequence
from .scenario import (
    BallotCounts,
    HaltInconsistentBounds,
    HaltStuffingEvidence,
    Proceed,
    classify,
    decision_to_json,
)
from .contest import smallest_margin_across


class SessionError(Exception):
    """Base class for session state-machine errors."""


class ScenarioHalt(SessionError):
    """Scenario classification refused the configuration."""

    def __init__(self, decision):
        self.decision = decision
        super().__init__(getattr(decision, "reason", "audit halted"))


class MarginRiskUnacknowledged(SessionError):
    """Phantoms could erase the margin and the operator has not signed off."""


class InvalidConfig(SessionError):
    pass


class SessionNotActive(SessionError):
    pass


class PendingInterpretation(SessionError):
    pass


class NoPendingDraw(SessionError):
    pass


class InterpretationSchemaMismatch(SessionError):
    pass


class DrawMismatch(SessionError):
    """Replay recomputed a draw that differs from the logged one."""


class StateDigestMismatch(SessionError):
    """Replay recomputed a state or record that differs from the logged one."""


class InputsMutated(SessionError):
    """The manifest or machine records changed under a live session."""


class AuditMethod(enum.Enum):
    COMPARISON = "comparison"
    POLLING = "polling"


class SessionStatus(enum.Enum):
    ACTIVE = "active"
    STOPPED_CONFIRMED = "stopped_confirmed"
    ESCALATED_FULL_HAND_COUNT = "escalated_full_hand_count"


class Evaluation(enum.Enum):
    CONTINUE_SAMPLING = "continue_sampling"
    STOP_CONFIRMED = "stop_confirmed"
    RECOMMEND_FULL_HAND_COUNT = "recommend_full_hand_count"


@dataclass(frozen=True)
class AuditConfig:
    """Everything a session needs, and everything replay must see again."""

    method: AuditMethod
    manifest: BallotManifest
    contests: tuple[ContestSetup, ...]
    counts: BallotCounts
    alpha: float
    seed: AuditSeed
    gamma: float | None = None
    escalation_cap: int | None = None
    acknowledge_margin_risk: bool = False
    cvr: CvrFile | None = None

    def __post_init__(self):
        if not isinstance(self.method, AuditMethod):
            raise InvalidConfig(f"unknown audit method {self.method!r}")
        if not (0.0 < self.alpha < 1.0):
            raise InvalidConfig(f"risk limit must be in (0, 1), got {self.alpha}")
        if not self.contests:
            raise InvalidConfig("at least one contest is required")
        if self.manifest.total_listed != self.counts.n_manifest:
            raise InvalidConfig(
                f"manifest lists {self.manifest.total_listed} ballots but counts"
                f" claim n_manifest = {self.counts.n_manifest}"
            )
        if self.escalation_cap is not None and self.escalation_cap < 1:
            raise InvalidConfig("escalation cap must be >= 1 when set")
        if self.method is AuditMethod.COMPARISON:
            if self.cvr is None:
                raise InvalidConfig("comparison audits require machine records")
        else:
            if self.gamma is not None:
                raise InvalidConfig("gamma applies to comparison audits only")
            if self.cvr is not None:
                raise InvalidConfig("polling audits take no machine records")


@dataclass(frozen=True)
class Found:
    """Operator outcome: the ballot was retrieved and read.

    `ballot` is a full interpretation, or for polling sessions optionally
    a pre-translated observation list.  `note` is a free-text operator
    annotation (e.g. "found, but possibly misfiled from another box");
    it is recorded verbatim and never changes the math.
    """

    ballot: Interpretation | tuple[pol.PollingObservation, ...]
    note: str | None = None


@dataclass(frozen=True)
class NotFound:
    """Operator outcome: the listed ballot could not be produced."""

    note: str | None = None


@dataclass(frozen=True)
class PendingDraw:
    counter: int
    draw_number: int
    location: Listed


@dataclass(frozen=True)
class DrawResult:
    counter: int
    draw_number: int
    location: Listed | UnlistedPhantom
    auto_resolved: bool
    p_value: float


def _location_to_json(loc) -> dict:
    if isinstance(loc, Listed):
        return {
            "kind": "listed",
            "group_ordinal": loc.group_ordinal,
            "index_within_group": loc.index_within_group,
            "group_id": loc.group_id,
        }
    return {"kind": "phantom", "draw_number": loc.draw_number}


def _cvr_canonical_lines(cvr: CvrFile) -> list[str]:
    return [
        cvr_record_to_json(gid, idx, interp)
        for (gid, idx), interp in sorted(cvr.records.items())
    ]


def config_to_payload(config: AuditConfig) -> dict:
    counts = config.counts
    return {
        "method": config.method.value,
        "alpha": config.alpha,
        "gamma": config.gamma,
        "seed_hex": config.seed.hex(),
        "seed_origin": config.seed.origin_note,
        "escalation_cap": config.escalation_cap,
        "acknowledge_margin_risk": config.acknowledge_margin_risk,
        "counts": {
            "n_manifest": counts.n_manifest,
            "n_upper": counts.n_upper,
            "n_oracle": counts.n_oracle,
        },
        "contests": [contest_to_json(c) for c in config.contests],
        "manifest_csv": serialize_manifest(config.manifest),
        "cvr_lines": None if config.cvr is None else _cvr_canonical_lines(config.cvr),
        "cvr_strict": bool(config.cvr.strict) if config.cvr is not None else False,
    }


def config_from_payload(payload: dict) -> AuditConfig:
    counts = payload["counts"]
    cvr = None
    if payload.get("cvr_lines") is not None:
        cvr = parse_cvr_lines(payload["cvr_lines"], strict=bool(payload.get("cvr_strict")))
    return AuditConfig(
        method=AuditMethod(payload["method"]),
        manifest=parse_manifest(payload["manifest_csv"]),
        contests=tuple(contest_from_json(c) for c in payload["contests"]),
        counts=BallotCounts(
            n_manifest=int(counts["n_manifest"]),
            n_upper=int(counts["n_upper"]),
            n_oracle=None if counts.get("n_oracle") is None else int(counts["n_oracle"]),
        ),
        alpha=float(payload["alpha"]),
        seed=AuditSeed.from_hex(payload["seed_hex"], payload.get("seed_origin", "")),
        gamma=None if payload.get("gamma") is None else float(payload["gamma"]),
        escalation_cap=(
            None if payload.get("escalation_cap") is None else int(payload["escalation_cap"])
        ),
        acknowledge_margin_risk=bool(payload.get("acknowledge_margin_risk")),
        cvr=cvr,
    )


def config_digest(config: AuditConfig) -> str:
    return hashlib.sha256(
        canonical_json(config_to_payload(config)).encode("utf-8")
    ).hexdigest()


def _default_clock() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


class Session:
    """One audit, from configuration to a terminal decision.

    Mutable and single-writer by contract; every mutation appends to the
    digest-chained log, so any reader holding the log lines sees a
    consistent snapshot.
    """

    def __init__(self, config: AuditConfig, clock: Callable[[], str] | None = None):
        self.config = config
        self.clock = clock or _default_clock
        decision = classify(config.counts, smallest_margin_across(list(config.contests)))
        if not isinstance(decision, Proceed):
            raise ScenarioHalt(decision)
        warning = decision.margin_warning
        if warning.outcome_at_risk and not config.acknowledge_margin_risk:
            raise MarginRiskUnacknowledged(
                f"{warning.missing_ballots} unaccounted-for ballots meet or exceed the"
                f" smallest margin of {warning.smallest_pairwise_margin_votes} votes;"
                " the unlisted ballots could in principle have changed the outcome."
                " Investigate, and set acknowledge_margin_risk to proceed anyway"
            )
        self.decision = decision
        self.sampling_upper_bound = decision.sampling_upper_bound
        self.config_digest = config_digest(config)
        self._manifest_text = serialize_manifest(config.manifest)
        self._cvr_lines = None if config.cvr is None else _cvr_canonical_lines(config.cvr)
        self._inputs_digest = self._current_inputs_digest()

        if config.method is AuditMethod.COMPARISON:
            gamma = config.gamma if config.gamma is not None else cmp.DEFAULT_GAMMA
            self.params = cmp.ComparisonParams.from_contests(
                list(config.contests), self.sampling_upper_bound, gamma=gamma
            )
            self.audit_state: cmp.ComparisonState | pol.PollingState = cmp.ComparisonState()
            self.polling_setup = None
        else:
            self.params = None
            self.polling_setup = pol.PollingSetup.from_contests(config.contests)
            self.audit_state = pol.PollingState(setup=self.polling_setup)

        self.draw_seq = DrawSequence(seed=config.seed, n_upper=self.sampling_upper_bound)
        self.status = SessionStatus.ACTIVE
        self.pending: PendingDraw | None = None
        self.draws_issued: list[tuple[int, int, Listed | UnlistedPhantom]] = []
        self.phantom_events = 0
        self.trajectory: list[dict] = []
        self.chain = LogChain()
        self.on_record: Callable[[dict], None] | None = None
        self._append(
            "header",
            {
                "config": config_to_payload(config),
                "config_digest": self.config_digest,
                "scenario": decision_to_json(decision),
            },
        )

    # -- log plumbing ---------------------------------------------------

    def _current_inputs_digest(self) -> str:
        h = hashlib.sha256()
        h.update(serialize_manifest(self.config.manifest).encode("utf-8"))
        if self.config.cvr is not None:
            for line in _cvr_canonical_lines(self.config.cvr):
                h.update(line.encode("utf-8"))
                h.update(b"\n")
        return h.hexdigest()

    def _append(self, record_type: str, payload: dict) -> dict:
        if self._current_inputs_digest() != self._inputs_digest:
            raise InputsMutated(
                "the manifest or machine records changed after session start"
            )
        record = self.chain.append(
            {"type": record_type, "timestamp": self.clock(), "payload": payload}
        )
        if self.on_record is not None:
            self.on_record(record)
        return record

    def log_lines(self) -> list[str]:
        return self.chain.to_lines()

    # -- state serialization for the log --------------------------------

    def _state_hexes(self) -> dict:
        if isinstance(self.audit_state, cmp.ComparisonState):
            return {
                "log_p": self.audit_state.log_p.hex(),
                "carry": self.audit_state.log_p_carry.hex(),
            }
        pairs = {
            canonical_json(list(key)): [
                self.audit_state.log_t[key].hex(),
                self.audit_state.log_t_carry[key].hex(),
            ]
            for key in self.audit_state.setup.shares
        }
        return {"pairs": pairs}

    def p_value(self) -> float:
        if isinstance(self.audit_state, cmp.ComparisonState):
            return cmp.p_value(self.audit_state)
        return pol.polling_p_value(self.audit_state)

    # -- operations ------------------------------------------------------

    def next_draw(self) -> DrawResult:
        """Issue the next random draw and resolve it through the manifest.

        Listed draws become the pending retrieval instruction; draws past
        the manifest total are phantom ballots and are zombie-substituted
        here and now, since no physical search is possible.
        """
        if self.status is not SessionStatus.ACTIVE:
            raise SessionNotActive(f"session is {self.status.value}")
        if self.pending is not None:
            raise PendingInterpretation(
                f"draw {self.pending.counter} awaits an interpretation"
            )
        counter = self.draw_seq.next_counter
        draw_number = self.draw_seq.next()
        location = self.config.manifest.locate(draw_number, self.sampling_upper_bound)
        self.draws_issued.append((counter, draw_number, location))
        self._append(
            "draw",
            {
                "counter": counter,
                "draw_number": draw_number,
                "location": _location_to_json(location),
            },
        )
        if isinstance(location, UnlistedPhantom):
            self._apply_zombie(counter, draw_number, "unlisted_phantom", note=None)
            return DrawResult(counter, draw_number, location, True, self.p_value())
        self.pending = PendingDraw(counter, draw_number, location)
        return DrawResult(counter, draw_number, location, False, self.p_value())

    def _traj_append(self, counter: int, draw_number: int, kind: str) -> None:
        self.trajectory.append(
            {
                "counter": counter,
                "draw_number": draw_number,
                "kind": kind,
                "n_sampled": self.audit_state.n_sampled,
                "p_value": self.p_value(),
            }
        )

    def _apply_zombie(self, counter: int, draw_number: int, reason: str, note: str | None):
        if isinstance(self.audit_state, cmp.ComparisonState):
            o = cmp.zombie_interpretation_comparison()
            self.audit_state = cmp.km_update(self.audit_state, o, self.params)
            effect = {"overstatement": o}
        else:
            self.audit_state = pol.polling_update_ballot(
                self.audit_state, [pol.zombie_interpretation_polling()]
            )
            effect = {"observations": [{"kind": "zombie_all_losers"}]}
        self.phantom_events += 1
        self._traj_append(counter, draw_number, f"zombie_{reason}")
        payload = {
            "counter": counter,
            "reason": reason,
            "effect": effect,
            "state": self._state_hexes(),
            "p_value": self.p_value(),
        }
        if note is not None:
            payload["note"] = note
        self._append("zombie", payload)

    def record_interpretation(self, outcome: Found | NotFound) -> None:
        """Resolve the pending draw with a human reading or a NotFound."""
        if self.pending is None:
            raise NoPendingDraw("no draw awaits an interpretation")
        pending = self.pending
        if isinstance(outcome, NotFound):
            self.pending = None
            self._apply_zombie(
                pending.counter, pending.draw_number, "not_found", outcome.note
            )
            return
        if not isinstance(outcome, Found):
            raise InterpretationSchemaMismatch(f"unknown outcome {outcome!r}")
        ballot = outcome.ballot
        if isinstance(self.audit_state, cmp.ComparisonState):
            if not isinstance(ballot, Interpretation):
                raise InterpretationSchemaMismatch(
                    "comparison sessions require a full ballot interpretation"
                )
            if ballot.provenance is not Provenance.HUMAN:
                raise InterpretationSchemaMismatch(
                    f"operator interpretations must have human provenance,"
                    f" got {ballot.provenance.value}"
                )
            machine = self.config.cvr.lookup(
                pending.location.group_id, pending.location.index_within_group
            )
            o = cmp.max_overstatement(machine, ballot, list(self.config.contests))
            self.audit_state = cmp.km_update(self.audit_state, o, self.params)
            effect = {"overstatement": o}
            logged_ballot = {"interpretation": interpretation_to_json(ballot)}
        else:
            if isinstance(ballot, Interpretation):
                if ballot.provenance is not Provenance.HUMAN:
                    raise InterpretationSchemaMismatch(
                        f"operator interpretations must have human provenance,"
                        f" got {ballot.provenance.value}"
                    )
                observations = pol.observations_from_interpretation(
                    ballot, self.audit_state.setup
                )
                logged_ballot = {"interpretation": interpretation_to_json(ballot)}
            else:
                observations = list(ballot)
                if any(isinstance(o, pol.ZombieAllLosers) for o in observations):
                    raise InterpretationSchemaMismatch(
                        "operators cannot submit zombie observations"
                    )
                logged_ballot = {
                    "observations": [_obs_to_json(o) for o in observations]
                }
            self.audit_state = pol.polling_update_ballot(self.audit_state, observations)
            effect = {"observations": [_obs_to_json(o) for o in observations]}
        self.pending = None
        self._traj_append(pending.counter, pending.draw_number, "human")
        payload = {
            "counter": pending.counter,
            **logged_ballot,
            "effect": effect,
            "state": self._state_hexes(),
            "p_value": self.p_value(),
        }
        if outcome.note is not None:
            payload["note"] = outcome.note
        self._append("interpretation", payload)

    def evaluate(self) -> Evaluation:
        """Stop, continue, or recommend a full hand count.

        Confirmation wins at the boundary: if the P-value is at or below
        the risk limit, the audit stops confirmed even on the very draw
        that reached an escalation cap.
        """
        if self.pending is not None:
            raise PendingInterpretation("resolve the pending draw before evaluating")
        if self.status is SessionStatus.STOPPED_CONFIRMED:
            return Evaluation.STOP_CONFIRMED
        if self.status is SessionStatus.ESCALATED_FULL_HAND_COUNT:
            return Evaluation.RECOMMEND_FULL_HAND_COUNT
        p = self.p_value()
        if p <= self.config.alpha:
            self.status = SessionStatus.STOPPED_CONFIRMED
            self._append(
                "decision",
                {
                    "decision": Evaluation.STOP_CONFIRMED.value,
                    "p_value": p,
                    "draws_issued": len(self.draws_issued),
                },
            )
            return Evaluation.STOP_CONFIRMED
        if (
            self.config.escalation_cap is not None
            and len(self.draws_issued) >= self.config.escalation_cap
        ):
            self.status = SessionStatus.ESCALATED_FULL_HAND_COUNT
            self._append(
                "decision",
                {
                    "decision": Evaluation.RECOMMEND_FULL_HAND_COUNT.value,
                    "p_value": p,
                    "draws_issued": len(self.draws_issued),
                },
            )
            return Evaluation.RECOMMEND_FULL_HAND_COUNT
        return Evaluation.CONTINUE_SAMPLING

    # -- views -----------------------------------------------------------

    def state_json(self) -> dict:
        pending = None
        if self.pending is not None:
            pending = {
                "counter": self.pending.counter,
                "draw_number": self.pending.draw_number,
                "location": _location_to_json(self.pending.location),
            }
        return {
            "method": self.config.method.value,
            "status": self.status.value,
            "alpha": self.config.alpha,
            "sampling_upper_bound": self.sampling_upper_bound,
            "phantom_ballots": self.decision.phantom_count,
            "margin_warning": {
                "missing_ballots": self.decision.margin_warning.missing_ballots,
                "smallest_pairwise_margin_votes": (
                    self.decision.margin_warning.smallest_pairwise_margin_votes
                ),
                "outcome_at_risk": self.decision.margin_warning.outcome_at_risk,
            },
            "draws_issued": len(self.draws_issued),
            "pending": pending,
            "p_value": self.p_value(),
            "phantom_events": self.phantom_events,
            "cvr_misses": self.config.cvr.miss_count if self.config.cvr else 0,
            "config_digest": self.config_digest,
        }


def _obs_to_json(obs: pol.PollingObservation) -> dict:
    if isinstance(obs, pol.VoteFor):
        return {"kind": "vote_for", "contest_id": obs.contest_id, "candidate": obs.candidate}
    if isinstance(obs, pol.NoValidVote):
        return {"kind": "no_valid_vote"}
    return {"kind": "zombie_all_losers"}


def _obs_from_json(obj: dict) -> pol.PollingObservation:
    kind = obj.get("kind")
    if kind == "vote_for":
        return pol.VoteFor(str(obj["contest_id"]), str(obj["candidate"]))
    if kind == "no_valid_vote":
        return pol.NO_VALID_VOTE
    if kind == "zombie_all_losers":
        return pol.ZOMBIE_ALL_LOSERS
    raise InterpretationSchemaMismatch(f"unknown observation {obj!r}")


def start_session(config: AuditConfig, clock: Callable[[], str] | None = None) -> Session:
    """Validate the configuration against the scenario rules and open an
    active session with the header written."""
    return Session(config, clock=clock)


def _compare_records(logged: list[dict], rebuilt: list[dict], upto: int) -> None:
    for i in range(upto):
        if logged[i] == rebuilt[i]:
            continue
        if logged[i].get("type") == "draw" and rebuilt[i].get("type") == "draw":
            raise DrawMismatch(
                f"record {i}: logged draw {logged[i]['payload'].get('draw_number')}"
                f" but the seed yields {rebuilt[i]['payload'].get('draw_number')}"
            )
        raise StateDigestMismatch(
            f"record {i} ({logged[i].get('type')}): logged values do not match"
            " the recomputation"
        )


def replay(lines: Iterable[str]) -> Session:
    """Rebuild a session from its log, verifying every recorded value.

    The chain digests are checked first (LogCorrupt on any break), then
    the state machine is re-run from the embedded configuration with the
    logged timestamps: every draw is recomputed from the seed
    (DrawMismatch on disagreement) and every update and decision is
    recomputed and compared, digests included (StateDigestMismatch).
    The result is a live Session positioned exactly where the log ends.
    """
    chain = LogChain.from_lines(lines)
    if not chain.records:
        raise LogCorrupt("empty log: no header record")
    header = chain.records[0]
    if header.get("type") != "header":
        raise LogCorrupt("first record must be the header")
    payload = header.get("payload", {})
    try:
        config = config_from_payload(payload["config"])
    except (KeyError, TypeError, ValueError) as exc:
        raise LogCorrupt(f"header does not describe a valid configuration: {exc}") from exc

    timestamps = [r.get("timestamp", "") for r in chain.records]
    cursor = 0

    def scripted_clock() -> str:
        nonlocal cursor
        if cursor < len(timestamps):
            ts = timestamps[cursor]
            cursor += 1
            return ts
        raise StateDigestMismatch("replay produced more records than the log holds")

    session = Session(config, clock=scripted_clock)
    if session.config_digest != payload.get("config_digest"):
        raise StateDigestMismatch("header configuration digest does not match")
    logged = chain.records
    i = 1
    while i < len(logged):
        record = logged[i]
        rtype = record.get("type")
        rebuilt_before = len(session.chain.records)
        try:
            if rtype == "draw":
                session.next_draw()
            elif rtype == "zombie":
                reason = record.get("payload", {}).get("reason")
                if reason == "unlisted_phantom":
                    # produced by next_draw on the previous logged record
                    if len(session.chain.records) <= i:
                        raise StateDigestMismatch(
                            f"record {i}: logged phantom substitution the seed"
                            " does not produce"
                        )
                    i += 1
                    continue
                note = record.get("payload", {}).get("note")
                session.record_interpretation(NotFound(note=note))
            elif rtype == "interpretation":
                rp = record.get("payload", {})
                note = rp.get("note")
                if "interpretation" in rp:
                    ballot = interpretation_from_json(rp["interpretation"])
                    session.record_interpretation(Found(ballot=ballot, note=note))
                elif "observations" in rp:
                    obs = tuple(_obs_from_json(o) for o in rp["observations"])
                    session.record_interpretation(Found(ballot=obs, note=note))
                else:
                    raise LogCorrupt(f"record {i}: interpretation carries no ballot")
            elif rtype == "decision":
                session.evaluate()
            elif rtype == "header":
                raise LogCorrupt(f"record {i}: duplicate header")
            else:
                raise LogCorrupt(f"record {i}: unknown record type {rtype!r}")
        except (DrawMismatch, StateDigestMismatch, LogCorrupt):
            raise
        except (SessionError, ValueError) as exc:
            # The logged operation is not legal from the rebuilt state, so
            # the log does not describe a real session.
            raise LogCorrupt(f"record {i}: {exc}") from exc
        if len(session.chain.records) <= rebuilt_before:
            raise StateDigestMismatch(
                f"record {i}: replay did not reproduce the logged record"
            )
        _compare_records(logged, session.chain.records, len(session.chain.records))
        i = len(session.chain.records)
    _compare_records(logged, session.chain.records, len(logged))
    if len(session.chain.records) != len(logged):
        raise StateDigestMismatch("replay record count does not match the log")
    return session
