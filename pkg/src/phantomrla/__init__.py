"""Risk-limiting election audits that survive erroneous ballot manifests.

Ballots are drawn uniformly from 1..N_U, where N_U is an upper bound on how
many ballots were cast that may exceed what the manifest lists.  Draws beyond
the listing, and listed ballots that cannot be produced, are scored as if they
showed the worst possible content for every outcome under test.  The resulting
P-values stay conservative no matter how wrong the manifest is, so long as the
upper bound itself holds.

Layout:

    manifest    ballot manifest parsing and draw-to-ballot location
    sampling    seeded, portable pseudo-random draws (hash based)
    scenario    pre-audit feasibility checks on the three ballot counts
    contest     contest setup and ballot interpretations
    comparison  machine-vs-human comparison audit arithmetic
    polling     no-machine-records polling audit arithmetic
    cvr         machine interpretation files
    session     the live audit state machine with an append-only log
    logchain    digest-chained JSON Lines records
    simulator   Monte Carlo checks: dominance and attained risk
    service     HTTP JSON interface
    cli         command-line interface
"""

from .comparison import (
    DEFAULT_GAMMA,
    ComparisonParams,
    ComparisonState,
    initial_sample_size,
    km_factor,
    km_update,
    log_km_factor,
    max_overstatement,
    p_value,
    pair_overstatement,
)
from .contest import (
    ContestError,
    ContestSetup,
    Interpretation,
    Mark,
    Provenance,
    UnknownCandidate,
    UnknownContest,
    interpretation_from_json,
    interpretation_to_json,
    smallest_margin_across,
)
from .cvr import CvrError, CvrFile, MissingCvr, parse_cvr_lines, parse_cvr_path
from .logchain import GENESIS_DIGEST, LogChain, LogCorrupt, canonical_json
from .manifest import (
    BallotManifest,
    DrawOutOfRange,
    Listed,
    ManifestError,
    UnlistedPhantom,
    parse_manifest,
    serialize_manifest,
)
from .polling import (
    NO_VALID_VOTE,
    ZOMBIE_ALL_LOSERS,
    NoValidVote,
    PollingSetup,
    PollingState,
    VoteFor,
    ZombieAllLosers,
    observations_from_interpretation,
    polling_p_value,
    polling_update,
    polling_update_ballot,
)
from .sampling import AuditSeed, DrawSequence, derive_seed, draw_batch, draw_next
from .scenario import (
    BallotCounts,
    HaltInconsistentBounds,
    HaltStuffingEvidence,
    MarginErasureWarning,
    Proceed,
    classify,
)
from .session import (
    AuditConfig,
    AuditMethod,
    DrawMismatch,
    DrawResult,
    Evaluation,
    Found,
    MarginRiskUnacknowledged,
    NotFound,
    PendingDraw,
    ScenarioHalt,
    Session,
    SessionError,
    SessionStatus,
    StateDigestMismatch,
    replay,
    start_session,
)
from .simulator import (
    DominanceReport,
    PopulationSpec,
    ReplicateRecord,
    RiskReport,
    SimulatorError,
    dominance_check,
    enumerate_distribution,
    evaluate_sequence,
    flip_outcome,
    make_cvr,
    make_population,
    perturb_manifest,
    risk_estimate,
    run_replicates,
)

__version__ = "0.1.0"

__all__ = [
    "AuditConfig",
    "AuditMethod",
    "AuditSeed",
    "BallotCounts",
    "BallotManifest",
    "ComparisonParams",
    "ComparisonState",
    "ContestError",
    "ContestSetup",
    "CvrError",
    "CvrFile",
    "DEFAULT_GAMMA",
    "DominanceReport",
    "DrawMismatch",
    "DrawOutOfRange",
    "DrawResult",
    "DrawSequence",
    "Evaluation",
    "Found",
    "GENESIS_DIGEST",
    "HaltInconsistentBounds",
    "HaltStuffingEvidence",
    "Interpretation",
    "Listed",
    "LogChain",
    "LogCorrupt",
    "ManifestError",
    "MarginErasureWarning",
    "MarginRiskUnacknowledged",
    "Mark",
    "MissingCvr",
    "NO_VALID_VOTE",
    "NoValidVote",
    "NotFound",
    "PendingDraw",
    "PollingSetup",
    "PollingState",
    "PopulationSpec",
    "Proceed",
    "Provenance",
    "ReplicateRecord",
    "RiskReport",
    "ScenarioHalt",
    "Session",
    "SessionError",
    "SessionStatus",
    "SimulatorError",
    "StateDigestMismatch",
    "UnknownCandidate",
    "UnknownContest",
    "UnlistedPhantom",
    "VoteFor",
    "ZOMBIE_ALL_LOSERS",
    "ZombieAllLosers",
    "canonical_json",
    "classify",
    "derive_seed",
    "dominance_check",
    "draw_batch",
    "draw_next",
    "enumerate_distribution",
    "evaluate_sequence",
    "flip_outcome",
    "initial_sample_size",
    "interpretation_from_json",
    "interpretation_to_json",
    "km_factor",
    "km_update",
    "log_km_factor",
    "make_cvr",
    "make_population",
    "max_overstatement",
    "observations_from_interpretation",
    "p_value",
    "pair_overstatement",
    "parse_cvr_lines",
    "parse_cvr_path",
    "parse_manifest",
    "perturb_manifest",
    "polling_p_value",
    "polling_update",
    "polling_update_ballot",
    "replay",
    "risk_estimate",
    "run_replicates",
    "serialize_manifest",
    "smallest_margin_across",
    "start_session",
]
