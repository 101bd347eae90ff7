"""Monte Carlo harness for the audit engine.

Builds synthetic ballot populations with known ground truth, perturbs
their manifests (graves, hellmouths, omissions), runs complete audits
both through the erroneous manifest with zombie substitution and through
the accurate manifest, and compares the resulting P-value distributions:
the substitution should make the P-value stochastically larger than it
would have been with an accurate manifest, and the chance of wrongly
confirming a wrong outcome should stay at or below the risk limit.

Replicates use the real audit sampler with per-replicate derived seeds,
the real manifest arithmetic, and per-ballot update factors read from the
production update functions; only the accumulation is vectorized with
numpy for speed.  A separate exact path (`evaluate_sequence`,
`enumerate_distribution`) runs every update through the sequential state
objects so small instances can be checked against brute-force
enumeration, and the vectorized path is tested against it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from . import comparison as cmp
from . import polling as pol
from .contest import ContestSetup, Interpretation, Mark, Provenance
from .cvr import CvrFile
from .manifest import BallotManifest, Listed, ManifestGroup, UnlistedPhantom
from .sampling import AuditSeed, derive_seed, draw_batch
from .scenario import BallotCounts, Proceed, classify


class SimulatorError(ValueError):
    """Base class for simulator errors."""


class InfeasibleErrorModel(SimulatorError):
    """The requested manifest perturbation cannot be applied."""


class EmptySample(SimulatorError):
    pass


class NoReplicates(SimulatorError):
    pass


class OutcomeNotWrong(SimulatorError):
    """Risk estimation requires a population whose true outcome differs
    from the reported one."""


class ScenarioRefused(SimulatorError):
    """The configured counts classify to a halt, so no audit can run."""


NO_VOTE_CODE = -1


def interpretation_from_code(code: int, contest: ContestSetup, provenance: Provenance) -> Interpretation:
    """Decode a compact per-ballot vote code: candidate index, or -1 for a
    ballot with no valid vote in the contest."""
    if code == NO_VOTE_CODE:
        entry = Mark.UNDERVOTE
    else:
        entry = frozenset({contest.candidates[code]})
    return Interpretation(contests={contest.contest_id: entry}, provenance=provenance)


@dataclass(frozen=True)
class PopulationSpec:
    """A synthetic election with known ground truth.

    `true_votes` and `machine_votes` are aligned arrays of vote codes for
    the physical ballots, ordered group by group (manifest group order,
    `true_group_counts` deep).  The reported manifest may disagree with
    the true group counts: claimed < actual makes a grave, claimed >
    actual a hellmouth.
    """

    contest: ContestSetup
    true_votes: np.ndarray
    machine_votes: np.ndarray
    group_ids: tuple[str, ...]
    true_group_counts: dict[str, int]
    reported_manifest: BallotManifest
    n_true: int

    def __post_init__(self):
        if len(self.true_votes) != self.n_true or len(self.machine_votes) != self.n_true:
            raise SimulatorError("vote arrays must have one entry per true ballot")
        if sum(self.true_group_counts.values()) != self.n_true:
            raise SimulatorError("true group counts must sum to n_true")
        # Physical ballot order is group_ids order; the manifest must walk
        # the same groups in the same order or positions would not line up.
        listed_ids = tuple(g.group_id for g in self.reported_manifest.groups)
        if listed_ids != self.group_ids:
            raise SimulatorError(
                "the reported manifest must list the population's groups in order"
            )

    @property
    def n_manifest(self) -> int:
        return self.reported_manifest.total_listed

    def graves(self) -> list[str]:
        """Groups holding more ballots than the manifest claims."""
        return [
            g.group_id
            for g in self.reported_manifest.groups
            if self.true_group_counts[g.group_id] > g.claimed_count
        ]

    def hellmouths(self) -> list[str]:
        """Groups holding fewer ballots than the manifest claims."""
        return [
            g.group_id
            for g in self.reported_manifest.groups
            if self.true_group_counts[g.group_id] < g.claimed_count
        ]

    def accurate_manifest(self) -> BallotManifest:
        return BallotManifest(
            groups=tuple(
                ManifestGroup(gid, self.true_group_counts[gid]) for gid in self.group_ids
            )
        )

    def with_manifest(self, manifest: BallotManifest) -> "PopulationSpec":
        return replace(self, reported_manifest=manifest)

    def with_accurate_manifest(self) -> "PopulationSpec":
        return self.with_manifest(self.accurate_manifest())

    def true_tallies(self) -> dict[str, int]:
        return {
            cand: int(np.count_nonzero(self.true_votes == i))
            for i, cand in enumerate(self.contest.candidates)
        }

    def true_outcome_correct(self) -> bool:
        """Do the reported winners actually beat the reported losers on
        the true votes?"""
        tallies = self.true_tallies()
        return all(
            tallies[w] > tallies[loser] for w, loser in self.contest.pairs
        )


def make_population(
    candidates: list[str],
    true_tallies: dict[str, int],
    n_true: int,
    n_groups: int,
    misread_rate: float,
    rng_seed: int,
    contest_id: str = "contest-1",
    k_seats: int = 1,
) -> PopulationSpec:
    """Build a shuffled population with machine interpretations.

    True votes follow `true_tallies` (remaining ballots have no valid
    vote).  Each machine record independently misreads its ballot with
    probability `misread_rate`, switching to a uniformly random different
    code.  The contest's reported tallies are the machine tallies, so the
    reported outcome is whatever the machine data says.
    """
    total_votes = sum(true_tallies.values())
    if total_votes > n_true:
        raise SimulatorError("tallies exceed the number of ballots")
    if not (0.0 <= misread_rate < 1.0):
        raise SimulatorError("misread rate must be in [0, 1)")
    if not (1 <= n_groups <= n_true):
        raise SimulatorError("need between 1 and n_true groups")
    rng = np.random.default_rng(rng_seed)
    codes = np.full(n_true, NO_VOTE_CODE, dtype=np.int32)
    pos = 0
    for i, cand in enumerate(candidates):
        k = true_tallies.get(cand, 0)
        codes[pos : pos + k] = i
        pos += k
    rng.shuffle(codes)

    machine = codes.copy()
    flips = rng.random(n_true) < misread_rate
    if np.any(flips):
        # Shift by a nonzero offset in code space: always a different code.
        n_codes = len(candidates) + 1
        offsets = rng.integers(1, n_codes, size=int(np.count_nonzero(flips)))
        current = machine[flips] + 1  # 0..n_codes-1 with 0 = no valid vote
        machine[flips] = (current + offsets) % n_codes - 1

    reported = {
        cand: int(np.count_nonzero(machine == i)) for i, cand in enumerate(candidates)
    }
    order = sorted(candidates, key=lambda c: (-reported[c], candidates.index(c)))
    winners = frozenset(order[:k_seats])
    contest = ContestSetup(
        contest_id=contest_id,
        candidates=tuple(candidates),
        winners=winners,
        reported_tallies=reported,
        k_seats=k_seats,
    )

    base, extra = divmod(n_true, n_groups)
    width = len(str(n_groups))
    group_ids = tuple(f"group-{i + 1:0{width}d}" for i in range(n_groups))
    counts = {
        gid: base + (1 if i < extra else 0) for i, gid in enumerate(group_ids)
    }
    manifest = BallotManifest(
        groups=tuple(ManifestGroup(gid, counts[gid]) for gid in group_ids)
    )
    return PopulationSpec(
        contest=contest,
        true_votes=codes,
        machine_votes=machine,
        group_ids=group_ids,
        true_group_counts=counts,
        reported_manifest=manifest,
        n_true=n_true,
    )


def flip_outcome(pop: PopulationSpec, rng_seed: int) -> tuple[PopulationSpec, dict]:
    """Make the reported outcome wrong while leaving every reported input
    untouched: swap just enough true votes from the reported winner to the
    runner-up to reverse the true margin.  Machine records and reported
    tallies stay exactly as they were, so the audit sees the same setup
    but the ground truth now contradicts it."""
    contest = pop.contest
    cands = contest.candidates
    winner = max(contest.winners, key=lambda c: contest.tally(c))
    runner_up = max(contest.losers, key=lambda c: contest.tally(c))
    w_code = cands.index(winner)
    r_code = cands.index(runner_up)
    tallies = pop.true_tallies()
    margin = tallies[winner] - tallies[runner_up]
    if margin <= 0:
        return pop, {"swapped": 0, "from": winner, "to": runner_up}
    n_swap = margin // 2 + 1
    rng = np.random.default_rng(rng_seed)
    winner_positions = np.flatnonzero(pop.true_votes == w_code)
    if len(winner_positions) < n_swap:
        raise SimulatorError("not enough true winner votes to flip the outcome")
    chosen = rng.choice(winner_positions, size=n_swap, replace=False)
    flipped = pop.true_votes.copy()
    flipped[chosen] = r_code
    new_pop = replace(pop, true_votes=flipped)
    description = {"swapped": int(n_swap), "from": winner, "to": runner_up}
    return new_pop, description


def perturb_manifest(
    true_counts: dict[str, int],
    error_model: dict,
    rng_seed: int,
) -> BallotManifest:
    """Apply the error model to an accurate listing.

    n_graves groups each under-claim by `magnitude` and n_hellmouths
    groups each over-claim by `magnitude` (disjoint sets); n_omitted
    additional ballots are removed from the listing one at a time from
    random groups, deepening or creating graves.  With n_graves equal to
    n_hellmouths the listed total is unchanged; omissions lower it.
    """
    n_graves = int(error_model.get("n_graves", 0))
    n_hellmouths = int(error_model.get("n_hellmouths", 0))
    n_omitted = int(error_model.get("n_omitted", 0))
    magnitude = int(error_model.get("magnitude", 0))
    if min(n_graves, n_hellmouths, n_omitted, magnitude) < 0:
        raise InfeasibleErrorModel("error model entries must be >= 0")
    if (n_graves or n_hellmouths) and magnitude == 0:
        raise InfeasibleErrorModel("graves and hellmouths need a nonzero magnitude")
    group_ids = list(true_counts)
    if n_graves + n_hellmouths > len(group_ids):
        raise InfeasibleErrorModel(
            f"{n_graves} graves + {n_hellmouths} hellmouths need more than the"
            f" {len(group_ids)} groups available"
        )
    rng = np.random.default_rng(rng_seed)
    claimed = dict(true_counts)
    touched = rng.choice(len(group_ids), size=n_graves + n_hellmouths, replace=False)
    for pos in touched[:n_graves]:
        gid = group_ids[pos]
        if claimed[gid] < magnitude:
            raise InfeasibleErrorModel(
                f"group {gid!r} lists {claimed[gid]} ballots, cannot under-claim by {magnitude}"
            )
        claimed[gid] -= magnitude
    for pos in touched[n_graves:]:
        gid = group_ids[pos]
        claimed[gid] += magnitude
    for _ in range(n_omitted):
        nonempty = [gid for gid in group_ids if claimed[gid] > 0]
        if not nonempty:
            raise InfeasibleErrorModel("nothing left to omit from the listing")
        claimed[nonempty[rng.integers(len(nonempty))]] -= 1
    return BallotManifest(
        groups=tuple(ManifestGroup(gid, claimed[gid]) for gid in group_ids)
    )


def make_cvr(pop: PopulationSpec, strict: bool = False) -> CvrFile:
    """Machine records for every listed position that physically exists,
    keyed the way the audit retrieves them: (group_id, index in group)."""
    records: dict[tuple[str, int], Interpretation] = {}
    offset = 0
    claimed = {g.group_id: g.claimed_count for g in pop.reported_manifest.groups}
    for gid in pop.group_ids:
        actual = pop.true_group_counts[gid]
        for i in range(1, min(claimed.get(gid, 0), actual) + 1):
            records[(gid, i)] = interpretation_from_code(
                int(pop.machine_votes[offset + i - 1]), pop.contest, Provenance.MACHINE
            )
        offset += actual
    return CvrFile(records=records, strict=strict)


# -- replicate engine ---------------------------------------------------


@dataclass(frozen=True)
class ReplicateRecord:
    final_p: float
    stopped_without_full_count: bool
    draws_used: int


_DRAW_CACHE: dict[tuple[str, int], np.ndarray] = {}


def draw_matrix(
    master_seed: AuditSeed, bound: int, replicates: int, n_draws: int
) -> np.ndarray:
    """Draw numbers for `replicates` independent audits, shape (R, n).

    Row r uses the derived seed for replicate r and columns are the draw
    counters, so row r is exactly the sequence a live session with that
    seed would generate; results for one replicate never depend on how
    many others run.  Cached and grown incrementally: raising R or n only
    generates the missing draws.
    """
    key = (master_seed.hex(), bound)
    cached = _DRAW_CACHE.get(key)
    if cached is None:
        cached = np.empty((0, 0), dtype=np.int64)
    rows, cols = cached.shape
    need_rows = max(rows, replicates)
    need_cols = max(cols, n_draws)
    if need_rows > rows or need_cols > cols:
        grown = np.empty((need_rows, need_cols), dtype=np.int64)
        grown[:rows, :cols] = cached
        for r in range(need_rows):
            seed_r = derive_seed(master_seed, r)
            if r < rows:
                if need_cols > cols:
                    grown[r, cols:] = draw_batch(seed_r, cols, need_cols - cols, bound)
            else:
                grown[r, :] = draw_batch(seed_r, 0, need_cols, bound)
        cached = grown
        _DRAW_CACHE[key] = cached
    return cached[:replicates, :n_draws]


@dataclass(frozen=True)
class _Resolution:
    """Vectorized resolution of draw numbers against one manifest."""

    zombie: np.ndarray  # bool: phantom draw or listed-but-missing
    physical: np.ndarray  # physical ballot index where findable, else 0


def _resolve_draws(pop: PopulationSpec, draws: np.ndarray) -> _Resolution:
    manifest = pop.reported_manifest
    claimed_cum = np.asarray(manifest.cumulative, dtype=np.int64)
    actual = np.asarray(
        [pop.true_group_counts[g.group_id] for g in manifest.groups], dtype=np.int64
    )
    actual_offset = np.concatenate(([0], np.cumsum(actual)))
    n_m = manifest.total_listed
    listed = draws <= n_m
    g = np.searchsorted(claimed_cum, np.where(listed, draws, 1), side="left")
    g = np.minimum(g, len(actual) - 1)  # placeholder draws when nothing is listed
    before = np.where(g > 0, claimed_cum[np.maximum(g - 1, 0)], 0)
    idx = draws - before
    findable = listed & (idx <= actual[g])
    physical = np.where(findable, actual_offset[g] + idx - 1, 0)
    return _Resolution(zombie=~findable, physical=physical)


def _comparison_log_factors(
    pop: PopulationSpec, res: _Resolution, params: cmp.ComparisonParams
) -> np.ndarray:
    contest = pop.contest
    n_codes = len(contest.candidates) + 1
    o_table = np.empty((n_codes, n_codes), dtype=np.int64)
    for m in range(-1, n_codes - 1):
        mi = interpretation_from_code(m, contest, Provenance.MACHINE)
        for h in range(-1, n_codes - 1):
            hi = interpretation_from_code(h, contest, Provenance.HUMAN)
            o_table[m + 1, h + 1] = cmp.max_overstatement(mi, hi, [contest])
    km_table = np.asarray(
        [cmp.log_km_factor(o, params) for o in cmp.OVERSTATEMENT_VALUES]
    )
    o = np.where(
        res.zombie,
        cmp.zombie_interpretation_comparison(),
        o_table[
            pop.machine_votes[res.physical] + 1, pop.true_votes[res.physical] + 1
        ],
    )
    return km_table[o + 2]


def _polling_log_terms(
    pop: PopulationSpec, res: _Resolution, setup: pol.PollingSetup
) -> np.ndarray:
    """Per-pair log T increments for each draw, shape (n_pairs, *draws.shape).

    The per-code terms are read off the production update function by
    applying it to a fresh state, so the vectorized path cannot drift
    from the sequential one.
    """
    contest = pop.contest
    keys = setup.pair_keys()
    fresh = pol.PollingState(setup=setup)
    n_codes = len(contest.candidates) + 1
    term_table = np.zeros((len(keys), n_codes))
    for code in range(-1, n_codes - 1):
        if code == NO_VOTE_CODE:
            continue
        after = pol.polling_update(fresh, pol.VoteFor(contest.contest_id, contest.candidates[code]))
        for pi, key in enumerate(keys):
            term_table[pi, code + 1] = after.log_t[key]
    zombie_after = pol.polling_update(fresh, pol.ZOMBIE_ALL_LOSERS)
    zombie_terms = np.asarray([zombie_after.log_t[key] for key in keys])
    true_codes = pop.true_votes[res.physical] + 1
    terms = term_table[:, true_codes]  # (n_pairs, R, n)
    wide_zombie = zombie_terms.reshape((len(keys),) + (1,) * res.zombie.ndim)
    return np.where(res.zombie[None, ...], wide_zombie, terms)


def _proceed_or_refuse(pop: PopulationSpec, counts: BallotCounts) -> Proceed:
    if counts.n_manifest != pop.n_manifest:
        raise ScenarioRefused(
            f"counts claim n_manifest = {counts.n_manifest} but the manifest"
            f" lists {pop.n_manifest}"
        )
    decision = classify(counts, pop.contest.smallest_margin_votes)
    if not isinstance(decision, Proceed):
        raise ScenarioRefused(getattr(decision, "reason", "scenario halt"))
    return decision


def run_replicates(
    pop: PopulationSpec,
    method: str,
    alpha: float,
    counts: BallotCounts,
    replicates: int,
    master_seed: AuditSeed,
    fixed_n: int | None = None,
    escalation_cap: int | None = None,
    gamma: float | None = None,
    return_details: bool = False,
):
    """Run complete audits and report per-replicate outcomes.

    Fixed-n mode reports the P-value after exactly `fixed_n` draws
    (dominance testing compares the statistic at identical draw counts);
    sequential mode draws until P <= alpha or the escalation cap and
    reports where each replicate stopped.  With `return_details` the
    draw-number matrix and per-draw P-value trajectories come back too.
    """
    if (fixed_n is None) == (escalation_cap is None):
        raise SimulatorError("choose exactly one of fixed_n or escalation_cap")
    if replicates < 0:
        raise SimulatorError("replicates must be >= 0")
    n_draws = fixed_n if fixed_n is not None else escalation_cap
    if n_draws < 1:
        raise SimulatorError("the draw budget must be >= 1")
    decision = _proceed_or_refuse(pop, counts)
    bound = decision.sampling_upper_bound
    if replicates == 0:
        if return_details:
            return [], {"draws": np.empty((0, n_draws), dtype=np.int64),
                        "p_trajectories": np.empty((0, n_draws))}
        return []

    draws = draw_matrix(master_seed, bound, replicates, n_draws)
    res = _resolve_draws(pop, draws)

    if method == "comparison":
        g = gamma if gamma is not None else cmp.DEFAULT_GAMMA
        params = cmp.ComparisonParams.from_contests([pop.contest], bound, gamma=g)
        log_p = np.cumsum(_comparison_log_factors(pop, res, params), axis=1)
        p_traj = np.exp(np.minimum(log_p, 0.0))
    elif method == "polling":
        if gamma is not None:
            raise SimulatorError("gamma applies to comparison audits only")
        setup = pol.PollingSetup.from_contests([pop.contest])
        log_t = np.cumsum(_polling_log_terms(pop, res, setup), axis=2)
        # P = max over pairs of min(1, exp(-log T)) = min(1, exp(-worst pair));
        # the floor only stops exp from overflowing on extreme trajectories.
        worst = np.maximum(log_t.min(axis=0), -700.0)
        p_traj = np.minimum(np.exp(-worst), 1.0)
    else:
        raise SimulatorError(f"unknown method {method!r}")

    records = []
    if fixed_n is not None:
        finals = p_traj[:, -1]
        for r in range(replicates):
            p = float(finals[r])
            records.append(ReplicateRecord(p, p <= alpha, n_draws))
    else:
        crossed = p_traj <= alpha
        any_cross = crossed.any(axis=1)
        first = np.where(any_cross, crossed.argmax(axis=1), n_draws - 1)
        for r in range(replicates):
            stopped = bool(any_cross[r])
            k = int(first[r])
            records.append(
                ReplicateRecord(float(p_traj[r, k]), stopped, k + 1 if stopped else n_draws)
            )
    if return_details:
        return records, {"draws": draws, "p_trajectories": p_traj}
    return records


# -- exact sequential path ---------------------------------------------


def evaluate_sequence(
    pop: PopulationSpec,
    method: str,
    counts: BallotCounts,
    draw_numbers: list[int],
    gamma: float | None = None,
) -> float:
    """Audit one explicit draw sequence through the sequential state
    objects (the same updates a live session applies) and return the final
    P-value."""
    decision = _proceed_or_refuse(pop, counts)
    bound = decision.sampling_upper_bound
    manifest = pop.reported_manifest
    claimed = {g.group_id: g.claimed_count for g in manifest.groups}
    offsets: dict[str, int] = {}
    running = 0
    for gid in pop.group_ids:
        offsets[gid] = running
        running += pop.true_group_counts[gid]

    def resolve(d: int) -> int | None:
        """Physical ballot index for a draw, or None for a zombie."""
        loc = manifest.locate(d, bound)
        if isinstance(loc, UnlistedPhantom):
            return None
        assert isinstance(loc, Listed)
        if loc.index_within_group > pop.true_group_counts[loc.group_id]:
            return None
        return offsets[loc.group_id] + loc.index_within_group - 1

    if method == "comparison":
        g = gamma if gamma is not None else cmp.DEFAULT_GAMMA
        params = cmp.ComparisonParams.from_contests([pop.contest], bound, gamma=g)
        state = cmp.ComparisonState()
        for d in draw_numbers:
            b = resolve(d)
            if b is None:
                o = cmp.zombie_interpretation_comparison()
            else:
                o = cmp.max_overstatement(
                    interpretation_from_code(int(pop.machine_votes[b]), pop.contest, Provenance.MACHINE),
                    interpretation_from_code(int(pop.true_votes[b]), pop.contest, Provenance.HUMAN),
                    [pop.contest],
                )
            state = cmp.km_update(state, o, params)
        return cmp.p_value(state)
    if method == "polling":
        if gamma is not None:
            raise SimulatorError("gamma applies to comparison audits only")
        setup = pol.PollingSetup.from_contests([pop.contest])
        state = pol.PollingState(setup=setup)
        for d in draw_numbers:
            b = resolve(d)
            if b is None:
                state = pol.polling_update(state, pol.zombie_interpretation_polling())
            else:
                code = int(pop.true_votes[b])
                if code == NO_VOTE_CODE:
                    state = pol.polling_update(state, pol.NO_VALID_VOTE)
                else:
                    state = pol.polling_update(
                        state, pol.VoteFor(pop.contest.contest_id, pop.contest.candidates[code])
                    )
        return pol.polling_p_value(state)
    raise SimulatorError(f"unknown method {method!r}")


def enumerate_distribution(
    pop: PopulationSpec,
    method: str,
    counts: BallotCounts,
    n_draws: int,
    gamma: float | None = None,
) -> list[tuple[float, float]]:
    """Exhaustively enumerate every equally likely draw sequence of length
    `n_draws` and return sorted (final P-value, probability) pairs
    aggregated by exact P-value.  Feasible only for tiny instances:
    bound**n sequences.
    """
    decision = _proceed_or_refuse(pop, counts)
    bound = decision.sampling_upper_bound
    total = bound**n_draws
    if total > 200_000:
        raise SimulatorError(
            f"{bound}^{n_draws} sequences is too many to enumerate"
        )
    weight = 1.0 / total
    acc: dict[float, float] = {}
    for seq in itertools.product(range(1, bound + 1), repeat=n_draws):
        p = evaluate_sequence(pop, method, counts, list(seq), gamma=gamma)
        acc[p] = acc.get(p, 0.0) + weight
    return sorted(acc.items())


# -- dominance and risk -------------------------------------------------


@dataclass(frozen=True)
class DominanceReport:
    replicates: int
    p_values_zombie: tuple[float, ...]
    p_values_truth: tuple[float, ...]
    max_cdf_violation: float
    dkw_epsilon: float
    dominates: bool


def dkw_epsilon(replicates: int, confidence: float) -> float:
    """One-arm uniform CDF error bound at the given confidence."""
    if not (0.0 < confidence < 1.0):
        raise SimulatorError("confidence must be in (0, 1)")
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * replicates))


def dominance_check(
    p_values_zombie, p_values_truth, confidence: float = 0.99
) -> DominanceReport:
    """Test whether the first arm is stochastically larger than the second.

    Stochastically larger means Pr(X >= t) >= Pr(Y >= t) for every t,
    equivalently that X's empirical CDF never rises above Y's.  The
    one-sided comparison runs at every pooled sample point; the alarm
    threshold is the sum of the two arms' DKW epsilons, so a true
    dominance relation fails the check with probability at most
    1 - confidence per arm.
    """
    zombie = np.sort(np.asarray(list(p_values_zombie), dtype=np.float64))
    truth = np.sort(np.asarray(list(p_values_truth), dtype=np.float64))
    if len(zombie) == 0 or len(truth) == 0:
        raise EmptySample("both arms need at least one replicate")
    pooled = np.concatenate([zombie, truth])
    cdf_zombie = np.searchsorted(zombie, pooled, side="right") / len(zombie)
    cdf_truth = np.searchsorted(truth, pooled, side="right") / len(truth)
    violation = float(np.max(cdf_zombie - cdf_truth))
    eps = dkw_epsilon(len(zombie), confidence) + dkw_epsilon(len(truth), confidence)
    return DominanceReport(
        replicates=len(zombie),
        p_values_zombie=tuple(map(float, zombie)),
        p_values_truth=tuple(map(float, truth)),
        max_cdf_violation=violation,
        dkw_epsilon=eps,
        dominates=violation <= eps,
    )


@dataclass(frozen=True)
class RiskReport:
    replicates: int
    wrongly_confirmed: int
    empirical_risk: float
    standard_error: float


def risk_estimate(pop: PopulationSpec, records: list[ReplicateRecord]) -> RiskReport:
    """Fraction of replicates that confirmed a wrong outcome.

    Only meaningful when the population's true outcome contradicts the
    reported winners; refuses otherwise rather than reporting a number
    that does not estimate risk.
    """
    if pop.true_outcome_correct():
        raise OutcomeNotWrong(
            "the reported outcome is correct for this population; stopping is"
            " not an error, so there is no risk to estimate"
        )
    if not records:
        raise NoReplicates("no replicates to estimate from")
    n = len(records)
    k = sum(1 for r in records if r.stopped_without_full_count)
    p_hat = k / n
    se = math.sqrt(p_hat * (1.0 - p_hat) / n)
    return RiskReport(replicates=n, wrongly_confirmed=k, empirical_risk=p_hat, standard_error=se)
