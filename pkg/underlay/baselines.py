from itertools import product
from typing import Iterator, Literal

import numpy as np
from pydantic import Field
from scipy.optimize import linear_sum_assignment

from .allocation import (
    AllocationResult,
    CandidateScore,
    admit_pairs,
    cellular_signaling,
    full_csi_signaling,
    sorted_candidates,
)
from .exceptions import ScaleGuardError
from .logging import get_logger
from .power import (
    GroupSystem,
    PowerSolveOutcome,
    RbGroup,
    first_pair_powers,
    max_power_walk,
    min_power_solve,
)
from .radio import Assignment, PowerVector, Scenario
from .types import Algorithm, EffortCounters, FrozenModel

logger = get_logger(__name__)

# Largest instance the exhaustive search accepts, (N + 1) ** M assignments
EXHAUSTIVE_MAX_CUES = 3
EXHAUSTIVE_MAX_D2D = 8

AllCsiScoring = Literal["power", "gain"]


def _solo_rate(scn: Scenario, cue: int) -> float:
    return float(np.log2(1.0 + scn.solo_cue_sinr(cue)))


def three_step(scn: Scenario) -> AllocationResult:
    """
    At most one D2D pair per RB, chosen by maximum-weight bipartite matching.

    Every (CUE, pair) combination gets its closed-form minimum powers raised by the power
    walk; its weight is the sum-rate gain over the CUE alone at full power. Combinations that
    are infeasible are never matched, and each CUE may stay alone.
    """
    n_cues, n_d2d = scn.n_cues, scn.n_d2d

    # NOTE: Dummy columns of zero cost let a CUE keep its RB for itself
    cost = np.zeros((n_cues, n_d2d + n_cues))
    walked: dict[tuple[int, int], PowerSolveOutcome] = {}
    for cue, pair in product(range(n_cues), range(n_d2d)):
        start = first_pair_powers(scn, cue, pair)
        if not start.feasible:
            cost[cue, pair] = np.inf
            continue

        group = RbGroup(cue=cue, pairs=(pair,))
        walked[cue, pair] = outcome = max_power_walk(group, scn, start)
        gain = GroupSystem.from_group(group, scn).sum_rate(outcome.powers) - _solo_rate(scn, cue)
        cost[cue, pair] = -gain

    per_rb: list[tuple[int, ...]] = [()] * n_cues
    p_c = np.full(n_cues, scn.p_c_max)
    p_d = np.zeros(n_d2d)
    for cue, column in zip(*linear_sum_assignment(cost)):
        if column < n_d2d and cost[cue, column] < 0:
            outcome = walked[cue, column]
            per_rb[cue] = (int(column),)
            p_c[cue] = outcome.cue_power
            p_d[column] = outcome.pair_powers[0]

    return AllocationResult.evaluate(
        Algorithm.THREE_STEP,
        scn,
        Assignment.from_groups(per_rb, n_d2d),
        PowerVector(p_c=p_c, p_d=p_d),
        EffortCounters(
            matching_states=n_cues * (n_d2d + 1),
            signaling_gains=cellular_signaling(n_cues, n_d2d),
        ),
    )


def _interference_first(scoring: AllCsiScoring):
    def select(scn: Scenario, cue: int, denied: set[int]) -> CandidateScore:
        candidates = sorted_candidates(denied, "select_first_pair")
        scores = np.array(scn.gains.h_cd[cue, candidates])
        if scoring == "power":
            scores = scores * scn.p_c_max

        best = int(np.argmin(scores))
        return CandidateScore(pair=candidates[best], score=float(scores[best]), kind="first-pair")

    return select


def _interference_next(scoring: AllCsiScoring):
    def select(
        scn: Scenario,
        group: RbGroup,
        powers: PowerSolveOutcome,
        denied: set[int],
    ) -> CandidateScore:
        candidates = sorted_candidates(denied, "select_next_pair")
        gains = np.vstack(
            (
                scn.gains.h_cd[group.cue, candidates][np.newaxis, :],
                scn.gains.h_dd[np.ix_(list(group.pairs), candidates)],
            )
        )
        transmitting = powers.powers > 0
        if scoring == "power":
            gains = gains * powers.powers[:, np.newaxis]

        scores = gains[transmitting].max(axis=0) if np.any(transmitting) else gains.max(axis=0)
        best = int(np.argmin(scores))
        return CandidateScore(pair=candidates[best], score=float(scores[best]), kind="subsequent")

    return select


def all_csi_greedy(scn: Scenario, scoring: AllCsiScoring = "power") -> AllocationResult:
    """
    Same admission loop as :func:`~underlay.allocation.allocate`, but with full CSI.

    The next candidate is the denied pair receiving the least interference from the RB:
    the maximum over in-RB transmitters of ``P_u * h(u, candidate receiver)``
    (``scoring="power"``), or of the bare gain ``h`` (``scoring="gain"``). Every gain of the
    cell is signalled.
    """
    return admit_pairs(
        scn,
        Algorithm.ALL_CSI,
        _interference_first(scoring),
        _interference_next(scoring),
        signaling=full_csi_signaling(scn.n_cues, scn.n_d2d),
    )


class MatchingEnumeration(FrozenModel):
    """Every mapping of the D2D pairs to one RB or to the denied set."""

    n_cues: int = Field(ge=1)
    n_d2d: int = Field(ge=0)

    @property
    def count(self) -> int:
        return (self.n_cues + 1) ** self.n_d2d

    def assignments(self) -> Iterator[Assignment]:
        # Choice `n_cues` denies the pair, pairs enter each RB in ascending index order
        for choice in product(range(self.n_cues + 1), repeat=self.n_d2d):
            yield Assignment.from_groups(
                (
                    tuple(j for j, rb in enumerate(choice) if rb == cue)
                    for cue in range(self.n_cues)
                ),
                self.n_d2d,
            )


class _GroupCache:
    """Solves each distinct (CUE, pair set) group of a scenario once."""

    def __init__(self, scn: Scenario):
        self.scn = scn
        self._cache: dict[RbGroup, tuple[PowerSolveOutcome, float] | None] = {}

    def solve(self, group: RbGroup) -> tuple[PowerSolveOutcome, float] | None:
        if group in self._cache:
            return self._cache[group]

        system = GroupSystem.from_group(group, self.scn)
        if not group.pairs:
            outcome = system.outcome(np.array([self.scn.p_c_max]), feasible=True)
            solved = (outcome, system.sum_rate(outcome.powers))

        elif (start := min_power_solve(group, self.scn)).feasible:
            outcome = max_power_walk(group, self.scn, start)
            solved = (outcome, system.sum_rate(outcome.powers))

        else:
            solved = None

        self._cache[group] = solved
        return solved


def exhaustive(scn: Scenario, proposed_hint: AllocationResult | None = None) -> AllocationResult:
    """
    Oracle search over every assignment of D2D pairs to RBs.

    Each RB's powers are its minimum-power point raised by the power walk; assignments with
    any infeasible RB are skipped. ``proposed_hint`` is evaluated as one more candidate and
    kept only if strictly better, so the result is never below it.

    Raises:
        :class:`~underlay.exceptions.ScaleGuardError`: If ``N > 3`` or ``M > 8``.
    """
    n_cues, n_d2d = scn.n_cues, scn.n_d2d
    if n_cues > EXHAUSTIVE_MAX_CUES or n_d2d > EXHAUSTIVE_MAX_D2D:
        raise ScaleGuardError(n_cues, n_d2d, EXHAUSTIVE_MAX_CUES, EXHAUSTIVE_MAX_D2D)

    enumeration = MatchingEnumeration(n_cues=n_cues, n_d2d=n_d2d)
    cache = _GroupCache(scn)

    best_rate = -np.inf
    best: tuple[Assignment, list[PowerSolveOutcome]] | None = None
    for assignment in enumeration.assignments():
        outcomes: list[PowerSolveOutcome] = []
        total = 0.0
        for cue, pairs in enumerate(assignment.per_rb):
            if (solved := cache.solve(RbGroup(cue=cue, pairs=pairs))) is None:
                break

            outcomes.append(solved[0])
            total += solved[1]

        else:
            if total > best_rate:
                best_rate, best = total, (assignment, outcomes)

    counters = EffortCounters(
        matching_states=enumeration.count + (proposed_hint is not None),
        signaling_gains=full_csi_signaling(n_cues, n_d2d),
    )

    # NOTE: The all-denied assignment is always feasible, so `best` is never empty
    assert best is not None
    assignment, outcomes = best
    p_c = np.array([outcome.cue_power for outcome in outcomes])
    p_d = np.zeros(n_d2d)
    for pairs, outcome in zip(assignment.per_rb, outcomes):
        p_d[list(pairs)] = outcome.pair_powers

    result = AllocationResult.evaluate(
        Algorithm.EXHAUSTIVE, scn, assignment, PowerVector(p_c=p_c, p_d=p_d), counters
    )
    if proposed_hint is not None and proposed_hint.sum_rate > result.sum_rate:
        logger.debug("Exhaustive search kept the proposed allocation")
        return AllocationResult.evaluate(
            Algorithm.EXHAUSTIVE, scn, proposed_hint.assignment, proposed_hint.powers, counters
        )

    return result
