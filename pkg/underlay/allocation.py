from typing import Callable, Literal

import numpy as np
from pydantic import Field, field_validator
from typing_extensions import Self

from .exceptions import EmptyCandidateSetError
from .logging import get_logger
from .power import (
    PowerSolveOutcome,
    RbGroup,
    first_pair_powers,
    max_power_walk,
    min_power_solve,
    spectral_feasibility,
)
from .radio import Assignment, PowerVector, Scenario, rates, sinr_vectors
from .types import Algorithm, EffortCounters, FloatArray, FrozenModel
from .utils import linear_to_db, watt_to_dbm

logger = get_logger(__name__)


def cellular_signaling(n_cues: int, n_d2d: int) -> int:
    """Gains every algorithm conveys: CUE to BS and to each D2D receiver, D2D direct and to BS."""
    return n_cues * (n_d2d + 1) + 2 * n_d2d


def full_csi_signaling(n_cues: int, n_d2d: int) -> int:
    """:func:`cellular_signaling` plus every D2D-to-D2D interference gain."""
    return cellular_signaling(n_cues, n_d2d) + n_d2d * (n_d2d - 1)


class CuePriority(FrozenModel):
    # Permutation of CUE indices, farthest from the BS first
    order: tuple[int, ...]

    @field_validator("order")
    def ensure_permutation(cls, order: tuple[int, ...]) -> tuple[int, ...]:
        if sorted(order) != list(range(len(order))):
            raise ValueError(f"Not a permutation of CUE indices: {order}")

        return order


class CandidateScore(FrozenModel):
    pair: int = Field(ge=0)

    # Meters for first-pair distance, meters per watt for the power-normalized metric, watts or
    # a bare gain for full-CSI interference scores (zero only for a decoupled link)
    score: float = Field(ge=0)

    kind: Literal["first-pair", "subsequent"]


class AllocationResult(FrozenModel):
    algorithm: Algorithm
    assignment: Assignment
    powers: PowerVector

    sinr_c: FloatArray
    sinr_d: FloatArray
    rate_c: FloatArray
    rate_d: FloatArray

    # bits/s/Hz
    sum_rate: float

    counters: EffortCounters = Field(default_factory=EffortCounters)

    @classmethod
    def evaluate(
        cls,
        algorithm: Algorithm,
        scn: Scenario,
        assignment: Assignment,
        powers: PowerVector,
        counters: EffortCounters | None = None,
    ) -> Self:
        sinr_c, sinr_d = sinr_vectors(scn, assignment, powers)
        rate_c, rate_d = rates(scn, assignment, powers)
        return cls(
            algorithm=algorithm,
            assignment=assignment,
            powers=powers,
            sinr_c=sinr_c,
            sinr_d=sinr_d,
            rate_c=rate_c,
            rate_d=rate_d,
            sum_rate=float(rate_c.sum() + rate_d.sum()),
            counters=counters or EffortCounters(),
        )

    @property
    def admitted_count(self) -> int:
        return self.assignment.admitted_count

    def to_report(self) -> dict:
        """Structured record with powers in dBm and SINRs in dB (``None`` for silent UEs)."""

        def dbm(watts: np.ndarray) -> list[float | None]:
            return [watt_to_dbm(p) if p > 0 else None for p in watts]

        def db(values: np.ndarray) -> list[float | None]:
            return [float(linear_to_db(v)) if v > 0 else None for v in values]

        return {
            "algorithm": str(self.algorithm),
            "per_rb": [list(pairs) for pairs in self.assignment.per_rb],
            "denied": sorted(self.assignment.denied),
            "cue_power_dbm": dbm(self.powers.p_c),
            "d2d_power_dbm": dbm(self.powers.p_d),
            "cue_sinr_db": db(self.sinr_c),
            "d2d_sinr_db": db(self.sinr_d),
            "sum_rate": self.sum_rate,
            "admitted_count": self.admitted_count,
            "counters": self.counters.model_dump(),
        }


FirstPairSelector = Callable[[Scenario, int, set[int]], CandidateScore]
NextPairSelector = Callable[[Scenario, RbGroup, PowerSolveOutcome, set[int]], CandidateScore]


def cue_priority(scn: Scenario) -> CuePriority:
    """CUEs by descending distance from the BS, ties by ascending index."""
    distances = scn.layout.cue_to_bs
    return CuePriority(order=tuple(sorted(range(scn.n_cues), key=lambda i: (-distances[i], i))))


def sorted_candidates(denied: set[int], operation: str) -> list[int]:
    if not denied:
        raise EmptyCandidateSetError(operation)

    return sorted(denied)


def select_first_pair(scn: Scenario, cue: int, denied: set[int]) -> CandidateScore:
    """The denied pair whose receiver is farthest from the CUE, ties to the lowest index."""
    candidates = sorted_candidates(denied, "select_first_pair")
    scores = scn.layout.cue_to_rx[cue, candidates]
    best = int(np.argmax(scores))
    return CandidateScore(pair=candidates[best], score=float(scores[best]), kind="first-pair")


def select_next_pair(
    scn: Scenario,
    group: RbGroup,
    powers: PowerSolveOutcome,
    denied: set[int],
) -> CandidateScore:
    """
    The denied pair with the largest power-normalized distance to the RB's transmitters.

    For each candidate, the score is the minimum over in-RB transmitters ``u`` of
    ``distance(u, candidate receiver) / P_u`` at the current powers. Silent transmitters cause
    no interference and are left out of the minimum.
    """
    candidates = sorted_candidates(denied, "select_next_pair")
    layout = scn.layout

    distances = np.vstack(
        (
            layout.cue_to_rx[group.cue, candidates][np.newaxis, :],
            layout.tx_to_rx[np.ix_(list(group.pairs), candidates)],
        )
    )
    transmitting = powers.powers > 0
    if not np.any(transmitting):
        return CandidateScore(pair=candidates[0], score=np.inf, kind="subsequent")

    normalized = distances[transmitting] / powers.powers[transmitting][:, np.newaxis]
    scores = normalized.min(axis=0)
    best = int(np.argmax(scores))
    return CandidateScore(pair=candidates[best], score=float(scores[best]), kind="subsequent")


def admit_pairs(
    scn: Scenario,
    algorithm: Algorithm,
    select_first: FirstPairSelector,
    select_next: NextPairSelector,
    signaling: int,
    charge_pair_gains: bool = False,
) -> AllocationResult:
    """
    Per-RB admission engine shared by every multi-pair heuristic.

    CUEs are served in priority order. A CUE whose first candidate fails the closed-form
    two-user test stays alone at full power. Otherwise candidates are admitted one at a time
    while the enlarged group's minimum-power point is feasible; the first infeasible candidate
    ends admission for that RB (it stays eligible for later RBs), then the group's powers are
    maximized.

    ``signaling`` gains are charged up front. With ``charge_pair_gains``, every candidate
    evaluation additionally charges the two D2D-to-D2D gains between the candidate and each
    pair already in the RB.
    """
    n_cues, n_d2d = scn.n_cues, scn.n_d2d
    counters = EffortCounters(signaling_gains=signaling)

    denied = set(range(n_d2d))
    per_rb: list[tuple[int, ...]] = [()] * n_cues
    p_c = np.zeros(n_cues)
    p_d = np.zeros(n_d2d)

    for cue in cue_priority(scn).order:
        if not denied:
            p_c[cue] = scn.p_c_max
            continue

        first = select_first(scn, cue, denied)
        counters.matching_states += 1
        outcome = first_pair_powers(scn, cue, first.pair)
        if not outcome.feasible:
            logger.debug(f"CUE {cue}: first candidate {first.pair} infeasible, RB not shared")
            p_c[cue] = scn.p_c_max
            continue

        group = RbGroup(cue=cue, pairs=(first.pair,))
        denied.discard(first.pair)

        while denied:
            candidate = select_next(scn, group, outcome, denied)
            counters.matching_states += 1
            if charge_pair_gains:
                counters.signaling_gains += 2 * len(group.pairs)

            enlarged = group.admit(candidate.pair)
            if not spectral_feasibility(enlarged, scn):
                logger.debug(f"CUE {cue}: candidate {candidate.pair} fails spectral check")
                break

            if not (solved := min_power_solve(enlarged, scn)).feasible:
                logger.debug(f"CUE {cue}: candidate {candidate.pair} exceeds a power cap")
                break

            group, outcome = enlarged, solved
            denied.discard(candidate.pair)

        final = max_power_walk(group, scn, outcome)
        logger.debug(f"CUE {cue}: admitted {list(group.pairs)}")
        per_rb[cue] = group.pairs
        p_c[cue] = final.cue_power
        p_d[list(group.pairs)] = final.pair_powers

    return AllocationResult.evaluate(
        algorithm,
        scn,
        Assignment(per_rb=tuple(per_rb), denied=frozenset(denied)),
        PowerVector(p_c=p_c, p_d=p_d),
        counters,
    )


def allocate(scn: Scenario) -> AllocationResult:
    """
    Joint spectrum and power allocation with multiple D2D pairs per RB.

    First pairs are chosen by distance to the CUE, later ones by the power-normalized distance
    to every transmitter already in the RB, so only gains inside each RB are signalled.
    """
    return admit_pairs(
        scn,
        Algorithm.PROPOSED,
        select_first_pair,
        select_next_pair,
        signaling=cellular_signaling(scn.n_cues, scn.n_d2d),
        charge_pair_gains=True,
    )
