"""
Invariant suite run by ``underlay verify`` on small random instances.

Each check returns a :class:`CheckResult`; a failed check carries the first counterexample.
"""

from typing import Callable, Iterator

import numpy as np
from pydantic import BaseModel

from .allocation import allocate
from .baselines import all_csi_greedy, exhaustive, three_step
from .config import ExperimentConfig, SweepPoint
from .harness import draw_scenario, predicted_counters
from .logging import get_logger
from .power import GroupSystem, RbGroup, first_pair_powers, max_power_walk, min_power_solve
from .radio import Scenario, check_feasible
from .types import CounterVariant
from .utils import derive_seed

logger = get_logger(__name__)

# Relative agreement of the closed form and the dense solve
AGREEMENT_TOLERANCE = 1e-9

# Absolute sum-rate tolerance of the oracle dominance check (bits/s/Hz)
DOMINANCE_TOLERANCE = 1e-9


class CheckResult(BaseModel):
    name: str
    passed: bool
    instances: int
    detail: str = ""


def random_scenarios(
    n_cues: int,
    n_d2d: int,
    seed: int,
    count: int,
    cfg: ExperimentConfig | None = None,
) -> Iterator[Scenario]:
    """Default-parameter cell realizations with ``n_cues`` CUEs and ``n_d2d`` pairs."""
    cfg = cfg or ExperimentConfig()
    point = SweepPoint(
        index=0,
        n_cues=n_cues,
        n_d2d=n_d2d,
        cell_radius=cfg.cell_radius,
        cluster_radius=cfg.cluster_radius_sweep[0],
    )
    for index in range(count):
        yield draw_scenario(cfg, point, derive_seed(seed, index))


def check_closed_form(seed: int, instances: int) -> CheckResult:
    """Closed-form two-user powers agree with the dense solve, or both are infeasible."""
    for index, scn in enumerate(random_scenarios(1, 1, seed, instances)):
        closed = first_pair_powers(scn, 0, 0)
        solved = min_power_solve(RbGroup(cue=0, pairs=(0,)), scn)
        if closed.feasible != solved.feasible:
            return CheckResult(
                name="closed_form",
                passed=False,
                instances=index + 1,
                detail=f"instance {index}: closed form {closed.feasible}, solve {solved.feasible}",
            )

        if closed.feasible and not np.allclose(
            closed.powers, solved.powers, rtol=AGREEMENT_TOLERANCE, atol=0
        ):
            return CheckResult(
                name="closed_form",
                passed=False,
                instances=index + 1,
                detail=f"instance {index}: {closed.powers} != {solved.powers}",
            )

    return CheckResult(name="closed_form", passed=True, instances=instances)


def check_feasibility(seed: int, instances: int) -> CheckResult:
    """Every algorithm's output passes the feasibility check."""
    for index, scn in enumerate(random_scenarios(3, 6, seed, instances)):
        proposed = allocate(scn)
        for result in (
            proposed,
            three_step(scn),
            all_csi_greedy(scn),
            exhaustive(scn, proposed_hint=proposed),
        ):
            if not (report := check_feasible(scn, result.assignment, result.powers)):
                return CheckResult(
                    name="feasibility",
                    passed=False,
                    instances=index + 1,
                    detail=f"instance {index}, {result.algorithm}: {report.violations}",
                )

    return CheckResult(name="feasibility", passed=True, instances=instances)


def check_oracle_dominance(seed: int, instances: int) -> CheckResult:
    """The exhaustive search is never below the proposed or the single-pair allocation."""
    for index, scn in enumerate(random_scenarios(2, 4, seed, instances)):
        proposed = allocate(scn)
        oracle = exhaustive(scn, proposed_hint=proposed)
        for other in (proposed, three_step(scn)):
            if oracle.sum_rate < other.sum_rate - DOMINANCE_TOLERANCE:
                return CheckResult(
                    name="oracle_dominance",
                    passed=False,
                    instances=index + 1,
                    detail=(
                        f"instance {index}: exhaustive {oracle.sum_rate:.9f} < "
                        f"{other.algorithm} {other.sum_rate:.9f}"
                    ),
                )

    return CheckResult(name="oracle_dominance", passed=True, instances=instances)


def check_power_walk(seed: int, instances: int) -> CheckResult:
    """
    The power walk dominates its start, stays feasible and never lowers the sum-rate.

    From a minimum-power start it also ends with at least one cap or QoS equality active per
    local user.
    """
    checked = 0
    for index, scn in enumerate(random_scenarios(1, 4, seed, instances)):
        for size in range(1, 5):
            group = RbGroup(cue=0, pairs=tuple(range(size)))
            if not (start := min_power_solve(group, scn)).feasible:
                continue

            walked = max_power_walk(group, scn, start)
            system = GroupSystem.from_group(group, scn)
            checked += 1
            if not (
                np.all(walked.powers >= start.powers)
                and system.is_feasible(walked.powers)
                and system.sum_rate(walked.powers) >= system.sum_rate(start.powers)
                and len(walked.active_constraints) >= group.size
            ):
                return CheckResult(
                    name="power_walk",
                    passed=False,
                    instances=checked,
                    detail=f"instance {index}, {size} pair(s): {start.powers} -> {walked.powers}",
                )

    return CheckResult(name="power_walk", passed=True, instances=checked)


def check_counters(seed: int, instances: int) -> CheckResult:
    """Closed-form counts at N=5, M=25 and the proposed tallies against full CSI."""
    optimal = predicted_counters(5, 25, CounterVariant.OPTIMAL)
    proposed = predicted_counters(5, 25, CounterVariant.PROPOSED)
    expected = ((167_772_160, 780), (25, 280))
    if (
        (optimal.matching_states, optimal.signaling_gains),
        (proposed.matching_states, proposed.signaling_gains),
    ) != expected:
        return CheckResult(
            name="counters", passed=False, instances=0, detail=f"{optimal}, {proposed}"
        )

    for index, scn in enumerate(random_scenarios(2, 6, seed, instances)):
        tally = allocate(scn).counters
        if (
            tally.matching_states > scn.n_cues + scn.n_d2d
            or tally.signaling_gains > all_csi_greedy(scn).counters.signaling_gains
        ):
            return CheckResult(
                name="counters", passed=False, instances=index + 1, detail=f"{tally}"
            )

    return CheckResult(name="counters", passed=True, instances=instances)


def check_determinism(seed: int, instances: int) -> CheckResult:
    """Allocating the same scenario twice gives the same result."""
    for index, scn in enumerate(random_scenarios(2, 6, seed, instances)):
        if allocate(scn).model_dump_json() != allocate(scn).model_dump_json():
            return CheckResult(name="determinism", passed=False, instances=index + 1)

    return CheckResult(name="determinism", passed=True, instances=instances)


CHECKS: tuple[Callable[[int, int], CheckResult], ...] = (
    check_closed_form,
    check_feasibility,
    check_oracle_dominance,
    check_power_walk,
    check_counters,
    check_determinism,
)


def run_checks(seed: int = 0, instances: int = 20) -> list[CheckResult]:
    results = []
    for check in CHECKS:
        result = check(seed, instances)
        if result.passed:
            logger.success(f"{result.name}: {result.instances} instance(s)")
        else:
            logger.error(f"{result.name}: {result.detail}")

        results.append(result)

    return results
