import asyncio
import math
import time
from fractions import Fraction
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .allocation import AllocationResult, allocate, cellular_signaling, full_csi_signaling
from .baselines import (
    EXHAUSTIVE_MAX_CUES,
    EXHAUSTIVE_MAX_D2D,
    all_csi_greedy,
    exhaustive,
    three_step,
)
from .channel import NoiseModel, compute_gains
from .config import ExperimentConfig, SweepPoint
from .exceptions import ConfigurationError, InvalidParameterError
from .logging import get_logger
from .radio import QosProfile, Scenario
from .recorder import TrialRecord
from .topology import generate_layout
from .types import Algorithm, CounterVariant, EffortCounters
from .utils import db_to_linear, derive_seed

if TYPE_CHECKING:
    from .recorder import BaseRecorder
    from .settings import Settings

logger = get_logger(__name__)

# Sub-streams of a trial seed, each also keyed by the draw attempt
LAYOUT_STREAM = 0
GAIN_STREAM = 1
QOS_STREAM = 2

# Execution order on every trial; the proposed result is the exhaustive search hint
ALGORITHM_ORDER = (
    Algorithm.PROPOSED,
    Algorithm.THREE_STEP,
    Algorithm.ALL_CSI,
    Algorithm.EXHAUSTIVE,
)


def predicted_counters(n: int, m: int, variant: CounterVariant) -> EffortCounters:
    """
    Closed-form matching-state and signaling counts.

    - ``optimal``: ``N * 2^M`` states, ``N(M+1) + 2M + M(M-1)`` gains.
    - ``proposed``: ``M`` states, ``N(M+1) + 2M + M(M/N - 1)`` gains, with ``M/N`` exact and
      the total rounded half up.
    """
    if n < 1 or m < 0:
        raise InvalidParameterError(f"Need N >= 1 and M >= 0, got N={n}, M={m}")

    if CounterVariant(variant) is CounterVariant.OPTIMAL:
        return EffortCounters(matching_states=n * 2**m, signaling_gains=full_csi_signaling(n, m))

    in_rb_gains = m * (Fraction(m, n) - 1)
    return EffortCounters(
        matching_states=m,
        signaling_gains=cellular_signaling(n, m) + math.floor(in_rb_gains + Fraction(1, 2)),
    )


def _prediction_for(algorithm: Algorithm, point: SweepPoint) -> EffortCounters | None:
    if algorithm is Algorithm.PROPOSED:
        return predicted_counters(point.n_cues, point.n_d2d, CounterVariant.PROPOSED)

    elif algorithm in (Algorithm.ALL_CSI, Algorithm.EXHAUSTIVE):
        return predicted_counters(point.n_cues, point.n_d2d, CounterVariant.OPTIMAL)

    # NOTE: The single-pair method has no closed-form count
    return None


def trial_seed(master_seed: int, trial: int) -> int:
    """Seed of trial ``trial``, shared by every sweep point so trials are paired."""
    return derive_seed(master_seed, trial)


def draw_qos(n_cues: int, n_d2d: int, qos_range_db: tuple[float, float], seed: int) -> QosProfile:
    rng = np.random.default_rng(seed)
    low, high = qos_range_db
    return QosProfile(
        gamma_c_min=db_to_linear(rng.uniform(low, high, size=n_cues)),
        gamma_d_min=db_to_linear(rng.uniform(low, high, size=n_d2d)),
    )


def draw_scenario(cfg: ExperimentConfig, point: SweepPoint, seed: int) -> Scenario:
    """
    Draw the cell realization of one trial.

    A realization where some CUE misses its own QoS at full power with no D2D interference
    is re-drawn, with the attempt index folded into every sub-seed.

    Raises:
        :class:`~underlay.exceptions.InvalidParameterError`:
            If no admissible realization is found in ``cfg.max_scenario_draws`` attempts.
    """
    noise = NoiseModel(sigma_n2=cfg.sigma_n2, sigma_s2=cfg.sigma_s2)
    for attempt in range(cfg.max_scenario_draws):
        layout = generate_layout(
            point.n_cues,
            point.n_d2d,
            point.cell_radius,
            point.cluster_radius,
            rng_seed=derive_seed(seed, LAYOUT_STREAM, attempt),
        )
        gains = compute_gains(
            layout,
            pathloss_exponent=cfg.pathloss_exponent,
            shadowing_sigma_db=cfg.shadowing_sigma_db,
            fading=cfg.fading,
            rng_seed=derive_seed(seed, GAIN_STREAM, attempt),
        )
        scn = Scenario(
            layout=layout,
            gains=gains,
            noise=noise,
            qos=draw_qos(
                point.n_cues,
                point.n_d2d,
                cfg.qos_range_db,
                seed=derive_seed(seed, QOS_STREAM, attempt),
            ),
            p_c_max=cfg.p_c_max,
            p_d_max=cfg.p_d_max,
            rb_bandwidth=cfg.total_bandwidth / point.n_cues,
        )
        if all(scn.solo_cue_sinr(i) >= scn.qos.gamma_c_min[i] for i in range(scn.n_cues)):
            return scn

        logger.debug(f"Scenario draw {attempt} of seed {seed} has a CUE out of coverage")

    raise InvalidParameterError(
        f"No realization with every CUE in coverage after {cfg.max_scenario_draws} draws"
    )


def run_algorithm(
    algorithm: Algorithm,
    scn: Scenario,
    cfg: ExperimentConfig,
    hint: AllocationResult | None = None,
) -> AllocationResult:
    if algorithm is Algorithm.PROPOSED:
        return allocate(scn)

    elif algorithm is Algorithm.THREE_STEP:
        return three_step(scn)

    elif algorithm is Algorithm.ALL_CSI:
        return all_csi_greedy(scn, scoring=cfg.all_csi_scoring)

    return exhaustive(scn, proposed_hint=hint or allocate(scn))


def run_trial(cfg: ExperimentConfig, point: SweepPoint, trial: int) -> list[TrialRecord]:
    """Run every requested algorithm on the same realization of trial ``trial``."""
    seed = trial_seed(cfg.seed, trial)
    scn = draw_scenario(cfg, point, seed)

    records: list[TrialRecord] = []
    hint: AllocationResult | None = None
    for algorithm in sorted(cfg.algorithms, key=ALGORITHM_ORDER.index):
        started = time.perf_counter()
        result = run_algorithm(algorithm, scn, cfg, hint=hint)
        wall_time = time.perf_counter() - started

        if algorithm is Algorithm.PROPOSED:
            hint = result

        records.append(
            TrialRecord(
                trial=trial,
                seed=seed,
                algorithm=algorithm,
                sweep_index=point.index,
                n_cues=point.n_cues,
                n_d2d=point.n_d2d,
                cell_radius=point.cell_radius,
                cluster_radius=point.cluster_radius,
                sum_rate=result.sum_rate,
                admitted_count=result.admitted_count,
                counters=result.counters,
                predicted=_prediction_for(algorithm, point),
                wall_time=wall_time,
            )
        )

    return records


def run_trial_task(config: dict, point: dict, trial: int) -> list[dict]:
    """Broker task wrapping :func:`run_trial`; arguments and results are plain JSON data."""
    records = run_trial(
        ExperimentConfig.model_validate(config), SweepPoint.model_validate(point), trial
    )
    return [record.model_dump(mode="json") for record in records]


def record_order(record: TrialRecord) -> tuple[int, int, int]:
    return record.sweep_index, record.trial, ALGORITHM_ORDER.index(record.algorithm)


def validate_experiment(cfg: ExperimentConfig):
    """
    Raises:
        :class:`~underlay.exceptions.ConfigurationError`:
            If the exhaustive search is requested beyond its scale guard.
    """
    if Algorithm.EXHAUSTIVE not in cfg.algorithms:
        return

    for point in cfg.sweep_points():
        if point.n_cues > EXHAUSTIVE_MAX_CUES or point.n_d2d > EXHAUSTIVE_MAX_D2D:
            raise ConfigurationError(
                f"Exhaustive search limited to N <= {EXHAUSTIVE_MAX_CUES} and "
                f"M <= {EXHAUSTIVE_MAX_D2D}, sweep point has N={point.n_cues}, M={point.n_d2d}"
            )


def run_experiment(
    cfg: ExperimentConfig,
    settings: "Settings | None" = None,
    out_dir: Path | None = None,
    recorder: "BaseRecorder | None" = None,
) -> list[TrialRecord]:
    """
    Run every trial of every sweep point, in parallel on the configured broker.

    Records come back ordered by (sweep point, trial, algorithm) whatever the scheduling, so
    a fixed ``cfg.seed`` always gives the same records (up to wall time).

    Raises:
        :class:`~underlay.exceptions.ConfigurationError`:
            Before any trial runs, if the experiment is not runnable.
    """
    # NOTE: Runner imports the trial task from here
    from .runner import ExperimentRunner

    validate_experiment(cfg)
    runner = ExperimentRunner(cfg, settings=settings, out_dir=out_dir, recorder=recorder)
    return asyncio.run(runner.run())
