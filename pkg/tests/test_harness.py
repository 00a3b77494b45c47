import pytest

from underlay.config import ExperimentConfig, SweepPoint
from underlay.exceptions import ConfigurationError, InvalidParameterError
from underlay.harness import (
    draw_scenario,
    predicted_counters,
    run_experiment,
    run_trial,
    run_trial_task,
    trial_seed,
)
from underlay.settings import Settings
from underlay.types import Algorithm, CounterVariant
from underlay.utils import derive_seed


@pytest.mark.parametrize(
    "n,m,variant,states,gains",
    [
        (5, 25, CounterVariant.OPTIMAL, 167_772_160, 780),
        (5, 25, CounterVariant.PROPOSED, 25, 280),
        (1, 0, CounterVariant.OPTIMAL, 1, 1),
        (1, 0, CounterVariant.PROPOSED, 0, 1),
        # M/N = 7/3, so the in-RB term 7 * 4/3 rounds to 9
        (3, 7, CounterVariant.PROPOSED, 7, 3 * 8 + 14 + 9),
    ],
)
def test_predicted_counters(n, m, variant, states, gains):
    predicted = predicted_counters(n, m, variant)

    assert predicted.matching_states == states
    assert predicted.signaling_gains == gains


@pytest.mark.parametrize("n,m", [(0, 5), (1, -1)])
def test_predicted_counters_invalid(n, m):
    with pytest.raises(InvalidParameterError):
        predicted_counters(n, m, CounterVariant.OPTIMAL)


def test_trial_seeds_do_not_collide():
    seeds = {trial_seed(0, trial) for trial in range(10_000)}

    assert len(seeds) == 10_000
    assert all(0 <= seed < 2**63 for seed in seeds)
    assert trial_seed(0, 0) != trial_seed(1, 0)


def test_derive_seed_streams():
    assert derive_seed(5, 1, 0) == derive_seed(5, 1, 0)
    assert len({derive_seed(5, 1, stream) for stream in range(3)}) == 3


@pytest.fixture
def small_config():
    return ExperimentConfig(
        n_cues=2,
        n_d2d=4,
        cluster_radius_sweep=[10, 30],
        trials=3,
        algorithms=[Algorithm.THREE_STEP, Algorithm.PROPOSED],
    )


def test_draw_scenario_keeps_cues_in_coverage(small_config):
    point = small_config.sweep_points()[0]
    for trial in range(10):
        scn = draw_scenario(small_config, point, trial_seed(0, trial))

        assert (scn.n_cues, scn.n_d2d) == (2, 4)
        assert all(scn.solo_cue_sinr(i) >= scn.qos.gamma_c_min[i] for i in range(2))
        assert scn.rb_bandwidth == pytest.approx(5e6)


def test_draw_scenario_gives_up():
    # 60 dB thresholds are out of reach at the cell edge
    cfg = ExperimentConfig(qos_range_db=(60, 60), max_scenario_draws=3)
    point = SweepPoint(index=0, n_cues=5, n_d2d=0, cell_radius=400, cluster_radius=10)

    with pytest.raises(InvalidParameterError):
        draw_scenario(cfg, point, seed=0)


def test_run_trial(small_config):
    point = small_config.sweep_points()[1]
    records = run_trial(small_config, point, trial=2)

    # Always in execution order, whatever the requested order
    assert [record.algorithm for record in records] == [Algorithm.PROPOSED, Algorithm.THREE_STEP]
    assert all(record.seed == trial_seed(small_config.seed, 2) for record in records)
    assert all(record.cluster_radius == 30 for record in records)
    assert records[0].predicted.matching_states == 4
    assert records[1].predicted is None
    assert records[0].counters.matching_states <= 2 + 4


def test_run_trial_task_is_plain_data(small_config):
    point = small_config.sweep_points()[0]
    records = run_trial_task(small_config.model_dump(mode="json"), point.model_dump(), 0)

    assert [record["algorithm"] for record in records] == ["proposed", "three_step"]
    assert isinstance(records[0]["counters"], dict)


def test_exhaustive_guard_checked_before_running():
    cfg = ExperimentConfig(algorithms=[Algorithm.EXHAUSTIVE], trials=1)

    with pytest.raises(ConfigurationError):
        run_experiment(cfg)


def _without_wall_time(records):
    return [record.model_dump(exclude={"wall_time"}) for record in records]


def test_run_experiment(tmp_path):
    cfg = ExperimentConfig(
        n_cues=2,
        n_d2d=4,
        trials=10,
        seed=42,
        algorithms=[Algorithm.PROPOSED, Algorithm.THREE_STEP],
    )
    records = run_experiment(cfg, settings=Settings(WORKERS=2, BATCH_SIZE=4), out_dir=tmp_path)

    assert len(records) == 20
    assert [(record.trial, record.algorithm) for record in records[:4]] == [
        (0, Algorithm.PROPOSED),
        (0, Algorithm.THREE_STEP),
        (1, Algorithm.PROPOSED),
        (1, Algorithm.THREE_STEP),
    ]

    # Same seed, different scheduling
    again = run_experiment(cfg, settings=Settings(WORKERS=1, BATCH_SIZE=7), out_dir=tmp_path)
    assert _without_wall_time(again) == _without_wall_time(records)


def test_run_experiment_with_exhaustive(tmp_path):
    cfg = ExperimentConfig(
        n_cues=2,
        n_d2d=3,
        trials=2,
        algorithms=[Algorithm.EXHAUSTIVE, Algorithm.PROPOSED],
    )
    records = run_experiment(cfg, out_dir=tmp_path)

    by_trial = {}
    for record in records:
        by_trial.setdefault(record.trial, {})[record.algorithm] = record

    for outcome in by_trial.values():
        exhaustive, proposed = outcome[Algorithm.EXHAUSTIVE], outcome[Algorithm.PROPOSED]
        assert exhaustive.sum_rate >= proposed.sum_rate
        assert exhaustive.predicted.matching_states == 2 * 2**3
