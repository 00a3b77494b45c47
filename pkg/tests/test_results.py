import pytest

from underlay.config import ExperimentConfig
from underlay.exceptions import InvalidParameterError, ResultsWriteError
from underlay.harness import run_experiment
from underlay.recorder import TrialRecord
from underlay.results import aggregate_frame, emit_results, records_frame
from underlay.types import Algorithm, EffortCounters


def make_record(trial=0, algorithm=Algorithm.PROPOSED, cluster_radius=10.0, **kwargs):
    return TrialRecord(
        **{
            "trial": trial,
            "seed": 1000 + trial,
            "algorithm": algorithm,
            "sweep_index": 0,
            "n_cues": 5,
            "n_d2d": 25,
            "cell_radius": 400.0,
            "cluster_radius": cluster_radius,
            "sum_rate": 10.0 + trial,
            "admitted_count": 3,
            "counters": EffortCounters(matching_states=20, signaling_gains=250),
            **kwargs,
        }
    )


def read_lines(path):
    return path.read_bytes().decode().split("\r\n")


def test_single_record(tmp_path):
    written = emit_results([make_record()], tmp_path)

    assert {path.name for path in written} == {
        "trials.csv",
        "aggregate.csv",
        "sum_rate_by_cluster_radius.txt",
        "admitted_by_cluster_radius.txt",
        "admitted_by_cue_count.txt",
    }
    lines = read_lines(tmp_path / "trials.csv")
    # Header, one row, trailing terminator
    assert len(lines) == 3 and lines[-1] == ""
    assert lines[0].startswith("sweep_index,trial,seed,algorithm,")
    assert "10.000000" in lines[1]


def test_aggregate_groups(tmp_path):
    records = [
        make_record(trial, algorithm, radius)
        for algorithm in (Algorithm.THREE_STEP, Algorithm.PROPOSED)
        for radius in (10.0, 20.0, 30.0)
        for trial in range(4)
    ]
    emit_results(records, tmp_path)

    aggregate = read_lines(tmp_path / "aggregate.csv")
    assert len(aggregate) == 1 + 6 + 1
    # Algorithms in execution order, not alphabetical
    assert aggregate[1].startswith("proposed,10.000000,400.000000,5,4,")
    assert aggregate[-2].startswith("three_step,30.000000,")


def test_aggregate_statistics():
    records = [make_record(trial) for trial in range(4)]
    aggregate = aggregate_frame(records_frame(records))
    row = aggregate.iloc[0]

    assert row["trials"] == 4
    assert row["sum_rate_mean"] == pytest.approx(11.5)
    # 1.96 * std([10, 11, 12, 13]) / sqrt(4)
    assert row["sum_rate_ci"] == pytest.approx(1.96 * (5 / 3) ** 0.5 / 2)
    assert row["admitted_ci"] == 0.0


def test_single_trial_has_no_interval():
    aggregate = aggregate_frame(records_frame([make_record()]))
    assert aggregate.iloc[0]["sum_rate_ci"] == 0.0


def test_predictions_are_nullable():
    frame = records_frame(
        [
            make_record(predicted=EffortCounters(matching_states=25, signaling_gains=280)),
            make_record(algorithm=Algorithm.THREE_STEP),
        ]
    )

    assert frame["predicted_matching_states"].tolist()[0] == 25
    assert frame["predicted_matching_states"].isna().tolist() == [False, True]


def test_plot_data(tmp_path):
    records = [make_record(cluster_radius=radius) for radius in (10.0, 20.0)]
    emit_results(records, tmp_path)
    text = (tmp_path / "sum_rate_by_cluster_radius.txt").read_text()

    assert text.startswith("# algorithm=proposed cell_radius=400.0 n_cues=5\n")
    assert "sum_rate_mean" in text


def test_no_records(tmp_path):
    with pytest.raises(InvalidParameterError):
        emit_results([], tmp_path)


def test_unwritable_out_dir(tmp_path):
    blocker = tmp_path / "taken"
    blocker.write_text("")

    with pytest.raises(ResultsWriteError) as err:
        emit_results([make_record()], blocker)

    assert err.value.path == blocker


def test_byte_identical_outputs(tmp_path):
    cfg = ExperimentConfig(
        n_cues=2,
        n_d2d=4,
        trials=4,
        seed=7,
        cluster_radius_sweep=[10, 20],
        algorithms=[Algorithm.PROPOSED, Algorithm.ALL_CSI],
    )
    for run in ("first", "second"):
        emit_results(run_experiment(cfg, out_dir=tmp_path), tmp_path / run)

    for name in ("trials.csv", "aggregate.csv", "admitted_by_cluster_radius.txt"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()
