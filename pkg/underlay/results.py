"""
Result emission: raw trial CSV, aggregate CSV and plain-text plot data.

Every file is written deterministically from the (ordered) records, so a fixed seed and
config always give byte-identical outputs.
"""

from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .exceptions import InvalidParameterError, ResultsWriteError
from .logging import get_logger
from .recorder import TrialRecord
from .types import Algorithm

logger = get_logger(__name__)

# Two-sided 95% normal quantile
CI_Z = 1.96

FLOAT_FORMAT = "%.6f"
CSV_LINE_TERMINATOR = "\r\n"

TRIAL_COLUMNS = [
    "sweep_index",
    "trial",
    "seed",
    "algorithm",
    "n_cues",
    "n_d2d",
    "cell_radius",
    "cluster_radius",
    "sum_rate",
    "admitted_count",
    "matching_states",
    "signaling_gains",
    "predicted_matching_states",
    "predicted_signaling_gains",
]

GROUP_KEYS = ["algorithm", "cluster_radius", "cell_radius", "n_cues"]

# File name, x axis, metric, series keys
PLOT_DATA = (
    ("sum_rate_by_cluster_radius.txt", "cluster_radius", "sum_rate", ["cell_radius", "n_cues"]),
    ("admitted_by_cluster_radius.txt", "cluster_radius", "admitted", ["cell_radius", "n_cues"]),
    ("admitted_by_cue_count.txt", "n_cues", "admitted", ["cell_radius", "cluster_radius"]),
)


def records_frame(records: Sequence[TrialRecord]) -> pd.DataFrame:
    """One row per record, without wall time."""
    rows = []
    for record in records:
        predicted = record.predicted
        rows.append(
            {
                **record.model_dump(
                    mode="json", exclude={"counters", "predicted", "wall_time"}
                ),
                "matching_states": record.counters.matching_states,
                "signaling_gains": record.counters.signaling_gains,
                "predicted_matching_states": predicted.matching_states if predicted else None,
                "predicted_signaling_gains": predicted.signaling_gains if predicted else None,
            }
        )

    frame = pd.DataFrame(rows, columns=TRIAL_COLUMNS)
    for column in ("predicted_matching_states", "predicted_signaling_gains"):
        frame[column] = frame[column].astype("Int64")

    return frame


def _ci_half_width(values: pd.Series) -> float:
    if len(values) < 2:
        return 0.0

    return float(CI_Z * values.std(ddof=1) / np.sqrt(len(values)))


def aggregate_frame(trials: pd.DataFrame) -> pd.DataFrame:
    """Mean and normal-approximation 95% CI of sum-rate and admitted count per group."""
    algorithm_order = [str(algorithm) for algorithm in Algorithm]
    trials = trials.assign(
        algorithm=pd.Categorical(trials["algorithm"], categories=algorithm_order, ordered=True)
    )
    grouped = trials.groupby(GROUP_KEYS, observed=True, sort=True)
    aggregate = grouped.agg(
        trials=("trial", "size"),
        sum_rate_mean=("sum_rate", "mean"),
        sum_rate_ci=("sum_rate", _ci_half_width),
        admitted_mean=("admitted_count", "mean"),
        admitted_ci=("admitted_count", _ci_half_width),
    ).reset_index()
    aggregate["algorithm"] = aggregate["algorithm"].astype(str)
    return aggregate


def plot_data_text(aggregate: pd.DataFrame, x: str, metric: str, series: list[str]) -> str:
    """Whitespace-separated blocks, one per (algorithm, series) curve."""
    blocks = []
    for keys, curve in aggregate.groupby(["algorithm", *series], sort=False):
        header = " ".join(f"{name}={value}" for name, value in zip(["algorithm", *series], keys))
        table = curve[[x, f"{metric}_mean", f"{metric}_ci"]].sort_values(x)
        blocks.append(
            f"# {header}\n" + table.to_string(index=False, float_format=lambda v: f"{v:.6f}")
        )

    return "\n\n".join(blocks) + "\n"


def _write_csv(frame: pd.DataFrame, path: Path):
    try:
        frame.to_csv(
            path, index=False, lineterminator=CSV_LINE_TERMINATOR, float_format=FLOAT_FORMAT
        )
    except OSError as err:
        raise ResultsWriteError(path, err) from err


def _write_text(text: str, path: Path):
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as err:
        raise ResultsWriteError(path, err) from err


def emit_results(records: Sequence[TrialRecord], out_dir: Path) -> list[Path]:
    """
    Write ``trials.csv``, ``aggregate.csv`` and the plot-data text files to ``out_dir``.

    Raises:
        :class:`~underlay.exceptions.InvalidParameterError`: If ``records`` is empty.
        :class:`~underlay.exceptions.ResultsWriteError`: On any I/O failure.
    """
    if not records:
        raise InvalidParameterError("No trial records to emit")

    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise ResultsWriteError(out_dir, err) from err

    trials = records_frame(records)
    aggregate = aggregate_frame(trials)

    written: list[Path] = []
    for name, frame in (("trials.csv", trials), ("aggregate.csv", aggregate)):
        _write_csv(frame, path := out_dir / name)
        written.append(path)

    for name, x, metric, series in PLOT_DATA:
        _write_text(plot_data_text(aggregate, x, metric, series), path := out_dir / name)
        written.append(path)

    logger.success(f"Results written to '{out_dir}'")
    return written
