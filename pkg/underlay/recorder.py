from abc import ABC, abstractmethod
from pathlib import Path
from typing import Iterator

from pydantic import BaseModel, Field
from taskiq import TaskiqResult
from typing_extensions import Self

from .logging import get_logger
from .types import Algorithm, EffortCounters

logger = get_logger(__name__)


class TrialRecord(BaseModel):
    # Trial info
    trial: int = Field(ge=0)
    seed: int = Field(ge=0)
    algorithm: Algorithm

    # Config echo of the sweep point
    sweep_index: int = Field(ge=0)
    n_cues: int
    n_d2d: int
    cell_radius: float
    cluster_radius: float

    # Outcome (bits/s/Hz)
    sum_rate: float
    admitted_count: int = Field(ge=0)

    # Tallied effort, and the closed-form prediction for the same (N, M) if the algorithm has one
    counters: EffortCounters
    predicted: EffortCounters | None = None

    # NOTE: Varies run to run, so never part of the CSV outputs
    wall_time: float = Field(default=0.0, ge=0)

    @classmethod
    def from_taskiq(cls, result: TaskiqResult) -> list[Self]:
        """Records of every algorithm returned by one trial task."""
        return [cls.model_validate(record) for record in result.return_value]


class BaseRecorder(ABC):
    """
    Base class used for streaming trial records to an external data recording process.

    Recorders are configured using the following environment variable:

    - `UNDERLAY_RECORDER_CLASS`: Any fully qualified subclass of `BaseRecorder` as a string
    """

    @abstractmethod
    async def init(self, out_dir: Path):
        """
        Handle any async initialization before the first trial is recorded.
        """

    @abstractmethod
    async def add_result(self, record: TrialRecord):
        """Store the record of one algorithm on one trial"""


class JSONLineRecorder(BaseRecorder):
    """
    Very basic implementation of BaseRecorder that appends every record to a file containing
    newline-separated JSON entries (https://jsonlines.org/) at ``<out-dir>/trials.jsonl``.

    Unlike ``trials.csv``, lines are written in completion order and carry the wall time.

    Usage:

    To use this recorder, you must configure the following environment variable:

    - `UNDERLAY_RECORDER_CLASS`: `"underlay.recorder:JSONLineRecorder"`
    """

    async def init(self, out_dir: Path):
        out_dir.mkdir(parents=True, exist_ok=True)
        self.records_file = out_dir / "trials.jsonl"
        # NOTE: One file per run
        self.records_file.unlink(missing_ok=True)
        logger.debug(f"Recording trials to '{self.records_file}'")

    async def add_result(self, record: TrialRecord):
        # NOTE: JSONNL convention requires the use of `\n` as newline char
        with self.records_file.open("a") as writer:
            writer.write(record.model_dump_json())
            writer.write("\n")


def load_records(path: Path) -> Iterator[TrialRecord]:
    """
    Useful function for loading recorded trials back, e.g. to re-emit results.
    """
    with open(path, "r") as file:
        for line in file:
            if line.strip():
                yield TrialRecord.model_validate_json(line)
