import asyncio
from pathlib import Path

from taskiq.kicker import AsyncKicker

from .config import ExperimentConfig, SweepPoint
from .exceptions import StartupFailure
from .harness import record_order, run_trial_task
from .logging import get_logger
from .recorder import BaseRecorder, TrialRecord
from .settings import Settings
from .utils import run_taskiq_task_group_wait_results

logger = get_logger(__name__)

TRIAL_TASK_NAME = "underlay:trial"


class ExperimentRunner:
    """Fans the trials of an experiment out to a taskiq broker and collects their records."""

    def __init__(
        self,
        cfg: ExperimentConfig,
        *,
        settings: Settings | None = None,
        out_dir: Path | None = None,
        recorder: BaseRecorder | None = None,
    ):
        self.cfg = cfg
        self.settings = settings or Settings()
        self.broker = self.settings.get_broker()
        self.out_dir = out_dir or Path.cwd()
        self.recorder = recorder or self.settings.get_recorder()

        self.points = cfg.sweep_points()
        logger.info(
            f"Using {self.__class__.__name__}: {len(self.points)} sweep point(s) x "
            f"{cfg.trials} trial(s), batch_size={self.settings.BATCH_SIZE}"
        )

    def _create_task_kicker(self, point: SweepPoint, trial: int) -> AsyncKicker:
        return AsyncKicker(
            task_name=TRIAL_TASK_NAME,
            broker=self.broker,
            labels=dict(
                trial=str(trial),
                n_cues=str(point.n_cues),
                cell_radius=f"{point.cell_radius:g}",
                cluster_radius=f"{point.cluster_radius:g}",
            ),
        )

    async def _run_batch(self, jobs: list[tuple[SweepPoint, int]]) -> list[TrialRecord]:
        config = self.cfg.model_dump(mode="json")
        results = await run_taskiq_task_group_wait_results(
            (self._create_task_kicker(point, trial), (config, point.model_dump(mode="json"), trial))
            for point, trial in jobs
        )

        records: list[TrialRecord] = []
        for result in results:
            # NOTE: Trials are pure, any error is a bug or a bad config, so stop right away
            result.raise_for_error()
            records.extend(TrialRecord.from_taskiq(result))

        if self.recorder:
            await asyncio.gather(*(self.recorder.add_result(record) for record in records))

        return records

    async def run(self) -> list[TrialRecord]:
        """
        Run every (sweep point, trial) job on the broker, in batches of ``BATCH_SIZE``.

        Raises:
            :class:`~underlay.exceptions.StartupFailure`:
                If the broker or the recorder fails to start.
        """
        try:
            self.broker.register_task(run_trial_task, task_name=TRIAL_TASK_NAME)
            # Initialize broker (run worker startup events)
            await self.broker.startup()
        except Exception as err:
            raise StartupFailure(err) from err

        try:
            if self.recorder:
                try:
                    await self.recorder.init(self.out_dir)
                except OSError as err:
                    raise StartupFailure(err) from err

            jobs = [(point, trial) for point in self.points for trial in range(self.cfg.trials)]
            batch_size = self.settings.BATCH_SIZE
            records: list[TrialRecord] = []
            for start in range(0, len(jobs), batch_size):
                records.extend(await self._run_batch(jobs[start : start + batch_size]))
                logger.info(f"Completed {min(start + batch_size, len(jobs))}/{len(jobs)} trials")

        finally:
            await self.broker.shutdown()  # Release broker

        return sorted(records, key=record_order)
