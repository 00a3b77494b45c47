import asyncio
from typing import Iterable

import numpy as np
from taskiq import TaskiqResult
from taskiq.kicker import AsyncKicker

# NOTE: Fixed so that every conversion at the config boundary is identical across modules
DBM_OFFSET = 30.0

SEED_MASK = (1 << 63) - 1


def dbm_to_watt(dbm: float) -> float:
    return float(10.0 ** ((dbm - DBM_OFFSET) / 10.0))


def watt_to_dbm(watt: float) -> float:
    # Zero power has no finite dBm value
    if watt <= 0.0:
        return float("-inf")

    return float(10.0 * np.log10(watt) + DBM_OFFSET)


def db_to_linear(db: float | np.ndarray) -> float | np.ndarray:
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(value: float | np.ndarray) -> float | np.ndarray:
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(value, dtype=float))


def derive_seed(master_seed: int, *path: int) -> int:
    """
    Split a master seed into an independent 63-bit child seed.

    The child is the first 64-bit word of ``numpy.random.SeedSequence(master_seed,
    spawn_key=path)`` with the top bit cleared, so ``(master_seed, trial)`` and
    ``(master_seed, trial, stream)`` give reproducible, statistically independent streams.
    """
    sequence = np.random.SeedSequence(master_seed, spawn_key=tuple(path))
    # NOTE: 63 bits so seeds fit signed 64-bit columns
    return int(sequence.generate_state(1, dtype=np.uint64)[0]) & SEED_MASK


async def run_taskiq_task_group_wait_results(
    kickers: Iterable[tuple[AsyncKicker, tuple]],
) -> list[TaskiqResult]:
    tasks = await asyncio.gather(*(kicker.kiq(*args) for kicker, args in kickers))
    return await asyncio.gather(*(task.wait_result() for task in tasks))
