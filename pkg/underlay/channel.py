from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import Field, model_validator
from typing_extensions import Self

from .exceptions import InvalidParameterError
from .topology import CellLayout
from .types import FloatArray, FrozenModel

# NOTE: Conventional macro-cell values, the source model only states that both effects exist
DEFAULT_SHADOWING_SIGMA_DB = 8.0
DEFAULT_PATHLOSS_EXPONENT = 3.5


class NoiseModel(FrozenModel):
    # AWGN power per RB (watts)
    sigma_n2: float = Field(gt=0)

    # Signal processing noise power at the receiver (watts)
    sigma_s2: float = Field(default=0.0, ge=0)

    @property
    def total(self) -> float:
        return self.sigma_n2 + self.sigma_s2


class GainTable(FrozenModel):
    """
    Linear power gains of every link in the cell.

    - ``g_cb[i]``: CUE ``i`` to the BS.
    - ``g_d[j]``: transmitter to receiver of D2D pair ``j``.
    - ``h_db[j]``: transmitter of D2D pair ``j`` to the BS.
    - ``h_cd[i, j]``: CUE ``i`` to the receiver of D2D pair ``j``.
    - ``h_dd[k, j]``: transmitter of D2D pair ``k`` to the receiver of D2D pair ``j``
      (the diagonal is never read).
    """

    g_cb: FloatArray
    g_d: FloatArray
    h_db: FloatArray
    h_cd: FloatArray
    h_dd: FloatArray

    @model_validator(mode="after")
    def check_gains(self) -> Self:
        n_cues, n_d2d = len(self.g_cb), len(self.g_d)
        self._ensure_shape("h_db", self.h_db, (n_d2d,))
        self._ensure_shape("h_cd", self.h_cd, (n_cues, n_d2d))
        self._ensure_shape("h_dd", self.h_dd, (n_d2d, n_d2d))

        for name in ("g_cb", "g_d"):
            values = getattr(self, name)
            if not (np.all(np.isfinite(values)) and np.all(values > 0)):
                raise ValueError(f"Gains in '{name}' must be strictly positive and finite")

        # NOTE: Zero interference gain models a fully decoupled link
        for name in ("h_db", "h_cd", "h_dd"):
            values = getattr(self, name)
            if name == "h_dd":
                values = values[~np.eye(n_d2d, dtype=bool)]

            if not (np.all(np.isfinite(values)) and np.all(values >= 0)):
                raise ValueError(f"Gains in '{name}' must be non-negative and finite")

        return self

    @staticmethod
    def _ensure_shape(name: str, array: np.ndarray, shape: tuple[int, ...]):
        if array.shape != shape:
            raise ValueError(f"'{name}' has shape {array.shape}, expected {shape}")

    @model_validator(mode="before")
    @classmethod
    def reshape_matrices(cls, data: dict) -> dict:
        # NOTE: Empty matrices lose their shape when serialized to nested lists
        if isinstance(data, dict) and "g_cb" in data and "g_d" in data:
            n_cues, n_d2d = len(data["g_cb"]), len(data["g_d"])
            data = dict(data)
            data["h_cd"] = np.asarray(data["h_cd"], dtype=float).reshape(n_cues, n_d2d)
            data["h_dd"] = np.asarray(data["h_dd"], dtype=float).reshape(n_d2d, n_d2d)

        return data

    @property
    def n_cues(self) -> int:
        return len(self.g_cb)

    @property
    def n_d2d(self) -> int:
        return len(self.g_d)

    def to_frame(self) -> pd.DataFrame:
        rows: list[tuple[str, int, int, float]] = []
        rows.extend(("g_cb", i, -1, gain) for i, gain in enumerate(self.g_cb))
        rows.extend(("g_d", j, j, gain) for j, gain in enumerate(self.g_d))
        rows.extend(("h_db", j, -1, gain) for j, gain in enumerate(self.h_db))
        rows.extend(
            ("h_cd", i, j, self.h_cd[i, j]) for i in range(self.n_cues) for j in range(self.n_d2d)
        )
        rows.extend(
            ("h_dd", k, j, self.h_dd[k, j])
            for k in range(self.n_d2d)
            for j in range(self.n_d2d)
            if k != j
        )
        return pd.DataFrame(rows, columns=["link_type", "i", "j", "gain"])

    def write_csv(self, path: Path):
        self.to_frame().to_csv(path, index=False, lineterminator="\r\n", float_format="%.9e")


def _shadowing(rng: np.random.Generator, shape: tuple[int, ...], sigma_db: float) -> np.ndarray:
    return 10.0 ** (rng.normal(0.0, sigma_db, size=shape) / 10.0)


def _link_gains(
    rng: np.random.Generator,
    distances: np.ndarray,
    pathloss_exponent: float,
    shadowing_sigma_db: float,
    fading: bool,
) -> np.ndarray:
    gains = distances ** (-pathloss_exponent)
    if not fading:
        return gains

    # NOTE: Draw order (shadowing, then fast fading) is part of the reproducibility contract
    if shadowing_sigma_db > 0:
        gains = gains * _shadowing(rng, distances.shape, shadowing_sigma_db)

    return gains * rng.exponential(1.0, size=distances.shape)


def compute_gains(
    layout: CellLayout,
    pathloss_exponent: float = DEFAULT_PATHLOSS_EXPONENT,
    shadowing_sigma_db: float = DEFAULT_SHADOWING_SIGMA_DB,
    fading: bool = True,
    rng_seed: int = 0,
) -> GainTable:
    """
    Compute every channel gain of the cell from its geometry.

    Each gain is ``d ** -alpha * 10 ** (X / 10) * F`` with log-normal shadowing
    ``X ~ Normal(0, shadowing_sigma_db ** 2)`` (skipped when the deviation is 0) and Rayleigh
    fading ``F ~ Exponential(1)``. With ``fading`` off both are disabled (``X = 0``,
    ``F = 1``) and every gain is pure pathloss. Links are drawn in the fixed order
    ``g_cb, g_d, h_db, h_cd, h_dd``.

    Raises:
        :class:`~underlay.exceptions.InvalidParameterError`:
            If ``pathloss_exponent <= 2`` or ``shadowing_sigma_db < 0``.
    """
    if not pathloss_exponent > 2:
        raise InvalidParameterError(
            f"Pathloss exponent must be greater than 2, got {pathloss_exponent}"
        )

    if shadowing_sigma_db < 0:
        raise InvalidParameterError(
            f"Shadowing deviation must be non-negative, got {shadowing_sigma_db} dB"
        )

    rng = np.random.default_rng(rng_seed)

    def draw(distances: np.ndarray) -> np.ndarray:
        return _link_gains(rng, distances, pathloss_exponent, shadowing_sigma_db, fading)

    return GainTable(
        g_cb=draw(layout.cue_to_bs),
        g_d=draw(np.diagonal(layout.tx_to_rx).copy()),
        h_db=draw(layout.tx_to_bs),
        h_cd=draw(layout.cue_to_rx),
        h_dd=draw(layout.tx_to_rx),
    )
