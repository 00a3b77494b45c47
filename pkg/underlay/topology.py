import math
from functools import cached_property
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import Field, field_validator, model_validator
from typing_extensions import Self

from .exceptions import InvalidParameterError
from .types import FrozenModel, PointArray

# Distances below this are clamped, so that `d ** -alpha` stays finite
MIN_DISTANCE = 1.0


class Position(FrozenModel):
    x: float
    y: float

    @field_validator("x", "y")
    def ensure_finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("Coordinates must be finite")

        return value

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


ORIGIN = Position(x=0.0, y=0.0)


def distance(a: Position, b: Position) -> float:
    """Euclidean distance between two positions, clamped below by ``MIN_DISTANCE``."""
    return max(math.hypot(a.x - b.x, a.y - b.y), MIN_DISTANCE)


def pairwise_distance(sources: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """
    Clamped distance matrix between two point arrays.

    Args:
        sources (np.ndarray): points of shape ``(S, 2)``.
        targets (np.ndarray): points of shape ``(T, 2)``.

    Returns:
        np.ndarray: matrix of shape ``(S, T)`` with entry ``[s, t] = max(|s - t|, d_min)``.
    """
    sources = np.asarray(sources, dtype=float).reshape(-1, 2)
    targets = np.asarray(targets, dtype=float).reshape(-1, 2)
    delta = sources[:, np.newaxis, :] - targets[np.newaxis, :, :]
    return np.maximum(np.hypot(delta[..., 0], delta[..., 1]), MIN_DISTANCE)


class CellLayout(FrozenModel):
    """One cell realization: BS at the origin, N CUEs and M clustered D2D pairs."""

    cell_radius: float = Field(gt=0)
    bs_position: Position = ORIGIN
    cue_positions: PointArray
    d2d_tx_positions: PointArray
    d2d_rx_positions: PointArray
    cluster_centers: PointArray
    cluster_radius: float = Field(gt=0)

    @model_validator(mode="after")
    def check_dimensions(self) -> Self:
        if len(self.cue_positions) < 1:
            raise ValueError("Layout needs at least one CUE")

        if not (
            len(self.d2d_tx_positions) == len(self.d2d_rx_positions) == len(self.cluster_centers)
        ):
            raise ValueError("Every D2D pair needs a transmitter, a receiver and a cluster")

        return self

    @property
    def n_cues(self) -> int:
        return len(self.cue_positions)

    @property
    def n_d2d(self) -> int:
        return len(self.d2d_tx_positions)

    @cached_property
    def cue_to_bs(self) -> np.ndarray:
        return pairwise_distance(self.cue_positions, self.bs_position.as_array())[:, 0]

    @cached_property
    def tx_to_bs(self) -> np.ndarray:
        return pairwise_distance(self.d2d_tx_positions, self.bs_position.as_array())[:, 0]

    @cached_property
    def cue_to_rx(self) -> np.ndarray:
        return pairwise_distance(self.cue_positions, self.d2d_rx_positions)

    @cached_property
    def tx_to_rx(self) -> np.ndarray:
        return pairwise_distance(self.d2d_tx_positions, self.d2d_rx_positions)

    def to_frame(self) -> pd.DataFrame:
        rows = [("bs", 0, self.bs_position.x, self.bs_position.y)]
        for entity, points in (
            ("cue", self.cue_positions),
            ("d2d_tx", self.d2d_tx_positions),
            ("d2d_rx", self.d2d_rx_positions),
            ("cluster", self.cluster_centers),
        ):
            rows.extend((entity, idx, x, y) for idx, (x, y) in enumerate(points))

        return pd.DataFrame(rows, columns=["entity", "index", "x", "y"])

    def write_csv(self, path: Path):
        self.to_frame().to_csv(path, index=False, lineterminator="\r\n", float_format="%.9f")


def _uniform_disc(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    # NOTE: `radius * sqrt(u)` gives an area-uniform law on the disc
    rho = radius * np.sqrt(rng.random(count))
    theta = 2.0 * np.pi * rng.random(count)
    return np.column_stack((rho * np.cos(theta), rho * np.sin(theta)))


def generate_layout(
    n_cues: int,
    n_d2d: int,
    cell_radius: float,
    cluster_radius: float,
    rng_seed: int,
) -> CellLayout:
    """
    Draw a random cell realization.

    CUEs are uniform in the cell disc. Each D2D pair gets its own cluster, whose center is
    uniform in the disc of radius ``cell_radius - cluster_radius`` (so clusters never cross
    the cell edge), and its transmitter and receiver are uniform in the cluster disc.

    Raises:
        :class:`~underlay.exceptions.InvalidParameterError`:
            If ``n_cues < 1``, ``n_d2d < 0`` or not ``cell_radius > cluster_radius > 0``.
    """
    if n_cues < 1:
        raise InvalidParameterError(f"Need at least one CUE, got n_cues={n_cues}")

    if n_d2d < 0:
        raise InvalidParameterError(f"Number of D2D pairs must be non-negative, got {n_d2d}")

    if not cell_radius > cluster_radius > 0:
        raise InvalidParameterError(
            "Radii must satisfy cell_radius > cluster_radius > 0, "
            f"got cell_radius={cell_radius}, cluster_radius={cluster_radius}"
        )

    rng = np.random.default_rng(rng_seed)
    cue_positions = _uniform_disc(rng, n_cues, cell_radius)
    cluster_centers = _uniform_disc(rng, n_d2d, cell_radius - cluster_radius)
    d2d_tx_positions = cluster_centers + _uniform_disc(rng, n_d2d, cluster_radius)
    d2d_rx_positions = cluster_centers + _uniform_disc(rng, n_d2d, cluster_radius)

    return CellLayout(
        cell_radius=cell_radius,
        cue_positions=cue_positions,
        d2d_tx_positions=d2d_tx_positions,
        d2d_rx_positions=d2d_rx_positions,
        cluster_centers=cluster_centers,
        cluster_radius=cluster_radius,
    )
