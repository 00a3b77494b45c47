from pathlib import Path
from typing import Any, Literal

import tomlkit
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from tomlkit.exceptions import TOMLKitError
from typing_extensions import Self

from .exceptions import ConfigurationError
from .types import Algorithm
from .utils import dbm_to_watt

# Pairs per CUE when `n_d2d` is left unset
DEFAULT_PAIRS_PER_CUE = 5


class SweepPoint(BaseModel):
    """One combination of the swept cell parameters."""

    index: int = Field(ge=0)
    n_cues: int = Field(ge=1)
    n_d2d: int = Field(ge=0)
    cell_radius: float = Field(gt=0)
    cluster_radius: float = Field(gt=0)


class ExperimentConfig(BaseModel):
    """
    Monte Carlo experiment parameters, defaulting to a 10 MHz single cell of radius 400 m
    with 5 CUEs and 25 D2D pairs.

    Config files are flat ``key = value`` lines (TOML syntax) with ``#`` comments, e.g.::

        n_cues = 5
        cluster_radius_sweep = [10, 20, 30, 40]
        algorithms = ["proposed", "three_step"]
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Cell
    n_cues: int = Field(default=5, ge=1)
    n_d2d: int | None = Field(default=None, ge=0)  # `None` means `5 * n_cues`
    cell_radius: float = Field(default=400.0, gt=0)
    cluster_radius_sweep: list[float] = [10.0]
    total_bandwidth: float = Field(default=10e6, gt=0)  # Hz, sets `Scenario.rb_bandwidth` only

    # Radio
    noise_dbm: float = -114.0
    sigma_s2_dbm: float | None = None  # `None` folds it into `noise_dbm`
    pathloss_exponent: float = Field(default=3.5, gt=2)
    shadowing_sigma_db: float = Field(default=8.0, ge=0)
    fading: bool = True
    p_c_max_dbm: float = 24.0
    p_d_max_dbm: float = 18.0
    qos_range_db: tuple[float, float] = (5.0, 20.0)

    # Run
    trials: int = Field(default=200, ge=1)
    seed: int = Field(default=0, ge=0)
    algorithms: list[Algorithm] = [
        Algorithm.PROPOSED,
        Algorithm.THREE_STEP,
        Algorithm.ALL_CSI,
    ]
    all_csi_scoring: Literal["power", "gain"] = "power"
    max_scenario_draws: int = Field(default=100, ge=1)

    # Optional sweeps, overriding `n_cues` / `cell_radius`
    n_cues_sweep: list[int] | None = None
    cell_radius_sweep: list[float] | None = None

    @field_validator("algorithms")
    def ensure_unique_algorithms(cls, algorithms: list[Algorithm]) -> list[Algorithm]:
        if not algorithms:
            raise ValueError("Select at least one algorithm")

        if len(set(algorithms)) != len(algorithms):
            raise ValueError(f"Duplicate algorithms: {[str(a) for a in algorithms]}")

        return algorithms

    @field_validator("cluster_radius_sweep", "n_cues_sweep", "cell_radius_sweep")
    def ensure_positive_sweep(cls, sweep: list | None) -> list | None:
        if sweep is None:
            return None

        if not sweep:
            raise ValueError("Sweeps must not be empty")

        if any(value <= 0 for value in sweep):
            raise ValueError("Sweep values must be positive")

        return sweep

    @model_validator(mode="after")
    def check_ranges(self) -> Self:
        low, high = self.qos_range_db
        if low > high:
            raise ValueError(f"QoS range [{low}, {high}] dB is empty")

        smallest_cell = min(self.cell_radius_sweep or [self.cell_radius])
        if (largest_cluster := max(self.cluster_radius_sweep)) >= smallest_cell:
            raise ValueError(
                f"Cluster radius {largest_cluster} m does not fit cell radius {smallest_cell} m"
            )

        return self

    @classmethod
    def from_config_file(cls, path: Path) -> Self:
        try:
            document = tomlkit.parse(Path(path).read_text(encoding="utf-8"))
        except (OSError, TOMLKitError) as err:
            raise ConfigurationError(f"Cannot read config file '{path}': {err}") from err

        return cls.from_dict(document.unwrap())

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        try:
            return cls.model_validate(data)
        except ValidationError as err:
            raise ConfigurationError(f"Invalid experiment configuration:\n{err}") from err

    def with_overrides(self, **overrides: Any) -> Self:
        """Copy with every non-``None`` override applied and re-validated."""
        if not (changes := {name: value for name, value in overrides.items() if value is not None}):
            return self

        return self.from_dict({**self.model_dump(), **changes})

    @property
    def p_c_max(self) -> float:
        return dbm_to_watt(self.p_c_max_dbm)

    @property
    def p_d_max(self) -> float:
        return dbm_to_watt(self.p_d_max_dbm)

    @property
    def sigma_n2(self) -> float:
        return dbm_to_watt(self.noise_dbm)

    @property
    def sigma_s2(self) -> float:
        return 0.0 if self.sigma_s2_dbm is None else dbm_to_watt(self.sigma_s2_dbm)

    def n_d2d_for(self, n_cues: int) -> int:
        return DEFAULT_PAIRS_PER_CUE * n_cues if self.n_d2d is None else self.n_d2d

    def sweep_points(self) -> list[SweepPoint]:
        """Every (N, R, r) combination, cluster radius varying fastest."""
        points: list[SweepPoint] = []
        for n_cues in self.n_cues_sweep or [self.n_cues]:
            for cell_radius in self.cell_radius_sweep or [self.cell_radius]:
                for cluster_radius in self.cluster_radius_sweep:
                    points.append(
                        SweepPoint(
                            index=len(points),
                            n_cues=n_cues,
                            n_d2d=self.n_d2d_for(n_cues),
                            cell_radius=cell_radius,
                            cluster_radius=cluster_radius,
                        )
                    )

        return points
