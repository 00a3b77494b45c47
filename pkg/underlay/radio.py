from functools import cached_property
from typing import Iterable, Literal

import numpy as np
from pydantic import Field, field_validator, model_validator
from typing_extensions import Self

from .channel import GainTable, NoiseModel
from .exceptions import InvalidParameterError
from .topology import CellLayout
from .types import FloatArray, FrozenModel

# Relative tolerance for QoS equalities and power caps
FEASIBILITY_TOLERANCE = 1e-9

Role = Literal["cue", "d2d"]


def constraint_id(kind: str, role: Role, index: int) -> str:
    """Stable identifier of one constraint, e.g. ``qos:cue:3`` or ``cap:d2d:12``."""
    return f"{kind}:{role}:{index}"


class Assignment(FrozenModel):
    """
    The reuse indicator: which D2D pairs share the RB of each CUE.

    ``per_rb[i]`` lists the admitted pairs of CUE ``i``'s RB in admission order, ``denied``
    holds every pair that reuses no RB. Every pair is in exactly one of the two.
    """

    per_rb: tuple[tuple[int, ...], ...]
    denied: frozenset[int] = frozenset()

    @model_validator(mode="after")
    def check_reuse_indicator(self) -> Self:
        admitted: set[int] = set()
        for rb, pairs in enumerate(self.per_rb):
            if len(set(pairs)) != len(pairs):
                raise ValueError(f"Duplicate D2D pair in RB {rb}: {pairs}")

            if overlap := admitted.intersection(pairs):
                raise ValueError(f"D2D pair(s) {sorted(overlap)} share more than one RB")

            admitted.update(pairs)

        if overlap := admitted.intersection(self.denied):
            raise ValueError(f"D2D pair(s) {sorted(overlap)} both admitted and denied")

        every_pair = admitted | self.denied
        if every_pair != set(range(len(every_pair))):
            raise ValueError("D2D pair indices must be exactly 0..M-1")

        return self

    @classmethod
    def empty(cls, n_cues: int, n_d2d: int) -> Self:
        return cls(per_rb=tuple(() for _ in range(n_cues)), denied=frozenset(range(n_d2d)))

    @classmethod
    def from_groups(cls, per_rb: Iterable[Iterable[int]], n_d2d: int) -> Self:
        per_rb = tuple(tuple(int(j) for j in pairs) for pairs in per_rb)
        admitted = {j for pairs in per_rb for j in pairs}
        return cls(per_rb=per_rb, denied=frozenset(set(range(n_d2d)) - admitted))

    @property
    def n_cues(self) -> int:
        return len(self.per_rb)

    @property
    def n_d2d(self) -> int:
        return len(self.denied) + self.admitted_count

    @property
    def admitted_count(self) -> int:
        return sum(len(pairs) for pairs in self.per_rb)

    @cached_property
    def rb_of(self) -> dict[int, int]:
        """Map of admitted D2D pair to the CUE whose RB it reuses."""
        return {j: i for i, pairs in enumerate(self.per_rb) for j in pairs}


class PowerVector(FrozenModel):
    # Transmit powers of CUEs (watts)
    p_c: FloatArray

    # Transmit powers of D2D transmitters (watts), 0 for denied pairs
    p_d: FloatArray

    @field_validator("p_c", "p_d")
    def ensure_finite(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 1 or not np.all(np.isfinite(value)):
            raise ValueError("Powers must be a finite vector")

        return value


class QosProfile(FrozenModel):
    # Linear SINR thresholds of every CUE
    gamma_c_min: FloatArray

    # Linear SINR thresholds of every D2D pair
    gamma_d_min: FloatArray

    @field_validator("gamma_c_min", "gamma_d_min")
    def ensure_positive(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 1 or not np.all(value > 0):
            raise ValueError("SINR thresholds must be strictly positive")

        return value


class Scenario(FrozenModel):
    """Immutable snapshot of one cell realization, everything the allocators may read."""

    layout: CellLayout
    gains: GainTable
    noise: NoiseModel
    qos: QosProfile

    # Power caps (watts)
    p_c_max: float = Field(gt=0)
    p_d_max: float = Field(gt=0)

    # NOTE: Carried for absolute-rate reporting only, rates are in bits/s/Hz
    rb_bandwidth: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def check_dimensions(self) -> Self:
        n_cues, n_d2d = self.layout.n_cues, self.layout.n_d2d
        if (self.gains.n_cues, self.gains.n_d2d) != (n_cues, n_d2d):
            raise ValueError("Gain table does not match the layout")

        if (len(self.qos.gamma_c_min), len(self.qos.gamma_d_min)) != (n_cues, n_d2d):
            raise ValueError("QoS profile does not match the layout")

        return self

    @property
    def n_cues(self) -> int:
        return self.layout.n_cues

    @property
    def n_d2d(self) -> int:
        return self.layout.n_d2d

    def solo_cue_sinr(self, cue: int, power: float | None = None) -> float:
        """SINR of a CUE alone on its RB, at ``power`` (default ``p_c_max``)."""
        power = self.p_c_max if power is None else power
        return power * self.gains.g_cb[cue] / self.noise.total


def _check_shapes(scn: Scenario, asg: Assignment, pw: PowerVector):
    if asg.n_cues != scn.n_cues or asg.n_d2d != scn.n_d2d:
        raise InvalidParameterError(
            f"Assignment for N={asg.n_cues}, M={asg.n_d2d} used with a scenario "
            f"of N={scn.n_cues}, M={scn.n_d2d}"
        )

    if len(pw.p_c) != scn.n_cues or len(pw.p_d) != scn.n_d2d:
        raise InvalidParameterError("Power vector does not match the scenario")


def sinr_cue(scn: Scenario, asg: Assignment, pw: PowerVector, i: int) -> float:
    """SINR of CUE ``i`` at the BS, interfered by the D2D transmitters sharing its RB."""
    pairs = list(asg.per_rb[i])
    interference = float(np.dot(pw.p_d[pairs], scn.gains.h_db[pairs])) if pairs else 0.0
    return float(pw.p_c[i] * scn.gains.g_cb[i] / (interference + scn.noise.total))


def sinr_d2d(scn: Scenario, asg: Assignment, pw: PowerVector, j: int) -> float:
    """SINR of D2D pair ``j``, exactly 0 when the pair is denied."""
    if (i := asg.rb_of.get(j)) is None:
        return 0.0

    others = [k for k in asg.per_rb[i] if k != j]
    interference = pw.p_c[i] * scn.gains.h_cd[i, j]
    if others:
        interference += float(np.dot(pw.p_d[others], scn.gains.h_dd[others, j]))

    return float(pw.p_d[j] * scn.gains.g_d[j] / (interference + scn.noise.total))


def sinr_vectors(scn: Scenario, asg: Assignment, pw: PowerVector) -> tuple[np.ndarray, np.ndarray]:
    """SINRs of every CUE and every D2D pair (0 for denied pairs)."""
    _check_shapes(scn, asg, pw)
    gamma_c = np.array([sinr_cue(scn, asg, pw, i) for i in range(scn.n_cues)])
    gamma_d = np.array([sinr_d2d(scn, asg, pw, j) for j in range(scn.n_d2d)])
    return gamma_c, gamma_d


def rates(scn: Scenario, asg: Assignment, pw: PowerVector) -> tuple[np.ndarray, np.ndarray]:
    """Per-UE spectral efficiency in bits/s/Hz; denied pairs contribute exactly 0."""
    gamma_c, gamma_d = sinr_vectors(scn, asg, pw)
    rate_d = np.zeros(scn.n_d2d)
    if admitted := sorted(asg.rb_of):
        rate_d[admitted] = np.log2(1.0 + gamma_d[admitted])

    return np.log2(1.0 + gamma_c), rate_d


def sum_rate(scn: Scenario, asg: Assignment, pw: PowerVector) -> float:
    """Sum of ``log2(1 + SINR)`` over every CUE and every admitted D2D pair."""
    rate_c, rate_d = rates(scn, asg, pw)
    return float(rate_c.sum() + rate_d.sum())


class Violation(FrozenModel):
    constraint: str

    # Negative by how much the constraint is violated (relative for QoS, watts for power)
    slack: float


class FeasibilityReport(FrozenModel):
    feasible: bool
    violations: tuple[Violation, ...] = ()

    # `sinr / sinr_min - 1` per UE, NaN for denied pairs
    cue_slack: FloatArray
    d2d_slack: FloatArray

    def __bool__(self) -> bool:
        return self.feasible


def check_feasible(
    scn: Scenario,
    asg: Assignment,
    pw: PowerVector,
    tolerance: float = FEASIBILITY_TOLERANCE,
) -> FeasibilityReport:
    """
    Check every QoS and power constraint of the allocation problem.

    A QoS constraint is violated when ``sinr < sinr_min * (1 - tolerance)``, a power cap when
    ``p > p_max * (1 + tolerance)``. Denied pairs must be silent.
    """
    gamma_c, gamma_d = sinr_vectors(scn, asg, pw)
    violations: list[Violation] = []

    cue_slack = gamma_c / scn.qos.gamma_c_min - 1.0
    for i, slack in enumerate(cue_slack):
        if slack < -tolerance:
            violations.append(Violation(constraint=constraint_id("qos", "cue", i), slack=slack))

    d2d_slack = np.full(scn.n_d2d, np.nan)
    for j in sorted(asg.rb_of):
        d2d_slack[j] = gamma_d[j] / scn.qos.gamma_d_min[j] - 1.0
        if d2d_slack[j] < -tolerance:
            violations.append(
                Violation(constraint=constraint_id("qos", "d2d", j), slack=d2d_slack[j])
            )

    for role, powers, cap in (("cue", pw.p_c, scn.p_c_max), ("d2d", pw.p_d, scn.p_d_max)):
        for index, power in enumerate(powers):
            if power > cap * (1.0 + tolerance):
                violations.append(
                    Violation(constraint=constraint_id("cap", role, index), slack=cap - power)
                )

            elif power < -cap * tolerance:
                violations.append(
                    Violation(constraint=constraint_id("floor", role, index), slack=power)
                )

    for j in sorted(asg.denied):
        if pw.p_d[j] != 0.0:
            violations.append(
                Violation(constraint=constraint_id("idle", "d2d", j), slack=-abs(pw.p_d[j]))
            )

    return FeasibilityReport(
        feasible=not violations,
        violations=tuple(violations),
        cue_slack=cue_slack,
        d2d_slack=d2d_slack,
    )
