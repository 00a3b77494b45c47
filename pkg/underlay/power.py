"""
Power control for one resource block.

Every QoS constraint ``SINR_u >= gamma_u`` of a group sharing one RB is linear in the power
vector: ``g_u p_u - gamma_u * sum_v G[u, v] p_v >= gamma_u * sigma2``. All routines here work
on that linear system, with local users ordered as the CUE first, then the admitted D2D pairs
in admission order.
"""

from functools import cached_property

import numpy as np
from pydantic import Field
from scipy import linalg
from typing_extensions import Self

from .exceptions import InvalidParameterError
from .logging import get_logger
from .radio import Scenario, constraint_id
from .types import FloatArray, FrozenModel

logger = get_logger(__name__)

# Relative tolerance for a constraint to count as equal-active
ACTIVE_TOLERANCE = 1e-9

# Condition number above which the equal-active system is treated as singular
SINGULAR_CONDITION = 1e12


class RbGroup(FrozenModel):
    """The CUE owning one RB and the D2D pairs reusing it, in admission order."""

    cue: int = Field(ge=0)
    pairs: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return 1 + len(self.pairs)

    def admit(self, pair: int) -> Self:
        if pair in self.pairs:
            raise InvalidParameterError(f"D2D pair {pair} already uses the RB of CUE {self.cue}")

        return self.model_copy(update=dict(pairs=(*self.pairs, pair)))

    def constraint_ids(self, kind: str) -> list[str]:
        return [constraint_id(kind, "cue", self.cue)] + [
            constraint_id(kind, "d2d", pair) for pair in self.pairs
        ]


class PowerSolveOutcome(FrozenModel):
    feasible: bool

    # Local power vector: CUE first, then the pairs in admission order (watts)
    powers: FloatArray

    # Identifiers of the constraints holding with equality, e.g. `qos:d2d:4` or `cap:cue:0`
    active_constraints: tuple[str, ...] = ()

    @property
    def cue_power(self) -> float:
        return float(self.powers[0])

    @property
    def pair_powers(self) -> np.ndarray:
        return self.powers[1:]


class GroupSystem(FrozenModel):
    """The local linear constraint system of one :class:`RbGroup`."""

    group: RbGroup

    # Desired link gain of every local user
    gains: FloatArray

    # `cross[u, v]`: gain from transmitter of user `v` to receiver of user `u`, zero diagonal
    cross: FloatArray

    # Linear SINR thresholds and power caps of every local user
    gamma: FloatArray
    caps: FloatArray

    noise: float

    @classmethod
    def from_group(cls, group: RbGroup, scn: Scenario) -> Self:
        pairs = list(group.pairs)
        size = group.size
        gains_table = scn.gains

        cross = np.zeros((size, size))
        # The BS hears every D2D transmitter of the RB
        cross[0, 1:] = gains_table.h_db[pairs]
        # Every D2D receiver hears the CUE and the other D2D transmitters
        cross[1:, 0] = gains_table.h_cd[group.cue, pairs]
        if pairs:
            cross[1:, 1:] = gains_table.h_dd[np.ix_(pairs, pairs)].T
            np.fill_diagonal(cross[1:, 1:], 0.0)

        return cls(
            group=group,
            gains=np.concatenate(([gains_table.g_cb[group.cue]], gains_table.g_d[pairs])),
            cross=cross,
            gamma=np.concatenate(([scn.qos.gamma_c_min[group.cue]], scn.qos.gamma_d_min[pairs])),
            caps=np.array([scn.p_c_max] + [scn.p_d_max] * len(pairs)),
            noise=scn.noise.total,
        )

    @property
    def size(self) -> int:
        return self.group.size

    @cached_property
    def matrix(self) -> np.ndarray:
        """Constraint rows ``A = diag(g) - diag(gamma) G``, with ``A p >= b``."""
        return np.diag(self.gains) - self.gamma[:, np.newaxis] * self.cross

    @cached_property
    def rhs(self) -> np.ndarray:
        return self.gamma * self.noise

    @cached_property
    def normalized_interference(self) -> np.ndarray:
        """
        ``F = diag(gamma / g) G``; the equal-active point solves ``(I - F) p = gamma sigma2 / g``.
        """
        return (self.gamma / self.gains)[:, np.newaxis] * self.cross

    def sinr(self, powers: np.ndarray) -> np.ndarray:
        return self.gains * powers / (self.cross @ powers + self.noise)

    def sum_rate(self, powers: np.ndarray) -> float:
        return float(np.log2(1.0 + self.sinr(powers)).sum())

    def tight(self, powers: np.ndarray) -> np.ndarray:
        return self.sinr(powers) / self.gamma - 1.0 <= ACTIVE_TOLERANCE

    def capped(self, powers: np.ndarray) -> np.ndarray:
        return powers >= self.caps * (1.0 - ACTIVE_TOLERANCE)

    def is_feasible(self, powers: np.ndarray) -> bool:
        return bool(
            np.all(powers >= 0.0)
            and np.all(powers <= self.caps * (1.0 + ACTIVE_TOLERANCE))
            and np.all(self.sinr(powers) / self.gamma - 1.0 >= -ACTIVE_TOLERANCE)
        )

    def outcome(self, powers: np.ndarray, feasible: bool) -> PowerSolveOutcome:
        if not feasible:
            return PowerSolveOutcome(feasible=False, powers=powers)

        qos_ids = self.group.constraint_ids("qos")
        cap_ids = self.group.constraint_ids("cap")
        active = [qos_ids[u] for u in np.flatnonzero(self.tight(powers))]
        active.extend(cap_ids[u] for u in np.flatnonzero(self.capped(powers)))
        return PowerSolveOutcome(feasible=True, powers=powers, active_constraints=tuple(active))


def first_pair_powers(scn: Scenario, cue: int, pair: int) -> PowerSolveOutcome:
    """
    Closed-form minimum powers of a CUE and a single D2D pair sharing its RB.

    Both QoS constraints hold with equality at::

        P_C = gamma_C sigma2 (g_D + gamma_D h_DB) / (g_CB g_D - gamma_C gamma_D h_CD h_DB)
        P_D = gamma_D sigma2 (g_CB + gamma_C h_CD) / (g_CB g_D - gamma_C gamma_D h_CD h_DB)

    The pair is infeasible when the shared denominator is not positive or either power
    exceeds its cap.
    """
    gains, qos, sigma2 = scn.gains, scn.qos, scn.noise.total
    g_cb, g_d = gains.g_cb[cue], gains.g_d[pair]
    h_cd, h_db = gains.h_cd[cue, pair], gains.h_db[pair]
    gamma_c, gamma_d = qos.gamma_c_min[cue], qos.gamma_d_min[pair]

    group = RbGroup(cue=cue, pairs=(pair,))
    system = GroupSystem.from_group(group, scn)

    denominator = g_cb * g_d - gamma_c * gamma_d * h_cd * h_db
    if denominator <= 0:
        return system.outcome(np.full(2, np.nan), feasible=False)

    powers = np.array(
        [
            gamma_c * sigma2 * (g_d + gamma_d * h_db) / denominator,
            gamma_d * sigma2 * (g_cb + gamma_c * h_cd) / denominator,
        ]
    )
    return system.outcome(powers, feasible=bool(np.all(powers <= system.caps)))


def spectral_feasibility(group: RbGroup, scn: Scenario) -> bool:
    """
    Whether the equal-active system of ``group`` has a positive solution.

    That holds iff the spectral radius of ``diag(gamma / g) G`` is below 1. Caps are not
    considered, :func:`min_power_solve` still checks them.
    """
    system = GroupSystem.from_group(group, scn)
    return bool(np.max(np.abs(linalg.eigvals(system.normalized_interference))) < 1.0)


def min_power_solve(group: RbGroup, scn: Scenario) -> PowerSolveOutcome:
    """
    Minimum powers of ``group``: the point where every local QoS constraint is equal-active.

    Feasible iff the system is non-singular (condition number of the balanced matrix at most
    ``SINGULAR_CONDITION``), its solution is positive and within both power caps.
    """
    system = GroupSystem.from_group(group, scn)
    matrix = np.eye(system.size) - system.normalized_interference
    target = system.rhs / system.gains

    balanced, _ = linalg.matrix_balance(matrix, permute=False)
    if not np.linalg.cond(balanced) <= SINGULAR_CONDITION:
        return system.outcome(np.full(system.size, np.nan), feasible=False)

    try:
        powers = linalg.solve(matrix, target)
    except linalg.LinAlgError:
        return system.outcome(np.full(system.size, np.nan), feasible=False)

    feasible = bool(np.all(powers > 0) and np.all(powers <= system.caps))
    return system.outcome(powers, feasible=feasible)


def _walk_direction(
    system: GroupSystem, powers: np.ndarray, current: int
) -> tuple[np.ndarray, list[int]] | None:
    # Raise `current` and move the users whose QoS is held so their rows stay equal-active
    capped = system.capped(powers)
    if capped[current]:
        return None

    held = [v for v in np.flatnonzero(system.tight(powers)) if v != current]
    moving = [v for v in held if not capped[v]]

    direction = np.zeros(system.size)
    direction[current] = 1.0
    if not held:
        return direction, held

    rows = system.matrix[held]
    if moving:
        solution, *_ = np.linalg.lstsq(rows[:, moving], -rows[:, current], rcond=None)
        direction[moving] = solution

    scale = float(np.max(np.abs(rows) @ np.abs(direction)))
    if np.max(np.abs(rows @ direction)) > ACTIVE_TOLERANCE * scale:
        # A capped user's held row pins the current user
        return None

    # Held users never fall, negative entries are solver rounding
    direction[(direction < 0) & (direction >= -ACTIVE_TOLERANCE)] = 0.0
    return direction, held


def _max_step(
    system: GroupSystem,
    powers: np.ndarray,
    direction: np.ndarray,
    floor: np.ndarray,
    held: list[int],
) -> float:
    bounds = [np.inf]

    # Entries at rounding level never reach a cap
    rising = direction > np.finfo(float).eps
    bounds.extend((system.caps[rising] - powers[rising]) / direction[rising])

    falling = direction < 0
    bounds.extend((powers[falling] - floor[falling]) / -direction[falling])

    rate = system.matrix @ direction
    slack = np.maximum(system.matrix @ powers - system.rhs, 0.0)
    for v in range(system.size):
        if v not in held and rate[v] < 0:
            bounds.append(slack[v] / -rate[v])

    return max(float(min(bounds)), 0.0)


def max_power_walk(group: RbGroup, scn: Scenario, start: PowerSolveOutcome) -> PowerSolveOutcome:
    """
    Raise the powers of ``group`` from a feasible ``start`` while keeping every QoS constraint.

    One sweep over the users, CUE first then pairs in admission order. Each step moves along
    the direction that raises the current user's power, keeps capped users fixed and keeps
    every other equal-active QoS constraint equal-active. The step runs to the end of that
    segment, where a new QoS equality or power cap activates. A step whose end would lower the
    sum-rate is not taken. The result dominates ``start`` componentwise and never has a lower
    sum-rate.

    Raises:
        :class:`~underlay.exceptions.InvalidParameterError`:
            If ``start`` is infeasible or does not match ``group``.
    """
    if not start.feasible:
        raise InvalidParameterError("Power walk needs a feasible start")

    system = GroupSystem.from_group(group, scn)
    if start.powers.shape != (system.size,):
        raise InvalidParameterError(
            f"Start has {start.powers.size} powers, group of CUE {group.cue} has {system.size}"
        )

    floor = np.array(start.powers, dtype=float)
    powers = floor.copy()
    for current in range(system.size):
        if (found := _walk_direction(system, powers, current)) is None:
            continue

        direction, held = found
        if (limit := _max_step(system, powers, direction, floor, held)) <= 0:
            continue

        moved = np.clip(powers + limit * direction, floor, system.caps)
        if system.sum_rate(moved) < system.sum_rate(powers):
            logger.debug(f"CUE {group.cue}: step of local user {current} would lower sum-rate")
            continue

        powers = moved

    if not system.is_feasible(powers):
        logger.warning(f"Power walk of CUE {group.cue} drifted out of the feasible set")
        return start

    return system.outcome(powers, feasible=True)
