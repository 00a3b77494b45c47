from enum import Enum  # NOTE: `enum.StrEnum` only in Python 3.11+
from typing import Any

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field
from pydantic.functional_serializers import PlainSerializer
from typing_extensions import Annotated


class Algorithm(str, Enum):
    PROPOSED = "proposed"
    THREE_STEP = "three_step"
    ALL_CSI = "all_csi"
    EXHAUSTIVE = "exhaustive"

    def __str__(self) -> str:
        return self.value


class CounterVariant(str, Enum):
    OPTIMAL = "optimal"
    PROPOSED = "proposed"

    def __str__(self) -> str:
        return self.value


def as_readonly_array(value: Any) -> np.ndarray:
    # NOTE: Always copy, so that callers can't mutate a frozen model through a shared buffer
    array = np.array(value, dtype=float)
    array.setflags(write=False)
    return array


def as_point_array(value: Any) -> np.ndarray:
    # NOTE: An empty list of points must still have shape (0, 2)
    array = np.array(value, dtype=float).reshape(-1, 2)
    array.setflags(write=False)
    return array


def to_nested_list(array: np.ndarray) -> list:
    return array.tolist()


FloatArray = Annotated[
    np.ndarray,
    BeforeValidator(as_readonly_array),
    PlainSerializer(to_nested_list, return_type=list),
]

PointArray = Annotated[
    np.ndarray,
    BeforeValidator(as_point_array),
    PlainSerializer(to_nested_list, return_type=list),
]


class FrozenModel(BaseModel):
    # NOTE: numpy arrays are not native pydantic types, they pass through `FloatArray`
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class EffortCounters(BaseModel):
    # Number of candidate matching states evaluated
    matching_states: int = Field(default=0, ge=0)

    # Number of channel gains conveyed to the BS
    signaling_gains: int = Field(default=0, ge=0)
