"""Common schema base classes"""

from typing import Annotated, Any

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict


def _as_float_array(v: Any) -> np.ndarray:
    """Coerce lists and scalars to float ndarrays"""
    return np.asarray(v, dtype=float)


FloatArray = Annotated[np.ndarray, BeforeValidator(_as_float_array)]


class ArrayModel(BaseModel):
    """Immutable model that may hold numpy arrays"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
