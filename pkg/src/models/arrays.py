"""Array field types for pydantic models."""

from typing import Annotated, Any

import numpy as np
import numpy.typing as npt
from pydantic import PlainSerializer, PlainValidator

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

# Alias for the dense real matrices H, Delta, Psi, R, Iext, TJ, G and D_h.
DenseMatrix = npt.NDArray[np.float64]


def _as_float_array(value: Any) -> FloatArray:
    arr = np.array(value, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("array entries must be finite")
    arr.setflags(write=False)
    return arr


def _as_int_array(value: Any) -> IntArray:
    arr = np.array(value, dtype=np.int64, copy=True)
    arr.setflags(write=False)
    return arr


FloatArrayField = Annotated[
    FloatArray,
    PlainValidator(_as_float_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]

IntArrayField = Annotated[
    IntArray,
    PlainValidator(_as_int_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]
