"""Conversion of exact objects to JSON-ready values.

Rationals become ``"p/q"`` strings and floats are rounded to 12
significant digits, so reports are stable byte for byte.
"""

from __future__ import annotations

import dataclasses
import enum
from fractions import Fraction

from .exact import QAlpha
from .intervals import IntervalSet
from .plmap import PLMap
from .spaces import (
    CirclePoint,
    CylPoint,
    Cylinder,
    PointSet,
    RotationMap,
    ShiftMap,
    ShiftPoint,
    TwistMap,
)


def sig12(x: float) -> float:
    return float(f"{x:.12g}")


def jsonable(obj):
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return sig12(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (QAlpha, IntervalSet, CirclePoint, ShiftPoint, CylPoint, Cylinder)):
        return str(obj)
    if isinstance(obj, PLMap):
        return [list(p) for p in obj.to_points()]
    if isinstance(obj, RotationMap):
        return {"rotate": str(obj.delta)}
    if isinstance(obj, ShiftMap):
        return {"shift_steps": obj.steps}
    if isinstance(obj, TwistMap):
        return {"twist": obj.rate}
    if isinstance(obj, PointSet):
        return [jsonable(p) for p in obj.points]
    if isinstance(obj, enum.Enum):
        return obj.value
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    raise TypeError(f"cannot serialize {type(obj).__name__}")
