"""Axis-aligned bounding-box arithmetic.

Boxes are stored as (left, top, width, height) in continuous (subpixel)
pixel coordinates. Both raw intersection area and IoU are exposed: event
logic works on raw intersection, metrics work on IoU.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataError, DegenerateBoxError

__all__ = [
    "BoundingBox",
    "Measurement",
    "intersection_area",
    "iou",
    "expand",
    "to_measurement",
    "from_measurement",
]


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: top-left corner plus strictly positive extent."""

    left: float
    top: float
    width: float
    height: float

    def __post_init__(self) -> None:
        for name in ("left", "top", "width", "height"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DataError(f"box {name} must be finite, got {value!r}")
        if self.width <= 0 or self.height <= 0:
            raise DegenerateBoxError(
                f"box extent must be positive, got width={self.width}, height={self.height}"
            )

    @property
    def right(self) -> float:
        return self.left + self.width

    @property
    def bottom(self) -> float:
        return self.top + self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.left + self.width / 2.0, self.top + self.height / 2.0)

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class Measurement:
    """Box in filter measurement space: center, aspect ratio (w/h), height."""

    cx: float
    cy: float
    aspect: float
    h: float

    def __post_init__(self) -> None:
        if self.aspect <= 0 or self.h <= 0:
            raise DataError(
                f"measurement needs aspect > 0 and h > 0, got aspect={self.aspect}, h={self.h}"
            )


def intersection_area(a: BoundingBox, b: BoundingBox) -> float:
    """Area of the overlap rectangle of two boxes; 0 when disjoint."""
    w = min(a.right, b.right) - max(a.left, b.left)
    h = min(a.bottom, b.bottom) - max(a.top, b.top)
    if w <= 0 or h <= 0:
        return 0.0
    return w * h


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union, in [0, 1]."""
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)


def expand(b: BoundingBox, margin: float) -> BoundingBox:
    """Grow (or shrink, for negative margin) a box by `margin` on every side."""
    width = b.width + 2.0 * margin
    height = b.height + 2.0 * margin
    if width <= 0 or height <= 0:
        raise DegenerateBoxError(
            f"margin {margin} collapses box of size {b.width}x{b.height}"
        )
    return BoundingBox(b.left - margin, b.top - margin, width, height)


def to_measurement(b: BoundingBox) -> Measurement:
    return Measurement(
        cx=b.left + b.width / 2.0,
        cy=b.top + b.height / 2.0,
        aspect=b.width / b.height,
        h=b.height,
    )


def from_measurement(m: Measurement) -> BoundingBox:
    width = m.aspect * m.h
    return BoundingBox(
        left=m.cx - width / 2.0,
        top=m.cy - m.h / 2.0,
        width=width,
        height=m.h,
    )
