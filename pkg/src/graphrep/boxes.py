"""
边界框工具
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from ..utils.errors import GeometryError


@dataclass(frozen=True)
class BBox:
    """像素坐标边界框 [x1, y1, x2, y2]（左上角、右下角）"""
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise GeometryError(f"边界框坐标非有限: {coords}")
        if min(coords) < 0:
            raise GeometryError(f"边界框坐标为负: {coords}")
        if not (self.x2 > self.x1 and self.y2 > self.y1):
            raise GeometryError(f"退化的边界框（面积为0）: {coords}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> Tuple[float, float]:
        return (self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def within(self, width: float, height: float) -> bool:
        return self.x2 <= width and self.y2 <= height

    def to_list(self) -> List[float]:
        return [float(self.x1), float(self.y1), float(self.x2), float(self.y2)]

    @classmethod
    def from_list(cls, coords: Sequence[float]) -> "BBox":
        if len(coords) != 4:
            raise GeometryError(f"边界框需要4个坐标，实际 {len(coords)}")
        return cls(*(float(c) for c in coords))


def intersection_area(a: BBox, b: BBox) -> float:
    w = min(a.x2, b.x2) - max(a.x1, b.x1)
    h = min(a.y2, b.y2) - max(a.y1, b.y1)
    if w <= 0 or h <= 0:
        return 0.0
    return w * h


def iou(a: BBox, b: BBox) -> float:
    """
    交并比，不相交时为0

    Args:
        a: 边界框
        b: 边界框

    Returns:
        [0, 1] 之间的IoU
    """
    inter = intersection_area(a, b)
    return inter / (a.area + b.area - inter)
