"""
场景数据结构：检测结果与人-物交互标注
"""

from dataclasses import dataclass, field
from typing import FrozenSet, List

import numpy as np

from .boxes import BBox
from ..utils.errors import GeometryError, DatasetError


@dataclass
class Detection:
    """一阶段检测结果 (bbox, score, label) 及外观特征"""
    bbox: BBox
    score: float
    label: int
    feature: np.ndarray

    def __post_init__(self):
        self.feature = np.asarray(self.feature, dtype=np.float64)
        if not 0.0 <= self.score <= 1.0:
            raise DatasetError(f"检测置信度必须在[0,1]之间: {self.score}")


@dataclass(frozen=True)
class GtHoi:
    """一条交互标注：人框、物框、物体类别、动作集合"""
    human: BBox
    obj: BBox
    label: int
    verbs: FrozenSet[int]


@dataclass
class Scene:
    """单张图像"""
    image_id: str
    width: float
    height: float
    detections: List[Detection] = field(default_factory=list)
    ground_truth: List[GtHoi] = field(default_factory=list)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise GeometryError(f"图像尺寸非法: {self.width}x{self.height}")
        for det in self.detections:
            self._check_box(det.bbox)
        for hoi in self.ground_truth:
            self._check_box(hoi.human)
            self._check_box(hoi.obj)

    def _check_box(self, box: BBox):
        if not box.within(self.width, self.height):
            raise GeometryError(
                f"场景 {self.image_id}: 边界框 {box.to_list()} 超出图像 {self.width}x{self.height}"
            )
