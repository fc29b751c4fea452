"""
二阶段输入处理
置信度过滤、按类别NMS、人-物配对、空间特征
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .boxes import BBox, iou
from .scene import Detection, Scene
from ..utils.errors import GeometryError, ShapeError

SPATIAL_DIM = 18


def filter_detections(detections: Sequence[Detection], threshold: float = 0.2) -> List[Detection]:
    """
    保留置信度 ≥ threshold 的检测（边界值保留）

    Args:
        detections: 检测列表
        threshold: 置信度阈值

    Returns:
        过滤后的检测列表
    """
    return [det for det in detections if det.score >= threshold]


def nms(detections: Sequence[Detection], iou_threshold: float = 0.5) -> List[Detection]:
    """
    按类别贪心非极大值抑制：同类别内按置信度降序，
    与已保留检测IoU大于阈值的被移除；同分按输入顺序

    Returns:
        保留的检测，按置信度降序排列
    """
    order = sorted(range(len(detections)), key=lambda i: -detections[i].score)
    kept: List[int] = []
    for i in order:
        det = detections[i]
        suppressed = any(
            detections[j].label == det.label and iou(detections[j].bbox, det.bbox) > iou_threshold
            for j in kept
        )
        if not suppressed:
            kept.append(i)
    return [detections[i] for i in kept]


def make_pairs(detections: Sequence[Detection], person_id: int) -> List[Tuple[int, int]]:
    """
    枚举 (人, 物) 检测下标对；其他人也可作为物体，排除检测与自身配对
    """
    humans = [i for i, det in enumerate(detections) if det.label == person_id]
    return [(h, o) for h in humans for o in range(len(detections)) if o != h]


def spatial_features(b_h: BBox, b_o: BBox, width: float, height: float) -> np.ndarray:
    """
    18维空间特征：
    [cx_h/W, cy_h/H, w_h/W, h_h/H, cx_o/W, cy_o/H, w_o/W, h_o/H,
     (cx_o-cx_h)/w_h, (cy_o-cy_h)/h_h, log(w_o/w_h), log(h_o/h_h), log(area_o/area_h),
     IoU, area_h/(W·H), area_o/(W·H), w_h/h_h, w_o/h_o]
    """
    if width <= 0 or height <= 0:
        raise GeometryError(f"图像尺寸非法: {width}x{height}")
    if b_h.area <= 0 or b_o.area <= 0:
        raise GeometryError("退化的边界框")

    cx_h, cy_h = b_h.center
    cx_o, cy_o = b_o.center
    image_area = width * height
    return np.array([
        cx_h / width, cy_h / height, b_h.width / width, b_h.height / height,
        cx_o / width, cy_o / height, b_o.width / width, b_o.height / height,
        (cx_o - cx_h) / b_h.width, (cy_o - cy_h) / b_h.height,
        math.log(b_o.width / b_h.width), math.log(b_o.height / b_h.height),
        math.log(b_o.area / b_h.area),
        iou(b_h, b_o),
        b_h.area / image_area, b_o.area / image_area,
        b_h.width / b_h.height, b_o.width / b_o.height,
    ], dtype=np.float64)


@dataclass
class PreparedScene:
    """过滤、NMS、配对之后的场景，供编码器与训练循环复用"""
    scene: Scene
    detections: List[Detection]
    human_index: np.ndarray   # 人节点对应的检测下标
    det_pairs: np.ndarray     # (P, 2) 检测下标对
    pairs: np.ndarray         # (P, 2) (人节点下标, 物节点下标)
    features: np.ndarray      # (n, D)
    labels: np.ndarray        # (n,)
    scores: np.ndarray        # (n,)
    spatial: np.ndarray       # (P, 18)

    @property
    def num_pairs(self) -> int:
        return int(self.pairs.shape[0])


def prepare_scene(
    scene: Scene,
    person_id: int,
    feature_dim: int,
    score_threshold: float = 0.2,
    nms_iou: float = 0.5,
) -> PreparedScene:
    """执行 filter -> nms -> 配对 -> 空间特征"""
    detections = nms(filter_detections(scene.detections, score_threshold), nms_iou)
    for det in detections:
        if det.feature.shape != (feature_dim,):
            raise ShapeError(
                f"场景 {scene.image_id}: 外观特征长度 {det.feature.shape} 与声明的维度 {feature_dim} 不一致"
            )
    det_pairs = make_pairs(detections, person_id)
    human_index = np.array([i for i, d in enumerate(detections) if d.label == person_id], dtype=np.int64)
    node_of = {int(det): node for node, det in enumerate(human_index)}

    pairs = np.array([(node_of[h], o) for h, o in det_pairs], dtype=np.int64).reshape(-1, 2)
    spatial = np.array(
        [spatial_features(detections[h].bbox, detections[o].bbox, scene.width, scene.height)
         for h, o in det_pairs],
        dtype=np.float64,
    ).reshape(-1, SPATIAL_DIM)
    features = np.array([d.feature for d in detections], dtype=np.float64).reshape(-1, feature_dim)

    return PreparedScene(
        scene=scene,
        detections=detections,
        human_index=human_index,
        det_pairs=np.array(det_pairs, dtype=np.int64).reshape(-1, 2),
        pairs=pairs,
        features=features,
        labels=np.array([d.label for d in detections], dtype=np.int64),
        scores=np.array([d.score for d in detections], dtype=np.float64),
        spatial=spatial,
    )
