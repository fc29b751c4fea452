"""
推理：对单张图像输出按分数排序的 (人框, 物框, 物体类别, 动作, 分数)
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .model import HoiModel
from ..graphrep import BBox, Scene, prepare_scene
from ..kge import Vocab
from ..utils.errors import CompatibilityError

DEFAULT_SCORE_FLOOR = 1e-4


@dataclass(frozen=True)
class Prediction:
    """一条HOI预测"""
    human: BBox
    obj: BBox
    label: int
    verb: int
    score: float

    def to_dict(self, vocab: Vocab) -> dict:
        return {
            "human": self.human.to_list(),
            "object": self.obj.to_list(),
            "label": vocab.objects[self.label],
            "verb": vocab.verbs[self.verb],
            "score": self.score,
        }


def check_compatible(model: HoiModel, scene: Scene, vocab: Optional[Vocab] = None):
    """检查点词表、特征维度与场景是否一致"""
    if vocab is not None and vocab != model.vocab:
        raise CompatibilityError(
            "检查点词表与数据集词表不一致",
            details={"checkpoint": model.vocab.to_dict(), "dataset": vocab.to_dict()},
        )
    for det in scene.detections:
        if not 0 <= det.label < model.vocab.num_objects:
            raise CompatibilityError(f"场景 {scene.image_id}: 物体类别 {det.label} 不在检查点词表中")
        if det.feature.shape != (model.feature_dim,):
            raise CompatibilityError(
                f"场景 {scene.image_id}: 特征维度 {det.feature.shape} 与检查点 ({model.feature_dim},) 不一致"
            )


def infer(
    scene: Scene,
    model: HoiModel,
    lam: float = 2.8,
    top_k: int = 100,
    score_threshold: float = 0.2,
    nms_iou: float = 0.5,
    score_floor: float = DEFAULT_SCORE_FLOOR,
    vocab: Optional[Vocab] = None,
    allowed: Optional[np.ndarray] = None,
) -> List[Prediction]:
    """
    过滤 -> NMS -> 配对 -> 编码 -> 消息传递 -> 打分 -> 先验(λ) -> 融合

    Args:
        scene: 输入场景
        model: 训练好的模型
        lam: 推理时的先验指数
        top_k: 最多返回条数
        score_threshold: 检测置信度阈值
        nms_iou: NMS阈值
        score_floor: 低于该分数的预测丢弃
        vocab: 数据集词表，给出时与检查点词表比对
        allowed: (M, N) 布尔矩阵，给出时只输出其中为 True 的 (物体类别, 动作)

    Returns:
        按分数降序的预测列表
    """
    check_compatible(model, scene, vocab)
    if allowed is not None and allowed.shape != (model.vocab.num_objects, model.vocab.num_verbs):
        raise CompatibilityError(
            f"类别掩码形状 {allowed.shape} 应为 ({model.vocab.num_objects}, {model.vocab.num_verbs})"
        )
    prepared = prepare_scene(scene, model.vocab.person_id, model.feature_dim, score_threshold, nms_iou)
    output, _ = model.forward(prepared, lam)
    if output.num_pairs == 0:
        return []

    keep = output.v >= score_floor
    if allowed is not None:
        labels = np.array([prepared.detections[o].label for _, o in prepared.det_pairs], dtype=int)
        keep &= allowed[labels]
    pair_idx, verb_idx = np.nonzero(keep)
    scores = output.v[pair_idx, verb_idx]
    # 分数降序，同分按 (样本对, 动作) 升序
    order = np.lexsort((verb_idx, pair_idx, -scores))[:top_k]

    predictions = []
    for i in order:
        h, o = prepared.det_pairs[pair_idx[i]]
        obj = prepared.detections[o]
        predictions.append(Prediction(
            human=prepared.detections[h].bbox,
            obj=obj.bbox,
            label=int(obj.label),
            verb=int(verb_idx[i]),
            score=float(scores[i]),
        ))
    return predictions
