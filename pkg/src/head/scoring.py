"""
检测先验、分数融合、训练目标分配与总损失
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..graphrep import Detection, GtHoi, iou
from ..numkernel import focal_loss


def pair_prior(s_h, s_o, lam: float):
    """
    p = s_h^λ · s_o^λ

    Args:
        s_h: 人检测置信度（标量或数组）
        s_o: 物检测置信度
        lam: 指数 λ（训练时为1，推理时为2.8）
    """
    s_h = np.asarray(s_h, dtype=np.float64)
    s_o = np.asarray(s_o, dtype=np.float64)
    prior = s_h ** lam * s_o ** lam
    return float(prior) if prior.ndim == 0 else prior


def fuse(p, c) -> np.ndarray:
    """
    v_i = p · c_i；p 为标量时作用于向量 c，为 (P,) 时逐行作用于 (P, N)
    """
    p = np.asarray(p, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if p.ndim == 1 and c.ndim == 2:
        return p[:, None] * c
    return p * c


@dataclass
class PairOutput:
    """一张图像所有样本对的输出"""
    c: np.ndarray       # (P, N) 动作概率
    w_hat: np.ndarray   # (P,) 交互性概率
    p: np.ndarray       # (P,) 检测先验
    v: np.ndarray       # (P, N) 融合后的动作分数

    @property
    def num_pairs(self) -> int:
        return int(self.c.shape[0])


@dataclass
class Targets:
    """V: (P, N) 动作标签；W: (P,) 该样本对是否存在交互"""
    V: np.ndarray
    W: np.ndarray


def assign_targets(
    detections: Sequence[Detection],
    det_pairs: np.ndarray,
    ground_truth: Sequence[GtHoi],
    num_verbs: int,
    iou_threshold: float = 0.5,
) -> Targets:
    """
    样本对与标注匹配：物体类别相同，且人框、物框IoU均大于阈值时，
    标注中的动作记为正样本

    Args:
        detections: NMS后的检测
        det_pairs: (P, 2) 检测下标对
        ground_truth: 场景标注
        num_verbs: 动作类别数 N
        iou_threshold: IoU阈值

    Returns:
        Targets
    """
    num_pairs = len(det_pairs)
    V = np.zeros((num_pairs, num_verbs))
    for j, (h, o) in enumerate(det_pairs):
        human, obj = detections[h], detections[o]
        for hoi in ground_truth:
            if hoi.label != obj.label:
                continue
            if iou(human.bbox, hoi.human) > iou_threshold and iou(obj.bbox, hoi.obj) > iou_threshold:
                for verb in hoi.verbs:
                    V[j, verb] = 1.0
    W = (V.sum(axis=1) > 0).astype(np.float64)
    return Targets(V=V, W=W)


def total_loss(l_t: float, l_w: float, l_v: float) -> float:
    """L = L_T + L_W + L_V"""
    return l_t + l_w + l_v


def head_losses(output: PairOutput, targets: Targets, beta: float = 0.5, gamma: float = 0.2) -> Tuple[float, float, np.ndarray, np.ndarray]:
    """
    L_W = Σ focal(ŵ, W)，L_V = Σ focal(v, V)（v = p·c）

    Returns:
        (L_W, L_V, dL/dc, dL/dŵ)
    """
    loss_w, grad_w = focal_loss(output.w_hat, targets.W, beta, gamma)
    loss_v, grad_v = focal_loss(output.v, targets.V, beta, gamma)
    d_c = grad_v * output.p[:, None]
    return float(loss_w.sum()), float(loss_v.sum()), d_c, grad_w
