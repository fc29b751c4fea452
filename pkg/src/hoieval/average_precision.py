"""
平均精度（全点插值）
"""

from typing import Optional, Sequence, Tuple

import numpy as np


def voc_ap(rec: np.ndarray, prec: np.ndarray) -> float:
    """
    给定召回率与精度序列计算全点插值AP

    p_interp(r) = max_{r' >= r} p(r')，对召回率积分
    """
    mrec = np.concatenate(([0.0], rec, [1.0]))
    mpre = np.concatenate(([0.0], prec, [0.0]))

    # 精度包络
    for i in range(mpre.size - 1, 0, -1):
        mpre[i - 1] = max(mpre[i - 1], mpre[i])

    # 召回率发生变化的位置
    i = np.where(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[i + 1] - mrec[i]) * mpre[i + 1]))


def average_precision(ranked: Sequence[Tuple[float, bool]], gt_count: int) -> Optional[float]:
    """
    计算单个类别的AP

    Args:
        ranked: 按分数降序排列的 (分数, 是否为TP)
        gt_count: 该类别标注数量

    Returns:
        AP；gt_count 为0且无预测时返回 None（该类别不计入平均）
    """
    if gt_count < 0:
        raise ValueError(f"gt_count 不能为负: {gt_count}")
    if gt_count == 0:
        return None if len(ranked) == 0 else 0.0
    if len(ranked) == 0:
        return 0.0

    tp = np.array([1.0 if hit else 0.0 for _, hit in ranked])
    fp = 1.0 - tp
    tp = np.cumsum(tp)
    fp = np.cumsum(fp)
    rec = tp / gt_count
    prec = tp / (tp + fp)
    return voc_ap(rec, prec)
