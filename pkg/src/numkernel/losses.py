"""
二分类Focal Loss
"""

from typing import Tuple

import numpy as np

# 取对数前的概率截断
PROB_EPS = 1e-7


def focal_loss(y_hat, y, beta: float = 0.5, gamma: float = 0.2) -> Tuple[np.ndarray, np.ndarray]:
    """
    逐元素计算focal loss及其对预测值的导数

    y=1: -beta * (1 - p)^gamma * log(p)
    y=0: -(1 - beta) * p^gamma * log(1 - p)

    Args:
        y_hat: 预测概率（标量或数组），先截断到 [eps, 1-eps]
        y: 0/1 标签，形状与 y_hat 相同
        beta: 正样本权重
        gamma: 聚焦系数

    Returns:
        (逐元素损失, 逐元素导数)；截断区域内导数为0
    """
    y_hat = np.asarray(y_hat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    p = np.clip(y_hat, PROB_EPS, 1.0 - PROB_EPS)
    inside = (y_hat >= PROB_EPS) & (y_hat <= 1.0 - PROB_EPS)

    one_minus = 1.0 - p
    log_p = np.log(p)
    log_q = np.log(one_minus)

    loss_pos = -beta * one_minus ** gamma * log_p
    loss_neg = -(1.0 - beta) * p ** gamma * log_q
    grad_pos = beta * (gamma * one_minus ** (gamma - 1.0) * log_p - one_minus ** gamma / p)
    grad_neg = -(1.0 - beta) * (gamma * p ** (gamma - 1.0) * log_q - p ** gamma / one_minus)

    positive = y > 0.5
    loss = np.where(positive, loss_pos, loss_neg)
    grad = np.where(positive, grad_pos, grad_neg) * inside
    return loss, grad
