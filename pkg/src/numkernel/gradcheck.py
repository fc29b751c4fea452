"""
有限差分梯度校验
"""

from typing import Callable, Sequence

import numpy as np

from .layers import Param

# 相对误差分母下限，低于该量级的梯度按绝对误差比较
RELATIVE_FLOOR = 1e-4


def relative_error(analytic: float, numeric: float, floor: float = RELATIVE_FLOOR) -> float:
    """|a - n| / max(|a|, |n|, floor)"""
    denom = max(abs(analytic), abs(numeric), floor)
    return abs(analytic - numeric) / denom


def grad_check(loss_fn: Callable[[], float], params: Sequence[Param], eps: float = 1e-5) -> float:
    """
    比较解析梯度与中心差分 (f(θ+eps) - f(θ-eps)) / (2 eps)

    Args:
        loss_fn: 无参函数，计算损失并把解析梯度累加到 params 的 grad 中
        params: 参与校验的参数
        eps: 差分步长

    Returns:
        所有坐标上的最大相对误差
    """
    for p in params:
        p.zero_grad()
    loss_fn()
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, grad in zip(params, analytic):
        for idx in np.ndindex(p.value.shape):
            original = p.value[idx]
            p.value[idx] = original + eps
            f_plus = float(loss_fn())
            p.value[idx] = original - eps
            f_minus = float(loss_fn())
            p.value[idx] = original
            numeric = (f_plus - f_minus) / (2.0 * eps)
            worst = max(worst, relative_error(float(grad[idx]), numeric))

    for p in params:
        p.zero_grad()
    return worst
