"""
AdamW优化器（解耦权重衰减）
"""

from dataclasses import dataclass
from typing import Dict, Iterable, List

import numpy as np

from .layers import Param
from ..utils.errors import NumericError, ShapeError


@dataclass
class AdamWState:
    """单个参数的AdamW状态"""
    first_moment: np.ndarray
    second_moment: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 1e-4

    @classmethod
    def for_param(cls, param: Param, **kwargs) -> "AdamWState":
        return cls(np.zeros_like(param.value), np.zeros_like(param.value), **kwargs)


def adamw_step(param: Param, state: AdamWState, lr: float) -> Param:
    """
    执行一步AdamW更新（原地修改参数值）

    先做衰减 theta <- theta * (1 - lr * wd)，再做偏差修正后的Adam更新

    Args:
        param: 参数（使用其当前梯度）
        state: 该参数的优化器状态
        lr: 学习率

    Returns:
        更新后的参数
    """
    if state.first_moment.shape != param.shape or state.second_moment.shape != param.shape:
        raise ShapeError(f"优化器状态形状与参数 {param.name} 不一致")
    if not np.all(np.isfinite(param.grad)):
        raise NumericError(f"参数 {param.name} 的梯度包含非有限值", details={"param": param.name})

    state.step += 1
    grad = param.grad

    if state.weight_decay != 0.0:
        param.value *= (1.0 - lr * state.weight_decay)

    state.first_moment *= state.beta1
    state.first_moment += (1.0 - state.beta1) * grad
    state.second_moment *= state.beta2
    state.second_moment += (1.0 - state.beta2) * grad * grad

    m_hat = state.first_moment / (1.0 - state.beta1 ** state.step)
    v_hat = state.second_moment / (1.0 - state.beta2 ** state.step)
    param.value -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return param


class AdamW:
    """管理一组参数的AdamW优化器"""

    def __init__(
        self,
        params: Iterable[Param],
        lr: float = 1e-4,
        betas=(0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 1e-4,
    ):
        self.params: List[Param] = list(params)
        self.lr = lr
        self.states: Dict[str, AdamWState] = {
            p.name: AdamWState.for_param(
                p, beta1=betas[0], beta2=betas[1], eps=eps, weight_decay=weight_decay
            )
            for p in self.params
        }

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self):
        for p in self.params:
            adamw_step(p, self.states[p.name], self.lr)
