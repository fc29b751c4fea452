"""
稠密层模块
矩阵校验、可训练参数、激活函数、全连接层与多层感知机，
前向时记录缓存，反向时按链式法则累加梯度
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..utils.errors import ConfigError, ShapeError, NumericError

# 项目内统一使用的矩阵类型
Matrix = np.ndarray


def as_matrix(data, name: str = "matrix") -> Matrix:
    """
    转换为float64数组并检查数值有限

    Args:
        data: 任意可转换为数组的数据
        name: 用于错误信息的名称

    Returns:
        float64 数组（拷贝）
    """
    array = np.array(data, dtype=np.float64)
    if not np.all(np.isfinite(array)):
        raise NumericError(f"{name} 包含非有限数值", details={"name": name})
    return array


class Activation(str, Enum):
    """激活函数类型"""
    NONE = "none"
    RECTIFIER = "rectifier"
    LOGISTIC = "logistic"


def _logistic(x: np.ndarray) -> np.ndarray:
    # 分段计算避免 exp 溢出
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def activation_apply(kind: Activation, x) -> np.ndarray:
    """
    逐元素激活

    Args:
        kind: 激活类型
        x: 输入

    Returns:
        激活后的数组
    """
    x = np.asarray(x, dtype=np.float64)
    kind = Activation(kind)
    if kind == Activation.RECTIFIER:
        return np.maximum(x, 0.0)
    if kind == Activation.LOGISTIC:
        return _logistic(x)
    return x.copy()


def activation_backward(kind: Activation, y: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """由激活输出 y 与上游梯度 dy 计算对激活输入的梯度"""
    if kind == Activation.RECTIFIER:
        return dy * (y > 0.0)
    if kind == Activation.LOGISTIC:
        return dy * y * (1.0 - y)
    return dy


@dataclass
class Param:
    """可训练参数：取值与同形状的梯度"""
    name: str
    value: Matrix
    grad: Matrix = field(init=False)

    def __post_init__(self):
        self.value = as_matrix(self.value, self.name)
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    def zero_grad(self):
        """梯度清零"""
        self.grad.fill(0.0)


@dataclass
class DenseCache:
    """单层前向缓存"""
    x: np.ndarray
    y: np.ndarray
    squeeze: bool


class DenseLayer:
    """全连接层 y = activation(Wx + b)"""

    def __init__(self, name: str, weights, bias, activation: Activation = Activation.NONE):
        self.name = name
        self.weight = Param(f"{name}.weight", weights)
        self.bias = Param(f"{name}.bias", bias)
        self.activation = Activation(activation)

        if self.weight.value.ndim != 2:
            raise ShapeError(f"{name}: 权重必须是二维矩阵，实际维度 {self.weight.value.ndim}")
        if self.bias.value.shape != (self.weight.value.shape[0],):
            raise ShapeError(
                f"{name}: 偏置长度 {self.bias.value.shape} 与权重行数 {self.weight.value.shape[0]} 不一致"
            )

    @classmethod
    def create(
        cls,
        name: str,
        in_features: int,
        out_features: int,
        activation: Activation,
        rng: Optional[np.random.Generator] = None,
        zero: bool = False,
    ) -> "DenseLayer":
        """
        按形状创建全连接层

        Args:
            name: 层名称（参数名前缀）
            in_features: 输入宽度
            out_features: 输出宽度
            activation: 激活类型
            rng: 随机数生成器（zero为False时必需）
            zero: 是否全零初始化
        """
        if zero:
            weights = np.zeros((out_features, in_features))
        elif rng is None:
            raise ConfigError(f"层 {name}: 随机初始化需要提供 rng，或设置 zero=True")
        else:
            bound = 1.0 / np.sqrt(max(in_features, 1))
            weights = rng.uniform(-bound, bound, size=(out_features, in_features))
        return cls(name, weights, np.zeros(out_features), activation)

    @property
    def in_features(self) -> int:
        return self.weight.value.shape[1]

    @property
    def out_features(self) -> int:
        return self.weight.value.shape[0]

    def params(self) -> List[Param]:
        return [self.weight, self.bias]

    def forward(self, x) -> Tuple[np.ndarray, DenseCache]:
        """
        前向计算；x 可以是向量或按行排列的矩阵

        Returns:
            (输出, 缓存)
        """
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        x2 = np.atleast_2d(x)
        if x2.shape[1] != self.in_features:
            raise ShapeError(
                f"{self.name}: 输入宽度 {x2.shape[1]} 与层输入宽度 {self.in_features} 不一致"
            )
        y = activation_apply(self.activation, x2 @ self.weight.value.T + self.bias.value)
        cache = DenseCache(x=x2, y=y, squeeze=squeeze)
        return (y[0] if squeeze else y), cache

    def backward(self, cache: DenseCache, dy) -> np.ndarray:
        """
        反向传播：累加权重与偏置梯度，返回对输入的梯度
        """
        dy2 = np.atleast_2d(np.asarray(dy, dtype=np.float64))
        dz = activation_backward(self.activation, cache.y, dy2)
        self.weight.grad += dz.T @ cache.x
        self.bias.grad += dz.sum(axis=0)
        dx = dz @ self.weight.value
        return dx[0] if cache.squeeze else dx

    def to_dict(self) -> dict:
        return {
            "weights": self.weight.value.tolist(),
            "bias": self.bias.value.tolist(),
            "activation": self.activation.value,
        }

    @classmethod
    def from_dict(cls, name: str, data: dict) -> "DenseLayer":
        return cls(name, data["weights"], data["bias"], Activation(data["activation"]))


def dense_apply(layer: DenseLayer, x) -> np.ndarray:
    """计算 activation(Wx + b)"""
    y, _ = layer.forward(x)
    return y


class DenseStack:
    """多层感知机：层间使用ReLU，最后一层激活可配置"""

    def __init__(self, name: str, layers: Sequence[DenseLayer]):
        if not layers:
            raise ShapeError(f"{name}: 至少需要一层")
        for prev, nxt in zip(layers, layers[1:]):
            if prev.out_features != nxt.in_features:
                raise ShapeError(
                    f"{name}: 层宽度不连续 {prev.out_features} -> {nxt.in_features}"
                )
        self.name = name
        self.layers = list(layers)

    @classmethod
    def create(
        cls,
        name: str,
        sizes: Sequence[int],
        rng: Optional[np.random.Generator] = None,
        final_activation: Activation = Activation.NONE,
        zero: bool = False,
    ) -> "DenseStack":
        """
        按宽度序列创建，如 sizes=(18, 64, 64, 64) 得到三层

        Args:
            name: 名称
            sizes: 各层宽度（含输入宽度）
            rng: 随机数生成器（zero为False时必需）
            final_activation: 最后一层激活
            zero: 是否全零初始化
        """
        layers = []
        count = len(sizes) - 1
        for i in range(count):
            activation = final_activation if i == count - 1 else Activation.RECTIFIER
            layers.append(
                DenseLayer.create(f"{name}.{i}", sizes[i], sizes[i + 1], activation, rng, zero)
            )
        return cls(name, layers)

    @property
    def in_features(self) -> int:
        return self.layers[0].in_features

    @property
    def out_features(self) -> int:
        return self.layers[-1].out_features

    def params(self) -> List[Param]:
        return [p for layer in self.layers for p in layer.params()]

    def forward(self, x) -> Tuple[np.ndarray, List[DenseCache]]:
        caches = []
        out = x
        for layer in self.layers:
            out, cache = layer.forward(out)
            caches.append(cache)
        return out, caches

    def backward(self, caches: List[DenseCache], dy) -> np.ndarray:
        grad = dy
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            grad = layer.backward(cache, grad)
        return grad

    def to_dict(self) -> dict:
        return {"layers": [layer.to_dict() for layer in self.layers]}

    @classmethod
    def from_dict(cls, name: str, data: dict) -> "DenseStack":
        return cls(name, [DenseLayer.from_dict(f"{name}.{i}", d) for i, d in enumerate(data["layers"])])
