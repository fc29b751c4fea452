"""
合成世界：词表、动作-物体先验、每个动作的空间规则、类别外观中心
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..graphrep import BBox
from ..graphrep.boxes import intersection_area
from ..kge import Vocab
from ..utils.errors import ConfigError
from ..utils.logger import get_logger

logger = get_logger("SynthWorld")

# 外观只能部分区分类别，类别信息需要由检测标签补充
DEFAULT_APPEARANCE_NOISE = 4.0

OBJECT_NAMES = (
    "horse", "bicycle", "cup", "book", "umbrella", "kite", "dog", "surfboard", "laptop",
    "skateboard", "bottle", "chair", "table", "frisbee", "boat", "sheep", "pizza", "phone",
)
VERB_NAMES = (
    "ride", "hold", "read", "carry", "feed", "fly", "throw", "sit_on", "look_at", "push",
    "drink_with", "eat", "type_on", "walk", "kick", "hug", "wave", "catch", "pet", "open",
)


class SpatialKind(str, Enum):
    """动作的空间规则类型"""
    OVERLAP = "overlap"
    NEAR = "near"
    FAR = "far"
    ANY = "any"


@dataclass(frozen=True)
class SpatialRule:
    """
    距离以人框对角线为单位，按两框中心距离计算
    OVERLAP: 两框相交；NEAR: 距离 ≤ max_distance；FAR: 距离 ≥ min_distance
    """
    kind: SpatialKind
    min_distance: float = 1.2
    max_distance: float = 1.0

    def satisfied(self, human: BBox, obj: BBox) -> bool:
        if self.kind == SpatialKind.OVERLAP:
            return intersection_area(human, obj) > 0.0
        distance = center_distance(human, obj) / human.diagonal
        if self.kind == SpatialKind.NEAR:
            return distance <= self.max_distance
        if self.kind == SpatialKind.FAR:
            return distance >= self.min_distance
        return True


def center_distance(a: BBox, b: BBox) -> float:
    (ax, ay), (bx, by) = a.center, b.center
    return math.hypot(ax - bx, ay - by)


@dataclass(frozen=True)
class SceneLayout:
    """场景尺寸分布参数"""
    width: float = 640.0
    height: float = 480.0
    persons: Tuple[int, int] = (1, 3)
    objects: Tuple[int, int] = (1, 4)
    person_width: Tuple[float, float] = (40.0, 100.0)
    person_height: Tuple[float, float] = (80.0, 160.0)
    object_size: Tuple[float, float] = (30.0, 120.0)
    interaction_rate: float = 0.85
    second_verb_rate: float = 0.3


@dataclass
class WorldSpec:
    """合成世界"""
    vocab: Vocab
    prior: np.ndarray                 # (M, N) 行随机矩阵
    rules: List[SpatialRule]          # 每个动作一条
    centers: np.ndarray               # (M, D) 类别外观中心
    appearance_noise: float = DEFAULT_APPEARANCE_NOISE
    layout: SceneLayout = field(default_factory=SceneLayout)

    def __post_init__(self):
        self.prior = np.asarray(self.prior, dtype=np.float64)
        self.centers = np.asarray(self.centers, dtype=np.float64)
        m, n = self.vocab.num_objects, self.vocab.num_verbs
        if self.prior.shape != (m, n):
            raise ConfigError(f"先验矩阵形状 {self.prior.shape} 应为 ({m}, {n})")
        if not np.allclose(self.prior.sum(axis=1), 1.0):
            raise ConfigError("先验矩阵每行之和必须为1")
        if len(self.rules) != n:
            raise ConfigError(f"空间规则数量 {len(self.rules)} 应为 {n}")
        if self.centers.shape[0] != m:
            raise ConfigError(f"外观中心数量 {self.centers.shape[0]} 应为 {m}")
        if self.appearance_noise < 0:
            raise ConfigError(f"外观噪声标准差不能为负: {self.appearance_noise}")

    @property
    def feature_dim(self) -> int:
        return int(self.centers.shape[1])

    def support(self, label: int) -> List[int]:
        return [int(v) for v in np.flatnonzero(self.prior[label] > 0)]

    @classmethod
    def build(
        cls,
        vocab: Vocab,
        prior,
        rules: Sequence[SpatialRule],
        seed: int = 0,
        feature_dim: int = 32,
        appearance_noise: float = DEFAULT_APPEARANCE_NOISE,
        layout: Optional[SceneLayout] = None,
    ) -> "WorldSpec":
        """由给定先验与规则构建世界，外观中心按种子生成"""
        rng = np.random.default_rng(seed)
        centers = rng.normal(0.0, 1.0, size=(vocab.num_objects, feature_dim))
        return cls(vocab, prior, list(rules), centers, appearance_noise, layout or SceneLayout())

    def to_dict(self) -> Dict:
        return {
            "vocab": self.vocab.to_dict(),
            "prior": self.prior.tolist(),
            "rules": [rule.kind.value for rule in self.rules],
        }


def _names(base: Sequence[str], count: int, prefix: str) -> List[str]:
    return [base[i] if i < len(base) else f"{prefix}_{i}" for i in range(count)]


def support_size(num_verbs: int, num_objects: int, sparsity: float) -> int:
    """
    每个物体类别支持的动作数

    取 ⌈s·N⌉，但不少于 ⌈N/M⌉：轮转分配下 M 个类别的支持集才能覆盖全部 N 个动作。
    s ≥ 1/M 时下限不起作用（如 M=12, N=16, s=0.25 得 4）；s 过小时结果会大于 ⌈s·N⌉。
    最终不超过 N。

    Args:
        num_verbs: 动作数 N
        num_objects: 物体类别数 M
        sparsity: 支持比例 s

    Returns:
        int: 每类支持的动作数
    """
    return min(num_verbs, max(math.ceil(sparsity * num_verbs), math.ceil(num_verbs / num_objects)))


def generate_world(
    seed: int,
    num_objects: int = 12,
    num_verbs: int = 16,
    sparsity: float = 0.25,
    feature_dim: int = 32,
    appearance_noise: float = DEFAULT_APPEARANCE_NOISE,
) -> WorldSpec:
    """
    生成合成世界

    Args:
        seed: 世界种子
        num_objects: 物体类别数 M（含person）
        num_verbs: 动作数 N
        sparsity: 每个类别支持的动作比例
        feature_dim: 外观特征维度 D
        appearance_noise: 外观噪声标准差

    Returns:
        WorldSpec
    """
    if num_objects < 2 or num_verbs < 2:
        raise ConfigError(f"需要 M ≥ 2 且 N ≥ 2，实际 M={num_objects}, N={num_verbs}")
    if not 0.0 < sparsity <= 1.0:
        raise ConfigError(f"sparsity 必须在 (0, 1] 之间: {sparsity}")

    rng = np.random.default_rng(seed)
    vocab = Vocab(
        objects=tuple(["person"] + _names(OBJECT_NAMES, num_objects - 1, "object")),
        verbs=tuple(_names(VERB_NAMES, num_verbs, "verb")),
    )

    size = support_size(num_verbs, num_objects, sparsity)
    order = rng.permutation(num_verbs)
    # Zipf式偏斜：支持集中第 r 个动作权重 1/(r+1)
    weights = 1.0 / np.arange(1, size + 1)
    weights /= weights.sum()

    prior = np.zeros((num_objects, num_verbs))
    for label in range(num_objects):
        # 轮转分配，使全部动作被覆盖
        verbs = [int(order[(label * size + j) % num_verbs]) for j in range(size)]
        prior[label, verbs] = weights

    kinds = list(SpatialKind)
    rules = [SpatialRule(kinds[int(rng.integers(len(kinds)))]) for _ in range(num_verbs)]
    centers = rng.normal(0.0, 1.0, size=(num_objects, feature_dim))

    world = WorldSpec(vocab, prior, rules, centers, appearance_noise)
    logger.info(f"生成合成世界: seed={seed}, M={num_objects}, N={num_verbs}, 每类支持 {size} 个动作")
    return world
