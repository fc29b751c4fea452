"""
超平面投影平移模型（TransH）
实体嵌入、关系超平面法向量与平移向量；打分、间隔排序损失及其解析梯度
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from .vocab import Triplet
from ..numkernel import Param
from ..utils.errors import ConstraintError, DegenerateParameterError, PairingError, VocabError, ShapeError

UNIT_TOLERANCE = 1e-6


@dataclass
class TransHParams:
    """平移模型参数：E (M×k)、法向量 w (N×k)、平移向量 d (N×k)"""
    entities: Param
    normals: Param
    translations: Param

    def __post_init__(self):
        k = self.entities.shape[1]
        if self.normals.shape[1] != k or self.translations.shape != self.normals.shape:
            raise ShapeError(
                f"TransH参数形状不一致: E{self.entities.shape} w{self.normals.shape} d{self.translations.shape}"
            )

    @property
    def k(self) -> int:
        return self.entities.shape[1]

    @property
    def num_entities(self) -> int:
        return self.entities.shape[0]

    @property
    def num_relations(self) -> int:
        return self.normals.shape[0]

    def params(self) -> List[Param]:
        return [self.entities, self.normals, self.translations]

    def max_normal_deviation(self) -> float:
        """max_r |‖w_r‖ - 1|"""
        return float(np.max(np.abs(np.linalg.norm(self.normals.value, axis=1) - 1.0)))

    def to_dict(self) -> Dict:
        return {
            "entities": self.entities.value.tolist(),
            "normals": self.normals.value.tolist(),
            "translations": self.translations.value.tolist(),
        }

    @classmethod
    def from_arrays(cls, entities, normals, translations) -> "TransHParams":
        return cls(
            Param("transh.entities", entities),
            Param("transh.normals", normals),
            Param("transh.translations", translations),
        )

    @classmethod
    def from_dict(cls, data: Dict) -> "TransHParams":
        return cls.from_arrays(data["entities"], data["normals"], data["translations"])


def init_transh(num_entities: int, num_relations: int, k: int, seed: int) -> TransHParams:
    """
    均匀分布 (-6/√k, 6/√k) 初始化，法向量归一化

    Args:
        num_entities: M
        num_relations: N
        k: 嵌入维度
        seed: 随机种子
    """
    if min(num_entities, num_relations, k) < 1:
        raise ShapeError(f"M、N、k 必须 ≥ 1: M={num_entities} N={num_relations} k={k}")
    rng = np.random.default_rng(seed)
    bound = 6.0 / np.sqrt(k)
    entities = rng.uniform(-bound, bound, size=(num_entities, k))
    normals = rng.uniform(-bound, bound, size=(num_relations, k))
    translations = rng.uniform(-bound, bound, size=(num_relations, k))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return TransHParams.from_arrays(entities, normals, translations)


def hyperplane_project(v, w) -> np.ndarray:
    """
    投影到法向量为 w 的超平面: v - (wᵀv) w

    Raises:
        ConstraintError: w 不是单位向量
    """
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if abs(np.linalg.norm(w) - 1.0) > UNIT_TOLERANCE:
        raise ConstraintError(f"法向量必须为单位长度，实际范数 {np.linalg.norm(w):.8f}")
    return v - np.dot(w, v) * w


def _split(triplets: Sequence[Triplet]):
    arr = np.asarray([tuple(t) for t in triplets], dtype=np.int64).reshape(-1, 3)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def _check_ids(params: TransHParams, heads, rels, tails):
    if heads.size and (heads.min() < 0 or tails.min() < 0 or
                       max(heads.max(), tails.max()) >= params.num_entities):
        raise VocabError("三元组实体ID越界")
    if rels.size and (rels.min() < 0 or rels.max() >= params.num_relations):
        raise VocabError("三元组关系ID越界")


def _residuals(params: TransHParams, heads, rels, tails) -> np.ndarray:
    # r = h⊥ + d - t⊥ = h + d - t + (w·(t - h)) w
    h = params.entities.value[heads]
    t = params.entities.value[tails]
    w = params.normals.value[rels]
    d = params.translations.value[rels]
    diff = t - h
    return h + d - t + np.sum(w * diff, axis=1, keepdims=True) * w


def score_triplets(params: TransHParams, triplets: Sequence[Triplet]) -> np.ndarray:
    """批量打分，距离语义：越小越可信"""
    heads, rels, tails = _split(triplets)
    _check_ids(params, heads, rels, tails)
    r = _residuals(params, heads, rels, tails)
    return np.sum(r * r, axis=1)


def transh_score(params: TransHParams, triplet: Triplet) -> float:
    """‖(h - wᵀh w) + d - (t - wᵀt w)‖²"""
    return float(score_triplets(params, [triplet])[0])


def score_all_relations(params: TransHParams, head: int, tail: int) -> np.ndarray:
    """同一 (head, tail) 在全部 N 个关系下的分数"""
    return score_triplets(params, [Triplet(head, r, tail) for r in range(params.num_relations)])


def golden_rank(params: TransHParams, triplet: Triplet) -> int:
    """标注关系在全部候选关系中的名次（1表示严格最小）"""
    scores = score_all_relations(params, triplet.head, triplet.tail)
    target = scores[triplet.relation]
    others = np.delete(scores, triplet.relation)
    return 1 + int(np.sum(others <= target))


def _accumulate_score_grads(params: TransHParams, heads, rels, tails, coef: np.ndarray):
    # 对 coef_i * s_i 求导并累加
    h = params.entities.value[heads]
    t = params.entities.value[tails]
    w = params.normals.value[rels]
    diff = t - h
    g = 2.0 * _residuals(params, heads, rels, tails) * coef[:, None]
    gw = np.sum(g * w, axis=1, keepdims=True)
    wu = np.sum(w * diff, axis=1, keepdims=True)

    d_head = g - gw * w
    np.add.at(params.entities.grad, heads, d_head)
    np.add.at(params.entities.grad, tails, -d_head)
    np.add.at(params.normals.grad, rels, gw * diff + wu * g)
    np.add.at(params.translations.grad, rels, g)


def margin_loss_and_grads(
    params: TransHParams,
    positives: Sequence[Triplet],
    negatives: Sequence[Triplet],
    delta: float = 4.0,
) -> float:
    """
    间隔排序损失 Σ max(0, s(pos) + δ - s(neg))，正负样本一一配对

    解析梯度累加到 params 各参数的 grad 中（仅对未被截断的样本对）

    Returns:
        损失值
    """
    if len(positives) != len(negatives):
        raise PairingError(f"正负三元组数量不一致: {len(positives)} vs {len(negatives)}")
    if not positives:
        raise PairingError("正负三元组不能为空")

    ph, pr, pt = _split(positives)
    nh, nr, nt = _split(negatives)
    _check_ids(params, ph, pr, pt)
    _check_ids(params, nh, nr, nt)

    s_pos = np.sum(_residuals(params, ph, pr, pt) ** 2, axis=1)
    s_neg = np.sum(_residuals(params, nh, nr, nt) ** 2, axis=1)
    hinge = s_pos + delta - s_neg
    active = hinge > 0.0
    if np.any(active):
        _accumulate_score_grads(params, ph[active], pr[active], pt[active], np.ones(active.sum()))
        _accumulate_score_grads(params, nh[active], nr[active], nt[active], -np.ones(active.sum()))
    return float(np.sum(np.maximum(hinge, 0.0)))


def orthogonality_penalty(params: TransHParams, weight: float) -> float:
    """软约束 weight * Σ_r (w_r·d_r)²，梯度累加到 w 与 d"""
    w = params.normals.value
    d = params.translations.value
    dots = np.sum(w * d, axis=1, keepdims=True)
    params.normals.grad += 2.0 * weight * dots * d
    params.translations.grad += 2.0 * weight * dots * w
    return float(weight * np.sum(dots ** 2))


def constrain(params: TransHParams) -> TransHParams:
    """
    法向量归一化为单位长度；范数大于1的实体向量缩放到单位球面
    """
    norms = np.linalg.norm(params.normals.value, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms[:, 0] == 0.0)[0])
        raise DegenerateParameterError(f"关系 {bad} 的法向量范数为0", details={"relation": bad})
    params.normals.value /= norms

    ent_norms = np.linalg.norm(params.entities.value, axis=1, keepdims=True)
    params.entities.value /= np.maximum(ent_norms, 1.0)
    return params
