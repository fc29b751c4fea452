"""
负样本采样
优先替换关系；某尾实体的全部关系均为正样本时改为替换尾实体
"""

from typing import List, Optional, Sequence

import numpy as np

from .vocab import GoldenSet, Triplet
from ..utils.errors import SamplingError


def sample_negatives(
    golden: GoldenSet,
    count: int,
    rng: np.random.Generator,
    positives: Optional[Sequence[Triplet]] = None,
) -> List[Triplet]:
    """
    采样 count 个不在 golden 中的三元组

    Args:
        golden: 正样本集合
        count: 数量（≥1）
        rng: 随机数生成器
        positives: 待破坏的正样本；第 i 个负样本由 positives[i % len] 破坏得到。
            为空时从 golden 中均匀选取

    Returns:
        负样本列表
    """
    if count < 1:
        raise SamplingError(f"采样数量必须 ≥ 1，实际 {count}")
    if golden.negative_pool_size() <= 0:
        raise SamplingError("负样本池为空：全部 M×N 三元组都是正样本")

    vocab = golden.vocab
    bases = list(positives) if positives else golden.sorted()
    negatives = []
    for i in range(count):
        if positives:
            base = Triplet(*bases[i % len(bases)])
        elif bases:
            base = bases[int(rng.integers(len(bases)))]
        else:
            base = Triplet(vocab.person_id, int(rng.integers(vocab.num_verbs)),
                           int(rng.integers(vocab.num_objects)))
        negatives.append(_corrupt(golden, base, rng))
    return negatives


def _corrupt(golden: GoldenSet, base: Triplet, rng: np.random.Generator) -> Triplet:
    vocab = golden.vocab
    relations = [r for r in range(vocab.num_verbs)
                 if Triplet(base.head, r, base.tail) not in golden]
    if relations:
        return Triplet(base.head, relations[int(rng.integers(len(relations)))], base.tail)

    tails = [t for t in range(vocab.num_objects)
             if Triplet(base.head, base.relation, t) not in golden]
    if tails:
        return Triplet(base.head, base.relation, tails[int(rng.integers(len(tails)))])

    # 该关系在所有尾实体上都是正样本，退回到整个负样本池
    pool = [Triplet(base.head, r, t)
            for r in range(vocab.num_verbs) for t in range(vocab.num_objects)
            if Triplet(base.head, r, t) not in golden]
    return pool[int(rng.integers(len(pool)))]
