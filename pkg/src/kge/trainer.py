"""
平移模型单独训练（预训练阶段与规律性检查使用）
"""

from typing import List, Optional

import numpy as np

from .sampling import sample_negatives
from .transh import TransHParams, constrain, margin_loss_and_grads, orthogonality_penalty, UNIT_TOLERANCE
from .vocab import GoldenSet
from ..numkernel import AdamW
from ..utils.errors import TrainingError
from ..utils.logger import get_logger

logger = get_logger("KGETrainer")


def check_unit_normals(params: TransHParams, epoch: int):
    """每个epoch结束后检查法向量约束"""
    deviation = params.max_normal_deviation()
    if deviation > UNIT_TOLERANCE:
        raise TrainingError(
            f"epoch {epoch}: 法向量偏离单位长度 {deviation:.3e}",
            details={"epoch": epoch, "deviation": deviation},
        )


def train_kge(
    params: TransHParams,
    golden: GoldenSet,
    epochs: int,
    rng: np.random.Generator,
    lr: float = 1e-2,
    delta: float = 4.0,
    weight_decay: float = 0.0,
    orthogonality_weight: Optional[float] = None,
) -> List[float]:
    """
    每个epoch对全部正样本各采样一个新负样本，做一步AdamW并施加约束

    Args:
        params: 平移模型参数（原地更新）
        golden: 正样本集合
        epochs: 训练轮数
        rng: 随机数生成器
        lr: 学习率
        delta: 间隔
        weight_decay: 权重衰减
        orthogonality_weight: 正交软约束权重，None表示不启用

    Returns:
        每个epoch的损失
    """
    positives = golden.sorted()
    if not positives:
        raise TrainingError("正样本集合为空，无法训练平移模型")

    optimizer = AdamW(params.params(), lr=lr, weight_decay=weight_decay)
    curve = []
    for epoch in range(1, epochs + 1):
        optimizer.zero_grad()
        negatives = sample_negatives(golden, len(positives), rng, positives)
        loss = margin_loss_and_grads(params, positives, negatives, delta)
        if orthogonality_weight is not None:
            loss += orthogonality_penalty(params, orthogonality_weight)
        optimizer.step()
        constrain(params)
        check_unit_normals(params, epoch)
        curve.append(loss)
        logger.debug(f"KGE epoch {epoch}: L_T={loss:.6f}")

    if curve:
        logger.info(f"平移模型训练完成: {epochs} epochs, 最终 L_T={curve[-1]:.6f}")
    return curve
