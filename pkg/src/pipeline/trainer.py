"""
联合训练循环
L = L_T + L_W + L_V，实体嵌入同时接收平移损失与节点嵌入的梯度
"""

from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .checkpoint import Checkpoint, TrainingMetadata
from .dataset import Dataset
from .run_config import RunConfig
from ..graphrep import prepare_scene
from ..head import HoiModel, assign_targets, total_loss
from ..kge import (
    GoldenSet, Triplet, check_unit_normals, constrain, margin_loss_and_grads, orthogonality_penalty,
    sample_negatives, train_kge,
)
from ..numkernel import AdamW
from ..utils.errors import TrainingError
from ..utils.helpers import chunk_list
from ..utils.logger import get_logger, training_logger

logger = get_logger("Trainer")


@dataclass
class BatchLoss:
    """单个batch的损失分量"""
    epoch: int
    batch: int
    l_t: float
    l_w: float
    l_v: float
    total: float
    pairs: int


def _batch_positives(golden: GoldenSet, scenes) -> List[Triplet]:
    person = golden.vocab.person_id
    found = {Triplet(person, verb, hoi.label) for scene in scenes for hoi in scene.ground_truth for verb in hoi.verbs}
    return sorted(t for t in found if t in golden)


def build_model(config: RunConfig, dataset: Dataset) -> HoiModel:
    return HoiModel.build(
        vocab=dataset.vocab,
        feature_dim=dataset.feature_dim,
        k=config.k,
        node_width=config.node_width,
        edge_width=config.edge_width,
        seed=config.seed,
        appearance_hidden=config.appearance_hidden,
        iterations=config.message_iterations,
        zero_init_head=config.zero_init_head,
    )


def train(
    config: RunConfig,
    dataset: Dataset,
    on_batch: Optional[Callable[[BatchLoss], None]] = None,
) -> Checkpoint:
    """
    训练并返回检查点

    每个batch：构建样本对与嵌入，计算 L_T（负样本数量与batch内正样本相同）、
    L_W、L_V，联合反向传播，AdamW更新，施加平移模型约束

    Args:
        config: 运行配置
        dataset: 训练集
        on_batch: 每个batch结束后的回调

    Returns:
        Checkpoint
    """
    if not dataset.scenes:
        raise TrainingError("训练集为空")

    vocab = dataset.vocab
    model = build_model(config, dataset)
    rng = np.random.default_rng(config.seed + 1)
    golden = dataset.golden
    transh = model.transh
    ortho_weight = config.orthogonality_weight if config.orthogonality_penalty else None

    prepared = [
        prepare_scene(scene, vocab.person_id, dataset.feature_dim, config.score_threshold, config.nms_iou)
        for scene in dataset.scenes
    ]
    targets = [
        assign_targets(p.detections, p.det_pairs, p.scene.ground_truth, vocab.num_verbs, config.target_iou)
        for p in prepared
    ]

    if transh is not None and config.pretrain_kge_epochs > 0 and not config.freeze_kge and len(golden):
        logger.info(f"预训练平移模型 {config.pretrain_kge_epochs} 个epoch")
        train_kge(transh, golden, config.pretrain_kge_epochs, rng, lr=config.kge_lr,
                  delta=config.delta, weight_decay=config.weight_decay, orthogonality_weight=ortho_weight)

    head_opt = AdamW(model.params(), lr=config.learning_rate, weight_decay=config.weight_decay)
    kge_opt = None
    if transh is not None and not config.freeze_kge:
        kge_opt = AdamW(model.kge_params(), lr=config.kge_lr, weight_decay=config.weight_decay)

    logger.info(
        f"开始训练: {len(prepared)} 张图像, k={config.k}, epochs={config.epochs}, batch={config.batch_size}, "
        f"冻结平移模型={config.freeze_kge}"
    )

    curve = []
    for epoch in range(1, config.epochs + 1):
        order = [int(i) for i in rng.permutation(len(prepared))]
        sums = {"l_t": 0.0, "l_w": 0.0, "l_v": 0.0, "total": 0.0}
        epoch_pairs = 0
        batches = chunk_list(order, config.batch_size)

        for batch_index, batch in enumerate(batches, start=1):
            head_opt.zero_grad()
            for p in model.kge_params():
                p.zero_grad()

            weight = 1.0 / len(batch)
            l_w = l_v = 0.0
            pairs = 0
            for i in batch:
                w_i, v_i = model.scene_loss(prepared[i], targets[i], config.lambda_train,
                                            config.beta, config.gamma, weight)
                l_w += w_i * weight
                l_v += v_i * weight
                pairs += prepared[i].num_pairs

            l_t = 0.0
            if transh is not None:
                positives = _batch_positives(golden, (prepared[i].scene for i in batch))
                if positives:
                    negatives = sample_negatives(golden, len(positives), rng, positives)
                    l_t = margin_loss_and_grads(transh, positives, negatives, config.delta)
                if ortho_weight is not None:
                    l_t += orthogonality_penalty(transh, ortho_weight)

            total = total_loss(l_t, l_w, l_v)
            if not np.isfinite(total):
                raise TrainingError(f"epoch {epoch} batch {batch_index}: 损失为非有限值",
                                    details={"epoch": epoch, "batch": batch_index})

            head_opt.step()
            if kge_opt is not None:
                kge_opt.step()
                constrain(transh)

            record = BatchLoss(epoch, batch_index, l_t, l_w, l_v, total, pairs)
            training_logger.log_batch(epoch, batch_index, total)
            if on_batch is not None:
                on_batch(record)

            sums["l_t"] += l_t
            sums["l_w"] += l_w
            sums["l_v"] += l_v
            sums["total"] += total
            epoch_pairs += pairs

        if epoch_pairs == 0:
            raise TrainingError(f"epoch {epoch}: 所有图像都没有人-物样本对", details={"epoch": epoch})
        if transh is not None:
            check_unit_normals(transh, epoch)

        means = {key: value / len(batches) for key, value in sums.items()}
        curve.append({"epoch": epoch, **means})
        training_logger.log_epoch(epoch, config.epochs, means["total"], means["l_t"], means["l_w"],
                                  means["l_v"], epoch_pairs)

    return Checkpoint(vocab, config, model, TrainingMetadata(config.epochs, curve))
