"""
评估与预测命令的主体
"""

from typing import Dict, List, Optional, Tuple

import numpy as np

from .checkpoint import Checkpoint
from .dataset import Dataset
from ..head import Prediction, infer
from ..hoieval import EvalReport, class_universe, evaluate, format_table, universe_mask
from ..utils.errors import CompatibilityError
from ..utils.helpers import dump_json, write_text
from ..utils.logger import eval_logger, get_logger

logger = get_logger("Evaluation")


def check_vocab(ckpt: Checkpoint, dataset: Dataset):
    if ckpt.vocab != dataset.vocab:
        raise CompatibilityError(
            "检查点词表与数据集词表不一致",
            details={"checkpoint": ckpt.vocab.to_dict(), "dataset": dataset.vocab.to_dict()},
        )
    if ckpt.feature_dim != dataset.feature_dim:
        raise CompatibilityError(f"特征维度不一致: 检查点 {ckpt.feature_dim}, 数据集 {dataset.feature_dim}")


def predict_scenes(
    ckpt: Checkpoint,
    dataset: Dataset,
    top_k: Optional[int] = None,
    allowed: Optional[np.ndarray] = None,
) -> Dict[str, List[Prediction]]:
    """
    对数据集中每张图像推理

    Args:
        ckpt: 检查点
        dataset: 数据集
        top_k: 每张图像最多保留的预测数，默认取配置值
        allowed: (M, N) 布尔类别掩码，给出时只输出其中的HOI类别

    Returns:
        图像ID -> 预测列表
    """
    check_vocab(ckpt, dataset)
    cfg = ckpt.config
    k = top_k if top_k is not None else cfg.top_k
    return {
        scene.image_id: infer(
            scene, ckpt.model, lam=cfg.lambda_infer, top_k=k, score_threshold=cfg.score_threshold,
            nms_iou=cfg.nms_iou, score_floor=cfg.score_floor, vocab=dataset.vocab, allowed=allowed,
        )
        for scene in dataset.scenes
    }


def evaluate_checkpoint(ckpt: Checkpoint, dataset: Dataset) -> Tuple[EvalReport, Dict[str, List[Prediction]]]:
    """在测试集上推理并计算mAP；推理只输出评估类别全集内的HOI类别"""
    check_vocab(ckpt, dataset)
    allowed = universe_mask(class_universe(dataset.splits, dataset.ground_truth), dataset.vocab)
    predictions = predict_scenes(ckpt, dataset, allowed=allowed)
    report = evaluate(predictions, dataset.ground_truth, dataset.splits, dataset.vocab)
    eval_logger.log_report(report.full, report.rare, report.non_rare, report.num_scored)
    return report, predictions


def report_payload(report: EvalReport, ckpt: Checkpoint, dataset: Dataset) -> dict:
    """报告内容，附带所用的运行配置"""
    return {
        "config": ckpt.config.model_dump(),
        "num_scenes": len(dataset.scenes),
        **report.to_dict(dataset.vocab),
    }


def write_report(path: str, report: EvalReport, ckpt: Checkpoint, dataset: Dataset) -> str:
    """
    写出JSON报告与同名 .txt 表格

    Returns:
        表格文本
    """
    table = format_table(report)
    write_text(path, dump_json(report_payload(report, ckpt, dataset)))
    write_text(f"{path}.txt", table)
    logger.info(f"评估报告已保存: {path}")
    return table


def predictions_payload(predictions: Dict[str, List[Prediction]], dataset: Dataset) -> dict:
    return {
        image_id: [p.to_dict(dataset.vocab) for p in preds]
        for image_id, preds in predictions.items()
    }
