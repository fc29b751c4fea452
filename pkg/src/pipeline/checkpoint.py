"""
检查点读写
JSON格式，矩阵以嵌套数组保存；format_version 不匹配时拒绝加载
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

from .run_config import RunConfig, parse_run_config
from ..head import HoiModel
from ..kge import Vocab
from ..utils.errors import CheckpointError, HoiValidationError
from ..utils.helpers import dump_json, write_text
from ..utils.logger import get_logger

logger = get_logger("Checkpoint")

CHECKPOINT_FORMAT_VERSION = 1


@dataclass
class TrainingMetadata:
    """训练元数据：已完成的epoch与逐epoch损失"""
    epoch: int = 0
    loss_curve: List[Dict[str, float]] = field(default_factory=list)


@dataclass
class Checkpoint:
    vocab: Vocab
    config: RunConfig
    model: HoiModel
    metadata: TrainingMetadata = field(default_factory=TrainingMetadata)

    @property
    def feature_dim(self) -> int:
        return self.model.feature_dim

    def to_dict(self) -> dict:
        return {
            "format_version": CHECKPOINT_FORMAT_VERSION,
            "vocab": self.vocab.to_dict(),
            "config": self.config.model_dump(),
            "feature_dim": self.feature_dim,
            "model": self.model.to_dict(),
            "metadata": {"epoch": self.metadata.epoch, "loss_curve": self.metadata.loss_curve},
        }

    @classmethod
    def from_dict(cls, data: dict, source: str = "<dict>") -> "Checkpoint":
        if not isinstance(data, dict):
            raise CheckpointError(f"检查点 {source}: 顶层必须是对象")
        version = data.get("format_version")
        if version != CHECKPOINT_FORMAT_VERSION:
            raise CheckpointError(
                f"检查点 {source}: 格式版本 {version!r} 无法识别，拒绝升级加载（支持版本 {CHECKPOINT_FORMAT_VERSION}）",
                code="unsupported_version",
            )
        try:
            vocab = Vocab.from_dict(data["vocab"])
            config = parse_run_config(data["config"], source)
            model = HoiModel.from_dict(vocab, data["model"])
            meta = data.get("metadata", {})
            metadata = TrainingMetadata(int(meta.get("epoch", 0)), list(meta.get("loss_curve", [])))
        except (KeyError, TypeError, ValueError) as e:
            raise CheckpointError(f"检查点 {source}: 结构无效: {e!r}") from e
        except HoiValidationError as e:
            raise CheckpointError(f"检查点 {source}: {e.message}") from e

        if model.k != config.k or data.get("feature_dim") != model.feature_dim:
            raise CheckpointError(
                f"检查点 {source}: 矩阵形状与配置不一致 (k={model.k}, config.k={config.k})"
            )
        return cls(vocab, config, model, metadata)


def save_checkpoint(ckpt: Checkpoint, path: str):
    """写出检查点；save -> load -> save 字节一致"""
    write_text(path, dump_json(ckpt.to_dict()))
    logger.info(f"检查点已保存: {path}")


def load_checkpoint(path: str) -> Checkpoint:
    """
    加载检查点

    Raises:
        CheckpointError: 文件不存在、截断/解析失败或版本不被支持
    """
    file_path = Path(path)
    if not file_path.exists():
        raise CheckpointError(f"检查点文件不存在: {path}")
    try:
        data = json.loads(file_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CheckpointError(f"检查点 {path} 第 {e.lineno} 行解析失败: {e.msg}") from e
    ckpt = Checkpoint.from_dict(data, path)
    logger.info(f"加载检查点 {path}: k={ckpt.model.k}, epoch={ckpt.metadata.epoch}")
    return ckpt
