"""
训练/推理运行配置
从JSON文件加载，未知字段拒绝；环境变量 TMHOI_SEED 覆盖 seed
"""

import json
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..utils.config import config
from ..utils.errors import ConfigError
from ..utils.logger import get_logger

logger = get_logger("RunConfig")


class RunConfig(BaseModel):
    """运行配置"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    # 平移模型
    k: int = Field(50, ge=0, le=1024)
    delta: float = Field(4.0, gt=0.0)
    orthogonality_penalty: bool = False
    orthogonality_weight: float = Field(0.01, ge=0.0)
    freeze_kge: bool = False
    pretrain_kge_epochs: int = Field(0, ge=0)

    # 损失与先验
    beta: float = Field(0.5, gt=0.0, lt=1.0)
    gamma: float = Field(0.2, ge=0.0)
    lambda_train: float = Field(1.0, gt=0.0)
    lambda_infer: float = Field(2.8, gt=0.0)

    # 检测预处理
    nms_iou: float = Field(0.5, gt=0.0, le=1.0)
    score_threshold: float = Field(0.2, ge=0.0, le=1.0)
    target_iou: float = Field(0.5, gt=0.0, lt=1.0)

    # 网络结构
    node_width: int = Field(64, ge=1)
    edge_width: int = Field(64, ge=1)
    appearance_hidden: Optional[int] = Field(None, ge=1)
    message_iterations: int = Field(1, ge=0)
    zero_init_head: bool = False

    # 优化
    epochs: int = Field(12, ge=1)
    batch_size: int = Field(16, ge=1)
    learning_rate: float = Field(1e-3, gt=0.0)
    kge_learning_rate: Optional[float] = Field(None, gt=0.0)
    weight_decay: float = Field(1e-4, ge=0.0)
    seed: int = Field(0, ge=0)

    # 推理
    top_k: int = Field(100, ge=1)
    score_floor: float = Field(1e-4, ge=0.0, le=1.0)

    @property
    def kge_lr(self) -> float:
        return self.kge_learning_rate if self.kge_learning_rate is not None else self.learning_rate

    def with_env_overrides(self) -> "RunConfig":
        """应用 TMHOI_SEED 覆盖"""
        try:
            seed = config.seed_override()
        except ValueError as e:
            raise ConfigError(f"{config.SEED_ENV} 必须是整数") from e
        if seed is None:
            return self
        logger.info(f"使用环境变量 {config.SEED_ENV} 覆盖随机种子: {seed}")
        return self.model_copy(update={"seed": seed})


def parse_run_config(data: dict, source: str = "<dict>") -> RunConfig:
    """校验配置字典"""
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"运行配置 {source} 无效: {problems}", details={"errors": e.errors()}) from e


def load_run_config(path: str) -> RunConfig:
    """
    从JSON文件加载运行配置

    Args:
        path: 配置文件路径

    Returns:
        应用环境变量覆盖后的 RunConfig
    """
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigError(f"配置文件不存在: {path}")
    try:
        data = json.loads(file_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"配置文件 {path} 第 {e.lineno} 行解析失败: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"配置文件 {path} 顶层必须是对象")
    return parse_run_config(data, path).with_env_overrides()
