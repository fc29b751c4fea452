"""
平移嵌入维度消融实验
对每个 k 与每个训练种子训练一次，在测试集上评估
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .dataset import Dataset
from .evaluation import evaluate_checkpoint
from .run_config import RunConfig
from .trainer import train
from ..hoieval import EvalReport, format_rows
from ..utils.logger import get_logger

logger = get_logger("Ablation")

DEFAULT_KS = (0, 30, 50, 70, 100)
DEFAULT_SEEDS = (0, 1, 2, 3, 4)


def _mean(values) -> Optional[float]:
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


@dataclass
class AblationResult:
    """k -> 每个种子的评估结果"""
    seeds: List[int]
    reports: Dict[int, List[EvalReport]] = field(default_factory=dict)

    def mean(self, k: int, split: str) -> Optional[float]:
        return _mean(getattr(r, split) for r in self.reports[k])

    def full_by_seed(self, k: int) -> List[Optional[float]]:
        return [r.full for r in self.reports[k]]

    def wins(self, k: int, baseline: int = 0) -> int:
        """k 的 full mAP 超过 baseline 的种子数"""
        return sum(
            1 for a, b in zip(self.full_by_seed(k), self.full_by_seed(baseline))
            if a is not None and b is not None and a > b
        )

    def to_dict(self) -> dict:
        return {
            "seeds": self.seeds,
            "rows": [
                {
                    "k": k,
                    "full": self.mean(k, "full"),
                    "rare": self.mean(k, "rare"),
                    "non_rare": self.mean(k, "non_rare"),
                    "full_by_seed": self.full_by_seed(k),
                }
                for k in sorted(self.reports)
            ],
        }

    def format_table(self) -> str:
        mean_rows = [(f"k={k}", self.mean(k, "full"), self.mean(k, "rare"), self.mean(k, "non_rare"))
                     for k in sorted(self.reports)]
        text = format_rows(mean_rows, title="embedding")
        seed_lines = []
        for k in sorted(self.reports):
            cells = " ".join("-" if v is None else f"{v * 100:.2f}" for v in self.full_by_seed(k))
            seed_lines.append(f"k={k} full(mAP%) per seed: {cells}")
        return text + "\n".join(seed_lines) + "\n"


def ablate(
    train_data: Dataset,
    test_data: Dataset,
    base: RunConfig,
    ks: Sequence[int] = DEFAULT_KS,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    epochs: Optional[int] = None,
) -> AblationResult:
    """
    Args:
        train_data: 训练集
        test_data: 测试集
        base: 基础配置（k、seed、epochs 被覆盖）
        ks: 嵌入维度列表，0表示去掉平移特征
        seeds: 训练种子
        epochs: 训练轮数，默认取基础配置

    Returns:
        AblationResult
    """
    result = AblationResult(seeds=list(seeds))
    for k in ks:
        result.reports[k] = []
        for seed in seeds:
            update = {"k": k, "seed": seed}
            if epochs is not None:
                update["epochs"] = epochs
            cfg = RunConfig.model_validate({**base.model_dump(), **update})
            ckpt = train(cfg, train_data)
            report, _ = evaluate_checkpoint(ckpt, test_data)
            result.reports[k].append(report)
            logger.info(f"k={k} seed={seed}: full mAP={report.full}")
    return result
