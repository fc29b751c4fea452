"""
HOI检测评估
Default设定：跨全部测试图像汇总每个HOI类别的预测，计算AP与 Full/Rare/Non-Rare mAP
"""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np

from .average_precision import average_precision
from ..graphrep import GtHoi, iou
from ..head import Prediction
from ..kge import Vocab
from ..utils.errors import VocabError
from ..utils.helpers import format_percentage
from ..utils.logger import get_logger

logger = get_logger("Evaluator")

RARE_THRESHOLD = 10


class HoiClass(NamedTuple):
    """HOI类别：(物体类别, 动作)"""
    label: int
    verb: int


@dataclass
class SplitTable:
    """每个HOI类别的训练样本数；少于10个为Rare"""
    counts: Dict[HoiClass, int] = field(default_factory=dict)
    threshold: int = RARE_THRESHOLD

    @classmethod
    def from_ground_truth(cls, annotations: Iterable[Sequence[GtHoi]]) -> "SplitTable":
        """按 (物体类别, 动作) 统计标注出现次数"""
        counts: Dict[HoiClass, int] = defaultdict(int)
        for scene_gt in annotations:
            for hoi in scene_gt:
                for verb in hoi.verbs:
                    counts[HoiClass(hoi.label, verb)] += 1
        return cls(dict(counts))

    @property
    def classes(self) -> List[HoiClass]:
        return sorted(self.counts)

    def is_rare(self, cls_: HoiClass) -> bool:
        return self.counts.get(cls_, 0) < self.threshold

    def rare_classes(self) -> List[HoiClass]:
        return [c for c in self.classes if self.is_rare(c)]

    def non_rare_classes(self) -> List[HoiClass]:
        return [c for c in self.classes if not self.is_rare(c)]

    def to_list(self, vocab: Vocab) -> List[dict]:
        return [
            {"object": vocab.objects[c.label], "verb": vocab.verbs[c.verb], "count": self.counts[c]}
            for c in self.classes
        ]


@dataclass
class EvalReport:
    """逐类别AP与三个划分上的mAP（划分为空时为 None）"""
    per_class: Dict[HoiClass, Optional[float]]
    gt_counts: Dict[HoiClass, int]
    full: Optional[float]
    rare: Optional[float]
    non_rare: Optional[float]

    @property
    def num_scored(self) -> int:
        return sum(1 for ap in self.per_class.values() if ap is not None)

    def to_dict(self, vocab: Vocab) -> dict:
        return {
            "mAP": {"full": self.full, "rare": self.rare, "non_rare": self.non_rare},
            "classes": [
                {
                    "object": vocab.objects[c.label],
                    "verb": vocab.verbs[c.verb],
                    "gt_count": self.gt_counts.get(c, 0),
                    "ap": self.per_class[c],
                }
                for c in sorted(self.per_class)
            ],
        }


def _mean(values: List[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def _match_image(
    preds: Sequence[Tuple[int, Prediction]],
    gts: Sequence[GtHoi],
    cls_: HoiClass,
    iou_threshold: float,
) -> Dict[int, bool]:
    """单张图像内某类别的贪心匹配；返回 预测序号 -> 是否为TP"""
    candidates = [g for g in gts if g.label == cls_.label and cls_.verb in g.verbs]
    matched = [False] * len(candidates)
    result = {}
    for order, pred in preds:
        best, best_overlap = -1, -1.0
        for gi, gt in enumerate(candidates):
            if matched[gi]:
                continue
            o_h = iou(pred.human, gt.human)
            o_o = iou(pred.obj, gt.obj)
            if o_h > iou_threshold and o_o > iou_threshold and min(o_h, o_o) > best_overlap:
                best, best_overlap = gi, min(o_h, o_o)
        if best >= 0:
            matched[best] = True
        result[order] = best >= 0
    return result


def class_universe(splits: SplitTable, ground_truth: Mapping[str, Sequence[GtHoi]]) -> Set[HoiClass]:
    """
    评估类别全集：划分表中的类别与测试标注中出现的类别之并

    Args:
        splits: 训练集划分表
        ground_truth: 图像ID -> 标注列表

    Returns:
        HOI类别集合
    """
    universe = set(splits.classes)
    for gts in ground_truth.values():
        for hoi in gts:
            universe.update(HoiClass(hoi.label, verb) for verb in hoi.verbs)
    return universe


def universe_mask(universe: Iterable[HoiClass], vocab: Vocab) -> np.ndarray:
    """(M, N) 布尔矩阵，类别全集内的 (物体类别, 动作) 为 True"""
    mask = np.zeros((vocab.num_objects, vocab.num_verbs), dtype=bool)
    for cls_ in universe:
        if not (0 <= cls_.label < vocab.num_objects and 0 <= cls_.verb < vocab.num_verbs):
            raise VocabError(f"HOI类别 ({cls_.label}, {cls_.verb}) 不在词表中")
        mask[cls_.label, cls_.verb] = True
    return mask


def evaluate(
    predictions: Mapping[str, Sequence[Prediction]],
    ground_truth: Mapping[str, Sequence[GtHoi]],
    splits: SplitTable,
    vocab: Optional[Vocab] = None,
    iou_threshold: float = 0.5,
) -> EvalReport:
    """
    计算逐类别AP与 Full/Rare/Non-Rare mAP

    类别全集见 class_universe；预测类别不在其中时抛出 VocabError，
    推理端应先用 universe_mask 限制输出。

    Args:
        predictions: 图像ID -> 预测列表
        ground_truth: 图像ID -> 标注列表
        splits: 训练集划分表
        vocab: 词表，给出时检查预测中的ID
        iou_threshold: 人框与物框的IoU阈值

    Returns:
        EvalReport
    """
    gt_counts: Dict[HoiClass, int] = defaultdict(int)
    for gts in ground_truth.values():
        for hoi in gts:
            for verb in hoi.verbs:
                gt_counts[HoiClass(hoi.label, verb)] += 1
    universe = class_universe(splits, ground_truth)

    # 按类别汇总全部图像的预测
    pooled: Dict[HoiClass, List[Tuple[float, int, str, Prediction]]] = defaultdict(list)
    for image_id, preds in predictions.items():
        for pred in preds:
            if vocab is not None and not (0 <= pred.label < vocab.num_objects and 0 <= pred.verb < vocab.num_verbs):
                raise VocabError(
                    f"图像 {image_id}: 预测类别 ({pred.label}, {pred.verb}) 不在词表中",
                    details={"image_id": image_id},
                )
            cls_ = HoiClass(pred.label, pred.verb)
            if cls_ not in universe:
                raise VocabError(
                    f"图像 {image_id}: 预测类别 ({pred.label}, {pred.verb}) 不在评估类别中",
                    details={"image_id": image_id, "class": list(cls_)},
                )
            pooled[cls_].append((pred.score, len(pooled[cls_]), image_id, pred))
    logger.debug(f"评估 {len(universe)} 个HOI类别，共 {sum(len(v) for v in pooled.values())} 条预测")

    per_class: Dict[HoiClass, Optional[float]] = {}
    for cls_ in sorted(universe):
        # 分数降序，同分保持汇总顺序
        ranked = sorted(pooled.get(cls_, []), key=lambda item: (-item[0], item[1]))
        by_image: Dict[str, List[Tuple[int, Prediction]]] = defaultdict(list)
        for order, (_, _, image_id, pred) in enumerate(ranked):
            by_image[image_id].append((order, pred))

        hits: Dict[int, bool] = {}
        for image_id, preds in by_image.items():
            hits.update(_match_image(preds, ground_truth.get(image_id, ()), cls_, iou_threshold))

        per_class[cls_] = average_precision(
            [(item[0], hits[order]) for order, item in enumerate(ranked)], gt_counts.get(cls_, 0)
        )

    scored = {c: ap for c, ap in per_class.items() if ap is not None}
    report = EvalReport(
        per_class=per_class,
        gt_counts=dict(gt_counts),
        full=_mean(list(scored.values())),
        rare=_mean([ap for c, ap in scored.items() if splits.is_rare(c)]),
        non_rare=_mean([ap for c, ap in scored.items() if not splits.is_rare(c)]),
    )
    return report


TABLE_COLUMNS = ("full(mAP%)", "rare(mAP%)", "non-rare(mAP%)")


def format_rows(rows: Sequence[Tuple[str, Optional[float], Optional[float], Optional[float]]], title: str = "model") -> str:
    """
    多行对齐文本表格；mAP以百分比显示，缺失值显示为 "-"

    Args:
        rows: (名称, full, rare, non_rare)
        title: 首列标题
    """
    def cell(value):
        return "-" if value is None else format_percentage(value)

    body = [(name, *(cell(v) for v in values)) for name, *values in rows]
    header = (title, *TABLE_COLUMNS)
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]

    def line(cells):
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return " | ".join([first, *rest])

    sep = "-+-".join("-" * w for w in widths)
    return "\n".join([line(header), sep, *(line(r) for r in body)]) + "\n"


def format_table(report: EvalReport, name: str = "TMHOI") -> str:
    """单个评估结果的对齐文本表格"""
    return format_rows([(name, report.full, report.rare, report.non_rare)])
