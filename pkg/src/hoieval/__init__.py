# HOI detection metric: IoU matching, per-class AP, Full/Rare/Non-Rare mAP
from ..graphrep.boxes import iou
from .average_precision import average_precision, voc_ap
from .evaluator import (
    HoiClass, SplitTable, EvalReport, evaluate, class_universe, universe_mask, format_table, format_rows,
    RARE_THRESHOLD, TABLE_COLUMNS,
)

__all__ = [
    "iou", "average_precision", "voc_ap", "HoiClass", "SplitTable", "EvalReport", "evaluate", "class_universe",
    "universe_mask",
    "format_table", "format_rows", "RARE_THRESHOLD", "TABLE_COLUMNS",
]
