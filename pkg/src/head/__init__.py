# Bipartite graph prediction head, scoring and inference
from .params import HeadParams
from .graph_head import RefinedNodes, message_pass, message_pass_backward, pair_scores, pair_scores_backward
from .scoring import PairOutput, Targets, pair_prior, fuse, assign_targets, total_loss, head_losses
from .model import HoiModel
from .inference import Prediction, infer, check_compatible, DEFAULT_SCORE_FLOOR

__all__ = [
    "HeadParams", "RefinedNodes", "message_pass", "message_pass_backward", "pair_scores",
    "pair_scores_backward", "PairOutput", "Targets", "pair_prior", "fuse", "assign_targets",
    "total_loss", "head_losses", "HoiModel", "Prediction", "infer", "check_compatible",
    "DEFAULT_SCORE_FLOOR",
]
