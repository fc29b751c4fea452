# Translational (TransH) knowledge-graph embedding model
from .vocab import Vocab, Triplet, GoldenSet, build_pair_triplets
from .transh import (
    TransHParams, init_transh, hyperplane_project, transh_score, score_triplets, score_all_relations,
    golden_rank, margin_loss_and_grads, orthogonality_penalty, constrain,
)
from .sampling import sample_negatives
from .trainer import train_kge, check_unit_normals

__all__ = [
    "Vocab", "Triplet", "GoldenSet", "build_pair_triplets", "TransHParams", "init_transh",
    "hyperplane_project", "transh_score", "score_triplets", "score_all_relations", "golden_rank",
    "margin_loss_and_grads", "orthogonality_penalty", "constrain", "sample_negatives", "train_kge",
    "check_unit_normals",
]
