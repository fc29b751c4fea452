# Stage-two input processing and graph representation
from .boxes import BBox, iou
from .scene import Detection, GtHoi, Scene
from .preprocess import (
    filter_detections, nms, make_pairs, spatial_features, prepare_scene, PreparedScene, SPATIAL_DIM,
)
from .embedding import appearance_project, node_embed, edge_embed, GraphBatch, GraphEncoder

__all__ = [
    "BBox", "iou", "Detection", "GtHoi", "Scene", "filter_detections", "nms", "make_pairs",
    "spatial_features", "prepare_scene", "PreparedScene", "SPATIAL_DIM", "appearance_project",
    "node_embed", "edge_embed", "GraphBatch", "GraphEncoder",
]
