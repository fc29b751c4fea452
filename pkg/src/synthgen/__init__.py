# Seeded synthetic worlds, scenes and detection noise
from .world import (
    SpatialKind, SpatialRule, SceneLayout, WorldSpec, generate_world, support_size, center_distance,
    DEFAULT_APPEARANCE_NOISE,
)
from .scenes import (
    SceneSample, NoiseConfig, place_object, generate_scene, generate_scenes, corrupt_to_detections,
    oracle_predictions,
)

__all__ = [
    "SpatialKind", "SpatialRule", "SceneLayout", "WorldSpec", "generate_world", "support_size",
    "center_distance", "DEFAULT_APPEARANCE_NOISE", "SceneSample", "NoiseConfig", "place_object", "generate_scene",
    "generate_scenes", "corrupt_to_detections", "oracle_predictions",
]
