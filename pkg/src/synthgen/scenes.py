"""
合成场景生成与检测噪声
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .world import SpatialKind, SpatialRule, WorldSpec
from ..graphrep import BBox, Detection, GtHoi, Scene, iou
from ..head import Prediction
from ..utils.errors import ConfigError

PLACEMENT_TRIES = 20


@dataclass
class SceneSample:
    """
    scene: 无噪声场景（检测即真值实体，置信度为1）及其标注
    draws: 每次从先验抽取的 (物体类别, 主动作)
    """
    scene: Scene
    draws: List[Tuple[int, int]] = field(default_factory=list)


@dataclass(frozen=True)
class NoiseConfig:
    """检测噪声：框抖动(像素)、漏检率、误检率、类别翻转率"""
    jitter: float = 0.0
    miss_rate: float = 0.0
    fp_rate: float = 0.0
    flip_rate: float = 0.0

    def __post_init__(self):
        if self.jitter < 0:
            raise ConfigError(f"jitter 不能为负: {self.jitter}")
        for name in ("miss_rate", "fp_rate", "flip_rate"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0 and not (name == "miss_rate" and value == 1.0):
                raise ConfigError(f"{name} 必须在 [0, 1) 之间: {value}")


def _box_from_center(cx: float, cy: float, w: float, h: float, width: float, height: float) -> BBox:
    return BBox(max(cx - w / 2, 0.0), max(cy - h / 2, 0.0), min(cx + w / 2, width), min(cy + h / 2, height))


def _clip_center(cx, cy, w, h, width, height) -> Tuple[float, float]:
    return float(np.clip(cx, w / 2, width - w / 2)), float(np.clip(cy, h / 2, height - h / 2))


def _in_region(cx, cy, w, h, width, height) -> bool:
    return w / 2 <= cx <= width - w / 2 and h / 2 <= cy <= height - h / 2


def place_object(
    rule: SpatialRule,
    human: BBox,
    size: Tuple[float, float],
    frame: Tuple[float, float],
    rng: np.random.Generator,
) -> Optional[BBox]:
    """
    按空间规则放置物体框

    Returns:
        满足规则的框；无法满足时返回 None
    """
    w, h = size
    width, height = frame
    hx, hy = human.center
    diag = human.diagonal

    if rule.kind == SpatialKind.OVERLAP:
        cx, cy = _clip_center(rng.uniform(human.x1, human.x2), rng.uniform(human.y1, human.y2),
                              w, h, width, height)
    elif rule.kind == SpatialKind.ANY:
        cx, cy = rng.uniform(w / 2, width - w / 2), rng.uniform(h / 2, height - h / 2)
    else:
        near = rule.kind == SpatialKind.NEAR
        low, high = (0.3, 0.9 * rule.max_distance) if near else (rule.min_distance, rule.min_distance + 0.4)
        for _ in range(PLACEMENT_TRIES):
            dist = rng.uniform(low, high) * diag
            angle = rng.uniform(0.0, 2.0 * math.pi)
            cx, cy = hx + dist * math.cos(angle), hy + dist * math.sin(angle)
            if _in_region(cx, cy, w, h, width, height):
                break
        else:
            if near:
                cx, cy = _clip_center(hx, hy, w, h, width, height)
            else:
                # 朝可行区域最远角点方向放置
                corners = [(x, y) for x in (w / 2, width - w / 2) for y in (h / 2, height - h / 2)]
                fx, fy = max(corners, key=lambda c: math.hypot(c[0] - hx, c[1] - hy))
                span = math.hypot(fx - hx, fy - hy)
                dist = min(high * diag, span)
                cx, cy = hx + (fx - hx) * dist / span, hy + (fy - hy) * dist / span

    box = _box_from_center(cx, cy, w, h, width, height)
    return box if rule.satisfied(human, box) else None


def _feature(world: WorldSpec, label: int, rng: np.random.Generator) -> np.ndarray:
    return world.centers[label] + rng.normal(0.0, world.appearance_noise, size=world.feature_dim)


def _random_size(world: WorldSpec, label: int, rng: np.random.Generator) -> Tuple[float, float]:
    layout = world.layout
    if label == world.vocab.person_id:
        return rng.uniform(*layout.person_width), rng.uniform(*layout.person_height)
    return rng.uniform(*layout.object_size), rng.uniform(*layout.object_size)


def generate_scene(world: WorldSpec, rng: np.random.Generator, image_id: str = "scene_0") -> SceneSample:
    """
    生成一张合成场景

    1-3个人、1-4个物体（物体也可以是人）；每个物体绑定一个人，
    从先验中抽取0-2个动作并按空间规则放置

    Args:
        world: 合成世界
        rng: 随机数生成器
        image_id: 图像ID

    Returns:
        SceneSample
    """
    layout = world.layout
    frame = (layout.width, layout.height)
    person = world.vocab.person_id
    num_verbs = world.vocab.num_verbs

    humans: List[BBox] = []
    for _ in range(int(rng.integers(layout.persons[0], layout.persons[1] + 1))):
        w, h = _random_size(world, person, rng)
        x1, y1 = rng.uniform(0.0, layout.width - w), rng.uniform(0.0, layout.height - h)
        humans.append(BBox(x1, y1, x1 + w, y1 + h))
    entities: List[Tuple[BBox, int]] = [(box, person) for box in humans]

    ground_truth: List[GtHoi] = []
    draws: List[Tuple[int, int]] = []
    any_rule = SpatialRule(SpatialKind.ANY)
    for _ in range(int(rng.integers(layout.objects[0], layout.objects[1] + 1))):
        label = int(rng.integers(world.vocab.num_objects))
        anchor = humans[int(rng.integers(len(humans)))]
        size = _random_size(world, label, rng)

        verbs = set()
        box = None
        if rng.random() < layout.interaction_rate:
            primary = int(rng.choice(num_verbs, p=world.prior[label]))
            draws.append((label, primary))
            box = place_object(world.rules[primary], anchor, size, frame, rng)
            if box is not None:
                verbs.add(primary)
                if rng.random() < layout.second_verb_rate:
                    extra = int(rng.choice(num_verbs, p=world.prior[label]))
                    if world.rules[extra].satisfied(anchor, box):
                        verbs.add(extra)
        if box is None:
            box = place_object(any_rule, anchor, size, frame, rng)

        entities.append((box, label))
        if verbs:
            ground_truth.append(GtHoi(anchor, box, label, frozenset(verbs)))

    detections = [Detection(box, 1.0, label, _feature(world, label, rng)) for box, label in entities]
    scene = Scene(image_id, layout.width, layout.height, detections, ground_truth)
    return SceneSample(scene, draws)


def generate_scenes(world: WorldSpec, count: int, rng: np.random.Generator, prefix: str = "scene") -> List[SceneSample]:
    """按顺序生成 count 张场景，ID为 prefix_序号"""
    return [generate_scene(world, rng, f"{prefix}_{i:05d}") for i in range(count)]


def _jitter(box: BBox, sigma: float, frame: Tuple[float, float], rng: np.random.Generator) -> BBox:
    if sigma == 0.0:
        return box
    x1, y1, x2, y2 = np.asarray(box.to_list()) + rng.normal(0.0, sigma, size=4)
    x1, x2 = float(np.clip(x1, 0.0, frame[0])), float(np.clip(x2, 0.0, frame[0]))
    y1, y2 = float(np.clip(y1, 0.0, frame[1])), float(np.clip(y2, 0.0, frame[1]))
    if x2 - x1 < 1.0 or y2 - y1 < 1.0:
        return box
    return BBox(x1, y1, x2, y2)


def corrupt_to_detections(
    sample: SceneSample,
    noise: NoiseConfig,
    rng: np.random.Generator,
    world: Optional[WorldSpec] = None,
) -> Scene:
    """
    把真值实体转换为带噪声的检测结果，标注保持不变

    抖动框后置信度 = clamp(IoU(原框, 新框), 0.05, 1)；按漏检率丢弃；
    按翻转率替换类别；按误检率为每个实体附加一个低置信度背景框

    Args:
        sample: 无噪声场景
        noise: 噪声配置
        rng: 随机数生成器
        world: 合成世界（误检框的外观特征需要类别中心）

    Returns:
        带噪声的场景
    """
    scene = sample.scene
    frame = (scene.width, scene.height)
    num_labels = world.vocab.num_objects if world is not None else 1 + max(d.label for d in scene.detections)

    detections: List[Detection] = []
    false_positives: List[Detection] = []
    for det in scene.detections:
        if noise.fp_rate > 0.0 and rng.random() < noise.fp_rate:
            false_positives.append(_false_positive(scene, num_labels, world, det, rng))
        if noise.miss_rate > 0.0 and rng.random() < noise.miss_rate:
            continue
        box = _jitter(det.bbox, noise.jitter, frame, rng)
        score = float(np.clip(iou(det.bbox, box), 0.05, 1.0))
        label = det.label
        if noise.flip_rate > 0.0 and num_labels > 1 and rng.random() < noise.flip_rate:
            label = (label + 1 + int(rng.integers(num_labels - 1))) % num_labels
        detections.append(Detection(box, score, label, det.feature.copy()))

    return Scene(scene.image_id, scene.width, scene.height, detections + false_positives,
                 list(scene.ground_truth))


def _false_positive(scene: Scene, num_labels: int, world: Optional[WorldSpec], det: Detection,
                    rng: np.random.Generator) -> Detection:
    w = rng.uniform(30.0, 120.0)
    h = rng.uniform(30.0, 120.0)
    x1, y1 = rng.uniform(0.0, scene.width - w), rng.uniform(0.0, scene.height - h)
    label = int(rng.integers(num_labels))
    if world is not None:
        feature = _feature(world, label, rng)
    else:
        feature = rng.normal(0.0, 1.0, size=det.feature.shape)
    return Detection(BBox(x1, y1, x1 + w, y1 + h), float(rng.uniform(0.05, 0.3)), label, feature)


def oracle_predictions(scenes: Sequence[Scene]) -> Dict[str, List[Prediction]]:
    """把标注原样作为置信度为1的预测输出"""
    predictions: Dict[str, List[Prediction]] = {}
    for scene in scenes:
        predictions[scene.image_id] = [
            Prediction(hoi.human, hoi.obj, hoi.label, verb, 1.0)
            for hoi in scene.ground_truth
            for verb in sorted(hoi.verbs)
        ]
    return predictions
