"""
数据集文件读写
JSON格式：header（词表、特征维度、划分计数表）+ 每张图像一条记录
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..graphrep import BBox, Detection, GtHoi, Scene
from ..hoieval import HoiClass, SplitTable
from ..kge import GoldenSet, Triplet, Vocab
from ..utils.errors import DatasetError, HoiValidationError
from ..utils.helpers import dump_json, write_text
from ..utils.logger import get_logger

logger = get_logger("Dataset")

DATASET_FORMAT_VERSION = 1


class _Record(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DetectionRecord(_Record):
    bbox: List[float] = Field(min_length=4, max_length=4)
    score: float
    label: str
    feature: List[float]


class HoiRecord(_Record):
    human: List[float] = Field(min_length=4, max_length=4)
    object: List[float] = Field(min_length=4, max_length=4)
    label: str
    verbs: List[str] = Field(min_length=1)


class SceneRecord(_Record):
    id: str
    width: float
    height: float
    detections: List[DetectionRecord] = Field(default_factory=list)
    hois: List[HoiRecord] = Field(default_factory=list)


class SplitCountRecord(_Record):
    object: str
    verb: str
    count: int = Field(ge=0)


class HeaderRecord(_Record):
    objects: List[str] = Field(min_length=1)
    verbs: List[str] = Field(min_length=1)
    person: str = "person"
    feature_dim: int = Field(ge=1)
    split_counts: Optional[List[SplitCountRecord]] = None


class DatasetRecord(_Record):
    format_version: int
    header: HeaderRecord
    scenes: List[SceneRecord]


@dataclass
class Dataset:
    """已校验的数据集"""
    vocab: Vocab
    feature_dim: int
    scenes: List[Scene]
    splits: SplitTable

    @property
    def golden(self) -> GoldenSet:
        return golden_set(self.scenes, self.vocab)

    @property
    def ground_truth(self):
        return {scene.image_id: scene.ground_truth for scene in self.scenes}


def golden_set(scenes: List[Scene], vocab: Vocab) -> GoldenSet:
    """标注中出现过的 (person, 动作, 物体类别)，去重"""
    return GoldenSet(vocab, (
        Triplet(vocab.person_id, verb, hoi.label)
        for scene in scenes for hoi in scene.ground_truth for verb in hoi.verbs
    ))


def _scene_from_record(record: SceneRecord, vocab: Vocab, feature_dim: int) -> Scene:
    detections = []
    for det in record.detections:
        if len(det.feature) != feature_dim:
            raise DatasetError(f"外观特征长度 {len(det.feature)} 与声明的维度 {feature_dim} 不一致")
        detections.append(Detection(BBox.from_list(det.bbox), det.score, vocab.object_id(det.label), det.feature))
    hois = [
        GtHoi(BBox.from_list(h.human), BBox.from_list(h.object), vocab.object_id(h.label),
              frozenset(vocab.verb_id(v) for v in h.verbs))
        for h in record.hois
    ]
    return Scene(record.id, record.width, record.height, detections, hois)


def _format_loc(loc) -> str:
    return ".".join(str(p) for p in loc) or "<root>"


def parse_dataset(data, source: str = "<dict>") -> Dataset:
    """校验已解析的JSON对象并转换为 Dataset"""
    if isinstance(data, dict) and data.get("format_version") != DATASET_FORMAT_VERSION:
        raise DatasetError(
            f"数据集 {source}: 不支持的格式版本 {data.get('format_version')!r}，应为 {DATASET_FORMAT_VERSION}"
        )
    try:
        record = DatasetRecord.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise DatasetError(
            f"数据集 {source}: 记录 {_format_loc(first['loc'])} 无效: {first['msg']}",
            details={"location": _format_loc(first["loc"])},
        ) from e

    header = record.header
    try:
        vocab = Vocab(tuple(header.objects), tuple(header.verbs), header.person)
    except HoiValidationError as e:
        raise DatasetError(f"数据集 {source}: header 词表无效: {e.message}") from e

    scenes = []
    for index, scene_record in enumerate(record.scenes):
        try:
            scenes.append(_scene_from_record(scene_record, vocab, header.feature_dim))
        except HoiValidationError as e:
            raise DatasetError(
                f"数据集 {source}: 场景记录 {index} ({scene_record.id}) 无效: {e.message}",
                details={"record": index, "id": scene_record.id},
            ) from e

    if header.split_counts is None:
        splits = SplitTable.from_ground_truth(scene.ground_truth for scene in scenes)
    else:
        try:
            counts = {HoiClass(vocab.object_id(c.object), vocab.verb_id(c.verb)): c.count
                      for c in header.split_counts}
        except HoiValidationError as e:
            raise DatasetError(f"数据集 {source}: 划分计数表无效: {e.message}") from e
        splits = SplitTable(counts)

    return Dataset(vocab, header.feature_dim, scenes, splits)


def load_dataset(path: str) -> Dataset:
    """
    加载并校验数据集文件

    Args:
        path: 文件路径

    Returns:
        Dataset（场景、词表、划分计数表）
    """
    file_path = Path(path)
    if not file_path.exists():
        raise DatasetError(f"数据集文件不存在: {path}")
    try:
        data = json.loads(file_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DatasetError(f"数据集 {path} 第 {e.lineno} 行第 {e.colno} 列解析失败: {e.msg}") from e

    dataset = parse_dataset(data, path)
    logger.info(f"加载数据集 {path}: {len(dataset.scenes)} 张图像, {len(dataset.golden)} 个正样本三元组")
    return dataset


def dataset_to_dict(dataset: Dataset) -> dict:
    vocab = dataset.vocab
    return {
        "format_version": DATASET_FORMAT_VERSION,
        "header": {
            "objects": list(vocab.objects),
            "verbs": list(vocab.verbs),
            "person": vocab.person,
            "feature_dim": dataset.feature_dim,
            "split_counts": dataset.splits.to_list(vocab),
        },
        "scenes": [
            {
                "id": scene.image_id,
                "width": scene.width,
                "height": scene.height,
                "detections": [
                    {
                        "bbox": det.bbox.to_list(),
                        "score": det.score,
                        "label": vocab.objects[det.label],
                        "feature": det.feature.tolist(),
                    }
                    for det in scene.detections
                ],
                "hois": [
                    {
                        "human": hoi.human.to_list(),
                        "object": hoi.obj.to_list(),
                        "label": vocab.objects[hoi.label],
                        "verbs": [vocab.verbs[v] for v in sorted(hoi.verbs)],
                    }
                    for hoi in scene.ground_truth
                ],
            }
            for scene in dataset.scenes
        ],
    }


def save_dataset(dataset: Dataset, path: str):
    """写出数据集文件（相同内容得到相同字节）"""
    write_text(path, dump_json(dataset_to_dict(dataset)))
    logger.info(f"数据集已保存: {path} ({len(dataset.scenes)} 张图像)")
