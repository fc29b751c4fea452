"""
图表示：外观投影、节点嵌入（外观 ⊕ 平移特征）与边嵌入
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .preprocess import PreparedScene
from ..kge import TransHParams
from ..numkernel import DenseLayer, DenseStack, Param
from ..utils.errors import ShapeError


def appearance_project(raw, proj: DenseStack) -> np.ndarray:
    """两层MLP把 D 维外观特征投影到节点宽度"""
    out, _ = proj.forward(raw)
    return out


def node_embed(f, entity_vec, fc: DenseLayer) -> np.ndarray:
    """σ(FC(f ⊕ entity_vec))；k=0 时 entity_vec 为空向量"""
    f = np.asarray(f, dtype=np.float64)
    entity_vec = np.asarray(entity_vec, dtype=np.float64)
    x = np.concatenate([f, entity_vec], axis=-1)
    if x.shape[-1] != fc.in_features:
        raise ShapeError(f"节点输入宽度 {x.shape[-1]} 与FC输入宽度 {fc.in_features} 不一致")
    out, _ = fc.forward(x)
    return out


def edge_embed(sp, stack: DenseStack) -> np.ndarray:
    """三层MLP把18维空间特征映射到边宽度"""
    out, _ = stack.forward(sp)
    return out


@dataclass
class GraphBatch:
    """一张图像的二部图：人节点、物节点、边及每条边的检测置信度"""
    human_nodes: np.ndarray   # (|H|, w)
    object_nodes: np.ndarray  # (|O|, w)
    pairs: np.ndarray         # (P, 2) 人节点下标, 物节点下标
    edges: np.ndarray         # (P, w_e)
    human_scores: np.ndarray  # (P,)
    object_scores: np.ndarray  # (P,)

    @property
    def num_pairs(self) -> int:
        return int(self.pairs.shape[0])


@dataclass
class EncoderCache:
    prepared: PreparedScene
    appearance: list
    human_fc: object
    object_fc: object
    edges: list


class GraphEncoder:
    """把预处理后的场景编码为 GraphBatch，并负责对应的反向传播"""

    def __init__(
        self,
        appearance: DenseStack,
        fc_human: DenseLayer,
        fc_object: DenseLayer,
        edge_stack: DenseStack,
        transh: Optional[TransHParams],
        person_id: int,
    ):
        k = transh.k if transh is not None else 0
        width = appearance.out_features
        for name, fc in (("fc_human", fc_human), ("fc_object", fc_object)):
            if fc.in_features != width + k:
                raise ShapeError(f"{name}: 输入宽度应为 {width + k}，实际 {fc.in_features}")
        self.appearance = appearance
        self.fc_human = fc_human
        self.fc_object = fc_object
        self.edge_stack = edge_stack
        self.transh = transh
        self.person_id = person_id

    @property
    def k(self) -> int:
        return self.transh.k if self.transh is not None else 0

    def params(self) -> List[Param]:
        return (self.appearance.params() + self.fc_human.params()
                + self.fc_object.params() + self.edge_stack.params())

    def _entity_rows(self, labels: np.ndarray) -> np.ndarray:
        if self.transh is None:
            return np.zeros((len(labels), 0))
        return self.transh.entities.value[labels]

    def encode(self, prepared: PreparedScene):
        """
        前向编码

        Returns:
            (GraphBatch, 反向传播缓存)
        """
        appearance, app_cache = self.appearance.forward(prepared.features)
        hidx = prepared.human_index

        human_in = np.concatenate(
            [appearance[hidx], self._entity_rows(np.full(len(hidx), self.person_id, dtype=np.int64))], axis=1
        )
        human_nodes, human_cache = self.fc_human.forward(human_in)

        object_in = np.concatenate([appearance, self._entity_rows(prepared.labels)], axis=1)
        object_nodes, object_cache = self.fc_object.forward(object_in)

        edges, edge_cache = self.edge_stack.forward(prepared.spatial)

        pairs = prepared.pairs
        batch = GraphBatch(
            human_nodes=human_nodes,
            object_nodes=object_nodes,
            pairs=pairs,
            edges=edges,
            human_scores=prepared.scores[hidx[pairs[:, 0]]] if len(pairs) else np.zeros(0),
            object_scores=prepared.scores[pairs[:, 1]] if len(pairs) else np.zeros(0),
        )
        return batch, EncoderCache(prepared, app_cache, human_cache, object_cache, edge_cache)

    def backward(self, cache: EncoderCache, d_human: np.ndarray, d_object: np.ndarray, d_edges: np.ndarray):
        """反向传播到外观投影、两个节点FC、边MLP以及实体嵌入行"""
        prepared = cache.prepared
        width = self.appearance.out_features
        d_appearance = np.zeros((prepared.features.shape[0], width))

        d_human_in = self.fc_human.backward(cache.human_fc, d_human)
        np.add.at(d_appearance, prepared.human_index, d_human_in[:, :width])

        d_object_in = self.fc_object.backward(cache.object_fc, d_object)
        d_appearance += d_object_in[:, :width]

        if self.transh is not None:
            grad = self.transh.entities.grad
            grad[self.person_id] += d_human_in[:, width:].sum(axis=0)
            np.add.at(grad, prepared.labels, d_object_in[:, width:])

        self.appearance.backward(cache.appearance, d_appearance)
        self.edge_stack.backward(cache.edges, d_edges)
