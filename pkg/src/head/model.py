"""
完整的二阶段模型：平移模型 + 图编码器 + 二部图预测头
负责前向、反向与序列化
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .graph_head import (
    MessageCache, ScoreCache, message_pass, message_pass_backward, pair_scores, pair_scores_backward,
)
from .params import HeadParams
from .scoring import PairOutput, Targets, fuse, head_losses, pair_prior
from ..graphrep import SPATIAL_DIM, GraphEncoder, PreparedScene
from ..graphrep.embedding import EncoderCache
from ..kge import TransHParams, Vocab, init_transh
from ..numkernel import Activation, DenseLayer, DenseStack, Param
from ..utils.errors import ShapeError


@dataclass
class ForwardCache:
    encoder: EncoderCache
    message: MessageCache
    scores: ScoreCache
    num_humans: int
    num_objects: int
    edge_width: int


class HoiModel:
    """二阶段HOI模型"""

    def __init__(
        self,
        vocab: Vocab,
        transh: Optional[TransHParams],
        encoder: GraphEncoder,
        head: HeadParams,
        iterations: int = 1,
    ):
        if transh is not None and (transh.num_entities != vocab.num_objects
                                   or transh.num_relations != vocab.num_verbs):
            raise ShapeError(
                f"平移模型形状 ({transh.num_entities}, {transh.num_relations}) 与词表 "
                f"({vocab.num_objects}, {vocab.num_verbs}) 不一致"
            )
        self.vocab = vocab
        self.transh = transh
        self.encoder = encoder
        self.head = head
        self.iterations = iterations

    @classmethod
    def build(
        cls,
        vocab: Vocab,
        feature_dim: int,
        k: int,
        node_width: int,
        edge_width: int,
        seed: int,
        appearance_hidden: Optional[int] = None,
        iterations: int = 1,
        zero_init_head: bool = False,
    ) -> "HoiModel":
        """
        按配置随机初始化

        Args:
            vocab: 词表
            feature_dim: 外观特征维度 D
            k: 平移嵌入维度，0表示不使用平移特征
            node_width: 节点宽度
            edge_width: 边宽度
            seed: 随机种子
            appearance_hidden: 外观投影隐层宽度，默认等于节点宽度
            iterations: 消息传递轮数
            zero_init_head: 残差更新层与分类器全零初始化
        """
        rng = np.random.default_rng(seed)
        transh = init_transh(vocab.num_objects, vocab.num_verbs, k, seed) if k > 0 else None
        hidden = appearance_hidden or node_width
        encoder = GraphEncoder(
            appearance=DenseStack.create("encoder.appearance", (feature_dim, hidden, node_width), rng),
            fc_human=DenseLayer.create("encoder.fc_human", node_width + k, node_width, Activation.RECTIFIER, rng),
            fc_object=DenseLayer.create("encoder.fc_object", node_width + k, node_width, Activation.RECTIFIER, rng),
            edge_stack=DenseStack.create("encoder.edges", (SPATIAL_DIM, edge_width, edge_width, edge_width), rng),
            transh=transh,
            person_id=vocab.person_id,
        )
        head = HeadParams.create(node_width, edge_width, vocab.num_verbs, rng,
                                 zero_update=zero_init_head, zero_classifier=zero_init_head)
        return cls(vocab, transh, encoder, head, iterations)

    @property
    def k(self) -> int:
        return self.encoder.k

    @property
    def feature_dim(self) -> int:
        return self.encoder.appearance.in_features

    def params(self) -> List[Param]:
        """编码器与预测头参数（不含平移模型）"""
        return self.encoder.params() + self.head.params()

    def kge_params(self) -> List[Param]:
        return self.transh.params() if self.transh is not None else []

    def empty_output(self) -> PairOutput:
        n = self.vocab.num_verbs
        return PairOutput(c=np.zeros((0, n)), w_hat=np.zeros(0), p=np.zeros(0), v=np.zeros((0, n)))

    def forward(self, prepared: PreparedScene, lam: float) -> Tuple[PairOutput, Optional[ForwardCache]]:
        """
        编码 -> 消息传递 -> 打分 -> 先验融合

        Returns:
            (PairOutput, 缓存)；没有样本对时缓存为 None
        """
        if prepared.num_pairs == 0:
            return self.empty_output(), None

        batch, enc_cache = self.encoder.encode(prepared)
        refined, msg_cache = message_pass(batch, self.head, self.iterations)
        c, w_hat, score_cache = pair_scores(refined, batch.edges, batch.pairs, self.head)
        p = pair_prior(batch.human_scores, batch.object_scores, lam)
        output = PairOutput(c=c, w_hat=w_hat, p=np.asarray(p, dtype=np.float64), v=fuse(p, c))
        cache = ForwardCache(enc_cache, msg_cache, score_cache,
                             batch.human_nodes.shape[0], batch.object_nodes.shape[0], batch.edges.shape[1])
        return output, cache

    def backward(self, cache: ForwardCache, d_c: np.ndarray, d_w_hat: np.ndarray):
        """把 dL/dc 与 dL/dŵ 反向传播到全部参数（含实体嵌入行）"""
        d_h, d_o, d_e = pair_scores_backward(cache.scores, self.head, d_c, d_w_hat,
                                             cache.num_humans, cache.num_objects)
        d_h, d_o, d_e_msg = message_pass_backward(cache.message, self.head, d_h, d_o, cache.edge_width)
        self.encoder.backward(cache.encoder, d_h, d_o, d_e + d_e_msg)

    def scene_loss(
        self,
        prepared: PreparedScene,
        targets: Targets,
        lam: float = 1.0,
        beta: float = 0.5,
        gamma: float = 0.2,
        weight: float = 1.0,
    ) -> Tuple[float, float]:
        """
        计算单张图像的 L_W、L_V，并把 weight 倍的梯度累加到参数

        Returns:
            (L_W, L_V)，未乘 weight
        """
        output, cache = self.forward(prepared, lam)
        if cache is None:
            return 0.0, 0.0
        l_w, l_v, d_c, d_w = head_losses(output, targets, beta, gamma)
        self.backward(cache, d_c * weight, d_w * weight)
        return l_w, l_v

    def to_dict(self) -> Dict:
        enc = self.encoder
        return {
            "iterations": self.iterations,
            "transh": self.transh.to_dict() if self.transh is not None else None,
            "encoder": {
                "appearance": enc.appearance.to_dict(),
                "fc_human": enc.fc_human.to_dict(),
                "fc_object": enc.fc_object.to_dict(),
                "edges": enc.edge_stack.to_dict(),
            },
            "head": self.head.to_dict(),
        }

    @classmethod
    def from_dict(cls, vocab: Vocab, data: Dict) -> "HoiModel":
        transh = TransHParams.from_dict(data["transh"]) if data.get("transh") is not None else None
        enc = data["encoder"]
        encoder = GraphEncoder(
            appearance=DenseStack.from_dict("encoder.appearance", enc["appearance"]),
            fc_human=DenseLayer.from_dict("encoder.fc_human", enc["fc_human"]),
            fc_object=DenseLayer.from_dict("encoder.fc_object", enc["fc_object"]),
            edge_stack=DenseStack.from_dict("encoder.edges", enc["edges"]),
            transh=transh,
            person_id=vocab.person_id,
        )
        return cls(vocab, transh, encoder, HeadParams.from_dict(data["head"]), int(data["iterations"]))
