"""
二部图预测头参数
"""

from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from ..numkernel import Activation, DenseStack, Param


@dataclass
class HeadParams:
    """消息函数、残差更新函数、动作分类器与交互性分类器"""
    msg_object_to_human: DenseStack
    msg_human_to_object: DenseStack
    update_human: DenseStack
    update_object: DenseStack
    classifier: DenseStack
    interactiveness: DenseStack

    STACKS = ("msg_object_to_human", "msg_human_to_object", "update_human",
              "update_object", "classifier", "interactiveness")

    @classmethod
    def create(
        cls,
        node_width: int,
        edge_width: int,
        num_verbs: int,
        rng: np.random.Generator,
        zero_update: bool = False,
        zero_classifier: bool = False,
    ) -> "HeadParams":
        """
        Args:
            node_width: 节点宽度
            edge_width: 边宽度
            num_verbs: 动作类别数 N
            rng: 随机数生成器
            zero_update: 残差更新层全零初始化（节点保持不变）
            zero_classifier: 分类器全零初始化（全部输出0.5）
        """
        pair_width = 2 * node_width + edge_width
        return cls(
            msg_object_to_human=DenseStack.create(
                "head.msg_o2h", (node_width + edge_width, node_width), rng, Activation.RECTIFIER),
            msg_human_to_object=DenseStack.create(
                "head.msg_h2o", (node_width + edge_width, node_width), rng, Activation.RECTIFIER),
            update_human=DenseStack.create(
                "head.update_h", (2 * node_width, node_width), rng, Activation.RECTIFIER, zero=zero_update),
            update_object=DenseStack.create(
                "head.update_o", (2 * node_width, node_width), rng, Activation.RECTIFIER, zero=zero_update),
            classifier=DenseStack.create(
                "head.classifier", (pair_width, node_width, num_verbs), rng, Activation.LOGISTIC,
                zero=zero_classifier),
            interactiveness=DenseStack.create(
                "head.interactiveness", (pair_width, node_width, 1), rng, Activation.LOGISTIC,
                zero=zero_classifier),
        )

    def stacks(self) -> List[DenseStack]:
        return [getattr(self, name) for name in self.STACKS]

    def params(self) -> List[Param]:
        return [p for stack in self.stacks() for p in stack.params()]

    def to_dict(self) -> Dict:
        return {name: getattr(self, name).to_dict() for name in self.STACKS}

    @classmethod
    def from_dict(cls, data: Dict) -> "HeadParams":
        prefixes = dict(zip(cls.STACKS, ("head.msg_o2h", "head.msg_h2o", "head.update_h",
                                         "head.update_o", "head.classifier", "head.interactiveness")))
        return cls(**{name: DenseStack.from_dict(prefixes[name], data[name]) for name in cls.STACKS})
