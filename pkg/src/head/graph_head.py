"""
二部图消息传递与样本对打分

每轮迭代（均使用更新前的节点值）：
    人节点 h 收到物节点 o 的消息 m = ReLU(U_o→h(x_o ⊕ e_ho))，按均值聚合，
    x_h ← x_h + ReLU(update_h(x_h ⊕ m̄))；物节点对称。没有配对的节点保持不变。
"""

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from .params import HeadParams
from ..graphrep import GraphBatch
from ..utils.errors import ShapeError


class RefinedNodes(NamedTuple):
    humans: np.ndarray
    objects: np.ndarray


@dataclass
class _SideCache:
    msg: list
    update: Optional[list]
    aggregate: np.ndarray   # (|nodes|, P) 均值聚合矩阵
    active: np.ndarray      # 有配对的节点掩码


@dataclass
class MessageCache:
    pairs: np.ndarray
    iterations: List[Tuple[_SideCache, _SideCache]]
    node_width: int


def _aggregation_matrix(index: np.ndarray, num_nodes: int) -> np.ndarray:
    num_pairs = len(index)
    agg = np.zeros((num_nodes, num_pairs))
    agg[index, np.arange(num_pairs)] = 1.0
    counts = agg.sum(axis=1, keepdims=True)
    return np.divide(agg, counts, out=np.zeros_like(agg), where=counts > 0)


def _side_forward(nodes, partners, partner_index, own_index, edges, msg_stack, update_stack):
    messages, msg_cache = msg_stack.forward(np.concatenate([partners[partner_index], edges], axis=1))
    agg = _aggregation_matrix(own_index, nodes.shape[0])
    mean_msg = agg @ messages
    active = agg.sum(axis=1) > 0

    refined = nodes.copy()
    update_cache = None
    if np.any(active):
        delta, update_cache = update_stack.forward(
            np.concatenate([nodes[active], mean_msg[active]], axis=1))
        refined[active] += delta
    return refined, _SideCache(msg_cache, update_cache, agg, active)


def _side_backward(cache: _SideCache, d_refined, msg_stack, update_stack, width, partner_index, num_partners):
    """返回 (对本侧节点的梯度, 对另一侧节点的梯度, 对边的梯度)"""
    d_nodes = d_refined.copy()
    d_mean = np.zeros_like(d_refined)
    if cache.update is not None:
        d_in = update_stack.backward(cache.update, d_refined[cache.active])
        d_nodes[cache.active] += d_in[:, :width]
        d_mean[cache.active] = d_in[:, width:]

    d_messages = cache.aggregate.T @ d_mean
    d_msg_in = msg_stack.backward(cache.msg, d_messages)
    d_partners = np.zeros((num_partners, width))
    np.add.at(d_partners, partner_index, d_msg_in[:, :width])
    return d_nodes, d_partners, d_msg_in[:, width:]


def message_pass(batch: GraphBatch, params: HeadParams, iterations: int = 1):
    """
    二部图消息传递

    Args:
        batch: 图
        params: 预测头参数
        iterations: 迭代轮数

    Returns:
        (RefinedNodes, 反向传播缓存)
    """
    width = batch.human_nodes.shape[1]
    if params.update_human.out_features != width:
        raise ShapeError(
            f"节点宽度 {width} 与更新层宽度 {params.update_human.out_features} 不一致")

    humans, objects = batch.human_nodes, batch.object_nodes
    cache = MessageCache(batch.pairs, [], width)
    if batch.num_pairs == 0:
        return RefinedNodes(humans.copy(), objects.copy()), cache

    h_idx, o_idx = batch.pairs[:, 0], batch.pairs[:, 1]
    for _ in range(iterations):
        new_humans, h_cache = _side_forward(humans, objects, o_idx, h_idx, batch.edges,
                                            params.msg_object_to_human, params.update_human)
        new_objects, o_cache = _side_forward(objects, humans, h_idx, o_idx, batch.edges,
                                             params.msg_human_to_object, params.update_object)
        cache.iterations.append((h_cache, o_cache))
        humans, objects = new_humans, new_objects
    return RefinedNodes(humans, objects), cache


def message_pass_backward(cache: MessageCache, params: HeadParams, d_humans, d_objects, num_edges_width: int):
    """
    Returns:
        (对输入人节点的梯度, 对输入物节点的梯度, 对边的梯度)
    """
    d_humans = np.array(d_humans, dtype=np.float64)
    d_objects = np.array(d_objects, dtype=np.float64)
    d_edges = np.zeros((len(cache.pairs), num_edges_width))
    if not cache.iterations:
        return d_humans, d_objects, d_edges

    width = cache.node_width
    h_idx, o_idx = cache.pairs[:, 0], cache.pairs[:, 1]
    for h_cache, o_cache in reversed(cache.iterations):
        dh_self, do_from_h, de_h = _side_backward(
            h_cache, d_humans, params.msg_object_to_human, params.update_human, width, o_idx, d_objects.shape[0])
        do_self, dh_from_o, de_o = _side_backward(
            o_cache, d_objects, params.msg_human_to_object, params.update_object, width, h_idx, d_humans.shape[0])
        d_humans = dh_self + dh_from_o
        d_objects = do_self + do_from_h
        d_edges += de_h + de_o
    return d_humans, d_objects, d_edges


@dataclass
class ScoreCache:
    pairs: np.ndarray
    node_width: int
    classifier: list
    interactiveness: list


def pair_scores(nodes: RefinedNodes, edges: np.ndarray, pairs: np.ndarray, params: HeadParams):
    """
    logits = classifier(x_h' ⊕ x_o' ⊕ e)，c = logistic(logits)；ŵ 同理

    Returns:
        (c: (P, N), w_hat: (P,), 缓存)
    """
    width = nodes.humans.shape[1]
    if params.classifier.in_features != 2 * width + edges.shape[1]:
        raise ShapeError(
            f"分类器输入宽度 {params.classifier.in_features} 与 {2 * width + edges.shape[1]} 不一致")
    pair_in = np.concatenate([nodes.humans[pairs[:, 0]], nodes.objects[pairs[:, 1]], edges], axis=1)
    c, cls_cache = params.classifier.forward(pair_in)
    w_hat, int_cache = params.interactiveness.forward(pair_in)
    return c, w_hat[:, 0], ScoreCache(pairs, width, cls_cache, int_cache)


def pair_scores_backward(cache: ScoreCache, params: HeadParams, d_c, d_w_hat, num_humans: int, num_objects: int):
    """
    Returns:
        (对人节点的梯度, 对物节点的梯度, 对边的梯度)
    """
    width = cache.node_width
    d_in = params.classifier.backward(cache.classifier, d_c)
    d_in = d_in + params.interactiveness.backward(cache.interactiveness, np.asarray(d_w_hat)[:, None])
    d_humans = np.zeros((num_humans, width))
    d_objects = np.zeros((num_objects, width))
    np.add.at(d_humans, cache.pairs[:, 0], d_in[:, :width])
    np.add.at(d_objects, cache.pairs[:, 1], d_in[:, width:2 * width])
    return d_humans, d_objects, d_in[:, 2 * width:]
