"""
有限差分梯度校验套件
覆盖全部可训练运算：全连接层、节点/边嵌入、消息传递、focal loss、间隔损失以及完整模型
"""

from typing import Callable, Dict, List, Tuple

import numpy as np

from ..graphrep import BBox, Detection, GraphBatch, GtHoi, Scene, SPATIAL_DIM, prepare_scene
from ..head import HeadParams, HoiModel, assign_targets, message_pass, message_pass_backward
from ..kge import GoldenSet, Triplet, Vocab, init_transh, margin_loss_and_grads, score_triplets
from ..numkernel import Activation, DenseStack, Param, activation_apply, focal_loss, grad_check
from ..utils.logger import get_logger

logger = get_logger("GradCheck")

GRADCHECK_TOLERANCE = 1e-4
TOY_VOCAB = Vocab(objects=("person", "horse", "cup"), verbs=("ride", "hold", "feed"))


def toy_scene(rng: np.random.Generator, feature_dim: int = 3) -> Scene:
    """2个人、2个物体的小场景，带两条交互标注"""
    boxes = [
        (BBox(10, 10, 50, 90), 0.95, 0),
        (BBox(120, 20, 170, 110), 0.85, 0),
        (BBox(30, 40, 90, 100), 0.9, 1),
        (BBox(150, 60, 190, 95), 0.7, 2),
    ]
    detections = [Detection(box, score, label, rng.normal(size=feature_dim)) for box, score, label in boxes]
    ground_truth = [
        GtHoi(boxes[0][0], boxes[2][0], 1, frozenset({0, 2})),
        GtHoi(boxes[1][0], boxes[3][0], 2, frozenset({1})),
    ]
    return Scene("toy", 200.0, 120.0, detections, ground_truth)


def _active_margin(params, positives, negatives) -> float:
    # 所有样本对的hinge都保持在激活区内，远离不可导点
    gap = score_triplets(params, negatives) - score_triplets(params, positives)
    return float(max(gap.max(), 0.0) + 1.0)


def _projection_loss(output: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sum(output * weights))


def check_dense_stack(rng: np.random.Generator) -> float:
    stack = DenseStack.create("check.stack", (5, 4, 3), rng, Activation.LOGISTIC)
    x = rng.normal(size=(6, 5))
    proj = rng.normal(size=(6, 3))

    def loss():
        y, caches = stack.forward(x)
        stack.backward(caches, proj)
        return _projection_loss(y, proj)

    return grad_check(loss, stack.params())


def check_node_embedding(rng: np.random.Generator) -> float:
    model = HoiModel.build(TOY_VOCAB, feature_dim=3, k=2, node_width=4, edge_width=4, seed=int(rng.integers(1 << 30)))
    prepared = prepare_scene(toy_scene(rng), TOY_VOCAB.person_id, 3)
    encoder = model.encoder
    proj_h = rng.normal(size=(len(prepared.human_index), 4))
    proj_o = rng.normal(size=(len(prepared.detections), 4))

    def loss():
        batch, cache = encoder.encode(prepared)
        encoder.backward(cache, proj_h, proj_o, np.zeros_like(batch.edges))
        return _projection_loss(batch.human_nodes, proj_h) + _projection_loss(batch.object_nodes, proj_o)

    params = encoder.appearance.params() + encoder.fc_human.params() + encoder.fc_object.params()
    return grad_check(loss, params + [model.transh.entities])


def check_edge_embedding(rng: np.random.Generator) -> float:
    stack = DenseStack.create("check.edges", (SPATIAL_DIM, 5, 5, 4), rng)
    prepared = prepare_scene(toy_scene(rng), TOY_VOCAB.person_id, 3)
    proj = rng.normal(size=(prepared.num_pairs, 4))

    def loss():
        y, caches = stack.forward(prepared.spatial)
        stack.backward(caches, proj)
        return _projection_loss(y, proj)

    return grad_check(loss, stack.params())


def check_message_passing(rng: np.random.Generator) -> float:
    width, edge_width = 4, 3
    head = HeadParams.create(width, edge_width, 3, rng)
    pairs = np.array([(0, 1), (0, 2), (1, 0), (1, 2), (0, 3)], dtype=np.int64)
    humans = Param("check.humans", rng.normal(size=(2, width)))
    objects = Param("check.objects", rng.normal(size=(4, width)))
    edges = Param("check.edges", rng.normal(size=(len(pairs), edge_width)))
    proj_h = rng.normal(size=(2, width))
    proj_o = rng.normal(size=(4, width))

    def loss():
        batch = GraphBatch(humans.value, objects.value, pairs, edges.value,
                           np.ones(len(pairs)), np.ones(len(pairs)))
        refined, cache = message_pass(batch, head, iterations=2)
        d_h, d_o, d_e = message_pass_backward(cache, head, proj_h, proj_o, edge_width)
        humans.grad += d_h
        objects.grad += d_o
        edges.grad += d_e
        return _projection_loss(refined.humans, proj_h) + _projection_loss(refined.objects, proj_o)

    stacks = [head.msg_object_to_human, head.msg_human_to_object, head.update_human, head.update_object]
    params = [p for s in stacks for p in s.params()]
    return grad_check(loss, params + [humans, objects, edges])


def check_focal_loss(rng: np.random.Generator) -> float:
    logits = Param("check.logits", rng.normal(size=12))
    labels = (rng.random(12) < 0.5).astype(np.float64)

    def loss():
        p = activation_apply(Activation.LOGISTIC, logits.value)
        values, grads = focal_loss(p, labels, 0.5, 0.2)
        logits.grad += grads * p * (1.0 - p)
        return float(values.sum())

    return grad_check(loss, [logits])


def check_margin_loss(rng: np.random.Generator) -> float:
    params = init_transh(4, 3, 5, int(rng.integers(1 << 30)))
    positives = [Triplet(0, 0, 1), Triplet(0, 1, 2), Triplet(0, 2, 3)]
    negatives = [Triplet(0, 1, 1), Triplet(0, 1, 3), Triplet(0, 0, 3)]

    delta = _active_margin(params, positives, negatives)

    def loss():
        return margin_loss_and_grads(params, positives, negatives, delta)

    return grad_check(loss, params.params())


def check_full_model(rng: np.random.Generator) -> float:
    model = HoiModel.build(TOY_VOCAB, feature_dim=3, k=2, node_width=4, edge_width=4,
                           seed=int(rng.integers(1 << 30)))
    scene = toy_scene(rng)
    prepared = prepare_scene(scene, TOY_VOCAB.person_id, 3)
    targets = assign_targets(prepared.detections, prepared.det_pairs, scene.ground_truth, TOY_VOCAB.num_verbs)
    golden = GoldenSet.from_pairs(TOY_VOCAB, [(0, 1), (2, 1), (1, 2)])
    positives = golden.sorted()
    negatives = [Triplet(t.head, (t.relation + 1) % 3, t.tail) for t in positives]
    negatives = [n if n not in golden else Triplet(n.head, (n.relation + 1) % 3, n.tail) for n in negatives]

    delta = _active_margin(model.transh, positives, negatives)

    def loss():
        l_w, l_v = model.scene_loss(prepared, targets, lam=1.0)
        l_t = margin_loss_and_grads(model.transh, positives, negatives, delta)
        return l_t + l_w + l_v

    return grad_check(loss, model.params() + model.kge_params())


CHECKS: List[Tuple[str, Callable[[np.random.Generator], float]]] = [
    ("dense_stack", check_dense_stack),
    ("node_embedding", check_node_embedding),
    ("edge_embedding", check_edge_embedding),
    ("message_passing", check_message_passing),
    ("focal_loss", check_focal_loss),
    ("margin_loss", check_margin_loss),
    ("full_model", check_full_model),
]


def run_gradcheck_suite(seed: int = 0) -> Dict[str, float]:
    """
    运行全部梯度校验

    Args:
        seed: 随机种子

    Returns:
        组件名 -> 最大相对误差
    """
    rng = np.random.default_rng(seed)
    results = {}
    for name, check in CHECKS:
        results[name] = check(rng)
        logger.debug(f"梯度校验 {name}: 最大相对误差 {results[name]:.3e}")
    return results
