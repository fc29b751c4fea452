"""
二部图预测头测试
消息传递、样本对打分、先验融合、目标分配、损失与推理
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from src.graphrep import BBox, Detection, GraphBatch, GtHoi, Scene, prepare_scene
from src.head import (
    HeadParams, HoiModel, RefinedNodes, assign_targets, check_compatible, fuse, infer, message_pass,
    pair_prior, pair_scores, total_loss,
)
from src.kge import Vocab
from src.numkernel import Activation, DenseLayer, DenseStack
from src.pipeline.gradcheck_suite import TOY_VOCAB, check_full_model, check_message_passing, toy_scene
from src.utils.errors import CompatibilityError, ShapeError


def _single(name, weights, bias, activation=Activation.RECTIFIER):
    return DenseStack(name, [DenseLayer(f"{name}.0", weights, bias, activation)])


def _toy_head():
    # 宽度1的节点和边
    zero_cls = DenseStack.create("cls", (3, 2), zero=True, final_activation=Activation.LOGISTIC)
    zero_int = DenseStack.create("int", (3, 1), zero=True, final_activation=Activation.LOGISTIC)
    return HeadParams(
        msg_object_to_human=_single("m_o2h", [[1.0, 1.0]], [0.0]),
        msg_human_to_object=_single("m_h2o", [[1.0, 1.0]], [0.0]),
        update_human=_single("u_h", [[1.0, 1.0]], [0.0]),
        update_object=_single("u_o", [[1.0, 1.0]], [0.0]),
        classifier=zero_cls,
        interactiveness=zero_int,
    )


def _batch(humans, objects, pairs, edges):
    pairs = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    return GraphBatch(np.array(humans, dtype=np.float64), np.array(objects, dtype=np.float64), pairs,
                      np.array(edges, dtype=np.float64),
                      np.ones(len(pairs)), np.ones(len(pairs)))


def test_message_pass_hand_oracle():
    # m_h = relu(2 + 0.5) = 2.5, x_h' = 1 + relu(1 + 2.5) = 4.5
    # m_o = relu(1 + 0.5) = 1.5, x_o' = 2 + relu(2 + 1.5) = 5.5
    refined, _ = message_pass(_batch([[1.0]], [[2.0]], [(0, 0)], [[0.5]]), _toy_head())
    assert refined.humans == pytest.approx(np.array([[4.5]]))
    assert refined.objects == pytest.approx(np.array([[5.5]]))


def test_message_pass_mean_aggregation():
    # 人节点收到两条消息 relu(2+0)=2, relu(4+0)=4，均值3；x_h' = 1 + relu(1 + 3) = 5
    refined, _ = message_pass(_batch([[1.0]], [[2.0], [4.0]], [(0, 0), (0, 1)], [[0.0], [0.0]]), _toy_head())
    assert refined.humans[0, 0] == pytest.approx(5.0)


def test_message_pass_uses_pre_update_values():
    head = _toy_head()
    batch = _batch([[1.0]], [[2.0]], [(0, 0)], [[0.5]])
    two, _ = message_pass(batch, head, iterations=2)
    # 第二轮使用第一轮的 (4.5, 5.5)
    m_h = 5.5 + 0.5
    m_o = 4.5 + 0.5
    assert two.humans[0, 0] == pytest.approx(4.5 + (4.5 + m_h))
    assert two.objects[0, 0] == pytest.approx(5.5 + (5.5 + m_o))


def test_message_pass_zero_update_is_identity():
    rng = np.random.default_rng(0)
    head = HeadParams.create(4, 3, 5, rng, zero_update=True)
    batch = _batch(rng.normal(size=(2, 4)), rng.normal(size=(3, 4)), [(0, 1), (1, 2), (0, 0)],
                   rng.normal(size=(3, 3)))
    refined, _ = message_pass(batch, head)
    assert np.array_equal(refined.humans, batch.human_nodes)
    assert np.array_equal(refined.objects, batch.object_nodes)


def test_message_pass_unpaired_nodes_unchanged():
    rng = np.random.default_rng(1)
    head = HeadParams.create(4, 3, 5, rng)
    single = _batch(rng.normal(size=(1, 4)), np.zeros((0, 4)), [], np.zeros((0, 3)))
    refined, _ = message_pass(single, head)
    assert np.array_equal(refined.humans, single.human_nodes)

    batch = _batch(rng.normal(size=(2, 4)), rng.normal(size=(2, 4)), [(0, 0)], rng.normal(size=(1, 3)))
    refined, _ = message_pass(batch, head)
    assert np.array_equal(refined.humans[1], batch.human_nodes[1])
    assert np.array_equal(refined.objects[1], batch.object_nodes[1])


def test_message_pass_width_mismatch():
    rng = np.random.default_rng(0)
    head = HeadParams.create(4, 3, 5, rng)
    with pytest.raises(ShapeError):
        message_pass(_batch(np.ones((1, 5)), np.ones((1, 5)), [(0, 0)], np.ones((1, 3))), head)


def test_pair_scores_zero_classifier():
    rng = np.random.default_rng(0)
    head = HeadParams.create(4, 3, 6, rng, zero_classifier=True)
    nodes = RefinedNodes(rng.normal(size=(2, 4)), rng.normal(size=(3, 4)))
    pairs = np.array([(0, 0), (0, 2), (1, 1)])
    c, w_hat, _ = pair_scores(nodes, rng.normal(size=(3, 3)), pairs, head)
    assert c.shape == (3, 6)
    assert np.allclose(c, 0.5)
    assert np.allclose(w_hat, 0.5)


def test_pair_scores_hand_weights():
    head = _toy_head()
    head.classifier = _single("cls", [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]], [0.0, 0.0], Activation.LOGISTIC)
    nodes = RefinedNodes(np.array([[np.log(3.0)]]), np.array([[7.0]]))
    c, _, _ = pair_scores(nodes, np.array([[0.0]]), np.array([(0, 0)]), head)
    assert c[0] == pytest.approx([0.75, 0.5])


def test_pair_prior():
    assert pair_prior(1.0, 1.0, 2.8) == pytest.approx(1.0)
    assert pair_prior(0.9, 0.8, 2.8) == pytest.approx(0.3986, abs=1e-4)
    assert pair_prior(0.9, 0.8, 1.0) == pytest.approx(0.72)
    assert np.allclose(pair_prior(np.array([1.0, 0.5]), np.array([1.0, 0.5]), 1.0), [1.0, 0.25])


def test_pair_prior_monotone_in_lambda():
    lams = np.linspace(0.5, 4.0, 8)
    values = [pair_prior(0.9, 0.7, lam) for lam in lams]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_fuse():
    c = np.array([0.4, 1.0])
    assert np.allclose(fuse(1.0, c), c)
    assert np.allclose(fuse(0.0, c), 0.0)
    assert np.allclose(fuse(0.5, c), [0.2, 0.5])
    assert np.allclose(fuse(np.array([1.0, 0.5]), np.array([[0.4, 1.0], [0.4, 1.0]])), [[0.4, 1.0], [0.2, 0.5]])


def test_assign_targets():
    h_box, o_box = BBox(10, 10, 50, 90), BBox(40, 40, 90, 80)
    dets = [Detection(h_box, 0.9, 0, np.zeros(2)), Detection(o_box, 0.9, 1, np.zeros(2))]
    gt = [GtHoi(h_box, o_box, 1, frozenset({0, 2}))]

    targets = assign_targets(dets, np.array([(0, 1)]), gt, 3)
    assert np.array_equal(targets.V, [[1.0, 0.0, 1.0]])
    assert np.array_equal(targets.W, [1.0])

    # 人框IoU只有0.4
    narrow = Detection(BBox(10, 10, 26, 90), 0.9, 0, np.zeros(2))
    assert narrow.bbox.area / h_box.area == pytest.approx(0.4)
    targets = assign_targets([narrow, dets[1]], np.array([(0, 1)]), gt, 3)
    assert not targets.V.any() and not targets.W.any()

    # 物体类别不一致
    wrong = Detection(o_box, 0.9, 2, np.zeros(2))
    targets = assign_targets([dets[0], wrong], np.array([(0, 1)]), gt, 3)
    assert not targets.V.any()


def test_total_loss():
    assert total_loss(0.0, 0.0, 0.0) == 0.0
    assert total_loss(3.25, 0.30172, 0.30172) == pytest.approx(3.85344)
    assert total_loss(1.5, 2.0, 0.25) == 1.5 + 2.0 + 0.25


def _model(k=2, seed=0):
    return HoiModel.build(TOY_VOCAB, feature_dim=3, k=k, node_width=4, edge_width=4, seed=seed)


def test_model_dict_round_trip():
    model = _model()
    restored = HoiModel.from_dict(TOY_VOCAB, model.to_dict())
    prepared = prepare_scene(toy_scene(np.random.default_rng(0)), TOY_VOCAB.person_id, 3)
    a, _ = model.forward(prepared, 2.8)
    b, _ = restored.forward(prepared, 2.8)
    assert np.array_equal(a.v, b.v)


def test_model_without_translation_features():
    model = _model(k=0)
    assert model.k == 0 and model.kge_params() == []
    prepared = prepare_scene(toy_scene(np.random.default_rng(0)), TOY_VOCAB.person_id, 3)
    output, _ = model.forward(prepared, 1.0)
    assert output.v.shape == (prepared.num_pairs, TOY_VOCAB.num_verbs)


def test_infer_scene_without_person():
    rng = np.random.default_rng(0)
    scene = Scene("np", 200, 120, [Detection(BBox(10, 10, 40, 40), 0.9, 1, rng.normal(size=3)),
                                   Detection(BBox(60, 10, 90, 40), 0.9, 2, rng.normal(size=3))])
    assert infer(scene, _model()) == []


def test_infer_is_deterministic_and_sorted():
    model = _model(seed=3)
    scene = toy_scene(np.random.default_rng(5))
    first = infer(scene, model, top_k=5)
    second = infer(scene, model, top_k=5)
    assert first == second
    assert len(first) <= 5
    scores = [p.score for p in first]
    assert scores == sorted(scores, reverse=True)
    for pred in first:
        assert 0.0 <= pred.score <= 1.0


def test_infer_score_bounded_by_prior():
    model = _model(seed=1)
    scene = toy_scene(np.random.default_rng(2))
    scores = {d.bbox: d.score for d in scene.detections}
    for pred in infer(scene, model, lam=2.8, score_floor=0.0):
        assert pred.score <= pair_prior(scores[pred.human], scores[pred.obj], 2.8) + 1e-12


def test_check_compatible():
    model = _model()
    rng = np.random.default_rng(0)
    bad_dim = Scene("d", 200, 120, [Detection(BBox(10, 10, 40, 40), 0.9, 0, rng.normal(size=4))])
    with pytest.raises(CompatibilityError):
        check_compatible(model, bad_dim)
    bad_label = Scene("l", 200, 120, [Detection(BBox(10, 10, 40, 40), 0.9, 7, rng.normal(size=3))])
    with pytest.raises(CompatibilityError):
        check_compatible(model, bad_label)
    other = Vocab(objects=("person", "horse", "cup"), verbs=("ride", "hold", "wash"))
    with pytest.raises(CompatibilityError):
        check_compatible(model, toy_scene(rng), other)


@pytest.mark.parametrize("seed", range(100))
def test_message_passing_gradients(seed):
    assert check_message_passing(np.random.default_rng(seed)) < 1e-4


@pytest.mark.parametrize("seed", range(100))
def test_full_model_gradients(seed):
    assert check_full_model(np.random.default_rng(seed)) < 1e-4


@pytest.mark.parametrize("seed", range(20))
def test_zero_init_head_starts_uniform(seed):
    rng = np.random.default_rng(seed)
    model = HoiModel.build(TOY_VOCAB, feature_dim=3, k=2, node_width=4, edge_width=4, seed=seed,
                           zero_init_head=True)
    prepared = prepare_scene(toy_scene(rng), TOY_VOCAB.person_id, 3)
    output, _ = model.forward(prepared, 1.0)
    assert output.num_pairs > 0
    assert np.array_equal(output.c, np.full_like(output.c, 0.5))
    assert np.array_equal(output.w_hat, np.full_like(output.w_hat, 0.5))
    assert np.allclose(output.v, 0.5 * output.p[:, None])


def test_infer_respects_class_mask():
    model = _model(seed=3)
    scene = toy_scene(np.random.default_rng(5))
    unrestricted = infer(scene, model, top_k=100, score_floor=0.0)
    allowed = np.zeros((TOY_VOCAB.num_objects, TOY_VOCAB.num_verbs), dtype=bool)
    allowed[1, 0] = allowed[2, 1] = True
    restricted = infer(scene, model, top_k=100, score_floor=0.0, allowed=allowed)
    assert restricted
    assert all(allowed[p.label, p.verb] for p in restricted)
    assert restricted == [p for p in unrestricted if allowed[p.label, p.verb]]

    with pytest.raises(CompatibilityError):
        infer(scene, model, allowed=np.ones((2, 2), dtype=bool))
