"""
图表示测试
检测过滤、NMS、配对、空间特征与节点/边嵌入
"""

import itertools
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from src.graphrep import (
    BBox, Detection, GraphEncoder, GtHoi, Scene, SPATIAL_DIM, appearance_project, edge_embed,
    filter_detections, iou, make_pairs, nms, node_embed, prepare_scene, spatial_features,
)
from src.kge import init_transh
from src.numkernel import Activation, DenseLayer, DenseStack
from src.utils.errors import GeometryError, ShapeError

PERSON, CUP, BOOK = 0, 1, 2


def _det(coords, score=0.9, label=PERSON, dim=2):
    return Detection(BBox(*coords), score, label, np.zeros(dim))


def test_bbox_rejects_degenerate_and_negative():
    with pytest.raises(GeometryError):
        BBox(0, 0, 0, 5)
    with pytest.raises(GeometryError):
        BBox(-1, 0, 3, 5)
    with pytest.raises(GeometryError):
        BBox(0, 0, math.inf, 5)


def test_iou_oracles():
    box = BBox(0, 0, 2, 2)
    assert iou(box, box) == pytest.approx(1.0)
    assert iou(box, BBox(5, 5, 6, 6)) == 0.0
    assert iou(box, BBox(1, 1, 3, 3)) == pytest.approx(1.0 / 7.0)


def test_scene_rejects_box_outside_image():
    with pytest.raises(GeometryError):
        Scene("s", 10, 10, [_det((0, 0, 11, 5))])


def test_filter_detections_keeps_boundary():
    dets = [_det((0, 0, 5, 5), s) for s in (0.19, 0.20, 0.9)]
    kept = filter_detections(dets, 0.2)
    assert [d.score for d in kept] == [0.20, 0.9]
    assert len(filter_detections(dets, 0.0)) == 3
    assert len(filter_detections(dets[1:], 0.2)) == 2


def test_nms():
    single = [_det((0, 0, 10, 10))]
    assert nms(single) == single

    a = _det((0, 0, 10, 10), 0.8, CUP)
    b = _det((0, 0, 10, 6), 0.9, CUP)
    assert iou(a.bbox, b.bbox) == pytest.approx(0.6)
    assert nms([a, b]) == [b]

    c = _det((0, 0, 10, 6), 0.9, BOOK)
    assert len(nms([a, c])) == 2


def _random_detections(rng, count):
    # 聚集在小区域内的框，使同类别之间经常重叠；分数互不相同
    scores = rng.permutation(count) / count + 0.01
    detections = []
    for i in range(count):
        x, y = (float(v) for v in rng.uniform(0, 30, size=2))
        w, h = (float(v) for v in rng.uniform(10, 30, size=2))
        detections.append(_det((x, y, x + w, y + h), float(scores[i]), int(rng.integers(0, 3))))
    return detections


def test_nms_independent_of_input_order():
    rng = np.random.default_rng(4)
    for _ in range(100):
        detections = _random_detections(rng, int(rng.integers(1, 12)))
        kept = nms(detections)
        shuffled = [detections[i] for i in rng.permutation(len(detections))]
        again = nms(shuffled)
        assert [id(d) for d in again] == [id(d) for d in kept]


def test_make_pairs_matches_enumeration():
    rng = np.random.default_rng(6)
    for _ in range(100):
        labels = rng.integers(0, 3, size=int(rng.integers(0, 8)))
        detections = [_det((0, 0, 5, 5), label=int(label)) for label in labels]
        expected = [(h, o) for h, o in itertools.permutations(range(len(labels)), 2) if labels[h] == PERSON]
        assert make_pairs(detections, PERSON) == expected


def test_make_pairs():
    dets = [_det((0, 0, 5, 5), label=PERSON), _det((1, 1, 6, 6), label=PERSON), _det((2, 2, 7, 7), label=CUP)]
    assert make_pairs(dets, PERSON) == [(0, 1), (0, 2), (1, 0), (1, 2)]
    assert len(make_pairs([dets[0], dets[2]], PERSON)) == 1
    assert make_pairs([_det((0, 0, 5, 5), label=CUP), _det((0, 0, 5, 5), label=BOOK)], PERSON) == []


def test_spatial_features_identical_boxes():
    box = BBox(10, 20, 40, 80)
    sp = spatial_features(box, box, 100, 100)
    assert sp.shape == (SPATIAL_DIM,)
    assert sp[8] == 0.0 and sp[9] == 0.0
    assert np.allclose(sp[10:13], 0.0)
    assert sp[13] == pytest.approx(1.0)


def test_spatial_features_hand_geometry():
    sp = spatial_features(BBox(0, 0, 2, 2), BBox(1, 1, 3, 3), 4, 4)
    assert sp[8] == pytest.approx(0.5)
    assert sp[9] == pytest.approx(0.5)
    assert np.allclose(sp[10:13], 0.0)
    assert sp[13] == pytest.approx(1.0 / 7.0)


def test_spatial_features_double_size():
    sp = spatial_features(BBox(10, 10, 20, 20), BBox(10, 10, 30, 30), 100, 100)
    assert sp[10] == pytest.approx(math.log(2.0))
    assert sp[12] == pytest.approx(math.log(4.0))


def test_spatial_features_scale_invariant():
    b_h, b_o = BBox(12, 30, 50, 110), BBox(40, 60, 95, 100)
    base = spatial_features(b_h, b_o, 160, 120)
    scaled = spatial_features(
        BBox(*(3 * c for c in b_h.to_list())), BBox(*(3 * c for c in b_o.to_list())), 480, 360
    )
    assert np.allclose(base, scaled)


def test_appearance_project_toy_and_zero():
    stack = DenseStack("toy", [
        DenseLayer("toy.0", np.eye(2), np.zeros(2), Activation.RECTIFIER),
        DenseLayer("toy.1", [[1.0, 1.0]], [1.0]),
    ])
    assert appearance_project([2.0, -3.0], stack) == pytest.approx([3.0])

    zero = DenseStack.create("zero", (5, 4, 3), zero=True)
    assert np.array_equal(appearance_project(np.ones(5), zero), np.zeros(3))


def test_node_embed():
    fc = DenseLayer("fc", [[1.0, 1.0]], [0.5], Activation.RECTIFIER)
    assert node_embed([1.0], [2.0], fc) == pytest.approx([3.5])

    zero = DenseLayer.create("zero", 3, 2, Activation.RECTIFIER, zero=True)
    assert np.array_equal(node_embed([1.0, 2.0], [3.0], zero), np.zeros(2))

    with pytest.raises(ShapeError):
        node_embed([1.0, 2.0], [3.0, 4.0], zero)


def test_node_embed_without_translation_features():
    fc = DenseLayer("fc", [[2.0, 0.0]], [0.0])
    assert node_embed([1.5, 7.0], np.zeros(0), fc) == pytest.approx([3.0])


def test_edge_embed():
    stack = DenseStack("toy", [
        DenseLayer("toy.0", [[1.0, -1.0], [0.5, 0.5]], [0.0, 1.0], Activation.RECTIFIER),
        DenseLayer("toy.1", [[2.0, 1.0]], [-1.0]),
    ])
    # relu(1-3, 0.5*1+0.5*3+1) = (0, 3) -> 2*0 + 3 - 1 = 2
    assert edge_embed([1.0, 3.0], stack) == pytest.approx([2.0])

    zero = DenseStack.create("zero", (SPATIAL_DIM, 4, 4, 4), zero=True)
    out = edge_embed(np.ones(SPATIAL_DIM), zero)
    assert out.shape == (4,) and np.array_equal(out, np.zeros(4))


def _scene(feature_dim=3):
    rng = np.random.default_rng(0)
    boxes = [((10, 10, 50, 90), 0.95, PERSON), ((60, 10, 100, 90), 0.6, PERSON), ((30, 40, 80, 70), 0.8, PERSON),
             ((30, 40, 80, 70), 0.1, CUP), ((100, 50, 140, 80), 0.7, BOOK)]
    dets = [Detection(BBox(*b), s, label, rng.normal(size=feature_dim)) for b, s, label in boxes]
    gt = [GtHoi(BBox(10, 10, 50, 90), BBox(100, 50, 140, 80), BOOK, frozenset({0}))]
    return Scene("img", 160, 120, dets, gt)


def test_prepare_scene():
    prepared = prepare_scene(_scene(), PERSON, 3)
    # cup 低于阈值被过滤
    assert len(prepared.detections) == 4
    assert prepared.num_pairs == 3 * 3
    assert prepared.spatial.shape == (9, SPATIAL_DIM)
    # NMS 输出按置信度降序: 0.95, 0.8, 0.7(book), 0.6
    assert list(prepared.human_index) == [0, 1, 3]
    for (hn, o), (hd, od) in zip(prepared.pairs, prepared.det_pairs):
        assert prepared.human_index[hn] == hd and o == od


def test_prepare_scene_rejects_feature_dim():
    with pytest.raises(ShapeError):
        prepare_scene(_scene(feature_dim=3), PERSON, 4)


def test_graph_encoder_shapes_and_scores():
    rng = np.random.default_rng(1)
    transh = init_transh(3, 2, 2, seed=0)
    encoder = GraphEncoder(
        DenseStack.create("app", (3, 5, 4), rng),
        DenseLayer.create("fh", 6, 4, Activation.RECTIFIER, rng),
        DenseLayer.create("fo", 6, 4, Activation.RECTIFIER, rng),
        DenseStack.create("edges", (SPATIAL_DIM, 3, 3, 3), rng),
        transh, PERSON,
    )
    prepared = prepare_scene(_scene(), PERSON, 3)
    batch, _ = encoder.encode(prepared)
    assert batch.human_nodes.shape == (3, 4)
    assert batch.object_nodes.shape == (4, 4)
    assert batch.edges.shape == (9, 3)
    for i, (hn, o) in enumerate(batch.pairs):
        assert batch.human_scores[i] == prepared.scores[prepared.human_index[hn]]
        assert batch.object_scores[i] == prepared.scores[o]


def test_graph_encoder_rejects_width_mismatch():
    rng = np.random.default_rng(1)
    with pytest.raises(ShapeError):
        GraphEncoder(
            DenseStack.create("app", (3, 5, 4), rng),
            DenseLayer.create("fh", 4, 4, Activation.RECTIFIER, rng),
            DenseLayer.create("fo", 6, 4, Activation.RECTIFIER, rng),
            DenseStack.create("edges", (SPATIAL_DIM, 3, 3, 3), rng),
            init_transh(3, 2, 2, seed=0), PERSON,
        )
