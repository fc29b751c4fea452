"""
流水线测试
运行配置、数据集与检查点文件、训练循环、评估、命令行与可复现性
"""

import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from src.hoieval import EvalReport, HoiClass, class_universe
from src.kge import Triplet
from src.pipeline import (
    CHECKPOINT_FORMAT_VERSION, DATASET_FORMAT_VERSION, AblationResult, Checkpoint, Dataset, RunConfig, ablate,
    build_model, cli, evaluate_checkpoint, load_checkpoint, load_dataset, load_run_config, parse_dataset,
    parse_run_config, predict_scenes, save_checkpoint, save_dataset, train,
)
from src.pipeline.cli import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION
from src.hoieval import SplitTable
from src.synthgen import NoiseConfig, corrupt_to_detections, generate_scenes, generate_world
from src.utils.errors import CheckpointError, CompatibilityError, ConfigError, DatasetError, TrainingError

SMALL = dict(k=3, node_width=6, edge_width=5, epochs=1, batch_size=4, learning_rate=1e-3, seed=0)


def _synthetic(count=8, seed=0, noise=None):
    world = generate_world(seed, num_objects=4, num_verbs=5, sparsity=0.4, feature_dim=4)
    rng = np.random.default_rng(seed)
    noise = noise or NoiseConfig(jitter=2.0, fp_rate=0.1)
    scenes = [corrupt_to_detections(s, noise, rng, world) for s in generate_scenes(world, count, rng)]
    return Dataset(world.vocab, 4, scenes, SplitTable.from_ground_truth(s.ground_truth for s in scenes))


def _record(scene_id, hois, objects=("book",)):
    detections = [{"bbox": [10, 10, 50, 90], "score": 0.9, "label": "person", "feature": [0.1, 0.2]}]
    detections += [{"bbox": [40, 30, 80, 70], "score": 0.8, "label": name, "feature": [0.3, 0.4]}
                   for name in objects]
    return {
        "id": scene_id, "width": 100, "height": 100, "detections": detections,
        "hois": [{"human": [10, 10, 50, 90], "object": [40, 30, 80, 70], "label": label, "verbs": verbs}
                 for label, verbs in hois],
    }


def _dataset_dict(scenes, verbs=("read", "hold")):
    return {
        "format_version": DATASET_FORMAT_VERSION,
        "header": {"objects": ["person", "book", "table"], "verbs": list(verbs), "feature_dim": 2},
        "scenes": scenes,
    }


# ---------- 运行配置 ----------

def test_run_config_defaults():
    cfg = RunConfig()
    assert (cfg.k, cfg.delta, cfg.beta, cfg.gamma) == (50, 4.0, 0.5, 0.2)
    assert (cfg.lambda_train, cfg.lambda_infer) == (1.0, 2.8)
    assert (cfg.epochs, cfg.batch_size, cfg.learning_rate) == (12, 16, 1e-3)
    assert cfg.kge_lr == cfg.learning_rate


def test_run_config_rejects_unknown_and_invalid_fields():
    with pytest.raises(ConfigError):
        parse_run_config({"k": 50, "momentum": 0.9})
    with pytest.raises(ConfigError):
        parse_run_config({"beta": 1.5})
    with pytest.raises(ConfigError):
        parse_run_config({"k": -1})


def test_run_config_env_seed_override(tmp_path, monkeypatch):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"seed": 3}), encoding="utf-8")
    monkeypatch.delenv("TMHOI_SEED", raising=False)
    assert load_run_config(str(path)).seed == 3
    monkeypatch.setenv("TMHOI_SEED", "11")
    assert load_run_config(str(path)).seed == 11
    monkeypatch.setenv("TMHOI_SEED", "eleven")
    with pytest.raises(ConfigError):
        load_run_config(str(path))


def test_example_run_config_loads(monkeypatch):
    monkeypatch.delenv("TMHOI_SEED", raising=False)
    cfg = load_run_config(str(Path(__file__).parent / "config" / "run_config_example.json"))
    assert cfg.k == 50 and cfg.epochs == 12


# ---------- 数据集 ----------

def test_dataset_example_structure():
    data = _dataset_dict([
        _record("a", [("book", ["read", "hold"])]),
        _record("b", [("table", ["hold"])], objects=("table",)),
    ])
    dataset = parse_dataset(data)
    assert len(dataset.scenes) == 2
    golden = dataset.golden
    assert len(golden) == 3
    assert Triplet(0, 0, 1) in golden and Triplet(0, 1, 1) in golden and Triplet(0, 1, 2) in golden


def test_dataset_counts():
    scenes = [_record(f"r{i}", [("book", ["read"])]) for i in range(12)]
    scenes.append(_record("t", [("table", ["read"])], objects=("table",)))
    dataset = parse_dataset(_dataset_dict(scenes))
    assert len(dataset.golden) == 2
    assert dataset.splits.counts[HoiClass(1, 0)] == 12
    assert dataset.splits.counts[HoiClass(2, 0)] == 1
    assert dataset.splits.is_rare(HoiClass(2, 0)) and not dataset.splits.is_rare(HoiClass(1, 0))


def test_dataset_rejects_unknown_verb_with_record_index():
    scenes = [_record("ok", [("book", ["read"])]), _record("bad", [("book", ["juggle"])])]
    with pytest.raises(DatasetError) as info:
        parse_dataset(_dataset_dict(scenes))
    assert info.value.details["record"] == 1
    assert "juggle" in info.value.message


def test_dataset_rejects_wrong_version_and_fields():
    data = _dataset_dict([_record("a", [])])
    data["format_version"] = 2
    with pytest.raises(DatasetError):
        parse_dataset(data)

    data = _dataset_dict([_record("a", [])])
    data["scenes"][0]["detections"][0]["extra"] = 1
    with pytest.raises(DatasetError) as info:
        parse_dataset(data)
    assert info.value.details["location"].startswith("scenes.0.detections.0")

    data = _dataset_dict([_record("a", [])])
    data["scenes"][0]["detections"][0]["feature"] = [0.1, 0.2, 0.3]
    with pytest.raises(DatasetError):
        parse_dataset(data)


def test_dataset_file_errors(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text('{"format_version": 1,', encoding="utf-8")
    with pytest.raises(DatasetError):
        load_dataset(str(broken))


def test_dataset_save_load_is_byte_stable(tmp_path):
    dataset = _synthetic(4)
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    save_dataset(dataset, str(first))
    save_dataset(load_dataset(str(first)), str(second))
    assert first.read_bytes() == second.read_bytes()


# ---------- 训练与检查点 ----------

def test_train_one_epoch_and_round_trip(tmp_path):
    dataset = _synthetic(6)
    ckpt = train(RunConfig(**SMALL), dataset)
    assert ckpt.metadata.epoch == 1
    assert np.isfinite(ckpt.metadata.loss_curve[0]["total"])

    path = tmp_path / "model.json"
    save_checkpoint(ckpt, str(path))
    loaded = load_checkpoint(str(path))
    for a, b in zip(ckpt.model.params() + ckpt.model.kge_params(), loaded.model.params() + loaded.model.kge_params()):
        assert a.name == b.name
        assert np.array_equal(a.value, b.value)

    again = tmp_path / "again.json"
    save_checkpoint(loaded, str(again))
    assert path.read_bytes() == again.read_bytes()


def test_batch_loss_is_sum_of_parts():
    records = []
    train(RunConfig(**{**SMALL, "epochs": 2}), _synthetic(10), on_batch=records.append)
    assert len(records) == 2 * 3
    for r in records:
        assert abs(r.total - (r.l_t + r.l_w + r.l_v)) <= 1e-12
        assert r.l_t >= 0.0 and r.l_w >= 0.0 and r.l_v >= 0.0


def test_training_keeps_normals_unit():
    ckpt = train(RunConfig(**{**SMALL, "epochs": 2, "learning_rate": 1e-2}), _synthetic(8))
    assert ckpt.model.transh.max_normal_deviation() <= 1e-6


def test_frozen_translation_model_is_unchanged():
    dataset = _synthetic(6)
    cfg = RunConfig(**{**SMALL, "freeze_kge": True})
    initial = build_model(cfg, dataset)
    ckpt = train(cfg, dataset)
    for a, b in zip(initial.kge_params(), ckpt.model.kge_params()):
        assert np.array_equal(a.value, b.value)
    changed = [not np.array_equal(a.value, b.value) for a, b in zip(initial.params(), ckpt.model.params())]
    assert any(changed)


def test_train_without_translation_features():
    ckpt = train(RunConfig(**{**SMALL, "k": 0}), _synthetic(6))
    assert ckpt.model.transh is None
    report, _ = evaluate_checkpoint(ckpt, _synthetic(4, seed=1))
    assert report.full is None or 0.0 <= report.full <= 1.0


def test_train_without_pairs_fails():
    data = _dataset_dict([_record("a", [], objects=())])
    data["scenes"][0]["detections"][0]["label"] = "book"
    with pytest.raises(TrainingError):
        train(RunConfig(**SMALL), parse_dataset(data))


def test_checkpoint_version_refused(tmp_path):
    ckpt = train(RunConfig(**SMALL), _synthetic(4))
    payload = ckpt.to_dict()
    assert payload["format_version"] == CHECKPOINT_FORMAT_VERSION
    payload["format_version"] = "0"
    path = tmp_path / "old.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(CheckpointError) as info:
        load_checkpoint(str(path))
    assert info.value.code == "unsupported_version"


def test_truncated_checkpoint_refused(tmp_path):
    ckpt = train(RunConfig(**SMALL), _synthetic(4))
    path = tmp_path / "model.json"
    save_checkpoint(ckpt, str(path))
    text = path.read_text(encoding="utf-8")
    path.write_text(text[: len(text) // 2], encoding="utf-8")
    with pytest.raises(CheckpointError):
        load_checkpoint(str(path))


def test_checkpoint_shape_mismatch_refused():
    payload = train(RunConfig(**SMALL), _synthetic(4)).to_dict()
    payload["config"]["k"] = 7
    with pytest.raises(CheckpointError):
        Checkpoint.from_dict(payload)


def test_predict_rejects_other_vocabulary():
    ckpt = train(RunConfig(**SMALL), _synthetic(4))
    other = parse_dataset(_dataset_dict([_record("a", [])]))
    with pytest.raises(CompatibilityError):
        predict_scenes(ckpt, other)


def test_predictions_are_sorted_and_bounded():
    ckpt = train(RunConfig(**SMALL), _synthetic(6))
    predictions = predict_scenes(ckpt, _synthetic(4, seed=2), top_k=5)
    for preds in predictions.values():
        assert len(preds) <= 5
        scores = [p.score for p in preds]
        assert scores == sorted(scores, reverse=True)


# ---------- 命令行 ----------

def _write_config(tmp_path, **overrides):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({**SMALL, **overrides}), encoding="utf-8")
    return str(path)


def _chain(root: Path):
    root.mkdir()
    train_path, test_path = root / "train.json", root / "test.json"
    assert cli(["synth", "--world-seed", "7", "--scenes", "12", "--out", str(train_path), "--test-scenes", "6",
                "--test-out", str(test_path), "--objects", "4", "--verbs", "5", "--feature-dim", "4"]) == EXIT_OK
    config = _write_config(root)
    assert cli(["train", "--config", config, "--data", str(train_path), "--out", str(root / "model.json")]) == EXIT_OK
    assert cli(["eval", "--checkpoint", str(root / "model.json"), "--data", str(test_path),
                "--report", str(root / "report.json")]) == EXIT_OK
    return root


def test_cli_chain_is_reproducible(tmp_path, monkeypatch):
    monkeypatch.delenv("TMHOI_SEED", raising=False)
    a = _chain(tmp_path / "a")
    b = _chain(tmp_path / "b")
    for name in ("train.json", "test.json", "model.json", "report.json", "report.json.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()

    report = json.loads((a / "report.json").read_text(encoding="utf-8"))
    assert set(report["mAP"]) == {"full", "rare", "non_rare"}
    assert report["config"]["k"] == SMALL["k"]
    header = (a / "report.json.txt").read_text(encoding="utf-8").splitlines()[0]
    assert "full(mAP%)" in header and "rare(mAP%)" in header and "non-rare(mAP%)" in header


def test_cli_predict(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("TMHOI_SEED", raising=False)
    root = _chain(tmp_path / "p")
    capsys.readouterr()
    assert cli(["predict", "--checkpoint", str(root / "model.json"), "--data", str(root / "test.json"),
                "--top-k", "3"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert len(payload) == 6
    assert all(len(preds) <= 3 for preds in payload.values())
    assert cli(["predict", "--checkpoint", str(root / "model.json"), "--data", str(root / "test.json"),
                "--top-k", "0"]) == EXIT_VALIDATION


def test_cli_gradcheck(capsys):
    assert cli(["gradcheck", "--seed", "1"]) == EXIT_OK
    assert "max rel. err" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path):
    assert cli([]) == EXIT_VALIDATION
    assert cli(["train", "--config"]) == EXIT_VALIDATION
    assert cli(["eval", "--checkpoint", str(tmp_path / "none.json"), "--data", "x", "--report", "y"]) == EXIT_VALIDATION
    assert cli(["synth", "--world-seed", "1", "--scenes", "2", "--out", str(tmp_path / "d.json"),
                "--test-scenes", "2"]) == EXIT_VALIDATION

    data = _dataset_dict([_record("a", [], objects=())])
    data["scenes"][0]["detections"][0]["label"] = "book"
    path = tmp_path / "nopairs.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    assert cli(["train", "--config", _write_config(tmp_path), "--data", str(path),
                "--out", str(tmp_path / "m.json")]) == EXIT_RUNTIME


def test_cli_unwritable_output_is_runtime_error(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("x", encoding="utf-8")
    # 父路径是普通文件，无法创建目录
    assert cli(["synth", "--world-seed", "1", "--scenes", "2", "--out", str(blocker / "x.json")]) == EXIT_RUNTIME


def test_cli_synth_appearance_noise(tmp_path):
    quiet, noisy = tmp_path / "quiet.json", tmp_path / "noisy.json"
    common = ["--world-seed", "3", "--scenes", "20", "--objects", "4", "--verbs", "5", "--feature-dim", "4", "--clean"]
    assert cli(["synth", *common, "--out", str(quiet), "--appearance-noise", "0"]) == EXIT_OK
    assert cli(["synth", *common, "--out", str(noisy)]) == EXIT_OK
    assert cli(["synth", *common, "--out", str(noisy), "--appearance-noise", "-1"]) == EXIT_VALIDATION

    # 无噪声时同类别的特征完全相同
    features = {}
    for scene in load_dataset(str(quiet)).scenes:
        for det in scene.detections:
            features.setdefault(det.label, set()).add(tuple(det.feature))
    assert all(len(v) == 1 for v in features.values())
    noisy_scenes = load_dataset(str(noisy)).scenes
    assert len({tuple(d.feature) for s in noisy_scenes for d in s.detections}) > len(features)


def test_evaluation_predicts_only_evaluated_classes():
    test_data = _synthetic(6, seed=1)
    ckpt = train(RunConfig(**{**SMALL, "score_floor": 0.0}), _synthetic(8))
    universe = class_universe(test_data.splits, test_data.ground_truth)
    report, predictions = evaluate_checkpoint(ckpt, test_data)
    assert set(report.per_class) == universe
    emitted = {HoiClass(p.label, p.verb) for preds in predictions.values() for p in preds}
    assert emitted and emitted <= universe


def _report(full):
    return EvalReport(per_class={}, gt_counts={}, full=full, rare=None, non_rare=full)


def test_ablation_wins_and_means():
    result = AblationResult(seeds=[0, 1, 2], reports={
        0: [_report(0.2), _report(0.3), _report(None)],
        50: [_report(0.25), _report(0.3), _report(0.4)],
    })
    # 同分不算胜出，缺失值不参与比较
    assert result.wins(50) == 1
    assert result.wins(0, baseline=50) == 0
    assert result.mean(50, "full") == pytest.approx(0.95 / 3)
    assert result.mean(0, "full") == pytest.approx(0.25)
    assert result.mean(0, "rare") is None


def test_ablation_runs_every_setting():
    result = ablate(_synthetic(12), _synthetic(6, seed=1), RunConfig(**SMALL), ks=(0, 3), seeds=(0, 1))
    payload = result.to_dict()
    assert [row["k"] for row in payload["rows"]] == [0, 3]
    assert all(len(row["full_by_seed"]) == 2 for row in payload["rows"])
    assert "k=3" in result.format_table()
    # 同一配置与种子重跑结果一致
    again = ablate(_synthetic(12), _synthetic(6, seed=1), RunConfig(**SMALL), ks=(3,), seeds=(1,))
    assert again.full_by_seed(3) == [result.full_by_seed(3)[1]]


@pytest.mark.slow
def test_translation_features_beat_appearance_only(tmp_path, monkeypatch):
    # 世界种子7，M=12，N=16，sparsity 0.25，500/200 张图像，12 个 epoch
    monkeypatch.delenv("TMHOI_SEED", raising=False)
    train_path, test_path = tmp_path / "train.json", tmp_path / "test.json"
    assert cli(["synth", "--world-seed", "7", "--scenes", "500", "--out", str(train_path),
                "--test-scenes", "200", "--test-out", str(test_path)]) == EXIT_OK
    result = ablate(load_dataset(str(train_path)), load_dataset(str(test_path)), RunConfig(),
                    ks=(0, 50), seeds=range(5))
    assert result.wins(50) >= 4
    assert result.mean(50, "full") > result.mean(0, "full")
