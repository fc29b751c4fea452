"""
命令行接口
子命令：synth / train / eval / predict / gradcheck / ablate
退出码：0 成功，1 校验或用法错误，2 运行时错误（含输出文件无法写入）
"""

import argparse
import sys
from typing import List, Optional

import numpy as np

from .ablation import DEFAULT_KS, DEFAULT_SEEDS, ablate
from .checkpoint import load_checkpoint, save_checkpoint
from .dataset import Dataset, load_dataset, save_dataset
from .evaluation import evaluate_checkpoint, predict_scenes, predictions_payload, write_report
from .gradcheck_suite import GRADCHECK_TOLERANCE, run_gradcheck_suite
from .run_config import RunConfig, load_run_config
from .trainer import train
from ..hoieval import SplitTable
from ..synthgen import (
    DEFAULT_APPEARANCE_NOISE, NoiseConfig, corrupt_to_detections, generate_scenes, generate_world,
)
from ..utils.errors import HoiRuntimeError, HoiValidationError, NumericError, UsageError
from ..utils.helpers import dump_json, parse_int_list, write_text
from ..utils.logger import get_logger

logger = get_logger("CLI")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class HoiArgumentParser(argparse.ArgumentParser):
    """用法错误时抛出 UsageError 而不是直接退出"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> List[int]:
    try:
        return parse_int_list(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"需要逗号分隔的整数列表: {text!r}")


def build_parser() -> HoiArgumentParser:
    """构建命令行解析器"""
    parser = HoiArgumentParser(
        prog="tmhoi",
        description="基于平移嵌入的人-物交互检测（二阶段）",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用示例:
  python main.py synth --world-seed 7 --scenes 500 --out data/train.json --test-scenes 200 --test-out data/test.json
  python main.py train --config config/run_config_example.json --data data/train.json --out data/model.json
  python main.py eval --checkpoint data/model.json --data data/test.json --report data/report.json
  python main.py predict --checkpoint data/model.json --data data/test.json --top-k 10
  python main.py gradcheck
  python main.py ablate --train data/train.json --test data/test.json --k 0,50 --seeds 0,1
        """,
    )
    parser.add_argument("--version", action="version", version="tmhoi 1.0.0")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=HoiArgumentParser)

    synth = sub.add_parser("synth", help="生成合成数据集")
    synth.add_argument("--world-seed", type=int, required=True, help="世界种子")
    synth.add_argument("--scenes", type=int, required=True, help="训练集图像数")
    synth.add_argument("--out", required=True, help="训练集输出路径")
    synth.add_argument("--test-scenes", type=int, default=0, help="测试集图像数")
    synth.add_argument("--test-out", help="测试集输出路径")
    synth.add_argument("--objects", type=int, default=12, help="物体类别数 M（含person）")
    synth.add_argument("--verbs", type=int, default=16, help="动作数 N")
    synth.add_argument("--sparsity", type=float, default=0.25, help="每个类别支持的动作比例")
    synth.add_argument("--feature-dim", type=int, default=32, help="外观特征维度")
    synth.add_argument(
        "--appearance-noise", type=float, default=DEFAULT_APPEARANCE_NOISE, help="外观特征噪声标准差"
    )
    synth.add_argument("--jitter", type=float, default=4.0, help="框抖动标准差（像素）")
    synth.add_argument("--miss-rate", type=float, default=0.05, help="漏检率")
    synth.add_argument("--fp-rate", type=float, default=0.1, help="误检率")
    synth.add_argument("--flip-rate", type=float, default=0.02, help="类别翻转率")
    synth.add_argument("--clean", action="store_true", help="不加检测噪声")

    tr = sub.add_parser("train", help="训练模型")
    tr.add_argument("--config", required=True, help="运行配置JSON")
    tr.add_argument("--data", required=True, help="训练集")
    tr.add_argument("--out", required=True, help="检查点输出路径")

    ev = sub.add_parser("eval", help="评估检查点")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--report", required=True, help="报告输出路径（另写 .txt 表格）")

    pr = sub.add_parser("predict", help="输出预测")
    pr.add_argument("--checkpoint", required=True)
    pr.add_argument("--data", required=True)
    pr.add_argument("--top-k", type=int, default=None, help="每张图像最多输出的预测数")
    pr.add_argument("--out", help="输出JSON路径，缺省时打印到标准输出")

    gc = sub.add_parser("gradcheck", help="运行有限差分梯度校验")
    gc.add_argument("--seed", type=int, default=0)

    ab = sub.add_parser("ablate", help="平移嵌入维度消融实验")
    ab.add_argument("--train", required=True)
    ab.add_argument("--test", required=True)
    ab.add_argument("--config", help="基础运行配置JSON")
    ab.add_argument("--k", type=_int_list, default=list(DEFAULT_KS))
    ab.add_argument("--seeds", type=_int_list, default=list(DEFAULT_SEEDS))
    ab.add_argument("--epochs", type=int, default=None)
    ab.add_argument("--report", help="结果JSON输出路径")
    return parser


def cmd_synth(args) -> int:
    world = generate_world(
        args.world_seed, args.objects, args.verbs, args.sparsity, args.feature_dim, args.appearance_noise
    )
    noise = NoiseConfig() if args.clean else NoiseConfig(args.jitter, args.miss_rate, args.fp_rate, args.flip_rate)

    def build(count: int, stream: int, prefix: str):
        rng = np.random.default_rng([args.world_seed, stream])
        samples = generate_scenes(world, count, rng, prefix)
        return [corrupt_to_detections(s, noise, rng, world) for s in samples]

    train_scenes = build(args.scenes, 1, "train")
    splits = SplitTable.from_ground_truth(s.ground_truth for s in train_scenes)
    save_dataset(Dataset(world.vocab, world.feature_dim, train_scenes, splits), args.out)

    if args.test_scenes > 0:
        if not args.test_out:
            raise UsageError("--test-scenes 需要同时指定 --test-out")
        test_scenes = build(args.test_scenes, 2, "test")
        save_dataset(Dataset(world.vocab, world.feature_dim, test_scenes, splits), args.test_out)
    return EXIT_OK


def cmd_train(args) -> int:
    config = load_run_config(args.config)
    dataset = load_dataset(args.data)
    save_checkpoint(train(config, dataset), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    dataset = load_dataset(args.data)
    report, _ = evaluate_checkpoint(ckpt, dataset)
    print(write_report(args.report, report, ckpt, dataset), end="")
    return EXIT_OK


def cmd_predict(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    dataset = load_dataset(args.data)
    if args.top_k is not None and args.top_k < 1:
        raise UsageError(f"--top-k 必须 ≥ 1: {args.top_k}")
    text = dump_json(predictions_payload(predict_scenes(ckpt, dataset, args.top_k), dataset))
    if args.out:
        write_text(args.out, text)
    else:
        print(text, end="")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    results = run_gradcheck_suite(args.seed)
    for name, err in results.items():
        print(f"{name:<16} max rel. err {err:.3e}")
    worst = max(results.values())
    print(f"{'overall':<16} max rel. err {worst:.3e}")
    if worst > GRADCHECK_TOLERANCE:
        raise NumericError(f"梯度校验失败: 最大相对误差 {worst:.3e} > {GRADCHECK_TOLERANCE}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    base = load_run_config(args.config) if args.config else RunConfig().with_env_overrides()
    train_data = load_dataset(args.train)
    test_data = load_dataset(args.test)
    result = ablate(train_data, test_data, base, args.k, args.seeds, args.epochs)
    print(result.format_table(), end="")
    if args.report:
        write_text(args.report, dump_json(result.to_dict()))
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "gradcheck": cmd_gradcheck,
    "ablate": cmd_ablate,
}


def cli(argv: Optional[List[str]] = None) -> int:
    """
    命令行入口

    Args:
        argv: 参数列表，默认取 sys.argv[1:]

    Returns:
        退出码
    """
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except HoiValidationError as e:
        logger.error(f"校验失败: {e.message}")
        return EXIT_VALIDATION
    except HoiRuntimeError as e:
        logger.error(f"运行失败: {e.message}")
        return EXIT_RUNTIME
    except OSError as e:
        logger.error(f"文件读写失败: {e.filename or ''} {e.strerror or e}")
        return EXIT_RUNTIME
