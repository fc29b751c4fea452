# Orchestration: run config, dataset/checkpoint files, training, evaluation, CLI
from .run_config import RunConfig, load_run_config, parse_run_config
from .dataset import Dataset, load_dataset, save_dataset, parse_dataset, golden_set, DATASET_FORMAT_VERSION
from .checkpoint import Checkpoint, TrainingMetadata, save_checkpoint, load_checkpoint, CHECKPOINT_FORMAT_VERSION
from .trainer import BatchLoss, build_model, train
from .evaluation import evaluate_checkpoint, predict_scenes, write_report
from .ablation import AblationResult, ablate
from .gradcheck_suite import run_gradcheck_suite, GRADCHECK_TOLERANCE
from .cli import cli, build_parser

__all__ = [
    "RunConfig", "load_run_config", "parse_run_config", "Dataset", "load_dataset", "save_dataset",
    "parse_dataset", "golden_set", "DATASET_FORMAT_VERSION", "Checkpoint", "TrainingMetadata",
    "save_checkpoint", "load_checkpoint", "CHECKPOINT_FORMAT_VERSION", "BatchLoss", "build_model",
    "train", "evaluate_checkpoint", "predict_scenes", "write_report", "AblationResult", "ablate",
    "run_gradcheck_suite", "GRADCHECK_TOLERANCE", "cli", "build_parser",
]
