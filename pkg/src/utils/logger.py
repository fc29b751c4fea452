"""
日志配置模块
提供统一的日志管理功能
"""

import logging
import sys
from pathlib import Path
from logging.handlers import RotatingFileHandler
from typing import Dict, Any

from .config import config


class ColoredFormatter(logging.Formatter):
    """彩色日志格式化器"""

    # ANSI颜色代码
    COLORS = {
        'DEBUG': '\033[36m',     # 青色
        'INFO': '\033[32m',      # 绿色
        'WARNING': '\033[33m',   # 黄色
        'ERROR': '\033[31m',     # 红色
        'CRITICAL': '\033[35m',  # 紫色
    }
    RESET = '\033[0m'

    def format(self, record):
        color = self.COLORS.get(record.levelname, self.RESET)
        formatted = super().format(record)

        # 只在终端输出时添加颜色
        if hasattr(sys.stderr, 'isatty') and sys.stderr.isatty():
            return f"{color}{formatted}{self.RESET}"

        return formatted


class HoiLogger:
    """HOI检测系统日志管理器"""

    LOG_FORMAT = "%(asctime)s | %(name)s | %(levelname)s | %(filename)s:%(lineno)d | %(message)s"
    DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

    def __init__(self, name: str = "TMHOI"):
        self.logger = logging.getLogger(name)
        self._setup_logger()

    def _setup_logger(self):
        """设置日志配置"""
        # 防止重复添加处理器
        if self.logger.handlers:
            return

        level = getattr(logging, config.log.level.upper(), logging.INFO)
        self.logger.setLevel(level)

        # 控制台输出到stderr，stdout留给命令结果
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.setFormatter(ColoredFormatter(self.LOG_FORMAT, self.DATE_FORMAT))
        self.logger.addHandler(console_handler)

        self._setup_file_handler()

        self.logger.propagate = False

    def _setup_file_handler(self):
        """设置文件日志处理器"""
        try:
            log_file = Path(config.log.file_path)
            log_file.parent.mkdir(parents=True, exist_ok=True)

            file_handler = RotatingFileHandler(
                filename=str(log_file),
                maxBytes=5 * 1024 * 1024,
                backupCount=3,
                encoding='utf-8',
                delay=True  # 延迟创建文件，避免权限问题
            )
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(logging.Formatter(self.LOG_FORMAT, self.DATE_FORMAT))
            self.logger.addHandler(file_handler)

        except Exception as e:
            # 如果文件日志设置失败，只输出到控制台
            print(f"警告: 文件日志设置失败: {e}", file=sys.stderr)

    def debug(self, message: str, **kwargs):
        """调试日志"""
        self.logger.debug(message, **kwargs)

    def info(self, message: str, **kwargs):
        """信息日志"""
        self.logger.info(message, **kwargs)

    def warning(self, message: str, **kwargs):
        """警告日志"""
        self.logger.warning(message, **kwargs)

    def error(self, message: str, **kwargs):
        """错误日志"""
        self.logger.error(message, **kwargs)

    def exception(self, message: str, **kwargs):
        """异常日志（自动包含异常堆栈）"""
        self.logger.exception(message, **kwargs)

    def log_error_with_context(self, error: Exception, context: Dict[str, Any]):
        """记录带上下文的错误"""
        self.error(f"错误: {error}, 上下文: {context}")


class TrainingLogger(HoiLogger):
    """训练过程专用日志器"""

    def __init__(self):
        super().__init__("Training")

    def log_epoch(self, epoch: int, epochs: int, total: float, l_t: float, l_w: float, l_v: float, pairs: int):
        """记录每个epoch的损失分量"""
        self.info(
            f"epoch {epoch}/{epochs}: 总损失={total:.6f} L_T={l_t:.6f} L_W={l_w:.6f} L_V={l_v:.6f} 样本对={pairs}"
        )

    def log_batch(self, epoch: int, batch: int, total: float):
        """记录单个batch损失"""
        self.debug(f"epoch {epoch} batch {batch}: 损失={total:.6f}")


class EvalLogger(HoiLogger):
    """评估过程专用日志器"""

    def __init__(self):
        super().__init__("Evaluation")

    def log_report(self, full, rare, non_rare, num_classes: int):
        """记录评估结果"""
        def fmt(value):
            return "n/a" if value is None else f"{value * 100:.2f}%"

        self.info(
            f"mAP full={fmt(full)} rare={fmt(rare)} non-rare={fmt(non_rare)} (类别数={num_classes})"
        )


# 创建全局日志实例
logger = HoiLogger()
training_logger = TrainingLogger()
eval_logger = EvalLogger()


def get_logger(name: str) -> HoiLogger:
    """
    获取指定名称的日志器

    Args:
        name: 日志器名称

    Returns:
        日志器实例
    """
    return HoiLogger(name)
