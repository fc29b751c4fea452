"""
配置管理模块
负责加载和管理应用程序的环境配置（日志、数据目录、随机种子覆盖）
"""

import os
from pathlib import Path
from typing import Optional
from dataclasses import dataclass

from dotenv import load_dotenv


@dataclass
class LogConfig:
    """日志配置"""
    level: str
    file_path: str


@dataclass
class RuntimeConfig:
    """运行时配置"""
    data_dir: str
    seed_override: Optional[int] = None


class Config:
    """应用程序主配置类"""

    SEED_ENV = "TMHOI_SEED"

    def __init__(self, env_file: Optional[str] = None):
        """
        初始化配置

        Args:
            env_file: 环境变量文件路径，默认为项目根目录下的.env
        """
        self.project_root = Path(__file__).parent.parent.parent

        # 加载环境变量
        if env_file:
            load_dotenv(env_file)
        else:
            env_path = self.project_root / ".env"
            if env_path.exists():
                load_dotenv(env_path)

        self._load_configs()

    def _load_configs(self):
        """加载所有配置"""
        self.log = self._load_log_config()
        self.runtime = self._load_runtime_config()

    def _load_log_config(self) -> LogConfig:
        """加载日志配置"""
        default_log_path = str(self.project_root / "data/logs/tmhoi.log")
        return LogConfig(
            level=self._get_env("LOG_LEVEL", "INFO"),
            file_path=self._get_env("LOG_FILE_PATH", default_log_path)
        )

    def _load_runtime_config(self) -> RuntimeConfig:
        """加载运行时配置"""
        try:
            seed = self.seed_override()
        except ValueError:
            # 留给 validate_config 报告
            seed = None
        return RuntimeConfig(
            data_dir=self._get_env("TMHOI_DATA_DIR", str(self.project_root / "data")),
            seed_override=seed
        )

    def seed_override(self) -> Optional[int]:
        """
        读取随机种子覆盖值（每次调用时重新读取环境变量）

        Returns:
            整数种子；未设置时返回None

        Raises:
            ValueError: 环境变量不是整数
        """
        raw = os.getenv(self.SEED_ENV)
        if raw is None or raw.strip() == "":
            return None
        return int(raw.strip())

    def _get_env(self, key: str, default: Optional[str] = None) -> str:
        """
        获取环境变量

        Args:
            key: 环境变量键名
            default: 默认值

        Returns:
            环境变量值
        """
        value = os.getenv(key, default)
        return value or (default or "")

    def validate_config(self) -> tuple[bool, list[str]]:
        """
        验证配置的有效性

        Returns:
            (是否有效, 错误信息列表)
        """
        errors = []

        if self.log.level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            errors.append(f"日志级别无效: {self.log.level}")
        try:
            self.seed_override()
        except ValueError:
            errors.append(f"{self.SEED_ENV} 必须是整数")

        return len(errors) == 0, errors


# 全局配置实例
config = Config()
