"""
异常定义模块
统一的异常层级：校验类错误（命令行退出码1）与运行时错误（退出码2）
"""

from typing import Optional, Dict, Any


class HoiError(Exception):
    """HOI检测系统基础异常"""

    def __init__(self, message: str, code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.code = code
        self.details = details or {}


class HoiValidationError(HoiError):
    """输入或数据校验失败"""


class HoiRuntimeError(HoiError):
    """运行过程中的数值或训练错误"""


# 校验类
class ShapeError(HoiValidationError):
    """矩阵/向量维度不匹配"""


class VocabError(HoiValidationError):
    """标签或ID超出词表范围"""


class GeometryError(HoiValidationError):
    """边界框退化或坐标非法"""


class ConstraintError(HoiValidationError):
    """参数约束不满足（如法向量非单位长度）"""


class PairingError(HoiValidationError):
    """正负三元组数量不一致"""


class DatasetError(HoiValidationError):
    """数据集文件解析或校验失败"""


class CheckpointError(HoiValidationError):
    """检查点文件解析失败或版本不被支持"""


class CompatibilityError(HoiValidationError):
    """检查点与数据集词表不一致"""


class ConfigError(HoiValidationError):
    """运行配置非法"""


class UsageError(HoiValidationError):
    """命令行用法错误"""


# 运行时类
class NumericError(HoiRuntimeError):
    """出现非有限数值"""


class SamplingError(HoiRuntimeError):
    """负样本池为空"""


class DegenerateParameterError(HoiRuntimeError):
    """参数退化（如零范数的法向量）"""


class TrainingError(HoiRuntimeError):
    """训练过程无法继续"""
