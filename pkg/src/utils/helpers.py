"""
通用辅助函数模块
提供项目中常用的工具函数
"""

import json
from pathlib import Path
from typing import Optional, Any, List


def chunk_list(lst: List[Any], chunk_size: int) -> List[List[Any]]:
    """
    将列表分块

    Args:
        lst: 原始列表
        chunk_size: 块大小

    Returns:
        分块后的列表
    """
    return [lst[i:i + chunk_size] for i in range(0, len(lst), chunk_size)]


def format_percentage(value: Optional[float], decimals: int = 2) -> str:
    """
    格式化百分比显示（输入为0-1之间的比例）

    Args:
        value: 比例值
        decimals: 小数位数

    Returns:
        格式化后的百分比字符串
    """
    if value is None:
        return "N/A"

    return f"{value * 100:.{decimals}f}"


def parse_int_list(text: str) -> List[int]:
    """
    解析逗号分隔的整数列表，如 "0,30,50"

    Args:
        text: 原始文本

    Returns:
        整数列表
    """
    return [int(part) for part in text.split(",") if part.strip()]


def dump_json(payload: Any) -> str:
    """
    确定性的JSON序列化（相同输入得到相同字节）

    Args:
        payload: 可序列化对象

    Returns:
        JSON文本，以换行结尾
    """
    return json.dumps(payload, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_text(path: str, text: str) -> None:
    """
    写入文本文件，自动创建父目录

    Args:
        path: 文件路径
        text: 文件内容
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")
