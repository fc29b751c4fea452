"""
基于平移嵌入的人-物交互检测（二阶段） - 主程序入口
"""

import sys
from pathlib import Path

# 添加项目根目录到Python路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src.utils.config import config
from src.utils.logger import logger
from src.pipeline.cli import cli, EXIT_VALIDATION


def main():
    """主函数"""
    # 验证环境配置
    is_valid, errors = config.validate_config()
    if not is_valid:
        for error in errors:
            logger.error(f"配置验证失败: {error}")
        print("参考配置模板: config/env_template.txt", file=sys.stderr)
        sys.exit(EXIT_VALIDATION)

    try:
        sys.exit(cli(sys.argv[1:]))
    except KeyboardInterrupt:
        print("\n程序被用户中断", file=sys.stderr)
        sys.exit(130)


if __name__ == "__main__":
    main()
