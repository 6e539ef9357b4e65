# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
日志配置模块
"""

import logging
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

_ROOT_LOGGER = "src"


def setup_logging(verbose: bool = False, console: Optional[Console] = None) -> logging.Logger:
    """
    为整个包安装Rich日志处理器，重复调用只调整级别

    Args:
        verbose: 是否输出调试日志
        console: 日志输出使用的控制台，默认写到标准错误

    Returns:
        logging.Logger: 包的根日志器
    """
    logger = logging.getLogger(_ROOT_LOGGER)
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)

    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(
            console=console or Console(stderr=True),
            show_path=False,
            rich_tracebacks=True,
        )
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
        logger.propagate = False

    return logger
