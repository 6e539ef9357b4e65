# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
工具模块
"""

from .config import Config
from .csv_utils import CsvProcessor
from .errors import FormatError, HoloVoteError

__all__ = ["Config", "CsvProcessor", "FormatError", "HoloVoteError"]
