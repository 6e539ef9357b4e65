# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
异常定义模块

引擎内部只抛出这些异常，由CLI统一转换为退出码。
"""

from typing import Optional


class HoloVoteError(RuntimeError):
    """所有引擎异常的基类"""


class InvalidArgumentError(HoloVoteError, ValueError):
    """参数不满足前置条件"""


class NoRepresentativeError(HoloVoteError):
    """模型一没有任何活跃成员可作为代表"""


class NoAbsorberError(HoloVoteError):
    """网络中没有活跃成员吸收权力"""


class NoDecisionError(HoloVoteError):
    """没有可用于决策的活跃成员或选票"""


class InvalidBallotError(HoloVoteError, ValueError):
    """选票格式或投票人不合法"""


class PhaseViolationError(HoloVoteError):
    """模型池的阶段转换不合法"""


class ConflictError(HoloVoteError):
    """模型条目ID重复"""


class NoCandidatesError(HoloVoteError):
    """模型池为空，无法进入决策阶段"""


class FormatError(HoloVoteError):
    """
    文件内容格式错误

    Args:
        message: 错误描述
        line: 出错的行号（从1开始），未知时为None
    """

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")
