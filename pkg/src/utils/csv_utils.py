# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
CSV处理工具模块

提供实数格式化、确定性渲染和带行号校验的读取功能。
"""

import csv
import io
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

from .config import Config
from .errors import FormatError


class CsvProcessor:
    """CSV处理器类"""

    @staticmethod
    def format_real(value: float, digits: int = Config.RESULT_DIGITS) -> str:
        """
        按有效数字位数格式化实数

        Args:
            value: 实数
            digits: 有效数字位数

        Returns:
            str: 格式化后的文本
        """
        return format(float(value), f".{digits}g")

    @staticmethod
    def render_rows(
        header: Optional[Sequence[str]],
        rows: Sequence[Sequence[object]],
        quoting: int = csv.QUOTE_MINIMAL,
    ) -> str:
        """
        将表头和数据行渲染为CSV文本，换行符固定为\\n

        Args:
            header: 表头，None表示不写表头
            rows: 数据行
            quoting: csv 引号策略

        Returns:
            str: CSV文本
        """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n", quoting=quoting)
        if header is not None:
            writer.writerow(header)
        writer.writerows(rows)
        return buffer.getvalue()

    @staticmethod
    def read_rows(
        file_path: Path,
        header: Sequence[str],
        min_columns: Optional[int] = None,
    ) -> Iterator[Tuple[int, List[str]]]:
        """
        读取CSV文件并校验表头和列数

        Args:
            file_path: 文件路径
            header: 期望的表头
            min_columns: 每行最少列数，默认等于表头列数

        Yields:
            Tuple[int, List[str]]: (行号, 字段列表)

        Raises:
            FormatError: 文件为空、表头不符或某行列数不对
        """
        try:
            text = file_path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise FormatError(f"cannot read {file_path}: {e}")

        expected = list(header)
        width = len(expected) if min_columns is None else min_columns
        reader = csv.reader(io.StringIO(text))

        first = next(reader, None)
        if first is None:
            raise FormatError(f"{file_path} is empty", line=1)
        if first[: len(expected)] != expected:
            raise FormatError(f"expected header {','.join(expected)}", line=1)

        for row in reader:
            if not row:
                continue
            line = reader.line_num
            if min_columns is None and len(row) != width:
                raise FormatError(f"expected {width} fields, found {len(row)}", line=line)
            if len(row) < width:
                raise FormatError(f"expected at least {width} fields, found {len(row)}", line=line)
            yield line, row

    @staticmethod
    def parse_real(text: str, line: int, field: str) -> float:
        """
        解析实数字段

        Raises:
            FormatError: 字段不是实数
        """
        try:
            return float(text)
        except ValueError:
            raise FormatError(f"field '{field}' is not a number: {text!r}", line=line)

    @staticmethod
    def parse_int(text: str, line: int, field: str) -> int:
        """
        解析整数字段

        Raises:
            FormatError: 字段不是整数
        """
        try:
            return int(text)
        except ValueError:
            raise FormatError(f"field '{field}' is not an integer: {text!r}", line=line)
