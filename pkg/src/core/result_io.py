# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
结果输入输出模块

将成员、委托边、权力分配、扫描记录和模型池快照写成CSV/文本文件，
并能把成员与边文件、扫描结果文件读回。表格读写基于 pandas。
"""

import logging
import math
import re
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

import pandas as pd

from ..utils.config import Config
from ..utils.csv_utils import CsvProcessor
from ..utils.errors import FormatError, HoloVoteError
from .aggregate import Ballot
from .network import DelegationEdge, DelegationNetwork, Member
from .power import PowerAssignment
from .simharness import SweepRecord
from .workspace import ModelPool

logger = logging.getLogger(__name__)

MEMBER_HEADER = ("id", "opinion", "active")
EDGE_HEADER = ("from", "to", "weight", "domain")
POWER_HEADER = ("id", "power")
SWEEP_HEADER = ("topology", "participation", "mean_error", "std_error", "mean_stranded", "trials")
PLURALITY_HEADER = ("voter", "choice")
BORDA_HEADER = ("voter", "rank1")


class ResultWriter:
    """结果文件写入器类"""

    def __init__(self, output_dir: Optional[Path] = None) -> None:
        """
        初始化写入器

        Args:
            output_dir: 输出目录，默认使用配置中的目录
        """
        self.output_dir = output_dir or Config.get_output_dir()
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def save_members(self, members: Sequence[Member], filename: str = Config.MEMBERS_FILENAME) -> Path:
        """
        保存成员文件 id,opinion,active（active 写作 0/1）

        Returns:
            Path: 写出的文件路径
        """
        ordered = sorted(members, key=lambda m: m.id)
        frame = pd.DataFrame(
            {
                "id": [m.id for m in ordered],
                "opinion": [float(m.opinion) for m in ordered],
                "active": [int(m.active) for m in ordered],
            },
            columns=list(MEMBER_HEADER),
        )
        return self._write(filename, frame)

    def save_edges(self, network: DelegationNetwork, filename: str = Config.EDGES_FILENAME) -> Path:
        """保存委托边文件 from,to,weight,domain"""
        edges = list(network.edges())
        frame = pd.DataFrame(
            {
                "from": [e.source for e in edges],
                "to": [e.target for e in edges],
                "weight": [float(e.weight) for e in edges],
                "domain": [e.domain or "" for e in edges],
            },
            columns=list(EDGE_HEADER),
        )
        return self._write(filename, frame)

    def save_power(self, assignment: PowerAssignment, filename: str = "power.csv") -> Path:
        """保存权力分配 id,power，末行为 stranded,<value>"""
        items = sorted(assignment.absorbed.items())
        frame = pd.DataFrame(
            {
                "id": [str(member_id) for member_id, _ in items] + ["stranded"],
                "power": [float(power) for _, power in items] + [float(assignment.stranded)],
            },
            columns=list(POWER_HEADER),
        )
        return self._write(filename, frame)

    def save_pool_snapshot(self, pool: ModelPool, filename: str) -> Path:
        """保存模型池快照"""
        path = self.output_dir / filename
        path.write_text(pool.snapshot(), encoding="utf-8")
        logger.info("pool snapshot saved: %s", path)
        return path

    def _write(self, filename: str, frame: pd.DataFrame) -> Path:
        path = _write_frame(frame, self.output_dir / filename, Config.EXPORT_DIGITS)
        logger.info("saved %d rows to %s", len(frame), path)
        return path


def save_sweep(records: Sequence[SweepRecord], file_path: Path) -> Path:
    """
    保存扫描结果，实数保留15位有效数字

    Returns:
        Path: 写出的文件路径
    """
    return _write_frame(sweep_frame(records), file_path, Config.RESULT_DIGITS)


def sweep_frame(records: Sequence[SweepRecord]) -> pd.DataFrame:
    """把扫描记录转成按 SWEEP_HEADER 排列的 DataFrame"""
    return pd.DataFrame(
        [
            (
                r.topology,
                float(r.participation),
                float(r.mean_error),
                float(r.std_error),
                float(r.mean_stranded_fraction),
                int(r.trials),
            )
            for r in records
        ],
        columns=list(SWEEP_HEADER),
    )


def load_sweep(file_path: Path) -> List[SweepRecord]:
    """
    读取扫描结果文件

    Raises:
        FormatError: 文件缺失或某行格式错误（带行号），统计量必须为有限值
    """
    records = []
    for line, row in _read_table(file_path, SWEEP_HEADER):
        participation = CsvProcessor.parse_real(row[1], line, "participation")
        mean_error = CsvProcessor.parse_real(row[2], line, "mean_error")
        std_error = CsvProcessor.parse_real(row[3], line, "std_error")
        stranded = CsvProcessor.parse_real(row[4], line, "mean_stranded")
        trials = CsvProcessor.parse_int(row[5], line, "trials")
        if not row[0]:
            raise FormatError("topology label is empty", line=line)
        if not all(math.isfinite(v) for v in (participation, mean_error, std_error, stranded)):
            raise FormatError("statistics must be finite numbers", line=line)
        if mean_error < 0 or std_error < 0 or trials < 1 or not 0.0 <= stranded <= 1.0:
            raise FormatError("statistic out of range", line=line)
        records.append(
            SweepRecord(
                topology=row[0],
                participation=participation,
                mean_error=mean_error,
                std_error=std_error,
                mean_stranded_fraction=stranded,
                trials=trials,
            )
        )
    if not records:
        raise FormatError(f"{file_path} holds no records", line=1)
    return records


def load_members(file_path: Path) -> List[Member]:
    """读取成员文件"""
    members = []
    for line, row in _read_table(file_path, MEMBER_HEADER):
        if row[2] not in ("0", "1"):
            raise FormatError(f"field 'active' must be 0 or 1, got {row[2]!r}", line=line)
        try:
            members.append(
                Member(
                    id=CsvProcessor.parse_int(row[0], line, "id"),
                    opinion=CsvProcessor.parse_real(row[1], line, "opinion"),
                    active=row[2] == "1",
                )
            )
        except FormatError:
            raise
        except HoloVoteError as e:
            raise FormatError(str(e), line=line)
    return members


def load_network(members_path: Path, edges_path: Path) -> DelegationNetwork:
    """
    读取成员和边文件并重建网络

    Raises:
        FormatError: 文件格式错误或网络不满足不变量
    """
    members = load_members(members_path)
    edges = []
    for line, row in _read_table(edges_path, EDGE_HEADER):
        try:
            edges.append(
                DelegationEdge(
                    source=CsvProcessor.parse_int(row[0], line, "from"),
                    target=CsvProcessor.parse_int(row[1], line, "to"),
                    weight=CsvProcessor.parse_real(row[2], line, "weight"),
                    domain=row[3] or None,
                )
            )
        except FormatError:
            raise
        except HoloVoteError as e:
            raise FormatError(str(e), line=line)
    try:
        return DelegationNetwork.from_edges(members, edges)
    except HoloVoteError as e:
        raise FormatError(f"{edges_path}: {e}")


def load_ballots(file_path: Path, borda: bool = False) -> List[Ballot]:
    """
    读取选票文件：多数票为 voter,choice；Borda 为 voter,rank1,rank2,...

    Borda 文件各行列数不等，仍用 csv 逐行读取。权重不在文件中，统一为1。
    """
    header = BORDA_HEADER if borda else PLURALITY_HEADER
    ballots = []
    for line, row in CsvProcessor.read_rows(file_path, header, min_columns=2 if borda else None):
        voter = CsvProcessor.parse_int(row[0], line, "voter")
        ranking = tuple(cell for cell in row[1:] if cell)
        try:
            ballots.append(Ballot(voter=voter, ranking=ranking))
        except HoloVoteError as e:
            raise FormatError(str(e), line=line)
    return ballots


def _write_frame(frame: pd.DataFrame, file_path: Path, digits: int) -> Path:
    frame.to_csv(file_path, index=False, float_format=f"%.{digits}g", lineterminator="\n")
    return file_path


def _read_table(file_path: Path, header: Sequence[str]) -> Iterator[Tuple[int, List[str]]]:
    """
    读取定宽CSV表，逐行给出 (行号, 字段列表)

    表头行也按数据读入，空行保留为缺失行，因此 DataFrame 行号加1即文件行号。

    Raises:
        FormatError: 文件无法读取、为空、表头不符或某行列数不对
    """
    try:
        frame = pd.read_csv(
            file_path,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        raise FormatError(f"{file_path} is empty", line=1)
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        raise FormatError(f"malformed row in {file_path}", line=int(match.group(1)) if match else None)
    except (OSError, UnicodeDecodeError) as e:
        raise FormatError(f"cannot read {file_path}: {e}")

    expected = list(header)
    rows = frame.itertuples(index=False, name=None)
    first = list(next(rows))
    if first[: len(expected)] != expected or len(first) != len(expected):
        raise FormatError(f"expected header {','.join(expected)}", line=1)

    for index, values in enumerate(rows, start=1):
        fields = list(values)
        present = [not pd.isna(v) for v in fields]
        if not any(present):
            continue
        line = index + 1
        if not all(present):
            raise FormatError(f"expected {len(expected)} fields, found {sum(present)}", line=line)
        yield line, [str(v) for v in fields]
