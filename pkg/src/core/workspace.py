# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
集体工作区模块

问题模型池和解决方案模型池的状态机：建模阶段池子增长，决策阶段剪枝到唯一胜者；
问题生成与方案生成串联构成完整的问题求解循环。
"""

import csv
import io
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from ..utils.csv_utils import CsvProcessor
from ..utils.errors import (
    ConflictError,
    FormatError,
    InvalidArgumentError,
    NoCandidatesError,
    NoDecisionError,
    PhaseViolationError,
)
from .aggregate import (
    Ballot,
    borda,
    mean_vote,
    nearest_value,
    plurality,
    power_weighted_ballots,
)
from .power import PowerAssignment

logger = logging.getLogger(__name__)


class ModelKind(str, Enum):
    """模型种类"""

    PROBLEM = "problem-model"
    SOLUTION = "solution-model"


class Phase(str, Enum):
    """模型池阶段，只能 modeling -> deciding -> closed"""

    MODELING = "modeling"
    DECIDING = "deciding"
    CLOSED = "closed"


class DecisionMethod(str, Enum):
    """投票算法"""

    MEAN = "mean"
    BORDA = "borda"
    PLURALITY = "plurality"


@dataclass(frozen=True)
class ModelEntry:
    """池中的一个问题模型或解决方案模型"""

    id: str
    author: int
    kind: ModelKind
    content: str = ""
    numeric_value: Optional[float] = None


@dataclass
class ModelPool:
    """
    模型池状态机

    单写者：并发提交需由调用方串行化；关闭后的池可以自由共享读取。
    所有非法操作在修改任何状态之前抛出异常。
    """

    kind: ModelKind
    phase: Phase = Phase.MODELING
    entries: List[ModelEntry] = field(default_factory=list)
    winner: Optional[str] = None
    size_history: List[Tuple[int, int]] = field(default_factory=lambda: [(0, 0)])

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def entry_ids(self) -> List[str]:
        return [e.id for e in self.entries]

    def entry(self, entry_id: str) -> ModelEntry:
        for e in self.entries:
            if e.id == entry_id:
                return e
        raise InvalidArgumentError(f"no entry {entry_id!r} in the pool")

    def submit(self, entry: ModelEntry) -> "ModelPool":
        """
        建模阶段提交一个模型

        Raises:
            PhaseViolationError: 不在建模阶段
            InvalidArgumentError: 模型种类与池不符
            ConflictError: ID重复
        """
        if self.phase is not Phase.MODELING:
            raise PhaseViolationError(f"cannot submit to a pool in phase {self.phase.value}")
        if entry.kind is not self.kind:
            raise InvalidArgumentError(
                f"cannot submit a {entry.kind.value} to a {self.kind.value} pool"
            )
        if entry.id in self.entry_ids:
            raise ConflictError(f"entry id {entry.id!r} already exists")

        self.entries.append(entry)
        self._record(self.size)
        return self

    def begin_decision(self) -> "ModelPool":
        """
        冻结条目，进入决策阶段

        Raises:
            PhaseViolationError: 不在建模阶段
            NoCandidatesError: 池为空
        """
        if self.phase is not Phase.MODELING:
            raise PhaseViolationError(f"cannot begin a decision in phase {self.phase.value}")
        if not self.entries:
            raise NoCandidatesError("cannot decide over an empty pool")
        self.phase = Phase.DECIDING
        return self

    def decide(
        self,
        ballots: Sequence[Ballot],
        method: DecisionMethod,
        assignment: Optional[PowerAssignment] = None,
    ) -> Tuple["ModelPool", str]:
        """
        用指定投票算法选出唯一胜者并关闭池

        Args:
            ballots: 选票
            method: 投票算法
            assignment: 可选的权力分配，提供时按投票人权力加权

        Returns:
            Tuple[ModelPool, str]: (本池, 胜者ID)
        """
        if self.phase is not Phase.DECIDING:
            raise PhaseViolationError(f"cannot decide a pool in phase {self.phase.value}")
        if not ballots:
            raise NoDecisionError("no ballots cast")

        votes = list(ballots)
        if assignment is not None:
            votes = power_weighted_ballots(votes, assignment)

        candidates = self.entry_ids
        if method is DecisionMethod.MEAN:
            values = self._numeric_values()
            winner = nearest_value(mean_vote(votes), values)
        elif method is DecisionMethod.BORDA:
            winner = borda(votes, candidates)
        else:
            winner = plurality(votes, candidates)

        self.phase = Phase.CLOSED
        self.winner = winner
        self._record(1)
        logger.info("%s pool closed, winner %s", self.kind.value, winner)
        return self, winner

    def visibility_ranking(self, assignment: PowerAssignment) -> List[Tuple[ModelEntry, float]]:
        """
        按作者吸收的权力排列条目，权力越大的作者其模型越靠前

        Returns:
            List[Tuple[ModelEntry, float]]: (条目, 作者权力)，同权力按条目ID
        """
        ranked = [(e, assignment.power_of(e.author)) for e in self.entries]
        return sorted(ranked, key=lambda pair: (-pair[1], pair[0].id))

    def snapshot(self) -> str:
        """
        导出池快照文本：三行 key=value 表头，随后每行一个条目 id,author,numeric_value,content（字段全部加引号）
        """
        header = [
            f"kind={self.kind.value}",
            f"phase={self.phase.value}",
            f"winner={self.winner or ''}",
        ]
        rows = [
            [e.id, e.author, "" if e.numeric_value is None else CsvProcessor.format_real(e.numeric_value), e.content]
            for e in self.entries
        ]
        return "\n".join(header) + "\n" + CsvProcessor.render_rows(None, rows, quoting=csv.QUOTE_ALL)

    def _numeric_values(self) -> Dict[str, float]:
        missing = [e.id for e in self.entries if e.numeric_value is None]
        if missing:
            raise InvalidArgumentError(f"mean decisions need numeric values, missing on {missing}")
        return {e.id: float(e.numeric_value) for e in self.entries}

    def _record(self, size: int) -> None:
        self.size_history.append((len(self.size_history), size))


def open_pool(kind: ModelKind) -> ModelPool:
    """打开一个处于建模阶段的空池"""
    return ModelPool(kind=kind)


def read_pool_snapshot(text: str) -> ModelPool:
    """
    从快照文本恢复模型池

    Raises:
        FormatError: 快照格式错误
    """
    # 条目内容可能含有换行等字符，只按 \n 切出三行表头
    lines = text.split("\n", 3)
    if len(lines) < 3:
        raise FormatError("snapshot needs kind, phase and winner header lines", line=len(lines) + 1)

    header: Dict[str, str] = {}
    for number, line in enumerate(lines[:3], start=1):
        key, sep, value = line.partition("=")
        if not sep or key not in ("kind", "phase", "winner"):
            raise FormatError(f"unexpected header line {line!r}", line=number)
        header[key] = value

    try:
        kind = ModelKind(header["kind"])
        phase = Phase(header["phase"])
    except (KeyError, ValueError) as e:
        raise FormatError(f"invalid snapshot header: {e}", line=1)

    entries = []
    reader = csv.reader(io.StringIO(lines[3] if len(lines) > 3 else "", newline=""))
    for row in reader:
        number = reader.line_num + 3
        if not row:
            continue
        if len(row) != 4:
            raise FormatError(f"expected 4 fields, found {len(row)}", line=number)
        entries.append(
            ModelEntry(
                id=row[0],
                author=CsvProcessor.parse_int(row[1], number, "author"),
                kind=kind,
                content=row[3],
                numeric_value=CsvProcessor.parse_real(row[2], number, "numeric_value") if row[2] else None,
            )
        )

    winner = header["winner"] or None
    if (winner is None) != (phase is not Phase.CLOSED):
        raise FormatError("winner must be set exactly when the pool is closed", line=3)

    history = [(0, 0)] + [(i, i) for i in range(1, len(entries) + 1)]
    if phase is Phase.CLOSED:
        history.append((len(history), 1))
    return ModelPool(kind=kind, phase=phase, entries=entries, winner=winner, size_history=history)


BallotSource = Union[Sequence[Ballot], Mapping[str, Sequence[Ballot]]]


@dataclass(frozen=True)
class LoopBallots:
    """
    问题求解循环两个阶段的选票

    Attributes:
        problem: 问题模型池的选票
        solution: 方案模型池的选票；可按问题ID分组，以便胜出的问题决定使用哪组选票
    """

    problem: Sequence[Ballot]
    solution: BallotSource


class ProblemSolvingLoop:
    """问题生成 -> 方案生成 的完整循环"""

    def __init__(
        self,
        problem_entries: Sequence[ModelEntry],
        solution_entries_per_problem: Mapping[str, Sequence[ModelEntry]],
        ballots: LoopBallots,
        method: DecisionMethod,
        solution_method: Optional[DecisionMethod] = None,
        assignment: Optional[PowerAssignment] = None,
    ) -> None:
        self.problem_entries = list(problem_entries)
        self.solution_entries_per_problem = solution_entries_per_problem
        self.ballots = ballots
        self.method = method
        self.solution_method = solution_method or method
        self.assignment = assignment
        self.problem_pool: Optional[ModelPool] = None
        self.solution_pool: Optional[ModelPool] = None
        self.problem_id: Optional[str] = None

    def run(self) -> str:
        """
        执行两个阶段并返回最终方案ID

        Raises:
            NoCandidatesError: 胜出问题没有任何方案
        """
        self.problem_pool = open_pool(ModelKind.PROBLEM)
        for entry in self.problem_entries:
            self.problem_pool.submit(entry)
        self.problem_pool.begin_decision()
        _, self.problem_id = self.problem_pool.decide(
            self.ballots.problem, self.method, self.assignment
        )

        solutions = self.solution_entries_per_problem.get(self.problem_id, [])
        self.solution_pool = open_pool(ModelKind.SOLUTION)
        for entry in solutions:
            self.solution_pool.submit(entry)
        self.solution_pool.begin_decision()
        _, solution_id = self.solution_pool.decide(
            self._solution_ballots(), self.solution_method, self.assignment
        )
        return solution_id

    def _solution_ballots(self) -> Sequence[Ballot]:
        source = self.ballots.solution
        if isinstance(source, Mapping):
            return source.get(self.problem_id, [])
        return source


def run_problem_solving_loop(
    problem_entries: Sequence[ModelEntry],
    solution_entries_per_problem: Mapping[str, Sequence[ModelEntry]],
    ballots: LoopBallots,
    method: DecisionMethod,
    assignment: Optional[PowerAssignment] = None,
) -> str:
    """
    问题求解循环：问题池决出胜者后，把它的方案集合送入方案池再决策

    Returns:
        str: 最终选出的方案ID
    """
    loop = ProblemSolvingLoop(
        problem_entries, solution_entries_per_problem, ballots, method, assignment=assignment
    )
    return loop.run()
