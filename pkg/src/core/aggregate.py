# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
集体决策聚合模块

把观点、权力和选票转换为集体决策：网络决策、完美决策、决策误差，
以及均值、Borda计数和多数票（加权相对多数）三种投票算法。
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..utils.errors import InvalidArgumentError, InvalidBallotError, NoDecisionError
from .network import Member
from .power import PowerAssignment

logger = logging.getLogger(__name__)


class DecisionMode(str, Enum):
    """网络决策的归一化方式"""

    LITERAL = "literal"            # 按 |N| 归一化，忽略滞留权力
    RENORMALIZED = "renormalized"  # 按实际吸收的权力总量归一化


@dataclass(frozen=True)
class DecisionOutcome:
    """集体决策值"""

    value: float
    mode: DecisionMode


@dataclass(frozen=True)
class Ballot:
    """
    一张选票

    Attributes:
        voter: 投票成员ID
        ranking: 候选ID的排序（Borda）或单一选择（多数票）
        weight: 选票权重
        value: 数值型选择（均值投票）
    """

    voter: int
    ranking: Tuple[str, ...] = ()
    weight: float = 1.0
    value: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "ranking", tuple(self.ranking))
        if len(set(self.ranking)) != len(self.ranking):
            raise InvalidBallotError(f"ballot of voter {self.voter} repeats a candidate")
        if not self.weight > 0.0:
            raise InvalidBallotError(f"ballot of voter {self.voter} needs a positive weight")
        if not self.ranking and self.value is None:
            raise InvalidBallotError(f"ballot of voter {self.voter} is empty")

    @property
    def choice(self) -> str:
        """多数票中的单一选择"""
        if len(self.ranking) != 1:
            raise InvalidBallotError(
                f"ballot of voter {self.voter} must name exactly one candidate"
            )
        return self.ranking[0]

    def sort_key(self) -> Tuple[int, Tuple[str, ...], float, float]:
        return (
            self.voter,
            self.ranking,
            self.weight,
            -1.0 if self.value is None else self.value,
        )


def network_decision(
    assignment: PowerAssignment,
    members: Sequence[Member],
    mode: DecisionMode = DecisionMode.LITERAL,
) -> DecisionOutcome:
    """
    网络决策 (1/|N|)·Σ power_i·opinion_i

    Args:
        assignment: 权力传播结果
        members: 全体成员
        mode: LITERAL 按 |N| 归一化；RENORMALIZED 按吸收权力总量归一化

    Returns:
        DecisionOutcome: 决策值

    Raises:
        NoDecisionError: 没有吸收了正权力的活跃成员
    """
    opinion_of = {m.id: m.opinion for m in members}
    voters = sorted(i for i, p in assignment.absorbed.items() if p > 0.0 and i in opinion_of)
    if not voters:
        raise NoDecisionError("no active member holds decision power")

    powers = np.array([assignment.absorbed[i] for i in voters], dtype=np.float64)
    opinions = np.array([opinion_of[i] for i in voters], dtype=np.float64)
    return weighted_decision(powers, opinions, len(opinion_of), mode)


def weighted_decision(
    powers: np.ndarray,
    opinions: np.ndarray,
    population: int,
    mode: DecisionMode = DecisionMode.LITERAL,
) -> DecisionOutcome:
    """
    由投票者（按ID升序）的权力和观点计算网络决策

    Raises:
        NoDecisionError: 没有投票者
    """
    if powers.size == 0:
        raise NoDecisionError("no active member holds decision power")
    weighted = float(np.dot(powers, opinions))
    if mode is DecisionMode.LITERAL:
        value = weighted / population
    else:
        value = weighted / float(powers.sum())
    return DecisionOutcome(value=value, mode=mode)


def k0_decision(members: Sequence[Member]) -> DecisionOutcome:
    """
    K=0网络的决策：活跃成员观点的平均值

    Raises:
        NoDecisionError: 没有活跃成员
    """
    opinions = [m.opinion for m in sorted(members, key=lambda m: m.id) if m.active]
    if not opinions:
        raise NoDecisionError("no active member to decide")
    return DecisionOutcome(value=float(np.mean(opinions)), mode=DecisionMode.RENORMALIZED)


def perfect_decision(members: Sequence[Member]) -> float:
    """
    完美决策：全体成员观点的平均值

    Raises:
        InvalidArgumentError: 种群为空
    """
    if not members:
        raise InvalidArgumentError("perfect decision needs at least one member")
    return float(np.mean([m.opinion for m in sorted(members, key=lambda m: m.id)]))


def decision_error(network_value: float, perfect_value: float) -> float:
    """决策误差 |network - perfect|"""
    return abs(network_value - perfect_value)


def borda_scores(ballots: Sequence[Ballot], candidates: Sequence[str]) -> Dict[str, float]:
    """
    Borda计分：排第 r 位（从0开始）得 weight·(m-1-r) 分

    Raises:
        InvalidBallotError: 选票没有完整排列所有候选
    """
    pool = sorted(set(candidates))
    m = len(pool)
    scores = {c: 0.0 for c in pool}
    for ballot in _stable_order(ballots):
        if len(ballot.ranking) != m or set(ballot.ranking) != set(pool):
            raise InvalidBallotError(
                f"ballot of voter {ballot.voter} must rank all {m} candidates"
            )
        for position, candidate in enumerate(ballot.ranking):
            scores[candidate] += ballot.weight * (m - 1 - position)
    return scores


def borda(ballots: Sequence[Ballot], candidates: Sequence[str]) -> str:
    """
    Borda计数的胜者，同分取字典序最小的候选

    Raises:
        NoDecisionError: 没有选票或候选
        InvalidBallotError: 选票不完整
    """
    _require_votes(ballots, candidates)
    return _argmax(borda_scores(ballots, candidates))


def plurality_tally(ballots: Sequence[Ballot], candidates: Sequence[str]) -> Dict[str, float]:
    """
    加权相对多数计票

    Raises:
        InvalidBallotError: 选票指向未知候选或不是单选
    """
    tally = {c: 0.0 for c in sorted(set(candidates))}
    for ballot in _stable_order(ballots):
        choice = ballot.choice
        if choice not in tally:
            raise InvalidBallotError(f"ballot of voter {ballot.voter} names unknown candidate {choice!r}")
        tally[choice] += ballot.weight
    return tally


def plurality(ballots: Sequence[Ballot], candidates: Sequence[str]) -> str:
    """
    多数票胜者，同票取字典序最小的候选
    """
    _require_votes(ballots, candidates)
    return _argmax(plurality_tally(ballots, candidates))


def mean_vote(ballots: Sequence[Ballot]) -> float:
    """
    数值选票的加权平均

    Raises:
        NoDecisionError: 没有选票
        InvalidBallotError: 选票没有数值
    """
    if not ballots:
        raise NoDecisionError("no ballots to average")
    ordered = _stable_order(ballots)
    missing = [b.voter for b in ordered if b.value is None]
    if missing:
        raise InvalidBallotError(f"ballots without a numeric value from voters {missing}")
    values = np.array([b.value for b in ordered], dtype=np.float64)
    weights = np.array([b.weight for b in ordered], dtype=np.float64)
    return float(np.dot(values, weights) / weights.sum())


def power_weighted_ballots(
    ballots: Sequence[Ballot],
    assignment: PowerAssignment,
) -> List[Ballot]:
    """
    按投票人吸收的权力放大选票权重

    Args:
        ballots: 原始选票
        assignment: 权力传播结果

    Returns:
        List[Ballot]: 权重乘以投票人权力后的选票

    Raises:
        InvalidBallotError: 投票人不活跃或未知
    """
    weighted = []
    for ballot in ballots:
        if ballot.voter not in assignment.absorbed:
            raise InvalidBallotError(f"voter {ballot.voter} is not an active member")
        power = assignment.absorbed[ballot.voter]
        weighted.append(replace(ballot, weight=ballot.weight * power))
    return weighted


def nearest_value(target: float, candidates: Mapping[str, float]) -> str:
    """数值最接近 target 的候选，距离相同取ID较小者"""
    if not candidates:
        raise NoDecisionError("no candidates to choose from")
    return min(sorted(candidates), key=lambda c: (abs(candidates[c] - target), c))


def _stable_order(ballots: Sequence[Ballot]) -> List[Ballot]:
    # 固定求和顺序，使结果与选票排列无关
    return sorted(ballots, key=Ballot.sort_key)


def _require_votes(ballots: Sequence[Ballot], candidates: Sequence[str]) -> None:
    if not candidates:
        raise NoDecisionError("no candidates to vote on")
    if not ballots:
        raise NoDecisionError("no ballots cast")


def _argmax(scores: Mapping[str, float]) -> str:
    winner = min(scores, key=lambda c: (-scores[c], c))
    logger.debug("tally %s -> %s", dict(scores), winner)
    return winner
