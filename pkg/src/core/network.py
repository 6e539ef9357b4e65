# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
代表网络构建模块

生成带观点的成员种群，按两种代表模型构建委托网络，
边权按观点接近度 1 - |opinion_i - opinion_j| 计算并按成员归一化。
"""

import logging
import math
import re
from dataclasses import dataclass, replace
from functools import cached_property
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..utils.config import Config
from ..utils.errors import InvalidArgumentError, NoRepresentativeError
from ..utils.random_utils import make_rng

logger = logging.getLogger(__name__)

# 近邻选择时每批处理的行数，限制距离矩阵的内存
_ROW_CHUNK = 512

_LABEL_PATTERN = re.compile(r"^k(\d+)d(\d+|inf)(?:-model2)?$")


class TopologyModel(str, Enum):
    """网络拓扑模型"""

    MODEL1 = "model1"
    MODEL2 = "model2"
    K0 = "k0"
    FULL = "full"


class Selection(str, Enum):
    """模型二的代表选择策略"""

    NEAREST = "nearest-opinion"
    RANDOM = "random"


@dataclass(frozen=True)
class Member:
    """一个持有观点的成员"""

    id: int
    opinion: float
    active: bool = False

    def __post_init__(self) -> None:
        if self.id < 0:
            raise InvalidArgumentError(f"member id must be non-negative, got {self.id}")
        if not 0.0 <= self.opinion <= 1.0:
            raise InvalidArgumentError(
                f"opinion of member {self.id} must lie in [0, 1], got {self.opinion}"
            )


@dataclass(frozen=True)
class DelegationEdge:
    """从委托人指向代表的一条边"""

    source: int
    target: int
    weight: float
    domain: Optional[str] = None

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise InvalidArgumentError(f"member {self.source} cannot delegate to itself")
        if not 0.0 <= self.weight <= 1.0:
            raise InvalidArgumentError(
                f"edge {self.source}->{self.target} weight must lie in [0, 1], got {self.weight}"
            )


@dataclass(frozen=True)
class TopologyConfig:
    """
    网络拓扑配置

    Attributes:
        model: 拓扑模型
        k: 每个成员选择的代表数（k0忽略，full在构建时取 |N|-1）
        depth: 权力传播深度，None表示不限深度
        selection: 模型二的代表选择策略
    """

    model: TopologyModel
    k: int = 1
    depth: Optional[int] = 1
    selection: Selection = Selection.NEAREST

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidArgumentError(f"k must be positive, got {self.k}")
        if self.depth is not None and self.depth < 1:
            raise InvalidArgumentError(f"depth must be positive or unbounded, got {self.depth}")
        if self.model is TopologyModel.MODEL1 and (self.k != 1 or self.depth != 1):
            raise InvalidArgumentError("model1 requires k = 1 and depth = 1")

    @property
    def label(self) -> str:
        """
        CLI词汇中的拓扑标签：k0、k1d1、k<K>d<D|inf>、full

        模型二在 k=1、depth=1 时写作 k1d1-model2，与模型一区分。
        """
        if self.model is TopologyModel.K0:
            return "k0"
        if self.model is TopologyModel.MODEL1:
            return "k1d1"
        if self.model is TopologyModel.FULL:
            return "full" if self.depth is None else f"fulld{self.depth}"
        text = f"k{self.k}d{'inf' if self.depth is None else self.depth}"
        # k1d1 留给模型一
        return f"{text}-model2" if text == "k1d1" else text

    @classmethod
    def from_label(cls, label: str, selection: Selection = Selection.NEAREST) -> "TopologyConfig":
        """
        解析拓扑标签

        Args:
            label: 拓扑标签，k1d1 对应模型一，其余 k<K>d<D> 对应模型二（可带 -model2 后缀）
            selection: 模型二的代表选择策略

        Returns:
            TopologyConfig: 拓扑配置

        Raises:
            InvalidArgumentError: 无法识别的标签
        """
        text = label.strip().lower()
        if text == "k0":
            return cls(TopologyModel.K0, k=1, depth=1, selection=selection)
        if text == "k1d1":
            return cls(TopologyModel.MODEL1)
        if text == "full":
            return cls(TopologyModel.FULL, k=1, depth=None, selection=selection)
        if text.startswith("fulld") and text[5:].isdigit():
            return cls(TopologyModel.FULL, k=1, depth=int(text[5:]), selection=selection)

        match = _LABEL_PATTERN.match(text)
        if not match:
            raise InvalidArgumentError(
                f"unknown topology '{label}' (expected k0, k1d1, k<K>d<D|inf> or full)"
            )
        k = int(match.group(1))
        if k == 0:
            raise InvalidArgumentError(f"use 'k0' instead of '{label}'")
        depth = None if match.group(2) == "inf" else int(match.group(2))
        return cls(TopologyModel.MODEL2, k=k, depth=depth, selection=selection)


@dataclass(frozen=True, eq=False)
class DelegationNetwork:
    """
    委托网络

    成员按ID升序存放；边以列数组形式保存（sources/targets/weights），
    domains 为 None 表示所有边都没有领域标签。
    """

    members: Tuple[Member, ...]
    sources: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    domains: Optional[Tuple[Optional[str], ...]] = None
    topology: Optional[TopologyConfig] = None

    @classmethod
    def from_edges(
        cls,
        members: Iterable[Member],
        edges: Iterable[DelegationEdge],
        topology: Optional[TopologyConfig] = None,
        normalize: bool = False,
    ) -> "DelegationNetwork":
        """
        由成员和边集合构建网络并校验不变量

        Args:
            members: 成员集合
            edges: 边集合
            topology: 构建所用的拓扑配置
            normalize: 是否先把每个成员的出边权重归一化

        Returns:
            DelegationNetwork: 网络
        """
        edge_list = list(edges)
        domains = tuple(e.domain for e in edge_list)
        return cls._assemble(
            members,
            np.array([e.source for e in edge_list], dtype=np.int64),
            np.array([e.target for e in edge_list], dtype=np.int64),
            np.array([e.weight for e in edge_list], dtype=np.float64),
            domains if any(d is not None for d in domains) else None,
            topology,
            normalize,
        )

    @classmethod
    def _assemble(
        cls,
        members: Iterable[Member],
        sources: np.ndarray,
        targets: np.ndarray,
        weights: np.ndarray,
        domains: Optional[Tuple[Optional[str], ...]],
        topology: Optional[TopologyConfig],
        normalize: bool,
        trusted: bool = False,
    ) -> "DelegationNetwork":
        # trusted: 边已按 (from, to) 排序且端点合法、无自环、无重复（构建器的输出）
        ordered = _sorted_members(members)
        ids = np.array([m.id for m in ordered], dtype=np.int64)

        if len(sources) and not trusted:
            if not (np.isin(sources, ids).all() and np.isin(targets, ids).all()):
                raise InvalidArgumentError("edge endpoint refers to an unknown member id")
            if np.any(sources == targets):
                raise InvalidArgumentError("self-delegation edges are not allowed")

            # 按 (from, to) 排序，保证输出与输入顺序无关
            order = np.lexsort((targets, sources))
            sources, targets, weights = sources[order], targets[order], weights[order]
            if domains is not None:
                domains = tuple(domains[i] for i in order)

            duplicate = (sources[1:] == sources[:-1]) & (targets[1:] == targets[:-1])
            if duplicate.any():
                raise InvalidArgumentError("duplicate (from, to) delegation edges")

        if normalize:
            weights = _normalize_rows(np.searchsorted(ids, sources), weights, len(ordered))

        network = cls(
            members=ordered,
            sources=_frozen(sources.astype(np.int64)),
            targets=_frozen(targets.astype(np.int64)),
            weights=_frozen(weights.astype(np.float64)),
            domains=domains,
            topology=topology,
        )
        network.validate()
        return network

    @property
    def size(self) -> int:
        """成员数 |N|"""
        return len(self.members)

    @property
    def edge_count(self) -> int:
        return int(len(self.sources))

    @cached_property
    def ids(self) -> np.ndarray:
        return np.array([m.id for m in self.members], dtype=np.int64)

    @cached_property
    def opinions(self) -> np.ndarray:
        return np.array([m.opinion for m in self.members], dtype=np.float64)

    @cached_property
    def active_mask(self) -> np.ndarray:
        return np.array([m.active for m in self.members], dtype=bool)

    @property
    def active_ids(self) -> List[int]:
        return [m.id for m in self.members if m.active]

    def positions(self, member_ids: np.ndarray) -> np.ndarray:
        """把成员ID映射为成员在 members 中的下标"""
        return np.searchsorted(self.ids, member_ids)

    def edges(self) -> Iterator[DelegationEdge]:
        """逐条生成边对象"""
        for i in range(self.edge_count):
            yield DelegationEdge(
                source=int(self.sources[i]),
                target=int(self.targets[i]),
                weight=float(self.weights[i]),
                domain=self.domains[i] if self.domains is not None else None,
            )

    def out_weight_sums(self) -> Dict[int, float]:
        """每个有出边成员的出边权重之和"""
        sums = np.bincount(self.positions(self.sources), weights=self.weights, minlength=self.size)
        counts = np.bincount(self.positions(self.sources), minlength=self.size)
        return {m.id: float(sums[i]) for i, m in enumerate(self.members) if counts[i] > 0}

    def validate(self) -> None:
        """
        校验归一化不变量

        Raises:
            InvalidArgumentError: 某成员出边权重之和偏离1超过容差
        """
        if self.weights.size and (np.any(self.weights < 0.0) or np.any(self.weights > 1.0)):
            raise InvalidArgumentError("edge weights must lie in [0, 1]")
        for member_id, total in self.out_weight_sums().items():
            if abs(total - 1.0) > Config.EDGE_SUM_TOLERANCE:
                raise InvalidArgumentError(
                    f"out-weights of member {member_id} sum to {total!r}, expected 1.0"
                )


def generate_population(n: int, seed: int) -> Tuple[Member, ...]:
    """
    生成观点在 [0,1] 上独立均匀分布的种群

    Args:
        n: 成员数
        seed: 种子

    Returns:
        Tuple[Member, ...]: ID为 0..n-1 的成员，初始均不活跃

    Raises:
        InvalidArgumentError: n < 1
    """
    opinions = draw_opinions(n, seed)
    return tuple(Member(id=i, opinion=float(o), active=False) for i, o in enumerate(opinions))


def draw_opinions(n: int, seed: int) -> np.ndarray:
    """成员 0..n-1 的观点数组，与 generate_population 使用同一随机流"""
    if n < 1:
        raise InvalidArgumentError(f"population size must be positive, got {n}")
    return make_rng(seed).random(n)


def member_opinions(members: Iterable[Member]) -> np.ndarray:
    """按ID升序排列的观点数组"""
    return np.array([m.opinion for m in _sorted_members(members)], dtype=np.float64)


def participant_count(n: int, fraction: float) -> int:
    """参与人数 round(fraction·n)，0.5 向上取整"""
    return int(math.floor(fraction * n + 0.5))


def activity_mask(n: int, fraction: float, seed: int) -> np.ndarray:
    """
    按比例随机抽取活跃成员，返回按ID升序下标排列的布尔掩码

    Raises:
        InvalidArgumentError: fraction 不在 [0, 1]
    """
    if not 0.0 <= fraction <= 1.0:
        raise InvalidArgumentError(f"participation fraction must lie in [0, 1], got {fraction}")
    mask = np.zeros(n, dtype=bool)
    mask[make_rng(seed).choice(n, size=participant_count(n, fraction), replace=False)] = True
    return mask


def set_activity(members: Sequence[Member], fraction: float, seed: int) -> Tuple[Member, ...]:
    """
    按比例随机标记活跃成员

    Args:
        members: 成员集合
        fraction: 活跃比例
        seed: 种子

    Returns:
        Tuple[Member, ...]: 保持输入顺序、仅活跃标记改变的成员
    """
    ordered_ids = sorted(m.id for m in members)
    mask = activity_mask(len(ordered_ids), fraction, seed)
    active_ids = {ordered_ids[int(i)] for i in np.flatnonzero(mask)}
    return tuple(replace(m, active=m.id in active_ids) for m in members)


def delegate_count(n: int, config: TopologyConfig) -> int:
    """
    每个成员的代表数：full 为 n-1，模型二为 k

    Raises:
        InvalidArgumentError: 成员数不超过代表数
    """
    k = n - 1 if config.model is TopologyModel.FULL else config.k
    if n <= k or k < 1:
        raise InvalidArgumentError(f"{config.label} needs more than {k} members, got {n}")
    return k


def delegation_arrays(
    opinions: np.ndarray,
    active: np.ndarray,
    config: TopologyConfig,
    seed: int = 0,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    以成员下标表示的委托边 (源, 代表, 权重)，按 (源, 代表) 升序

    Args:
        opinions: 按ID升序的观点
        active: 同序的活跃标记
        config: 拓扑配置
        seed: 随机选择策略使用的种子

    Raises:
        NoRepresentativeError: 模型一没有活跃成员
        InvalidArgumentError: 模型二或全连接的成员数不超过代表数
    """
    n = len(opinions)
    if config.model is TopologyModel.K0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, np.empty(0)

    if config.model is TopologyModel.MODEL1:
        src, dst = _nearest_active(opinions, active)
        logger.debug("model1: %d inactive members delegate to %d actives", len(src), active.sum())
        return src, dst, np.ones(len(src))

    k = delegate_count(n, config)
    if config.model is TopologyModel.FULL:
        chosen = np.nonzero(~np.eye(n, dtype=bool))[1].reshape(n, n - 1)
    elif config.selection is Selection.NEAREST:
        chosen = _nearest_k(opinions, k)
    else:
        chosen = _random_k(n, k, seed)

    src = np.repeat(np.arange(n), k)
    dst = chosen.reshape(-1)
    raw = 1.0 - np.abs(opinions[src] - opinions[dst])
    logger.debug("%s: built %d edges over %d members", config.label, len(dst), n)
    return src, dst, _normalize_rows(src, raw, n)


def build_network(
    members: Sequence[Member],
    config: TopologyConfig,
    seed: int = 0,
) -> DelegationNetwork:
    """
    按拓扑配置构建委托网络

    Args:
        members: 成员集合（顺序不影响结果）
        config: 拓扑配置
        seed: 随机选择策略使用的种子

    Returns:
        DelegationNetwork: 满足归一化不变量的网络

    Raises:
        NoRepresentativeError: 模型一没有活跃成员
        InvalidArgumentError: 模型二成员数不超过 k
    """
    ordered = _sorted_members(members)
    opinions = np.array([m.opinion for m in ordered], dtype=np.float64)
    active = np.array([m.active for m in ordered], dtype=bool)
    ids = np.array([m.id for m in ordered], dtype=np.int64)

    src, dst, weights = delegation_arrays(opinions, active, config, seed)
    return DelegationNetwork._assemble(
        ordered, ids[src], ids[dst], weights, None, config, normalize=False, trusted=True
    )


def filter_by_domain(network: DelegationNetwork, label: str) -> DelegationNetwork:
    """
    只保留指定领域标签的边，并重新归一化每个成员的出边

    Args:
        network: 原网络
        label: 领域标签

    Returns:
        DelegationNetwork: 成员不变、边为子集的网络
    """
    if network.domains is None:
        keep = np.zeros(network.edge_count, dtype=bool)
    else:
        keep = np.array([d == label for d in network.domains], dtype=bool)

    sources = network.sources[keep]
    weights = _normalize_rows(network.positions(sources), network.weights[keep], network.size)
    domains = tuple(label for _ in range(int(keep.sum()))) if keep.any() else None
    return DelegationNetwork._assemble(
        network.members,
        sources,
        network.targets[keep],
        weights,
        domains,
        network.topology,
        normalize=False,
        trusted=True,
    )


def assign_domains(
    network: DelegationNetwork,
    labels: Sequence[str],
    seed: int,
) -> DelegationNetwork:
    """
    为每条边随机分配一个领域标签，权重不变

    Args:
        network: 原网络
        labels: 候选领域标签
        seed: 种子

    Returns:
        DelegationNetwork: 带领域标签的网络
    """
    if not labels:
        raise InvalidArgumentError("at least one domain label is required")
    picks = make_rng(seed).integers(0, len(labels), size=network.edge_count)
    domains = tuple(labels[int(i)] for i in picks)
    return DelegationNetwork._assemble(
        network.members,
        network.sources,
        network.targets,
        network.weights,
        domains if domains else None,
        network.topology,
        normalize=False,
        trusted=True,
    )


def _sorted_members(members: Iterable[Member]) -> Tuple[Member, ...]:
    ordered = tuple(sorted(members, key=lambda m: m.id))
    for prev, cur in zip(ordered, ordered[1:]):
        if prev.id == cur.id:
            raise InvalidArgumentError(f"duplicate member id {cur.id}")
    return ordered


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _normalize_rows(src_pos: np.ndarray, raw: np.ndarray, n: int) -> np.ndarray:
    """
    按源成员归一化边权；源成员的原始值全为0时退化为均匀分配

    Args:
        src_pos: 每条边源成员的下标
        raw: 原始边值
        n: 成员数

    Returns:
        np.ndarray: 归一化后的边权
    """
    if raw.size == 0:
        return raw.astype(np.float64)
    totals = np.bincount(src_pos, weights=raw, minlength=n)
    counts = np.bincount(src_pos, minlength=n)
    row_total = totals[src_pos]
    uniform = 1.0 / counts[src_pos]
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(row_total > 0.0, raw / row_total, uniform)
    return np.clip(scaled, 0.0, 1.0)


def _nearest_active(opinions: np.ndarray, active: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    为每个不活跃成员找观点最近的活跃成员，距离相同取ID较小者

    Args:
        opinions: 按ID排序的观点
        active: 活跃标记

    Returns:
        Tuple[np.ndarray, np.ndarray]: (源下标, 代表下标)
    """
    active_pos = np.flatnonzero(active)
    if active_pos.size == 0:
        raise NoRepresentativeError("model1 needs at least one active member")

    # 活跃成员按 (观点, 下标) 排序；相同观点的一组中第一个下标最小
    order = np.lexsort((active_pos, opinions[active_pos]))
    sorted_pos = active_pos[order]
    sorted_op = opinions[sorted_pos]

    inactive_pos = np.flatnonzero(~active)
    values = opinions[inactive_pos]
    right = np.searchsorted(sorted_op, values, side="left")
    has_right = right < len(sorted_op)
    has_left = right > 0

    right_idx = np.minimum(right, len(sorted_op) - 1)
    left_val = sorted_op[np.maximum(right - 1, 0)]
    left_idx = np.searchsorted(sorted_op, left_val, side="left")

    d_right = np.where(has_right, np.abs(sorted_op[right_idx] - values), np.inf)
    d_left = np.where(has_left, np.abs(values - sorted_op[left_idx]), np.inf)
    p_right = sorted_pos[right_idx]
    p_left = sorted_pos[left_idx]

    pick_left = (d_left < d_right) | ((d_left == d_right) & (p_left < p_right))
    return inactive_pos, np.where(pick_left, p_left, p_right)


def _nearest_k(opinions: np.ndarray, k: int) -> np.ndarray:
    """
    每个成员观点最近的 k 个其他成员，距离相同取下标较小者

    先在按观点排序后的 ±k 窗口内挑选；窗口外紧邻者与第 k 个距离相等的行
    可能漏掉同距离的小下标成员，改用整行比较。

    Returns:
        np.ndarray: 形状为 (n, k) 的代表下标，每行升序
    """
    n = len(opinions)
    order = np.lexsort((np.arange(n), opinions))
    ranks = np.arange(n)[:, None]
    sorted_op = opinions[order]

    offsets = np.concatenate([np.arange(-k, 0), np.arange(1, k + 1)])
    window = ranks + offsets
    inside = (window >= 0) & (window < n)
    clipped = np.clip(window, 0, n - 1)
    dist = np.where(inside, np.abs(sorted_op[:, None] - sorted_op[clipped]), np.inf)
    candidates = np.where(inside, order[clipped], n)

    pick = np.lexsort((candidates, dist), axis=-1)[:, :k]
    kth = np.take_along_axis(dist, pick[:, k - 1 : k], axis=1)

    beyond = ranks + np.array([-(k + 1), k + 1])
    beyond_dist = np.where(
        (beyond >= 0) & (beyond < n),
        np.abs(sorted_op[:, None] - sorted_op[np.clip(beyond, 0, n - 1)]),
        np.inf,
    )

    chosen = np.empty((n, k), dtype=np.int64)
    chosen[order] = np.sort(np.take_along_axis(candidates, pick, axis=1), axis=1)

    ambiguous = order[np.flatnonzero((beyond_dist == kth).any(axis=1))]
    if ambiguous.size:
        chosen[ambiguous] = _nearest_k_exact(opinions, ambiguous, k)
    return chosen


def _nearest_k_exact(opinions: np.ndarray, rows: np.ndarray, k: int) -> np.ndarray:
    """对指定成员逐行比较全部距离的最近 k 个成员"""
    chosen = np.empty((len(rows), k), dtype=np.int64)
    for start in range(0, len(rows), _ROW_CHUNK):
        batch = rows[start : start + _ROW_CHUNK]
        dist = np.abs(opinions[batch, None] - opinions[None, :])
        dist[np.arange(len(batch)), batch] = np.inf

        kth = np.partition(dist, k - 1, axis=1)[:, k - 1 : k]
        closer = dist < kth
        tied = dist == kth
        needed = k - closer.sum(axis=1, keepdims=True)
        take = closer | (tied & (np.cumsum(tied, axis=1) <= needed))
        chosen[start : start + len(batch)] = np.nonzero(take)[1].reshape(-1, k)
    return chosen


def _random_k(n: int, k: int, seed: int) -> np.ndarray:
    """每个成员无放回均匀抽取 k 个其他成员"""
    rng = make_rng(seed)
    chosen = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        picks = rng.choice(n - 1, size=k, replace=False)
        picks[picks >= i] += 1
        chosen[i] = np.sort(picks)
    return chosen
