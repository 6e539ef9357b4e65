# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
权力传播模块

不活跃成员的决策权沿委托边同步逐步流向活跃成员，活跃成员只吸收不转发。
未能到达活跃成员的权力（无出边、深度截断或困在不活跃环中）记为滞留权力。
"""

import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..utils.config import Config
from ..utils.errors import InvalidArgumentError, NoAbsorberError
from .network import DelegationNetwork

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PowerAssignment:
    """
    权力传播结果

    Attributes:
        absorbed: 活跃成员ID -> 吸收的权力（按ID升序）
        stranded: 滞留权力总量
        steps_run: 实际执行的传播步数
        population: 网络成员数 |N|
    """

    absorbed: Mapping[int, float]
    stranded: float
    steps_run: int
    population: int = field(default=0)

    @property
    def total_absorbed(self) -> float:
        return float(np.sum(np.fromiter(self.absorbed.values(), dtype=np.float64)))

    @property
    def stranded_fraction(self) -> float:
        return self.stranded / self.population if self.population else 0.0

    def power_of(self, member_id: int) -> float:
        """成员吸收的权力，不活跃或未知成员为0"""
        return float(self.absorbed.get(member_id, 0.0))

    def conservation_gap(self) -> float:
        """|Σabsorbed + stranded - |N||"""
        return abs(self.total_absorbed + self.stranded - self.population)


def disseminate(network: DelegationNetwork, depth: Optional[int] = None) -> PowerAssignment:
    """
    同步迭代的权力传播

    每个成员初始持有1单位权力；活跃成员立即吸收自己的和收到的权力。
    每一步所有持有待转权力 p 的不活跃成员沿出边按 p·w 发送后清零。
    有限深度时恰好执行 depth 步；不限深度时执行到可流动的待转权力低于容差或达到步数上限。

    Args:
        network: 委托网络
        depth: 传播深度，None 表示不限深度

    Returns:
        PowerAssignment: 吸收与滞留情况

    Raises:
        NoAbsorberError: 网络中没有活跃成员
        InvalidArgumentError: depth 不是正整数
    """
    edges = (network.positions(network.sources), network.positions(network.targets), network.weights)
    absorbed, stranded, steps = propagate(network.active_mask, depth, edges=edges)
    return _assignment(network, absorbed, stranded, steps)


def propagate(
    active: np.ndarray,
    depth: Optional[int],
    edges: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None,
    opinions: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, float, int]:
    """
    以成员下标表示的权力传播核心

    Args:
        active: 按成员下标排列的活跃标记
        depth: 传播深度，None 表示不限深度
        edges: (源下标, 代表下标, 权重)；None 表示按 opinions 的相似度全连接
        opinions: 全连接时各成员的观点

    Returns:
        Tuple[np.ndarray, float, int]: (各成员吸收的权力, 滞留权力, 执行步数)

    Raises:
        NoAbsorberError: 没有活跃成员
        InvalidArgumentError: depth 不是正整数，或全连接时缺少观点
    """
    if depth is not None and depth < 1:
        raise InvalidArgumentError(f"depth must be positive or unbounded, got {depth}")
    if not active.any():
        raise NoAbsorberError("no active member to absorb power")

    n = len(active)
    if edges is None:
        if opinions is None or len(opinions) != n:
            raise InvalidArgumentError("the similarity graph needs one opinion per member")
        step = _similarity_step(opinions)
        has_out = np.full(n, n > 1)
    else:
        src, dst, w = edges
        # 活跃成员的出边不参与传播
        live = ~active[src]
        src, dst, w = src[live], dst[live], w[live]
        has_out = np.bincount(src, minlength=n) > 0
        step = _make_step(n, src, dst, w)

    mobile = has_out & ~active
    stuck = ~has_out & ~active
    absorbed = active.astype(np.float64)
    pending = (~active).astype(np.float64)
    limit = depth if depth is not None else Config.MAX_FLOW_STEPS
    steps = 0

    while steps < limit:
        if depth is None and pending[mobile].sum() < Config.PENDING_TOLERANCE:
            break
        received = step(pending)
        absorbed += np.where(active, received, 0.0)
        pending = np.where(active, 0.0, received) + np.where(stuck, pending, 0.0)
        steps += 1

    stranded = float(pending.sum())
    logger.debug(
        "propagate: %d steps, absorbed %.6f, stranded %.6f",
        steps, float(absorbed.sum()), stranded,
    )
    return absorbed, stranded, steps


def disseminate_oracle(network: DelegationNetwork, depth: int) -> PowerAssignment:
    """
    通过穷举路径独立计算权力分配，用于校验 disseminate

    活跃成员 a 的权力 = 1 + Σ 所有从不活跃成员出发、长度不超过 depth、
    中间结点均不活跃、终点为 a 的有向路径上边权之积。

    Args:
        network: 委托网络（成员数不超过8）
        depth: 传播深度（不超过5）

    Returns:
        PowerAssignment: 与 disseminate 在1e-9内一致的结果
    """
    if network.size > Config.ORACLE_MAX_MEMBERS:
        raise InvalidArgumentError(
            f"oracle supports at most {Config.ORACLE_MAX_MEMBERS} members, got {network.size}"
        )
    if depth is None or not 1 <= depth <= Config.ORACLE_MAX_DEPTH:
        raise InvalidArgumentError(
            f"oracle depth must lie in [1, {Config.ORACLE_MAX_DEPTH}], got {depth}"
        )

    active = network.active_mask
    if not active.any():
        raise NoAbsorberError("no active member to absorb power")

    adjacency: Dict[int, List[Tuple[int, float]]] = {}
    for s, t, w in zip(
        network.positions(network.sources).tolist(),
        network.positions(network.targets).tolist(),
        network.weights.tolist(),
    ):
        adjacency.setdefault(s, []).append((t, w))

    absorbed = active.astype(np.float64)

    def walk(node: int, carried: float, hops: int) -> None:
        for target, weight in adjacency.get(node, []):
            if active[target]:
                absorbed[target] += carried * weight
            elif hops + 1 < depth:
                walk(target, carried * weight, hops + 1)

    for start in np.flatnonzero(~active).tolist():
        walk(start, 1.0, 0)

    stranded = float(network.size - absorbed.sum())
    return _assignment(network, absorbed, max(stranded, 0.0), depth)


def _make_step(n: int, src: np.ndarray, dst: np.ndarray, w: np.ndarray):
    """
    构造单步转移函数：稠密图用矩阵乘法，稀疏图用 bincount

    Returns:
        Callable[[np.ndarray], np.ndarray]: pending -> received
    """
    if n <= Config.DENSE_FLOW_MAX_MEMBERS and len(src) * 8 >= n * n:
        matrix = np.zeros((n, n), dtype=np.float64)
        matrix[src, dst] = w
        return lambda pending: pending @ matrix

    return lambda pending: np.bincount(dst, weights=pending[src] * w, minlength=n)


def _similarity_step(opinions: np.ndarray):
    """
    全连接相似度图的单步转移，不显式构造 n² 条边

    边 i->j 的权重为 (1 - |o_i - o_j|) / T_i，T_i 为 i 的原始权重之和；T_i 为0时均匀分配。
    收到量 r_j = Σ_{i≠j} q_i (1 - |o_i - o_j|)，q_i = p_i / T_i，
    其中 Σ_i q_i |o_i - o_j| 用按观点排序后的前缀和求出。

    Returns:
        Callable[[np.ndarray], np.ndarray]: pending -> received
    """
    n = len(opinions)
    order = np.argsort(opinions, kind="stable")
    x = opinions[order]

    def spread(q: np.ndarray) -> np.ndarray:
        """按成员下标返回 Σ_i q_i |o_i - o_j|"""
        qs = q[order]
        cq = np.cumsum(qs)
        cqx = np.cumsum(qs * x)
        below = x * cq - cqx
        above = (cqx[-1] - cqx) - x * (cq[-1] - cq)
        out = np.empty(n, dtype=np.float64)
        out[order] = below + above
        return out

    totals = (n - 1) - spread(np.ones(n))
    proportional = totals > Config.SIMILARITY_ZERO_ROW
    safe_totals = np.where(proportional, totals, 1.0)
    share = 1.0 / max(n - 1, 1)

    def step(pending: np.ndarray) -> np.ndarray:
        q = np.where(proportional, pending / safe_totals, 0.0)
        u = np.where(proportional, 0.0, pending * share)
        received = (q.sum() - q) - spread(q) + (u.sum() - u)
        return np.maximum(received, 0.0)

    return step


def _assignment(
    network: DelegationNetwork,
    absorbed: np.ndarray,
    stranded: float,
    steps: int,
) -> PowerAssignment:
    active = network.active_mask
    values = {
        int(member_id): float(power)
        for member_id, power, is_active in zip(network.ids, absorbed, active)
        if is_active
    }
    return PowerAssignment(
        absorbed=MappingProxyType(values),
        stranded=stranded,
        steps_run=steps,
        population=network.size,
    )
