# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
蒙特卡洛实验模块

复现参与率扫描实验：对每个（拓扑, 参与比例）运行若干次试验，
统计网络决策相对完美决策的误差，并比较不同拓扑。
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..utils.config import Config
from ..utils.errors import InvalidArgumentError
from ..utils.random_utils import derive_seed
from .aggregate import DecisionMode, decision_error, weighted_decision
from .network import (
    Member,
    TopologyConfig,
    TopologyModel,
    activity_mask,
    delegate_count,
    delegation_arrays,
    draw_opinions,
    generate_population,
    member_opinions,
    participant_count,
)
from .power import propagate

logger = logging.getLogger(__name__)

Population = Union[int, Sequence[Member]]
ProgressCallback = Callable[[int, int], None]

# 比较两条曲线的标准差带时默认只看参与率不低于该值的格点
DEFAULT_BAND_THRESHOLD = 0.2

# 全面优势检验的默认拓扑与参与率区间（闭区间）
DOMINANCE_CHALLENGER = "k3dinf"
DOMINANCE_BASELINE = "k1d1"
DOMINANCE_RANGE = (0.1, 0.5)


def participation_grid(start: float, stop: float, step: float) -> Tuple[float, ...]:
    """
    由 start:stop:step 生成严格递增的参与比例格点（包含 stop）

    Raises:
        InvalidArgumentError: 区间为空、递减、步长非正或超出 (0, 1]
    """
    if step <= 0:
        raise InvalidArgumentError(f"participation step must be positive, got {step}")
    if stop < start:
        raise InvalidArgumentError(f"participation range {start}:{stop} is descending")
    if start <= 0 or stop > 1:
        raise InvalidArgumentError("participation fractions must lie in (0, 1]")

    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    # 去掉浮点累加误差，保证格点可精确比较
    return tuple(round(start + i * step, 12) for i in range(count))


def parse_grid(text: str) -> Tuple[float, ...]:
    """解析 start:stop:step 形式的格点描述"""
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidArgumentError(f"participation must look like start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise InvalidArgumentError(f"participation bounds must be numbers, got {text!r}")
    return participation_grid(start, stop, step)


@dataclass(frozen=True)
class SweepConfig:
    """
    扫描实验配置

    Attributes:
        population: 种群规模
        participation_grid: 严格递增、位于 (0,1] 的参与比例
        trials: 每个格点的试验次数
        topologies: 参与比较的拓扑
        master_seed: 主种子
        decision_mode: 网络决策的归一化方式
        fixed_population: 是否所有试验共用同一个种群
        workers: 并行进程数，1 表示顺序执行
    """

    population: int = Config.DEFAULT_POPULATION
    participation_grid: Tuple[float, ...] = field(
        default_factory=lambda: parse_grid(Config.DEFAULT_PARTICIPATION)
    )
    trials: int = Config.DEFAULT_TRIALS
    topologies: Tuple[TopologyConfig, ...] = field(
        default_factory=lambda: tuple(
            TopologyConfig.from_label(label) for label in Config.DEFAULT_TOPOLOGIES.split(",")
        )
    )
    master_seed: int = Config.DEFAULT_SEED
    decision_mode: DecisionMode = DecisionMode.LITERAL
    fixed_population: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "participation_grid", tuple(self.participation_grid))
        object.__setattr__(self, "topologies", tuple(self.topologies))

        if self.population < 1:
            raise InvalidArgumentError(f"population must be positive, got {self.population}")
        if self.trials < 1:
            raise InvalidArgumentError(f"trials must be at least 1, got {self.trials}")
        if self.workers < 1:
            raise InvalidArgumentError(f"workers must be at least 1, got {self.workers}")
        if not self.topologies:
            raise InvalidArgumentError("at least one topology is required")
        labels = [t.label for t in self.topologies]
        if len(set(labels)) != len(labels):
            raise InvalidArgumentError(f"duplicate topologies in {labels}")

        grid = self.participation_grid
        if not grid:
            raise InvalidArgumentError("participation grid is empty")
        if any(not 0.0 < f <= 1.0 for f in grid):
            raise InvalidArgumentError("participation fractions must lie in (0, 1]")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidArgumentError("participation grid must be strictly increasing")
        # 参与人数由 round(f·n) 确定，与种子无关，重抽样无法补救零活跃成员
        empty = [f for f in grid if participant_count(self.population, f) == 0]
        if empty:
            raise InvalidArgumentError(
                f"participation {empty[0]} leaves no active member in a population of {self.population}"
            )

        for topology in self.topologies:
            if topology.model in (TopologyModel.MODEL2, TopologyModel.FULL):
                delegate_count(self.population, topology)


@dataclass(frozen=True)
class TrialResult:
    """单次试验结果"""

    error: float
    stranded_fraction: float


@dataclass(frozen=True)
class SweepRecord:
    """一个（拓扑, 参与比例）格点的统计"""

    topology: str
    participation: float
    mean_error: float
    std_error: float
    mean_stranded_fraction: float
    trials: int


def run_trial(
    population: Population,
    topology: TopologyConfig,
    fraction: float,
    seed: int,
    mode: DecisionMode = DecisionMode.LITERAL,
) -> TrialResult:
    """
    单次试验：生成种群 -> 设置活跃 -> 建网 -> 传播 -> 决策 -> 与完美决策比较

    Args:
        population: 种群规模，或一个现成的成员集合（其活跃标记会被重设）
        topology: 拓扑配置
        fraction: 参与比例，位于 (0, 1]
        seed: 试验种子
        mode: 网络决策的归一化方式（K=0 网络总是取活跃成员的平均）

    Returns:
        TrialResult: 决策误差与滞留权力占比
    """
    if not 0.0 < fraction <= 1.0:
        raise InvalidArgumentError(f"participation fraction must lie in (0, 1], got {fraction}")

    # 直接在按ID排序的数组上计算，结果与 build_network + disseminate + 决策函数的组合一致
    if isinstance(population, int):
        opinions = draw_opinions(population, derive_seed(seed, "population"))
    else:
        opinions = member_opinions(population)
    n = len(opinions)
    active = activity_mask(n, fraction, derive_seed(seed, "activity"))

    if topology.model is TopologyModel.FULL:
        delegate_count(n, topology)
        absorbed, stranded, _ = propagate(active, topology.depth, opinions=opinions)
    else:
        edges = delegation_arrays(opinions, active, topology, derive_seed(seed, "network"))
        absorbed, stranded, _ = propagate(active, topology.depth, edges=edges)

    if topology.model is TopologyModel.K0:
        value = float(np.mean(opinions[active]))
    else:
        voters = active & (absorbed > 0.0)
        value = weighted_decision(absorbed[voters], opinions[voters], n, mode).value

    error = decision_error(value, float(np.mean(opinions)))
    return TrialResult(error=error, stranded_fraction=stranded / n)


def trial_seed(master_seed: int, topology_index: int, fraction_index: int, trial_index: int) -> int:
    """由主种子和三重索引派生试验种子"""
    return derive_seed(master_seed, topology_index, fraction_index, trial_index)


def sweep(config: SweepConfig, progress: Optional[ProgressCallback] = None) -> List[SweepRecord]:
    """
    参与率扫描

    Args:
        config: 扫描配置
        progress: 可选回调，参数为 (已完成格点数, 格点总数)

    Returns:
        List[SweepRecord]: 按（拓扑, 参与比例）顺序排列的统计记录
    """
    population: Population = config.population
    if config.fixed_population:
        population = generate_population(config.population, derive_seed(config.master_seed, "population"))

    cells = [
        (t_idx, topology, f_idx, fraction)
        for t_idx, topology in enumerate(config.topologies)
        for f_idx, fraction in enumerate(config.participation_grid)
    ]
    records: List[SweepRecord] = []

    executor = ProcessPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for done, (t_idx, topology, f_idx, fraction) in enumerate(cells, start=1):
            tasks = [
                (population, topology, fraction, trial_seed(config.master_seed, t_idx, f_idx, i), config.decision_mode)
                for i in range(config.trials)
            ]
            if executor is not None:
                results = list(executor.map(_run_task, tasks))
            else:
                results = [_run_task(task) for task in tasks]

            records.append(_summarize(topology.label, fraction, results))
            logger.info(
                "%s @ %.2f: mean error %.6g", topology.label, fraction, records[-1].mean_error
            )
            if progress is not None:
                progress(done, len(cells))
    finally:
        if executor is not None:
            executor.shutdown()

    return records


def _run_task(task: Tuple[Population, TopologyConfig, float, int, DecisionMode]) -> TrialResult:
    population, topology, fraction, seed, mode = task
    return run_trial(population, topology, fraction, seed, mode)


def _summarize(label: str, fraction: float, results: Sequence[TrialResult]) -> SweepRecord:
    errors = np.array([r.error for r in results], dtype=np.float64)
    stranded = np.array([r.stranded_fraction for r in results], dtype=np.float64)
    return SweepRecord(
        topology=label,
        participation=fraction,
        mean_error=float(errors.mean()),
        std_error=float(errors.std(ddof=1)) if len(errors) > 1 else 0.0,
        mean_stranded_fraction=float(np.clip(stranded.mean(), 0.0, 1.0)),
        trials=len(results),
    )


@dataclass(frozen=True)
class BandAgreement:
    """两种拓扑在各格点上的 ±1 标准差带是否互相覆盖"""

    first: str
    second: str
    points: Tuple[Tuple[float, bool], ...]

    @property
    def agrees(self) -> bool:
        return all(ok for _, ok in self.points)

    @property
    def disagreements(self) -> List[float]:
        return [f for f, ok in self.points if not ok]


@dataclass(frozen=True)
class DominanceReport:
    """
    一种拓扑是否全面优于对照拓扑：曲线下面积排名第一，且区间内每个格点的平均误差都更低

    Attributes:
        challenger: 被检验的拓扑
        baseline: 对照拓扑
        auc_rank: challenger 的曲线下面积排名（1 为最小）
        points: 区间内各格点 (参与比例, challenger 误差, baseline 误差)
    """

    challenger: str
    baseline: str
    auc_rank: int
    points: Tuple[Tuple[float, float, float], ...]

    @property
    def beaten_at(self) -> List[float]:
        """challenger 没有严格优于 baseline 的格点"""
        return [f for f, mine, theirs in self.points if not mine < theirs]

    @property
    def holds(self) -> bool:
        return self.auc_rank == 1 and bool(self.points) and not self.beaten_at


@dataclass(frozen=True)
class TopologyComparison:
    """
    拓扑比较结果

    Attributes:
        grid: 共同的参与比例格点
        per_fraction: 每个格点上按平均误差从小到大排列的拓扑
        auc: 按误差曲线下面积从小到大排列的 (拓扑, 面积)
        claim: 若同时包含 k0 与 k1d1，二者的标准差带对比
        dominance: 若同时包含 k3dinf 与 k1d1，前者是否全面优于后者
    """

    grid: Tuple[float, ...]
    per_fraction: Tuple[Tuple[float, Tuple[str, ...]], ...]
    auc: Tuple[Tuple[str, float], ...]
    claim: Optional[BandAgreement] = None
    dominance: Optional[DominanceReport] = None

    @property
    def best(self) -> str:
        return self.auc[0][0]


def compare_topologies(records: Sequence[SweepRecord]) -> TopologyComparison:
    """
    按格点和曲线下面积（梯形法）对拓扑排序

    Raises:
        InvalidArgumentError: 没有记录，或各拓扑的格点不一致
    """
    grid, means, _ = _curves(records)

    per_fraction = []
    for i, fraction in enumerate(grid):
        row = means.iloc[i]
        ranked = sorted(means.columns, key=lambda label: (row[label], label))
        per_fraction.append((float(fraction), tuple(ranked)))

    auc = _auc_ranking(grid, means)

    claim = None
    if "k0" in means.columns and "k1d1" in means.columns:
        claim = band_agreement(records, "k0", "k1d1", DEFAULT_BAND_THRESHOLD)

    dominance = None
    if DOMINANCE_CHALLENGER in means.columns and DOMINANCE_BASELINE in means.columns:
        dominance = dominance_report(records)

    return TopologyComparison(
        grid=tuple(float(f) for f in grid),
        per_fraction=tuple(per_fraction),
        auc=auc,
        claim=claim,
        dominance=dominance,
    )


def band_agreement(
    records: Sequence[SweepRecord],
    first: str,
    second: str,
    min_fraction: float = 0.0,
) -> BandAgreement:
    """
    检查两条误差曲线在参与比例不低于 min_fraction 的格点上是否落在彼此的 ±1 标准差带内

    Raises:
        InvalidArgumentError: 缺少某个拓扑或格点不一致
    """
    grid, means, stds = _curves(records)
    _require(means, first, second)

    gap = (means[first] - means[second]).abs()
    inside = (gap <= stds[first]) & (gap <= stds[second])
    points = tuple(
        (float(fraction), bool(ok)) for fraction, ok in zip(grid, inside) if fraction >= min_fraction
    )
    return BandAgreement(first=first, second=second, points=points)


def dominance_report(
    records: Sequence[SweepRecord],
    challenger: str = DOMINANCE_CHALLENGER,
    baseline: str = DOMINANCE_BASELINE,
    fraction_range: Tuple[float, float] = DOMINANCE_RANGE,
) -> DominanceReport:
    """
    检查 challenger 是否曲线下面积最小，且在 fraction_range（闭区间）内每个格点上误差都低于 baseline

    Raises:
        InvalidArgumentError: 缺少某个拓扑或格点不一致
    """
    grid, means, _ = _curves(records)
    _require(means, challenger, baseline)

    low, high = fraction_range
    inside = (grid >= low - 1e-12) & (grid <= high + 1e-12)
    points = tuple(
        (float(fraction), float(mine), float(theirs))
        for fraction, mine, theirs in zip(grid[inside], means[challenger][inside], means[baseline][inside])
    )
    labels = [label for label, _ in _auc_ranking(grid, means)]
    return DominanceReport(
        challenger=challenger,
        baseline=baseline,
        auc_rank=labels.index(challenger) + 1,
        points=points,
    )


def _require(means: pd.DataFrame, *labels: str) -> None:
    for label in labels:
        if label not in means.columns:
            raise InvalidArgumentError(f"no records for topology {label!r}")


def _auc_ranking(grid: np.ndarray, means: pd.DataFrame) -> Tuple[Tuple[str, float], ...]:
    areas = {label: _trapezoid(grid, means[label].to_numpy()) for label in means.columns}
    return tuple(sorted(areas.items(), key=lambda item: (item[1], item[0])))


def _curves(records: Sequence[SweepRecord]) -> Tuple[np.ndarray, pd.DataFrame, pd.DataFrame]:
    """
    按拓扑分组并按参与比例排序，返回 (格点, 平均误差表, 标准差表)

    两张表的行是格点序号，列是拓扑标签。
    """
    if not records:
        raise InvalidArgumentError("no sweep records to compare")

    frame = pd.DataFrame(
        {
            "topology": [r.topology for r in records],
            "participation": [r.participation for r in records],
            "mean_error": [r.mean_error for r in records],
            "std_error": [r.std_error for r in records],
        }
    ).sort_values("participation", kind="stable")
    frame["point"] = frame.groupby("topology", sort=False).cumcount()

    grids = frame.pivot(index="point", columns="topology", values="participation")
    reference = grids.iloc[:, 0].to_numpy()
    for label in grids.columns:
        column = grids[label].to_numpy()
        if np.isnan(column).any() or not np.allclose(column, reference, rtol=0.0, atol=1e-12):
            raise InvalidArgumentError(f"topology {label!r} uses a different participation grid")

    means = frame.pivot(index="point", columns="topology", values="mean_error")
    stds = frame.pivot(index="point", columns="topology", values="std_error")
    return reference, means, stds


def _trapezoid(x: np.ndarray, y: np.ndarray) -> float:
    if len(x) < 2:
        return 0.0
    return float(np.sum((y[1:] + y[:-1]) * np.diff(x) / 2.0))
