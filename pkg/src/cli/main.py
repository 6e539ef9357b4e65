# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
CLI主入口模块

整合种群生成、参与率扫描、拓扑比较和工作区演示，提供完整的命令行界面。
退出码：0 成功，1 运行时或文件错误，2 参数错误。
"""

from pathlib import Path
from typing import List, NoReturn, Optional

import typer
from rich.console import Console
from rich.markup import escape
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table

from ..core.aggregate import DecisionMode
from ..core.network import (
    Selection,
    TopologyConfig,
    TopologyModel,
    assign_domains,
    build_network,
    generate_population,
    set_activity,
)
from ..core.plotter import SweepPlotter
from ..core.result_io import ResultWriter, load_sweep, save_sweep
from ..core.scenario import ScenarioRun, default_scenario, load_scenario, run_scenario
from ..core.simharness import (
    DEFAULT_BAND_THRESHOLD,
    DOMINANCE_RANGE,
    SweepConfig,
    TopologyComparison,
    compare_topologies,
    parse_grid,
    sweep as run_sweep,
)
from ..core.workspace import ModelPool
from ..utils.config import Config
from ..utils.errors import FormatError, HoloVoteError, InvalidArgumentError
from ..utils.logging_utils import setup_logging
from ..utils.random_utils import derive_seed

# 创建Typer应用和Rich控制台
app = typer.Typer(help="🗳️ Holographic delegative voting simulator")
console = Console()


@app.callback()
def main_callback(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show debug logs"),
) -> None:
    """🗳️ Holographic delegative voting simulator"""
    setup_logging(verbose)


def _fail(message: str) -> NoReturn:
    """打印错误并以退出码1结束"""
    console.print(f"❌ {escape(message)}", style="red")
    raise typer.Exit(1)


def _parse_depth(text: str) -> Optional[int]:
    if text.strip().lower() == "inf":
        return None
    try:
        return int(text)
    except ValueError:
        raise typer.BadParameter(f"depth must be a positive integer or 'inf', got {text!r}")


def _topology_from_flags(
    model: TopologyModel, k: int, depth: Optional[int], selection: Selection
) -> TopologyConfig:
    try:
        if model is TopologyModel.K0:
            return TopologyConfig(TopologyModel.K0, selection=selection)
        if model is TopologyModel.MODEL1:
            return TopologyConfig(TopologyModel.MODEL1, k=k, depth=depth)
        if model is TopologyModel.FULL:
            return TopologyConfig(TopologyModel.FULL, depth=depth, selection=selection)
        return TopologyConfig(TopologyModel.MODEL2, k=k, depth=depth, selection=selection)
    except InvalidArgumentError as e:
        raise typer.BadParameter(str(e))


@app.command()
def generate(
    n: int = typer.Option(Config.DEFAULT_POPULATION, "--n", min=1, help="Population size"),
    seed: int = typer.Option(
        Config.DEFAULT_SEED, "--seed", envvar=Config.SEED_ENV_VAR, help="Master seed"
    ),
    model: TopologyModel = typer.Option(TopologyModel.MODEL2, "--model", help="Topology model"),
    k: int = typer.Option(1, "--k", min=1, help="Representatives per member"),
    depth: str = typer.Option("1", "--depth", help="Dissemination depth, or 'inf'"),
    selection: Selection = typer.Option(
        Selection.NEAREST, "--selection", help="Representative selection strategy"
    ),
    activity: float = typer.Option(
        Config.DEFAULT_ACTIVITY, "--activity", min=0.0, max=1.0, help="Fraction of active members"
    ),
    domains: Optional[str] = typer.Option(
        None, "--domains", help="Comma-separated domain labels assigned to edges"
    ),
    out: Path = typer.Option(Config.OUTPUT_DIR, "--out", "-o", help="Output directory"),
):
    """🧬 Generate a population and its delegation network as CSV"""
    topology = _topology_from_flags(model, k, _parse_depth(depth), selection)
    labels: List[str] = []
    if domains is not None:
        labels = [label.strip() for label in domains.split(",") if label.strip()]
        if not labels:
            raise typer.BadParameter("--domains needs at least one label")

    try:
        members = generate_population(n, derive_seed(seed, "population"))
        members = set_activity(members, activity, derive_seed(seed, "activity"))
        network = build_network(members, topology, derive_seed(seed, "network"))
        if labels:
            network = assign_domains(network, labels, derive_seed(seed, "domains"))
    except InvalidArgumentError as e:
        raise typer.BadParameter(str(e))
    except HoloVoteError as e:
        _fail(str(e))

    try:
        writer = ResultWriter(out)
        members_path = writer.save_members(network.members)
        edges_path = writer.save_edges(network)
    except OSError as e:
        _fail(f"Cannot write output: {e}")

    console.print(
        f"✅ {topology.label}: {network.size} members, {network.edge_count} edges", style="green"
    )
    console.print(f"📄 {members_path}")
    console.print(f"📄 {edges_path}")


@app.command()
def sweep(
    n: int = typer.Option(Config.DEFAULT_POPULATION, "--n", min=1, help="Population size"),
    topologies: str = typer.Option(
        Config.DEFAULT_TOPOLOGIES, "--topologies", "-t", help="Comma-separated topology labels"
    ),
    participation: str = typer.Option(
        Config.DEFAULT_PARTICIPATION, "--participation", "-p", help="Grid as start:stop:step"
    ),
    trials: int = typer.Option(Config.DEFAULT_TRIALS, "--trials", min=1, help="Trials per grid point"),
    seed: int = typer.Option(
        Config.DEFAULT_SEED, "--seed", envvar=Config.SEED_ENV_VAR, help="Master seed"
    ),
    mode: DecisionMode = typer.Option(
        DecisionMode.LITERAL, "--mode", help="Network decision normalization"
    ),
    selection: Selection = typer.Option(
        Selection.NEAREST, "--selection", help="Representative selection strategy"
    ),
    fixed_population: bool = typer.Option(
        False, "--fixed-population", help="Reuse one population for every trial"
    ),
    workers: int = typer.Option(1, "--workers", min=1, help="Worker processes"),
    out: Path = typer.Option(
        Config.OUTPUT_DIR / "sweep.csv", "--out", "-o", help="Sweep CSV output file"
    ),
    plot: bool = typer.Option(False, "--plot", help="Also write an SVG chart next to the CSV"),
):
    """📈 Run the participation sweep and write a CSV"""
    try:
        config = SweepConfig(
            population=n,
            participation_grid=parse_grid(participation),
            trials=trials,
            topologies=tuple(
                TopologyConfig.from_label(label, selection)
                for label in topologies.split(",")
                if label.strip()
            ),
            master_seed=seed,
            decision_mode=mode,
            fixed_population=fixed_population,
            workers=workers,
        )
    except InvalidArgumentError as e:
        raise typer.BadParameter(str(e))

    cells = len(config.topologies) * len(config.participation_grid)
    console.print(
        f"🔄 Sweeping {len(config.topologies)} topologies × {len(config.participation_grid)} "
        f"fractions × {trials} trials",
        style="blue",
    )

    try:
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TextColumn("{task.completed}/{task.total}"),
            console=console,
            transient=True,
        ) as progress:
            task = progress.add_task("Running trials...", total=cells)
            records = run_sweep(
                config, progress=lambda done, _total: progress.update(task, completed=done)
            )
    except HoloVoteError as e:
        _fail(str(e))

    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        save_sweep(records, out)
        console.print(f"✅ {len(records)} records written to {out}", style="green")
        if plot:
            plot_path = SweepPlotter(records).save(out.with_suffix(".svg"))
            console.print(f"🖼️ Plot written to {plot_path}", style="green")
    except OSError as e:
        _fail(f"Cannot write output: {e}")


@app.command()
def compare(
    csv_path: Path = typer.Argument(..., help="Sweep CSV produced by 'sweep'"),
):
    """🏁 Rank topologies from a sweep CSV"""
    try:
        records = load_sweep(csv_path)
        comparison = compare_topologies(records)
    except FormatError as e:
        _fail(f"Malformed sweep file {csv_path}: {e}")
    except HoloVoteError as e:
        _fail(str(e))

    _print_comparison(comparison)


def _print_comparison(comparison: TopologyComparison) -> None:
    ranking = Table(title="Ranking per participation fraction")
    ranking.add_column("Participation", justify="right")
    ranking.add_column("Topologies (lowest error first)")
    for fraction, labels in comparison.per_fraction:
        ranking.add_row(f"{fraction:.2f}", ", ".join(labels))
    console.print(ranking)

    auc = Table(title="Area under the error curve")
    auc.add_column("Rank", justify="right")
    auc.add_column("Topology")
    auc.add_column("AUC", justify="right")
    for rank, (label, area) in enumerate(comparison.auc, start=1):
        auc.add_row(str(rank), label, f"{area:.6g}")
    console.print(auc)

    console.print(f"🏆 Best topology: {comparison.best}", style="green")

    claim = comparison.claim
    if claim is not None:
        verdict = "AGREES" if claim.agrees else "DISAGREES"
        console.print(
            f"📐 {claim.first} vs {claim.second} within ±1 std for participation ≥ "
            f"{DEFAULT_BAND_THRESHOLD}: {verdict}"
        )
        if not claim.agrees:
            outside = ", ".join(f"{f:.2f}" for f in claim.disagreements)
            console.print(f"  • outside the band at: {outside}", style="yellow")

    dominance = comparison.dominance
    if dominance is not None:
        low, high = DOMINANCE_RANGE
        verdict = "HOLDS" if dominance.holds else "FAILS"
        console.print(
            f"🌲 {dominance.challenger} beats {dominance.baseline} (smallest AUC, lower error for participation in "
            f"[{low}, {high}]): {verdict}"
        )
        if dominance.auc_rank != 1:
            console.print(f"  • {dominance.challenger} ranks {dominance.auc_rank} by AUC", style="yellow")
        if dominance.beaten_at:
            behind = ", ".join(f"{f:.2f}" for f in dominance.beaten_at)
            console.print(f"  • not lower than {dominance.baseline} at: {behind}", style="yellow")


@app.command(name="workspace-demo")
def workspace_demo(
    scenario_path: Optional[Path] = typer.Option(
        None, "--scenario", "-s", help="JSON scenario file (default: bundled scenario)"
    ),
    power_weighted: bool = typer.Option(
        False, "--power-weighted", help="Weight ballots by disseminated power"
    ),
):
    """🧩 Run the problem-solving loop on a workspace scenario"""
    try:
        scenario = load_scenario(scenario_path) if scenario_path else default_scenario()
        result = run_scenario(scenario, power_weighted=power_weighted)
    except FormatError as e:
        _fail(f"Bad scenario: {e}")
    except HoloVoteError as e:
        _fail(str(e))

    _print_run(result, power_weighted)


def _print_run(result: ScenarioRun, power_weighted: bool) -> None:
    console.print(f"⚖️ Ballots: {'power-weighted' if power_weighted else 'one member, one vote'}")
    console.print("🔋 Absorbed power:")
    for member_id, power in result.assignment.absorbed.items():
        console.print(f"  • member {member_id}: {power:.6g}")

    loop = result.loop
    for title, pool in (("Problem pool", loop.problem_pool), ("Solution pool", loop.solution_pool)):
        if pool is None:
            continue
        _print_pool(title, pool, result)

    console.print(f"✅ Selected problem: {loop.problem_id}", style="green")
    console.print(f"✅ Selected solution: {result.solution_id}", style="green")


def _print_pool(title: str, pool: ModelPool, result: ScenarioRun) -> None:
    history = " → ".join(str(size) for _, size in pool.size_history)
    console.print(f"\n📋 {title}")
    console.print(f"  • size history: {history}")
    console.print(f"  • winner: {pool.winner}")
    console.print("  • visibility:")
    for entry, power in pool.visibility_ranking(result.assignment):
        console.print(f"    - {entry.id} (author {entry.author}, power {power:.6g})")


@app.command()
def config():
    """⚙️ Show configuration information"""

    config_info = Config.to_dict()

    console.print("⚙️ Configuration:")
    for key, value in config_info.items():
        console.print(f"  • {key}: {value}")


def main():
    """主入口函数，无参数时显示帮助"""
    import sys

    if len(sys.argv) == 1:
        sys.argv.append("--help")

    app()


if __name__ == "__main__":
    main()
