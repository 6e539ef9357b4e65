# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
工作区演示场景模块

场景把社会网络和集体工作区连在一起：成员及委托边决定权力分配，
问题池与方案池的条目和选票驱动问题求解循环。
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

from ..utils.errors import FormatError, HoloVoteError
from .aggregate import Ballot
from .network import DelegationEdge, DelegationNetwork, Member
from .power import PowerAssignment, disseminate
from .workspace import DecisionMethod, LoopBallots, ModelEntry, ModelKind, ProblemSolvingLoop

# 三位参与者（0、1、2）提出模型；两位不参与的成员（3、4）把全部权力委托给 2
DEFAULT_SCENARIO: Dict[str, Any] = {
    "members": [
        {"id": 0, "opinion": 0.20, "active": True},
        {"id": 1, "opinion": 0.45, "active": True},
        {"id": 2, "opinion": 0.80, "active": True},
        {"id": 3, "opinion": 0.75, "active": False},
        {"id": 4, "opinion": 0.90, "active": False},
    ],
    "edges": [
        {"from": 3, "to": 2, "weight": 1.0},
        {"from": 4, "to": 2, "weight": 1.0},
    ],
    "method": "plurality",
    "problems": [
        {"id": "p-traffic", "author": 0, "content": "Downtown congestion at rush hour"},
        {"id": "p-parks", "author": 2, "content": "Too few green spaces in the east side"},
        {"id": "p-hybrid", "author": 1, "content": "Congestion pushes people away from parks"},
    ],
    "solutions": {
        "p-traffic": [
            {"id": "s-bus-lanes", "author": 0, "content": "Dedicated bus lanes"},
            {"id": "s-congestion-fee", "author": 1, "content": "Peak-hour congestion fee"},
            {"id": "s-bike-network", "author": 2, "content": "Protected bike network"},
        ],
        "p-parks": [
            {"id": "s-pocket-parks", "author": 0, "content": "Convert vacant lots to pocket parks"},
            {"id": "s-green-roofs", "author": 1, "content": "Subsidize public green roofs"},
            {"id": "s-river-walk", "author": 2, "content": "Open a river walk"},
        ],
        "p-hybrid": [
            {"id": "s-park-shuttle", "author": 1, "content": "Weekend park shuttle"},
        ],
    },
    "problem_ballots": [
        {"voter": 0, "ranking": ["p-traffic"]},
        {"voter": 1, "ranking": ["p-traffic"]},
        {"voter": 2, "ranking": ["p-parks"]},
    ],
    "solution_ballots": {
        "p-traffic": [
            {"voter": 0, "ranking": ["s-bus-lanes"]},
            {"voter": 1, "ranking": ["s-bus-lanes"]},
            {"voter": 2, "ranking": ["s-bike-network"]},
        ],
        "p-parks": [
            {"voter": 0, "ranking": ["s-pocket-parks"]},
            {"voter": 1, "ranking": ["s-pocket-parks"]},
            {"voter": 2, "ranking": ["s-river-walk"]},
        ],
        "p-hybrid": [
            {"voter": 0, "ranking": ["s-park-shuttle"]},
            {"voter": 1, "ranking": ["s-park-shuttle"]},
            {"voter": 2, "ranking": ["s-park-shuttle"]},
        ],
    },
}


@dataclass(frozen=True)
class Scenario:
    """一个可运行的工作区场景"""

    network: DelegationNetwork
    method: DecisionMethod
    problems: Sequence[ModelEntry]
    solutions: Mapping[str, Sequence[ModelEntry]]
    ballots: LoopBallots

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Scenario":
        """
        由字典构建场景

        Raises:
            FormatError: 字段缺失或取值不合法
        """
        try:
            members = [
                Member(id=int(m["id"]), opinion=float(m["opinion"]), active=_flag(m["active"]))
                for m in data["members"]
            ]
            edges = [
                DelegationEdge(
                    source=int(e["from"]),
                    target=int(e["to"]),
                    weight=float(e["weight"]),
                    domain=e.get("domain"),
                )
                for e in data.get("edges", [])
            ]
            network = DelegationNetwork.from_edges(members, edges, normalize=True)
            method = DecisionMethod(data.get("method", DecisionMethod.PLURALITY.value))
            problems = [_entry(e, ModelKind.PROBLEM) for e in data["problems"]]
            solutions = {
                problem_id: [_entry(e, ModelKind.SOLUTION) for e in entries]
                for problem_id, entries in _mapping(data["solutions"], "solutions").items()
            }
            problem_ballots = [_ballot(b) for b in data["problem_ballots"]]
            raw_solution = data["solution_ballots"]
            if isinstance(raw_solution, Mapping):
                solution_ballots: Any = {
                    problem_id: [_ballot(b) for b in ballots]
                    for problem_id, ballots in raw_solution.items()
                }
            else:
                solution_ballots = [_ballot(b) for b in raw_solution]
        except FormatError:
            raise
        except (AttributeError, KeyError, TypeError, ValueError, HoloVoteError) as e:
            raise FormatError(f"invalid scenario: {e}")

        return cls(
            network=network,
            method=method,
            problems=problems,
            solutions=solutions,
            ballots=LoopBallots(problem=problem_ballots, solution=solution_ballots),
        )


@dataclass
class ScenarioRun:
    """场景运行结果"""

    loop: ProblemSolvingLoop
    assignment: PowerAssignment
    solution_id: str


def default_scenario() -> Scenario:
    """内置的三参与者场景"""
    return Scenario.from_dict(DEFAULT_SCENARIO)


def load_scenario(file_path: Path) -> Scenario:
    """
    读取JSON场景文件

    Raises:
        FormatError: 文件无法读取或内容不合法
    """
    try:
        data = json.loads(file_path.read_text(encoding="utf-8"))
    except OSError as e:
        raise FormatError(f"cannot read scenario {file_path}: {e}")
    except json.JSONDecodeError as e:
        raise FormatError(f"scenario is not valid JSON: {e.msg}", line=e.lineno)
    if not isinstance(data, dict):
        raise FormatError("scenario must be a JSON object", line=1)
    return Scenario.from_dict(data)


def run_scenario(scenario: Scenario, power_weighted: bool = False) -> ScenarioRun:
    """
    运行场景的问题求解循环

    Args:
        scenario: 场景
        power_weighted: 是否按权力传播结果加权选票

    Returns:
        ScenarioRun: 循环对象、权力分配和最终方案
    """
    assignment = disseminate(scenario.network, depth=None)
    loop = ProblemSolvingLoop(
        scenario.problems,
        scenario.solutions,
        scenario.ballots,
        scenario.method,
        assignment=assignment if power_weighted else None,
    )
    solution_id = loop.run()
    return ScenarioRun(loop=loop, assignment=assignment, solution_id=solution_id)


def _entry(data: Mapping[str, Any], kind: ModelKind) -> ModelEntry:
    value: Optional[Any] = data.get("numeric_value")
    return ModelEntry(
        id=str(data["id"]),
        author=int(data["author"]),
        kind=kind,
        content=str(data.get("content", "")),
        numeric_value=None if value is None else float(value),
    )


def _ballot(data: Mapping[str, Any]) -> Ballot:
    ranking: List[str] = [str(c) for c in data.get("ranking", [])]
    value = data.get("value")
    return Ballot(
        voter=int(data["voter"]),
        ranking=tuple(ranking),
        weight=float(data.get("weight", 1.0)),
        value=None if value is None else float(value),
    )


def _flag(value: Any) -> bool:
    # bool 是 int 的子类，需先判断
    if isinstance(value, bool):
        return value
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    raise FormatError(f"field 'active' must be true/false or 0/1, got {value!r}")


def _mapping(value: Any, field: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise FormatError(f"field '{field}' must be a JSON object")
    return value
