# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
核心功能模块
"""

from .aggregate import Ballot, DecisionMode, network_decision, perfect_decision
from .network import DelegationNetwork, Member, TopologyConfig, build_network, generate_population
from .power import PowerAssignment, disseminate
from .simharness import SweepConfig, SweepRecord, compare_topologies, sweep
from .workspace import ModelPool, ProblemSolvingLoop, run_problem_solving_loop

__all__ = [
    "Ballot",
    "DecisionMode",
    "network_decision",
    "perfect_decision",
    "DelegationNetwork",
    "Member",
    "TopologyConfig",
    "build_network",
    "generate_population",
    "PowerAssignment",
    "disseminate",
    "SweepConfig",
    "SweepRecord",
    "compare_topologies",
    "sweep",
    "ModelPool",
    "ProblemSolvingLoop",
    "run_problem_solving_loop",
]
