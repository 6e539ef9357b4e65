# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
配置管理模块

管理仿真引擎的默认参数、数值容差和输出位置。
"""

import os
from pathlib import Path
from typing import Dict, Any


class Config:
    """配置管理类"""

    # 种群与实验默认值
    DEFAULT_POPULATION = 1000
    DEFAULT_TRIALS = 100
    DEFAULT_PARTICIPATION = "0.05:1.0:0.05"
    DEFAULT_TOPOLOGIES = "k0,k1d1,k3dinf,full"
    DEFAULT_ACTIVITY = 0.5  # generate 子命令的默认参与比例
    DEFAULT_SEED = 0

    # 数值容差
    EDGE_SUM_TOLERANCE = 1e-12
    CONSERVATION_TOLERANCE = 1e-9
    PENDING_TOLERANCE = 1e-9

    # 权力传播
    MAX_FLOW_STEPS = 100
    DENSE_FLOW_MAX_MEMBERS = 4096  # 超过后不再构建稠密转移矩阵
    SIMILARITY_ZERO_ROW = 1e-12  # 相似度图中原始权重和不超过该值的成员按均匀分配

    # 穷举校验的规模上限
    ORACLE_MAX_MEMBERS = 8
    ORACLE_MAX_DEPTH = 5

    # 文件格式
    RESULT_DIGITS = 15
    EXPORT_DIGITS = 17  # 边权与权力导出，保证往返无损
    MEMBERS_FILENAME = "members.csv"
    EDGES_FILENAME = "edges.csv"

    # 环境变量
    SEED_ENV_VAR = "HOLOVOTE_SEED"

    # 输出目录
    OUTPUT_DIR = Path("holovote_output")

    @classmethod
    def get_output_dir(cls) -> Path:
        """
        获取输出目录，如果不存在则创建

        Returns:
            Path: 输出目录路径
        """
        cls.OUTPUT_DIR.mkdir(parents=True, exist_ok=True)
        return cls.OUTPUT_DIR

    @classmethod
    def get_env_seed(cls) -> int:
        """
        读取环境变量中的主种子，缺失或无法解析时回退到默认值

        Returns:
            int: 主种子
        """
        raw = os.getenv(cls.SEED_ENV_VAR, "").strip()
        try:
            return int(raw) if raw else cls.DEFAULT_SEED
        except ValueError:
            return cls.DEFAULT_SEED

    @classmethod
    def to_dict(cls) -> Dict[str, Any]:
        """
        将配置转换为字典

        Returns:
            Dict[str, Any]: 配置字典
        """
        return {
            "default_population": cls.DEFAULT_POPULATION,
            "default_trials": cls.DEFAULT_TRIALS,
            "default_participation": cls.DEFAULT_PARTICIPATION,
            "default_topologies": cls.DEFAULT_TOPOLOGIES,
            "max_flow_steps": cls.MAX_FLOW_STEPS,
            "pending_tolerance": cls.PENDING_TOLERANCE,
            "result_digits": cls.RESULT_DIGITS,
            "seed_env_var": cls.SEED_ENV_VAR,
            "env_seed": cls.get_env_seed(),
            "output_dir": str(cls.OUTPUT_DIR),
        }
