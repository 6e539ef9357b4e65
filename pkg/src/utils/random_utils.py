# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
随机数工具模块

所有随机性都来自numpy的SeedSequence派生，保证给定种子时结果可复现。
"""

from typing import Union

import numpy as np

_SEED_MODULUS = 2 ** 64


def normalize_seed(seed: int) -> int:
    """
    将任意64位整数（含负数）映射到SeedSequence可接受的非负范围

    Args:
        seed: 原始种子

    Returns:
        int: 非负种子
    """
    return int(seed) % _SEED_MODULUS


def derive_seed(seed: int, *keys: Union[int, str]) -> int:
    """
    由主种子和一串索引派生出独立的64位子种子

    Args:
        seed: 主种子
        keys: 派生路径，例如 (拓扑序号, 比例序号, 试验序号)

    Returns:
        int: 子种子
    """
    spawn_key = tuple(_key_to_int(k) for k in keys)
    sequence = np.random.SeedSequence(entropy=normalize_seed(seed), spawn_key=spawn_key)
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """创建确定性的随机数生成器"""
    return np.random.default_rng(normalize_seed(seed))


def _key_to_int(key: Union[int, str]) -> int:
    if isinstance(key, str):
        # 字符串键按UTF-8字节解释为整数
        return int.from_bytes(key.encode("utf-8"), "little")
    return normalize_seed(key)
