# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

from typing import Callable, Iterable, Sequence, Tuple

import pytest

from src.core.network import DelegationEdge, DelegationNetwork, Member


def members_from(opinions: Sequence[float], active: Iterable[int] = ()) -> Tuple[Member, ...]:
    """ids 0..n-1 with the given opinions; ids listed in active are participants"""
    chosen = set(active)
    return tuple(Member(id=i, opinion=o, active=i in chosen) for i, o in enumerate(opinions))


def network_from(
    opinions: Sequence[float],
    active: Iterable[int],
    edges: Iterable[Tuple[int, int, float]],
) -> DelegationNetwork:
    return DelegationNetwork.from_edges(
        members_from(opinions, active),
        [DelegationEdge(source=s, target=t, weight=w) for s, t, w in edges],
    )


@pytest.fixture
def make_network() -> Callable[..., DelegationNetwork]:
    return network_from
