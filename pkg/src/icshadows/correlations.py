"""Mutual information between measured qubits and MI-driven partitioning.

All MI values use the plug-in estimator in nats with 0 log 0 = 0 and a
clamp at zero. Sources of outcome statistics can be a :class:`Dataset`
(empirical frequencies) or a ``(state, povm)`` pair (exact Born
frequencies), so the same grouping code serves both finite-shot runs and
infinite-statistics oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .partition import Partition
from .sampling import Dataset, joint_probabilities, marginal_counts

__all__ = [
    "MIGraph",
    "Partition",
    "pair_mutual_information",
    "group_mutual_information",
    "mi_graph",
    "greedy_partition",
    "naive_partition",
    "node_order_partition",
    "edge_order_partition",
    "resolve_partitioner",
    "modularity",
]


@dataclass(frozen=True)
class MIGraph:
    """Symmetric non-negative pairwise MI weights with a zero diagonal."""

    n: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.n, self.n):
            raise ValueError("weights must be n x n")
        w = np.clip(0.5 * (w + w.T), 0.0, None)
        np.fill_diagonal(w, 0.0)
        object.__setattr__(self, "weights", w)
        self.weights.setflags(write=False)


def _source_info(source) -> tuple[int, int]:
    if isinstance(source, Dataset):
        if source.S == 0:
            raise ValueError("empty dataset")
        return source.n, source.d
    state, povm = source
    return povm.n, povm.dims[0]


def _frequencies(source, group) -> np.ndarray:
    """Joint outcome frequencies for ``group`` in the listed qubit order."""
    if isinstance(source, Dataset):
        return marginal_counts(source, group).frequencies
    state, povm = source
    return joint_probabilities(state, povm, group)


def _mutual_information(joint: np.ndarray) -> float:
    """MI of a 2-d joint frequency table, in nats."""
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    mask = joint > 0
    ratio = joint[mask] / (np.outer(pa, pb)[mask])
    return max(float(np.sum(joint[mask] * np.log(ratio))), 0.0)


def pair_mutual_information(source, i: int, j: int) -> float:
    if i == j:
        raise ValueError("need two distinct qubits")
    a, b = (i, j) if i < j else (j, i)
    _, d = _source_info(source)
    joint = _frequencies(source, (a, b)).reshape(d, d)
    return _mutual_information(joint)


def group_mutual_information(source, group, q: int) -> float:
    """MI between a group's joint outcome and one extra qubit's outcome."""
    group = list(group)
    if q in group:
        raise ValueError("qubit already in the group")
    _, d = _source_info(source)
    joint = _frequencies(source, group + [q]).reshape(d ** len(group), d)
    return _mutual_information(joint)


def mi_graph(source) -> MIGraph:
    n, _ = _source_info(source)
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            w[i, j] = w[j, i] = pair_mutual_information(source, i, j)
    return MIGraph(n, w)


def greedy_partition(source, k: int) -> Partition:
    """Grow groups from the strongest MI pair, one qubit at a time.

    Each group is seeded with the highest-MI unassigned pair, then extended
    with the unassigned qubit of largest joint-alphabet MI to the group
    until it holds k qubits. Ties always resolve to the lowest index.
    """
    n, _ = _source_info(source)
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        return Partition.singletons(n)
    pair_mi = mi_graph(source).weights
    unassigned = set(range(n))
    groups: list[tuple[int, ...]] = []
    while len(unassigned) >= 2:
        best, seed = -1.0, None
        for i in sorted(unassigned):
            for j in sorted(unassigned):
                if j <= i:
                    continue
                if pair_mi[i, j] > best:
                    best, seed = pair_mi[i, j], (i, j)
        group = list(seed)
        unassigned.difference_update(group)
        while len(group) < k and unassigned:
            best, pick = -1.0, None
            for q in sorted(unassigned):
                val = group_mutual_information(source, sorted(group), q)
                if val > best:
                    best, pick = val, q
            group.append(pick)
            unassigned.remove(pick)
        groups.append(tuple(sorted(group)))
    for q in sorted(unassigned):
        groups.append((q,))
    return Partition(tuple(groups), max_size=k)


def naive_partition(n: int, k: int) -> Partition:
    """Consecutive index blocks of size k, remainder last."""
    if k < 1:
        raise ValueError("k must be at least 1")
    groups = tuple(
        tuple(range(s, min(s + k, n))) for s in range(0, n, k)
    )
    return Partition(groups, max_size=k)


def node_order_partition(g: MIGraph, k: int) -> Partition:
    """Visit qubits by index; fill each opener's group with its best partners."""
    if k < 1:
        raise ValueError("k must be at least 1")
    unassigned = set(range(g.n))
    groups = []
    for q in range(g.n):
        if q not in unassigned:
            continue
        unassigned.remove(q)
        group = [q]
        while len(group) < k and unassigned:
            best, pick = -np.inf, None
            for u in sorted(unassigned):
                if g.weights[q, u] > best:
                    best, pick = g.weights[q, u], u
            group.append(pick)
            unassigned.remove(pick)
        groups.append(tuple(sorted(group)))
    return Partition(tuple(groups), max_size=k)


def edge_order_partition(g: MIGraph, k: int) -> Partition:
    """Merge endpoint groups along edges of descending weight.

    An edge whose merge would exceed k qubits is discarded. Zero-weight
    edges never merge, so untouched qubits end up as singletons.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    parent = list(range(g.n))
    size = [1] * g.n

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = [
        (g.weights[i, j], i, j)
        for i in range(g.n)
        for j in range(i + 1, g.n)
        if g.weights[i, j] > 0
    ]
    edges.sort(key=lambda e: (-e[0], e[1], e[2]))
    for _, i, j in edges:
        ri, rj = find(i), find(j)
        if ri == rj:
            continue
        if size[ri] + size[rj] > k:
            continue
        parent[rj] = ri
        size[ri] += size[rj]
    members: dict[int, list[int]] = {}
    for q in range(g.n):
        members.setdefault(find(q), []).append(q)
    groups = sorted(tuple(sorted(v)) for v in members.values())
    return Partition(tuple(groups), max_size=k)


def resolve_partitioner(spec):
    """Map a partitioner name to a callable ``(source, k) -> Partition``."""
    if callable(spec):
        return spec
    name = str(spec)
    if name == "greedy":
        return greedy_partition
    if name == "naive":
        return lambda source, k: naive_partition(_source_info(source)[0], k)
    if name == "node":
        return lambda source, k: node_order_partition(mi_graph(source), k)
    if name == "edge":
        return lambda source, k: edge_order_partition(mi_graph(source), k)
    raise ValueError(f"unknown partitioner {name!r}")


def modularity(g: MIGraph, p: Partition) -> float:
    """Newman weighted modularity of a partition of the MI graph."""
    w = g.weights
    total = w.sum()  # equals 2W
    if total <= 0:
        return 0.0
    deg = w.sum(axis=1)
    label = np.empty(g.n, dtype=int)
    for c, group in enumerate(p.groups):
        for q in group:
            label[q] = c
    same = label[:, None] == label[None, :]
    q_val = (w[same].sum() - (np.outer(deg, deg)[same].sum()) / total) / total
    return float(q_val)
