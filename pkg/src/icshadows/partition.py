"""Disjoint qubit groupings."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["Partition"]


@dataclass(frozen=True)
class Partition:
    """Disjoint, covering groups of qubit indices.

    Groups keep their construction order; indices inside a group are
    ascending. ``max_size`` documents the k the partition was built for
    and is validated when provided.
    """

    groups: tuple[tuple[int, ...], ...]
    max_size: int | None = None

    def __post_init__(self):
        groups = tuple(tuple(int(q) for q in g) for g in self.groups)
        seen: set[int] = set()
        for g in groups:
            if not g:
                raise ValueError("empty group")
            if list(g) != sorted(g):
                raise ValueError(f"group {g} not ascending")
            if seen.intersection(g):
                raise ValueError("groups overlap")
            seen.update(g)
            if self.max_size is not None and len(g) > self.max_size:
                raise ValueError(f"group {g} exceeds size {self.max_size}")
        if seen != set(range(len(seen))):
            raise ValueError("groups do not cover 0..n-1 contiguously")
        object.__setattr__(self, "groups", groups)

    @property
    def n(self) -> int:
        return sum(len(g) for g in self.groups)

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(tuple((q,) for q in range(n)), max_size=1)

    @classmethod
    def single_group(cls, n: int) -> "Partition":
        return cls((tuple(range(n)),), max_size=n)

    def as_sets(self) -> set[frozenset[int]]:
        return {frozenset(g) for g in self.groups}

    def group_of(self, q: int) -> int:
        for i, g in enumerate(self.groups):
            if q in g:
                return i
        raise KeyError(q)
