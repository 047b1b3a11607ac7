"""Local POVMs and their products over qubit registers.

The default measurement is the six-outcome Pauli POVM whose effects are
the eigenstate projectors of X, Y, Z scaled by 1/3. Outcome order is part
of the on-disk dataset contract and must never change:

    0: |0><0|/3   1: |1><1|/3   2: |+><+|/3   3: |-><-|/3
    4: |+i><+i|/3 5: |-i><-i|/3
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import hermitianize, kron_all

__all__ = [
    "LocalPOVM",
    "ProductPOVM",
    "pauli6",
    "pauli6_product",
    "completeness_rank",
    "group_effect",
    "group_effects",
    "outcome_probabilities",
]

COMPLETENESS_TOL = 1e-12
PSD_TOL = 1e-10


def completeness_rank(effects) -> int:
    """Rank of the stacked vectorized effects; 4 means informationally complete."""
    if isinstance(effects, LocalPOVM):
        effects = effects.effects
    stack = np.asarray(effects, dtype=complex).reshape(len(effects), -1)
    return int(np.linalg.matrix_rank(stack, tol=1e-10))


@dataclass(frozen=True)
class LocalPOVM:
    """An informationally complete single-qubit POVM.

    Effects are validated at construction: each PSD, summing to the
    identity, and jointly spanning the four-dimensional operator space.
    """

    effects: np.ndarray  # (d, 2, 2), complex

    def __post_init__(self):
        eff = np.asarray(self.effects, dtype=complex)
        if eff.ndim != 3 or eff.shape[1:] != (2, 2):
            raise ValueError("effects must be a (d, 2, 2) array")
        eff = np.stack([hermitianize(e) for e in eff])
        for i, e in enumerate(eff):
            if np.linalg.eigvalsh(e).min() < -PSD_TOL:
                raise ValueError(f"effect {i} is not PSD")
        if np.abs(eff.sum(axis=0) - np.eye(2)).max() > COMPLETENESS_TOL:
            raise ValueError("effects do not sum to the identity")
        if len(eff) < 4 or completeness_rank(eff) < 4:
            raise ValueError("effects do not span the operator space (not IC)")
        object.__setattr__(self, "effects", eff)
        self.effects.setflags(write=False)

    @property
    def d(self) -> int:
        return self.effects.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, LocalPOVM) and np.array_equal(self.effects, other.effects)


def pauli6() -> LocalPOVM:
    """The six-outcome Pauli measurement POVM."""
    s = 1.0 / np.sqrt(2.0)
    kets = np.array(
        [
            [1, 0],
            [0, 1],
            [s, s],
            [s, -s],
            [s, 1j * s],
            [s, -1j * s],
        ],
        dtype=complex,
    )
    effects = np.einsum("mi,mj->mij", kets, kets.conj()) / 3.0
    return LocalPOVM(effects)


_PAULI6 = None


def _pauli6_cached() -> LocalPOVM:
    global _PAULI6
    if _PAULI6 is None:
        _PAULI6 = pauli6()
    return _PAULI6


@dataclass(frozen=True)
class ProductPOVM:
    """Independent local POVMs on each qubit of an n-qubit register."""

    locals: tuple[LocalPOVM, ...] = field()

    def __post_init__(self):
        object.__setattr__(self, "locals", tuple(self.locals))
        if not self.locals:
            raise ValueError("at least one qubit required")

    @property
    def n(self) -> int:
        return len(self.locals)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(p.d for p in self.locals)

    @property
    def identifier(self) -> str:
        p6 = _pauli6_cached()
        if all(p == p6 for p in self.locals):
            return "pauli6"
        return "custom"

    def group_effects(self, group) -> np.ndarray:
        return group_effects(self, group)

    def group_effect(self, group, idx) -> np.ndarray:
        return group_effect(self, group, idx)


def pauli6_product(n: int) -> ProductPOVM:
    """Pauli-6 on every one of ``n`` qubits."""
    p = _pauli6_cached()
    return ProductPOVM((p,) * n)


def group_effect(povm: ProductPOVM, group, idx) -> np.ndarray:
    """Tensor product of the listed single-qubit effects in group order."""
    group = list(group)
    idx = list(idx)
    if len(group) != len(idx):
        raise ValueError("group and idx lengths differ")
    ops = []
    for q, m in zip(group, idx):
        local = povm.locals[q]
        if not 0 <= m < local.d:
            raise IndexError(f"outcome {m} out of range for qubit {q}")
        ops.append(local.effects[m])
    return kron_all(ops)


def group_effects(povm: ProductPOVM, group) -> np.ndarray:
    """All group effects stacked in row-major outcome order.

    Returns an ``(M, 2^k, 2^k)`` array with ``M = prod of local d`` and the
    first listed qubit as the most significant outcome digit.
    """
    group = list(group)
    out = povm.locals[group[0]].effects
    for q in group[1:]:
        nxt = povm.locals[q].effects
        d0 = out.shape[1]
        d1 = nxt.shape[1]
        out = np.einsum("mab,ncd->mnacbd", out, nxt).reshape(-1, d0 * d1, d0 * d1)
    return out


def outcome_probabilities(effects, rho: np.ndarray) -> np.ndarray:
    """Born probabilities Tr[effect rho], one real entry per effect."""
    return np.einsum("mab,ba->m", np.asarray(effects, dtype=complex), rho).real
