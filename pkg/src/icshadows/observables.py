"""Real-weighted sums of multi-qubit Pauli strings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["PauliObservable", "PAULI_MATRICES"]

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliObservable:
    """An observable ``sum_t c_t P_t`` over length-n Pauli words.

    Duplicate words are merged at construction; term order follows first
    appearance. Words use the letters I, X, Y, Z with qubit 0 leftmost.
    """

    n: int
    terms: tuple[tuple[float, str], ...]

    def __post_init__(self):
        merged: dict[str, float] = {}
        order: list[str] = []
        for coeff, word in self.terms:
            word = word.upper()
            if len(word) != self.n:
                raise ValueError(f"word {word!r} is not length {self.n}")
            if any(ch not in "IXYZ" for ch in word):
                raise ValueError(f"invalid Pauli letter in {word!r}")
            coeff = float(coeff)
            if not np.isfinite(coeff):
                raise ValueError("non-finite coefficient")
            if word not in merged:
                merged[word] = 0.0
                order.append(word)
            merged[word] += coeff
        object.__setattr__(
            self, "terms", tuple((merged[w], w) for w in order)
        )

    @classmethod
    def from_terms(cls, terms) -> "PauliObservable":
        terms = list(terms)
        if not terms:
            raise ValueError("observable needs at least one term")
        return cls(n=len(terms[0][1]), terms=tuple(terms))

    @classmethod
    def single(cls, word: str, coeff: float = 1.0) -> "PauliObservable":
        return cls(n=len(word), terms=((coeff, word),))

    def without_identity(self) -> "PauliObservable":
        """Drop terms whose word is all-identity."""
        kept = tuple(t for t in self.terms if set(t[1]) != {"I"})
        if not kept:
            kept = ((0.0, "I" * self.n),)
        return PauliObservable(self.n, kept)

    @property
    def identity_coefficient(self) -> float:
        return sum(c for c, w in self.terms if set(w) == {"I"})

    def matrix(self) -> np.ndarray:
        """Dense matrix; intended for small n only."""
        dim = 2**self.n
        out = np.zeros((dim, dim), dtype=complex)
        for coeff, word in self.terms:
            term = np.array([[1.0 + 0.0j]])
            for ch in word:
                term = np.kron(term, PAULI_MATRICES[ch])
            out += coeff * term
        return out

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Apply the observable to a statevector without forming the matrix."""
        vec = np.asarray(vec, dtype=complex)
        out = np.zeros_like(vec)
        shape = (2,) * self.n
        for coeff, word in self.terms:
            t = vec.reshape(shape)
            for k, ch in enumerate(word):
                if ch == "I":
                    continue
                t = np.tensordot(PAULI_MATRICES[ch], t, axes=([1], [k]))
                t = np.moveaxis(t, 0, k)
            out += coeff * t.reshape(-1)
        return out

    def expectation(self, rho: np.ndarray) -> float:
        """Tr[rho O] for a dense density matrix."""
        return float(np.real(np.trace(rho @ self.matrix())))
