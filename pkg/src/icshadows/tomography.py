"""Group-state reconstruction from outcome histograms.

Three backends with different bias/effort trade-offs: raw frequencies
mixed toward uniform (no state, probability vector only), linear
inversion snapped to the closest density matrix, and a least-absolute-
deviation fit over the density-matrix set by projected subgradient
descent. All are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import hermitianize, project_to_density
from .frames import canonical_duals, DualFrame
from .povm import outcome_probabilities
from .sampling import MarginalTable
from .states import DensityMatrix

__all__ = [
    "FrequencyBias",
    "LinearInversionPSD",
    "ConstrainedLAD",
    "ReconstructionReport",
    "linear_inversion",
    "reconstruct",
    "predicted_probabilities",
]

DIMENSION_CAP = 16
LAD_WINDOW = 100


@dataclass(frozen=True)
class FrequencyBias:
    """Pseudo-count mixing of empirical frequencies toward uniform."""

    S_bias: float

    def __post_init__(self):
        if not math.isfinite(self.S_bias) or self.S_bias < 0:
            raise ValueError("S_bias must be finite and non-negative")


@dataclass(frozen=True)
class LinearInversionPSD:
    """Linear inversion followed by projection onto density matrices."""


@dataclass(frozen=True)
class ConstrainedLAD:
    """Least-absolute-deviation fit constrained to density matrices.

    ``step_schedule`` maps the 1-based iteration to a step size; the
    default is 1/sqrt(t). Convergence is declared when the best residual
    improves by less than ``tolerance`` over a 100-iteration window.
    """

    max_iters: int = 5000
    tolerance: float = 1e-7
    step_schedule: Callable[[int], float] | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    def step(self, t: int) -> float:
        if self.step_schedule is not None:
            return self.step_schedule(t)
        return 1.0 / math.sqrt(t)


@dataclass(frozen=True)
class ReconstructionReport:
    residual: float
    iterations: int
    backend: object
    converged: bool = True

    def __post_init__(self):
        if self.residual < 0:
            raise ValueError("residual must be non-negative")


def linear_inversion(mt: MarginalTable, effects: np.ndarray, duals) -> np.ndarray:
    """Frequency-weighted dual sum; Hermitian and unit trace but not PSD."""
    stack = duals.duals if isinstance(duals, DualFrame) else np.asarray(duals)
    f = mt.frequencies
    if stack.shape[0] != f.shape[0]:
        raise ValueError("dual count does not match the outcome count")
    return hermitianize(np.einsum("m,mab->ab", f, stack))


def _residual(f: np.ndarray, effects: np.ndarray, sigma: np.ndarray) -> float:
    return float(np.abs(f - outcome_probabilities(effects, sigma)).sum())


def reconstruct(
    mt: MarginalTable, effects: np.ndarray, backend, dim_cap: int = DIMENSION_CAP
):
    """Reconstruct a group state (or surrogate probability vector).

    Returns ``(DensityMatrix, report)`` for the physical backends and
    ``(probability_vector, report)`` for FrequencyBias.
    """
    effects = np.asarray(effects, dtype=complex)
    dim = effects.shape[1]
    if dim > dim_cap:
        raise ValueError(f"group dimension {dim} exceeds the cap {dim_cap}")
    f = mt.frequencies
    M = effects.shape[0]
    if f.shape != (M,):
        raise ValueError("marginal table does not match the effect count")

    if isinstance(backend, FrequencyBias):
        probs = (mt.counts + backend.S_bias / M) / (mt.S + backend.S_bias)
        report = ReconstructionReport(
            residual=float(np.abs(f - probs).sum()), iterations=0, backend=backend
        )
        return probs, report

    n = int(round(np.log2(dim)))
    init = project_to_density(linear_inversion(mt, effects, canonical_duals(effects)))
    if isinstance(backend, LinearInversionPSD):
        report = ReconstructionReport(
            residual=_residual(f, effects, init), iterations=0, backend=backend
        )
        return DensityMatrix(n, init), report

    if isinstance(backend, ConstrainedLAD):
        sigma = init
        best = sigma
        best_r = _residual(f, effects, sigma)
        window_r = best_r
        converged = False
        it = 0
        for it in range(1, backend.max_iters + 1):
            r = f - outcome_probabilities(effects, sigma)
            grad = -np.einsum("m,mab->ab", np.sign(r), effects)
            sigma = project_to_density(sigma - backend.step(it) * grad)
            rr = _residual(f, effects, sigma)
            if rr < best_r:
                best_r = rr
                best = sigma
            if it % LAD_WINDOW == 0:
                if window_r - best_r < backend.tolerance:
                    converged = True
                    break
                window_r = best_r
        report = ReconstructionReport(
            residual=best_r, iterations=it, backend=backend, converged=converged
        )
        return DensityMatrix(n, best), report

    raise TypeError(f"unknown backend {type(backend).__name__}")


def predicted_probabilities(sigma, effects: np.ndarray) -> np.ndarray:
    """Outcome probabilities the POVM assigns to a reconstructed state."""
    mat = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    return outcome_probabilities(np.asarray(effects, dtype=complex), mat)
