"""Unbiased observable estimation from shot data and its exact variance.

The single-shot estimate of an observable is a product over partition
groups of dual-operator traces; means over shots are unbiased whenever
the dual frames pass the duality check. Exact first and second moments
of that estimator are computed by group factorization, avoiding any
enumeration over the full joint outcome space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import kron_all
from .frames import GlobalDuals
from .observables import PAULI_MATRICES, PauliObservable
from .povm import ProductPOVM
from .sampling import Dataset, flat_codes, sample_shots
from .states import BlockProductState, DensityMatrix, PureState, reduced_density

__all__ = [
    "EstimateReport",
    "CoefficientCache",
    "omega",
    "estimate",
    "exact_expectation",
    "exact_moments",
    "exact_variance",
    "rmse_experiment",
]

PAIR_CAP = 10**6


@dataclass(frozen=True)
class EstimateReport:
    mean: float
    sample_variance: float
    std_error: float
    shots: int
    duals_provenance: str

    def __post_init__(self):
        if self.sample_variance < 0:
            raise ValueError("sample variance must be non-negative")


class CoefficientCache:
    """Per-(group, Pauli substring) trace vectors Tr[D_m P].

    Shot evaluation reduces to gathering one cached vector per group and
    multiplying, so the 10^6-shot loop never touches operators.
    """

    def __init__(self, duals: GlobalDuals):
        self.duals = duals
        self._vectors: dict[tuple[int, str], np.ndarray] = {}
        dims = []
        for frame, group in zip(duals.frames, duals.partition.groups):
            dims.append(int(round(frame.outcomes ** (1.0 / len(group)))))
        if len(set(dims)) > 1:
            raise ValueError("groups disagree on the per-qubit outcome count")
        self.d = dims[0]

    def vector(self, group_index: int, substring: str) -> np.ndarray:
        key = (group_index, substring)
        if key not in self._vectors:
            frame = self.duals.frames[group_index]
            pmat = kron_all(PAULI_MATRICES[ch] for ch in substring)
            self._vectors[key] = np.einsum(
                "mab,ba->m", frame.duals, pmat
            ).real.copy()
        return self._vectors[key]


def _substring(word: str, group) -> str:
    return "".join(word[q] for q in group)


def omega(shot, duals: GlobalDuals, obs: PauliObservable, cache: CoefficientCache | None = None) -> float:
    """Single-shot estimate: sum over terms of products of group traces."""
    shot = np.asarray(shot)
    if cache is None:
        cache = CoefficientCache(duals)
    total = 0.0
    for coeff, word in obs.terms:
        val = coeff
        for gi, group in enumerate(duals.partition.groups):
            code = 0
            for q in group:
                code = code * cache.d + int(shot[q])
            val *= cache.vector(gi, _substring(word, group))[code]
        total += val
    return float(total)


def _omega_all(ds: Dataset, duals: GlobalDuals, obs: PauliObservable, cache: CoefficientCache) -> np.ndarray:
    codes = [flat_codes(ds, group) for group in duals.partition.groups]
    acc = np.zeros(ds.S)
    for coeff, word in obs.terms:
        vals = None
        for gi, group in enumerate(duals.partition.groups):
            gathered = cache.vector(gi, _substring(word, group))[codes[gi]]
            vals = gathered.copy() if vals is None else vals * gathered
        acc += coeff * vals
    return acc


def estimate(
    ds: Dataset,
    duals: GlobalDuals,
    obs: PauliObservable,
    cache: CoefficientCache | None = None,
) -> EstimateReport:
    """Sample mean with population variance and Gaussian standard error."""
    if ds.S == 0:
        raise ValueError("empty dataset")
    if ds.n != duals.n or ds.n != obs.n:
        raise ValueError("qubit counts disagree")
    if cache is None:
        cache = CoefficientCache(duals)
    om = _omega_all(ds, duals, obs, cache)
    mean = float(om.mean())
    var = max(float((om * om).mean() - mean * mean), 0.0)
    return EstimateReport(
        mean=mean,
        sample_variance=var,
        std_error=float(np.sqrt(var / ds.S)),
        shots=ds.S,
        duals_provenance=duals.provenance,
    )


def exact_expectation(state, obs: PauliObservable) -> float:
    """Tr[rho O] without forming the dense observable."""
    if isinstance(state, PureState):
        return float(np.vdot(state.amplitudes, obs.apply(state.amplitudes)).real)
    if isinstance(state, BlockProductState):
        total = 0.0
        for coeff, word in obs.terms:
            val = coeff
            for group, block in zip(state.partition.groups, state.blocks):
                sub = PauliObservable.single(_substring(word, group))
                val *= exact_expectation(block, sub)
            total += val
        return float(total)
    if isinstance(state, DensityMatrix):
        n = state.n
        total = 0.0
        for coeff, word in obs.terms:
            t = state.matrix.reshape((2,) * (2 * n))
            for i, ch in enumerate(word):
                # contract this qubit's (row, col) pair against the letter
                t = np.tensordot(t, PAULI_MATRICES[ch], axes=([0, n - i], [1, 0]))
            total += coeff * t.real
        return float(total)
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _grouped_trace_pure(amps: np.ndarray, n: int, groups, ops) -> float:
    """<psi| (op_1 x op_2 x ...) |psi> with each op on its group's qubits."""
    t = amps.reshape((2,) * n)
    for group, op in zip(groups, ops):
        k = len(group)
        opt = op.reshape((2,) * (2 * k))
        t = np.tensordot(opt, t, axes=(list(range(k, 2 * k)), list(group)))
        t = np.moveaxis(t, range(k), group)
    return float(np.vdot(amps, t.reshape(-1)).real)


def _grouped_trace_density(rho: np.ndarray, n: int, groups, ops) -> float:
    """Tr[rho (op_1 x op_2 x ...)] with each op on its group's qubits."""
    t = rho.reshape((2,) * (2 * n))
    labels = [("r", q) for q in range(n)] + [("c", q) for q in range(n)]
    for group, op in zip(groups, ops):
        k = len(group)
        opt = op.reshape((2,) * (2 * k))
        ax_t = [labels.index(("r", q)) for q in group] + [
            labels.index(("c", q)) for q in group
        ]
        ax_o = list(range(k, 2 * k)) + list(range(k))
        t = np.tensordot(t, opt, axes=(ax_t, ax_o))
        for pos in sorted(ax_t, reverse=True):
            del labels[pos]
    return float(t.real)


def exact_moments(
    state,
    povm: ProductPOVM,
    duals: GlobalDuals,
    obs: PauliObservable,
    pair_cap: int = PAIR_CAP,
) -> tuple[float, float]:
    """Exact E[omega] and E[omega^2] of the single-shot estimator.

    Both moments factorize over groups: per term pair, each group
    contributes the operator Σ_m effect_m · Tr[D_m P] · Tr[D_m Q], and
    the moment is the state's expectation of their tensor product. The
    first moment uses the single-trace analogue, so unbiasedness is
    measured rather than assumed.
    """
    groups = duals.partition.groups
    terms = obs.terms
    n_pairs = len(terms) * (len(terms) + 1) // 2
    if n_pairs > pair_cap:
        raise ValueError(f"{n_pairs} term pairs exceed the cap {pair_cap}")

    cache = CoefficientCache(duals)
    effects = [frame.effects for frame in duals.frames]

    if isinstance(state, PureState):
        contract = lambda ops: _grouped_trace_pure(state.amplitudes, state.n, groups, ops)
    else:
        rho = state if isinstance(state, DensityMatrix) else reduced_density(state, range(state.n))
        contract = lambda ops: _grouped_trace_density(rho.matrix, rho.n, groups, ops)

    first_ops: dict[tuple[int, str], np.ndarray] = {}
    second_ops: dict[tuple[int, str, str], np.ndarray] = {}

    def b_op(gi: int, sub: str) -> np.ndarray:
        key = (gi, sub)
        if key not in first_ops:
            tv = cache.vector(gi, sub)
            first_ops[key] = np.einsum("m,mab->ab", tv, effects[gi])
        return first_ops[key]

    def a_op(gi: int, sub_p: str, sub_q: str) -> np.ndarray:
        if sub_q < sub_p:
            sub_p, sub_q = sub_q, sub_p
        key = (gi, sub_p, sub_q)
        if key not in second_ops:
            tv = cache.vector(gi, sub_p) * cache.vector(gi, sub_q)
            second_ops[key] = np.einsum("m,mab->ab", tv, effects[gi])
        return second_ops[key]

    mean = 0.0
    for coeff, word in terms:
        ops = [b_op(gi, _substring(word, g)) for gi, g in enumerate(groups)]
        mean += coeff * contract(ops)

    second = 0.0
    for i, (ci, wi) in enumerate(terms):
        for j in range(i, len(terms)):
            cj, wj = terms[j]
            ops = [
                a_op(gi, _substring(wi, g), _substring(wj, g))
                for gi, g in enumerate(groups)
            ]
            weight = ci * cj if i == j else 2.0 * ci * cj
            second += weight * contract(ops)
    return float(mean), float(second)


def exact_variance(
    state,
    povm: ProductPOVM,
    duals: GlobalDuals,
    obs: PauliObservable,
    pair_cap: int = PAIR_CAP,
) -> float:
    """Exact single-shot estimator variance E[omega^2] - E[omega]^2."""
    mean, second = exact_moments(state, povm, duals, obs, pair_cap)
    return second - mean * mean


def rmse_experiment(
    state,
    povm: ProductPOVM,
    duals: GlobalDuals,
    obs: PauliObservable,
    R: int,
    S: int,
    seed: int,
) -> float:
    """Root mean square error of R independent S-shot sample means.

    Repetition r draws its dataset from a child seed spawned off
    ``seed``, so the harness is reproducible and repetitions are
    statistically independent.
    """
    truth = exact_expectation(state, obs)
    cache = CoefficientCache(duals)
    sq = 0.0
    for r in range(R):
        child = int(
            np.random.SeedSequence(entropy=seed, spawn_key=(r,)).generate_state(
                1, np.uint64
            )[0]
        )
        ds = sample_shots(state, povm, S, child)
        rep = estimate(ds, duals, obs, cache=cache)
        sq += (rep.mean - truth) ** 2
    return float(np.sqrt(sq / R))
