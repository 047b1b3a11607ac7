import numpy as np
import pytest

from icshadows import (
    CoefficientCache,
    DensityMatrix,
    EstimateReport,
    Partition,
    PauliObservable,
    bell_pair_chain,
    bell_state,
    canonical_global,
    estimate,
    exact_expectation,
    exact_moments,
    exact_variance,
    ghz_state,
    grouped_product_state,
    omega,
    optimal_duals,
    pauli6_product,
    reduced_density,
    rmse_experiment,
    sample_shots,
)
from icshadows.frames import GlobalDuals
from icshadows.povm import outcome_probabilities

from .conftest import random_density


def _random_observable(rng, n, n_terms):
    words = ["".join(rng.choice(list("IXYZ"), size=n)) for _ in range(n_terms)]
    coeffs = rng.normal(size=n_terms)
    return PauliObservable.from_terms(list(zip(coeffs, words)))


def brute_force_moments(rho, duals, obs):
    """Enumerate the full joint outcome space; small groups only."""
    povm = pauli6_product(duals.n)
    order = [q for g in duals.partition.groups for q in g]
    effects = np.ones((1, 1, 1), dtype=complex)
    for frame in duals.frames:
        d0, d1 = effects.shape[1], frame.effects.shape[1]
        effects = np.einsum("mab,ncd->mnacbd", effects, frame.effects).reshape(
            -1, d0 * d1, d0 * d1
        )
    # effects live in group-listed qubit order; reorder rho to match
    t = rho.reshape((2,) * (2 * duals.n))
    perm = order + [q + duals.n for q in order]
    rho_l = t.transpose(perm).reshape(rho.shape)
    probs = outcome_probabilities(effects, rho_l)

    omegas = np.zeros(effects.shape[0])
    for coeff, word in obs.terms:
        tr = np.ones(1)
        for frame, group in zip(duals.frames, duals.partition.groups):
            sub = "".join(word[q] for q in group)
            p = PauliObservable.single(sub).matrix()
            tr = np.multiply.outer(
                tr, np.einsum("mab,ba->m", frame.duals, p).real
            ).reshape(-1)
        omegas = omegas + coeff * tr
    mean = float(probs @ omegas)
    second = float(probs @ (omegas * omegas))
    return mean, second


def test_omega_closed_forms(canonical2):
    ident = PauliObservable.single("II")
    z0 = PauliObservable.single("ZI")
    zz = PauliObservable.single("ZZ")
    assert omega((0, 0), canonical2, ident) == pytest.approx(1.0)
    assert omega((0, 5), canonical2, z0) == pytest.approx(3.0)
    assert omega((2, 0), canonical2, z0) == pytest.approx(0.0)
    assert omega((0, 1), canonical2, zz) == pytest.approx(-9.0)
    assert omega((1, 1), canonical2, zz) == pytest.approx(9.0)


def test_omega_cache_matches_uncached(canonical2):
    obs = PauliObservable.from_terms([(0.7, "XZ"), (-0.2, "YI")])
    cache = CoefficientCache(canonical2)
    for shot in [(0, 0), (3, 4), (5, 2)]:
        assert omega(shot, canonical2, obs, cache) == pytest.approx(
            omega(shot, canonical2, obs)
        )


def test_estimate_is_population_statistics(canonical2, povm2):
    ds = sample_shots(bell_state(), povm2, 400, seed=41)
    obs = PauliObservable.from_terms([(1.0, "ZZ"), (0.5, "XI")])
    rep = estimate(ds, canonical2, obs)
    oms = np.array([omega(tuple(r), canonical2, obs) for r in ds.records])
    assert rep.mean == pytest.approx(oms.mean())
    assert rep.sample_variance == pytest.approx(oms.var())
    assert rep.std_error == pytest.approx(np.sqrt(oms.var() / 400))
    assert rep.shots == 400
    assert rep.duals_provenance == "canonical"


def test_estimate_validates_inputs(canonical2, povm2):
    from icshadows.sampling import Dataset

    empty = Dataset(n=2, d=6, S=0, records=np.zeros((0, 2), dtype=np.uint8), seed=0)
    with pytest.raises(ValueError, match="empty"):
        estimate(empty, canonical2, PauliObservable.single("ZZ"))
    ds = sample_shots(bell_state(), povm2, 10, seed=0)
    with pytest.raises(ValueError, match="disagree"):
        estimate(ds, canonical2, PauliObservable.single("ZZZ"))


def test_estimate_report_rejects_negative_variance():
    with pytest.raises(ValueError):
        EstimateReport(0.0, -1e-3, 0.0, 10, "canonical")


def test_bell_zz_canonical_variance_is_eight(canonical2, povm2):
    zz = PauliObservable.single("ZZ")
    mean, second = exact_moments(bell_state(), povm2, canonical2, zz)
    assert mean == pytest.approx(1.0, abs=1e-12)
    assert second == pytest.approx(9.0, abs=1e-10)
    assert exact_variance(bell_state(), povm2, canonical2, zz) == pytest.approx(
        8.0, abs=1e-10
    )


def test_exact_moments_match_brute_force_enumeration(povm2):
    rng = np.random.default_rng(99)
    for _ in range(5):
        rho = random_density(rng, 4)
        obs = _random_observable(rng, 2, 3)
        state = DensityMatrix(2, rho)
        for part in (Partition.singletons(2), Partition.single_group(2)):
            duals = GlobalDuals(
                part,
                tuple(
                    optimal_duals(
                        outcome_probabilities(povm2.group_effects(g), reduced_density(state, g).matrix),
                        povm2.group_effects(g),
                        group=g,
                    )
                    for g in part.groups
                ),
            )
            mean, second = exact_moments(state, povm2, duals, obs)
            bmean, bsecond = brute_force_moments(rho, duals, obs)
            assert mean == pytest.approx(bmean, abs=1e-10)
            assert second == pytest.approx(bsecond, abs=1e-10)


def test_exact_mean_is_unbiased(povm2, canonical2):
    rng = np.random.default_rng(7)
    for _ in range(5):
        state = DensityMatrix(2, random_density(rng, 4))
        obs = _random_observable(rng, 2, 4)
        mean, _ = exact_moments(state, povm2, canonical2, obs)
        assert mean == pytest.approx(exact_expectation(state, obs), abs=1e-10)


def test_identity_shift_moves_mean_only(povm2, canonical2):
    state = bell_state()
    base = PauliObservable.from_terms([(1.0, "ZZ"), (0.3, "XX")])
    shifted = PauliObservable.from_terms(list(base.terms) + [(2.5, "II")])
    m0, s0 = exact_moments(state, povm2, canonical2, base)
    m1, _ = exact_moments(state, povm2, canonical2, shifted)
    assert m1 == pytest.approx(m0 + 2.5, abs=1e-10)
    v0 = exact_variance(state, povm2, canonical2, base)
    v1 = exact_variance(state, povm2, canonical2, shifted)
    # canonical duals have unit trace, so the shift is exact per shot
    assert v1 == pytest.approx(v0, abs=1e-9)


def test_exact_moments_pair_cap(povm2, canonical2):
    obs = _random_observable(np.random.default_rng(0), 2, 40)
    with pytest.raises(ValueError, match="cap"):
        exact_moments(bell_state(), povm2, canonical2, obs, pair_cap=100)


def test_exact_expectation_routes_agree():
    state = bell_pair_chain(2)
    obs = PauliObservable.from_terms(
        [(1.0, "ZZII"), (0.5, "IXXI"), (-0.25, "YIIY")]
    )
    via_blocks = exact_expectation(state, obs)
    dense = reduced_density(state, range(4))
    via_density = exact_expectation(dense, obs)
    assert via_blocks == pytest.approx(via_density, abs=1e-12)
    psi = ghz_state(3)
    obs3 = PauliObservable.from_terms([(1.0, "XXX"), (0.2, "ZZI")])
    via_pure = exact_expectation(psi, obs3)
    via_dense = exact_expectation(psi.density(), obs3)
    assert via_pure == pytest.approx(via_dense, abs=1e-12)
    with pytest.raises(TypeError):
        exact_expectation("bell", obs3)


def test_grouped_product_state_matches_density_route(povm4):
    # estimator moments on a block product equal those on its dense matrix
    state = bell_pair_chain(2)
    duals = canonical_global(povm4, Partition(((0, 1), (2, 3))))
    obs = PauliObservable.from_terms([(1.0, "ZZZZ"), (0.4, "XIIX")])
    dense = reduced_density(state, range(4))
    m_block, s_block = exact_moments(state, povm4, duals, obs)
    m_dense, s_dense = exact_moments(dense, povm4, duals, obs)
    assert m_block == pytest.approx(m_dense, abs=1e-10)
    assert s_block == pytest.approx(s_dense, abs=1e-10)


def test_h2_ground_state_canonical_variance(h2_4q, h2_4q_ground, povm4):
    energy, psi = h2_4q_ground
    duals = canonical_global(povm4)
    mean, second = exact_moments(psi, povm4, duals, h2_4q)
    assert mean == pytest.approx(energy, abs=1e-9)
    assert second - mean * mean == pytest.approx(1.959003, abs=2e-5)


def test_rmse_experiment_reproducible(povm2, canonical2):
    zz = PauliObservable.single("ZZ")
    a = rmse_experiment(bell_state(), povm2, canonical2, zz, R=20, S=50, seed=5)
    b = rmse_experiment(bell_state(), povm2, canonical2, zz, R=20, S=50, seed=5)
    c = rmse_experiment(bell_state(), povm2, canonical2, zz, R=20, S=50, seed=6)
    assert a == b
    assert a != c
    assert a > 0


def test_rmse_tracks_predicted_scaling(povm2, canonical2):
    zz = PauliObservable.single("ZZ")
    rmse = rmse_experiment(bell_state(), povm2, canonical2, zz, R=100, S=400, seed=13)
    predicted = np.sqrt(8.0 / 400)
    assert 0.75 * predicted < rmse < 1.25 * predicted
