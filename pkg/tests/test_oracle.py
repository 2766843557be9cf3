import numpy as np
import pytest

from squeezelab.hilbert import NumericalConsistencyError
from squeezelab.observables import collective_spin, dichotomic_from_levels
from squeezelab.oracle import (
    SeparableSpec,
    check_convexity_lemma,
    check_master_bound,
    check_subset_bound,
    check_tighter_bound,
    convexity_margins,
    qutrit_map,
    rng_stream,
    run_verification,
    sample_product_kets,
    sample_pure_product,
    sample_separable,
    tighter_bound_margins,
)
from squeezelab.witness import ALL_SUBSETS, moments

E3 = np.eye(3)


def test_sampling_determinism():
    spec = SeparableSpec(sites=3, local_dim=3, terms=2, seed=99)
    a = sample_separable(spec, trial=5)
    b = sample_separable(spec, trial=5)
    assert np.array_equal(a.data, b.data)
    c = sample_separable(spec, trial=6)
    assert not np.array_equal(a.data, c.data)
    pa = sample_pure_product(spec, trial=5)
    pb = sample_pure_product(spec, trial=5)
    assert np.array_equal(pa.data, pb.data)


def test_single_term_mixture_is_pure_product():
    spec = SeparableSpec(sites=2, local_dim=2, terms=1, seed=4)
    pure = sample_pure_product(spec, trial=3)
    mixed = sample_separable(spec, trial=3)
    assert np.abs(mixed.data - pure.to_density().data).max() <= 1e-15


def test_sample_outputs_valid_states():
    spec = SeparableSpec(sites=2, local_dim=3, terms=4, seed=11)
    state = sample_separable(spec, trial=0)
    assert state.kind == "density"
    assert np.trace(state.data).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(state.data)[0] >= -1e-10
    pure = sample_pure_product(spec, trial=0)
    assert np.linalg.norm(pure.data) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        SeparableSpec(sites=2, local_dim=3, terms=0)


def test_product_identity_on_samples():
    spec = SeparableSpec(sites=3, local_dim=3, terms=1, seed=5)
    triple = dichotomic_from_levels(1.0, -1, 1, sites=3, factor=0.5)
    for trial in range(25):
        state = sample_pure_product(spec, trial)
        ms = moments(state, triple)
        assert np.abs(ms.mod_variance + (ms.local_first**2).sum(axis=0)).max() <= 1e-10


# --- qutrit map ---------------------------------------------------------------


def _dicho_ops():
    triple = dichotomic_from_levels(1.0, -1, 1, sites=1, factor=0.5)
    return triple.local_ops, triple.number_local, triple.alpha


def test_qutrit_map_pure_subspace_state():
    local_ops, n_local, alpha = _dicho_ops()
    rho = np.outer(E3[:, 0], E3[:, 0]).astype(complex)  # the m0 level
    image = qutrit_map(rho, local_ops, n_local, alpha)
    assert image.n == pytest.approx(1.0, abs=1e-12)
    # Bloch vector points along +z, so the image is |0><0| in the block
    assert image.r[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert np.abs(image.r).max() == pytest.approx(1.0, abs=1e-12)


def test_qutrit_map_outside_subspace():
    local_ops, n_local, alpha = _dicho_ops()
    rho = np.outer(E3[:, 1], E3[:, 1]).astype(complex)  # m = 0, unoccupied
    image = qutrit_map(rho, local_ops, n_local, alpha)
    assert image.n == pytest.approx(0.0, abs=1e-12)
    assert image.eta == pytest.approx(0.0, abs=1e-12)
    assert image.r[2, 2] == pytest.approx(1.0, abs=1e-12)


def test_qutrit_map_degenerate_direction():
    # balanced in-subspace mixture: eta = 0 but n = 1; the image is the
    # maximally mixed qubit block
    local_ops, n_local, alpha = _dicho_ops()
    rho = 0.5 * np.outer(E3[:, 0], E3[:, 0]) + 0.5 * np.outer(E3[:, 2], E3[:, 2])
    image = qutrit_map(rho.astype(complex), local_ops, n_local, alpha)
    assert image.eta <= 1e-14
    assert np.allclose(np.sort(image.eigenvalues()), [0.0, 0.5, 0.5], atol=1e-12)


def test_qutrit_map_random_spectrum(rng):
    local_ops, n_local, alpha = _dicho_ops()
    for _ in range(300):
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        image = qutrit_map(rho, local_ops, n_local, alpha)
        want = np.sort([image.n, 0.0, 1.0 - image.n])
        assert np.abs(image.eigenvalues() - want).max() <= 1e-10


def test_qutrit_map_rejects_inconsistent_alpha():
    local_ops, n_local, _ = _dicho_ops()
    rho = np.outer(E3[:, 0], E3[:, 0]).astype(complex)
    with pytest.raises(NumericalConsistencyError):
        qutrit_map(rho, local_ops, n_local, alpha=0.1)


# --- inequality chain ---------------------------------------------------------


def test_chain_margins_on_products():
    spec = SeparableSpec(sites=3, local_dim=3, terms=1, seed=21)
    triple = dichotomic_from_levels(1.0, -1, 1, sites=3, factor=0.5)
    for trial in range(50):
        state = sample_pure_product(spec, trial)
        ms = moments(state, triple)
        assert check_tighter_bound(state, triple, ms=ms) >= -1e-9
        for subset in ALL_SUBSETS:
            assert check_subset_bound(state, triple, subset, ms=ms) >= -1e-9
            assert check_master_bound(state, triple, subset, ms=ms) >= -1e-9


def test_singleton_subset_equals_tighter_bound():
    spec = SeparableSpec(sites=2, local_dim=3, terms=1, seed=22)
    triple = dichotomic_from_levels(1.0, -1, 1, sites=2, factor=0.5)
    state = sample_pure_product(spec, 0)
    ms = moments(state, triple)
    per_k = tighter_bound_margins(state, triple, ms=ms)
    for k in range(3):
        assert check_subset_bound(state, triple, {k}, ms=ms) == pytest.approx(per_k[k], abs=1e-12)


def test_empty_subset_bound_nonnegative():
    spec = SeparableSpec(sites=4, local_dim=2, terms=1, seed=23)
    triple = collective_spin(0.5, 4)
    state = sample_pure_product(spec, 0)
    margin = check_subset_bound(state, triple, frozenset())
    assert margin >= -1e-12


def test_fixed_number_reduces_to_cauchy_schwarz():
    # with N^(i) = identity, sum <N^(i)>^2 = N and the number slack vanishes
    spec = SeparableSpec(sites=3, local_dim=2, terms=1, seed=24)
    triple = collective_spin(0.5, 3)
    state = sample_pure_product(spec, 1)
    ms = moments(state, triple)
    margins = tighter_bound_margins(state, triple, ms=ms)
    s = (ms.local_first**2).sum(axis=0)
    assert np.abs(margins - (3 * s - ms.first**2)).max() <= 1e-10


def test_convexity_lemma():
    assert convexity_margins([((0, 1), (0, 2))])[0] == pytest.approx(0.0, abs=1e-15)
    assert convexity_margins([((1, 1), (-1, 1))])[0] == pytest.approx(1.0, abs=1e-15)
    rng = np.random.default_rng(77)
    pairs = [
        ((rng.normal() * 5, rng.exponential() + 1e-9), (rng.normal() * 5, rng.exponential() + 1e-9))
        for _ in range(100_000)
    ]
    assert check_convexity_lemma(pairs)
    with pytest.raises(ValueError):
        convexity_margins([((1, 0), (1, 1))])


# --- verification runner -------------------------------------------------------


def test_run_verification_passes_and_reproduces():
    summary_a = run_verification(trials=120, seed=7)
    summary_b = run_verification(trials=120, seed=7)
    assert summary_a.passed
    assert [c.min_margin for c in summary_a.checks] == [c.min_margin for c in summary_b.checks]
    names = {c.name for c in summary_a.checks}
    assert "separable-generalized-margins" in names
    assert "qutrit-map-spectrum" in names
    doc = summary_a.to_json_dict()
    assert doc["passed"] is True
    for check in doc["checks"]:
        assert set(check) == {"name", "trials", "min_margin", "tolerance", "failing_seeds", "passed"}
        assert check["failing_seeds"] == []


def test_run_verification_absurd_tolerance_fails():
    summary = run_verification(trials=60, seed=7, tolerance=1e-30)
    assert not summary.passed
    failing = [c for c in summary.checks if not c.passed]
    assert failing
    assert any(c.failures for c in failing)


def test_rng_stream_independence():
    a = rng_stream(1, 0).normal(size=4)
    b = rng_stream(1, 1).normal(size=4)
    c = rng_stream(1, 0).normal(size=4)
    assert np.array_equal(a, c)
    assert not np.array_equal(a, b)


def test_sample_product_kets_shapes():
    spec = SeparableSpec(sites=4, local_dim=3, terms=2, seed=3)
    kets = sample_product_kets(spec, 0)
    assert len(kets) == 4
    for ket in kets:
        assert ket.shape == (3,)
        assert np.linalg.norm(ket) == pytest.approx(1.0, abs=1e-12)
