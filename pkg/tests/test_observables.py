import json

import numpy as np
import pytest

from squeezelab.hilbert import MultiSpinState, NumericalConsistencyError, expect
from squeezelab.observables import (
    ProjectorPair,
    alpha_check,
    collective_spin,
    dichotomic_from_levels,
    dichotomic_from_projectors,
    parse_observable_spec,
    rotate_triple,
    spin_matrices,
)

from conftest import random_density, random_ket

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.diag([1.0, -1.0]).astype(complex),
}


def test_spin_half_is_half_pauli():
    jx, jy, jz = spin_matrices(0.5)
    # basis ordered m = -1/2, +1/2, so sigma_z appears with flipped sign
    assert np.allclose(jz, np.diag([-0.5, 0.5]))
    assert np.allclose(jx, PAULI["x"] / 2)
    assert np.allclose(jy, -PAULI["y"] / 2)


@pytest.mark.parametrize("j", [0.5, 1.0, 1.5, 2.0, 2.5])
def test_spin_matrix_algebra(j):
    jx, jy, jz = spin_matrices(j)
    dim = round(2 * j) + 1
    assert np.abs(jx @ jy - jy @ jx - 1j * jz).max() <= 1e-12
    assert np.abs(jy @ jz - jz @ jy - 1j * jx).max() <= 1e-12
    assert np.abs(jz @ jx - jx @ jz - 1j * jy).max() <= 1e-12
    casimir = jx @ jx + jy @ jy + jz @ jz
    assert np.allclose(casimir, j * (j + 1) * np.eye(dim), atol=1e-12)


def test_spin_three_halves_levels():
    jz = spin_matrices(1.5)[2]
    assert np.allclose(np.diag(jz).real, [-1.5, -0.5, 0.5, 1.5])
    with pytest.raises(ValueError):
        spin_matrices(0.3)


def test_collective_spin_small():
    triple = collective_spin(0.5, 1)
    for built, local in zip(triple.collectives, spin_matrices(0.5)):
        assert np.allclose(built, local)
    assert triple.alpha == 0.5
    assert np.allclose(triple.number_local, np.eye(2))

    two = collective_spin(1.0, 2)
    jz_eigs = np.linalg.eigvalsh(two.collectives[2])
    assert np.allclose(np.sort(jz_eigs), [-2, -1, -1, 0, 0, 0, 1, 1, 2], atol=1e-12)


def test_collective_spin_big_expectation():
    # <J_x^2> on the all-m=0 product of five spin-1 is N * <j_x^2> = 5
    triple = collective_spin(1.0, 5)
    zero = np.zeros(3)
    zero[1] = 1.0
    ket = zero
    for _ in range(4):
        ket = np.kron(ket, zero)
    state = MultiSpinState.pure(ket, 5, 3)
    jx2 = triple.collectives[0] @ triple.collectives[0]
    assert expect(state, jx2) == pytest.approx(5.0, abs=1e-10)


def test_collectives_match_embedded_sum():
    triple = dichotomic_from_levels(1.0, -1, 1, sites=3)
    for k in range(3):
        total = sum(site_ops[k] for site_ops in triple.embedded_site_ops)
        assert np.abs(total - triple.collectives[k]).max() <= 1e-12
    total_n = sum(site_ops[3] for site_ops in triple.embedded_site_ops)
    assert np.abs(total_n - triple.number_total).max() <= 1e-12


def test_dichotomic_levels_basics():
    triple = dichotomic_from_levels(1.0, -1, 1, sites=2, factor=0.5)
    assert triple.alpha == 0.5
    assert triple.kind == "dichotomic"
    # |0>^2 is orthogonal to the watched subspace
    zero2 = np.zeros(9)
    zero2[4] = 1.0
    state = MultiSpinState.pure(zero2, 2, 3)
    assert expect(state, triple.number_total) == pytest.approx(0.0, abs=1e-12)
    # the even mixture of the stretched pairs occupies both sites
    down = np.zeros(9)
    down[0] = 1.0
    up = np.zeros(9)
    up[8] = 1.0
    rho_prime = MultiSpinState.density(
        (np.outer(down, down) + np.outer(up, up)) / 2, 2, 3
    )
    assert expect(rho_prime, triple.number_total) == pytest.approx(2.0, abs=1e-12)

    with pytest.raises(ValueError):
        dichotomic_from_levels(1.0, 1, 1, sites=2)
    with pytest.raises(ValueError):
        dichotomic_from_levels(1.0, -2, 1, sites=2)
    with pytest.raises(ValueError):
        dichotomic_from_levels(1.0, -1, 1, sites=2, factor=0.7)


def test_dichotomic_structure_identities():
    for factor in (0.5, 1.0):
        triple = dichotomic_from_levels(1.5, -1.5, 0.5, sites=2, factor=factor)
        sigmas = [l / factor for l in triple.local_ops]
        eps = {(0, 1): 2, (1, 2): 0, (2, 0): 1}
        for (a, b), c in eps.items():
            comm = sigmas[a] @ sigmas[b] - sigmas[b] @ sigmas[a]
            assert np.abs(comm - 2j * sigmas[c]).max() <= 1e-12
        for s in sigmas:
            assert np.abs(s @ s - triple.number_local).max() == 0.0
        # the number operator commutes with every collective
        for a in triple.collectives:
            comm = triple.number_total @ a - a @ triple.number_total
            assert np.abs(comm).max() <= 1e-12


def test_local_moment_bounds_random_densities(rng):
    # sum_k <sigma_k>^2 <= <N>^2 <= 1 and the factor-scaled version, on a
    # large batch of random single-site densities
    triple = dichotomic_from_levels(1.0, -1, 1, sites=2, factor=0.5)
    sigmas = [l / triple.alpha for l in triple.local_ops]
    n_local = triple.number_local
    worst_a = np.inf
    worst_n = np.inf
    for _ in range(10_000):
        rho = random_density(rng, 3)
        s = np.array([np.einsum("ab,ba->", rho, sig).real for sig in sigmas])
        n = np.einsum("ab,ba->", rho, n_local).real
        worst_a = min(worst_a, n**2 - (s**2).sum())
        worst_n = min(worst_n, 1.0 - n**2)
        scaled = (s * triple.alpha) ** 2
        assert scaled.sum() / triple.alpha**2 <= n**2 + 1e-10
    assert worst_a >= -1e-10
    assert worst_n >= -1e-10


def test_projector_pair_validation():
    e = np.eye(5, dtype=complex)
    p0 = e[:, :2] @ e[:, :2].T
    p1 = e[:, 3:] @ e[:, 3:].T
    pair = ProjectorPair(p0=p0, p1=p1)
    assert pair.rank == 2
    with pytest.raises(ValueError):
        ProjectorPair(p0=p0, p1=e[:, 2:] @ e[:, 2:].T)  # rank mismatch
    with pytest.raises(ValueError):
        ProjectorPair(p0=p0, p1=p0)  # not orthogonal
    with pytest.raises(ValueError):
        ProjectorPair(p0=0.5 * p0, p1=p1)  # not a projector
    with pytest.raises(ValueError):
        ProjectorPair(p0=p0, p1=p1, u=e[:, :2] + 0.1, v=e[:, 3:])  # not isometric


def test_projector_rank1_matches_levels():
    levels = dichotomic_from_levels(1.0, -1, 1, sites=2, factor=0.5)
    pair = ProjectorPair(p0=np.diag([1.0, 0, 0]).astype(complex), p1=np.diag([0.0, 0, 1]).astype(complex))
    built = dichotomic_from_projectors(pair, sites=2, factor=0.5)
    for a, b in zip(levels.local_ops, built.local_ops):
        assert np.abs(a - b).max() <= 1e-15
    assert np.abs(levels.number_local - built.number_local).max() <= 1e-15


def test_projector_rank2_closure():
    e = np.eye(5, dtype=complex)
    pair = ProjectorPair(p0=e[:, :2] @ e[:, :2].T, p1=e[:, 3:] @ e[:, 3:].T)
    triple = dichotomic_from_projectors(pair, sites=2, factor=0.5)
    sx, sy, sz = (l / 0.5 for l in triple.local_ops)
    # direct 5x5 arithmetic: commutators close and squares hit the projector
    assert np.abs(sx @ sy - sy @ sx - 2j * sz).max() <= 1e-12
    assert np.abs(sx @ sx - (pair.p0 + pair.p1)).max() <= 1e-12
    assert np.abs(sy @ sy - (pair.p0 + pair.p1)).max() <= 1e-12


def test_rotate_triple_identity_and_pi():
    triple = dichotomic_from_levels(1.0, -1, 1, sites=2, factor=0.5)
    same = rotate_triple(triple, (0, 0, 1.0), 0.0)
    for a, b in zip(triple.local_ops, same.local_ops):
        assert np.abs(a - b).max() <= 1e-12
    flipped = rotate_triple(triple, (0, 0, 1.0), np.pi)
    assert np.abs(flipped.local_ops[0] + triple.local_ops[0]).max() <= 1e-12
    assert np.abs(flipped.local_ops[1] + triple.local_ops[1]).max() <= 1e-12
    assert np.abs(flipped.local_ops[2] - triple.local_ops[2]).max() <= 1e-12
    assert np.abs(flipped.number_total - triple.number_total).max() <= 1e-12
    assert flipped.alpha == triple.alpha


def test_rotate_triple_preserves_variance_trace(rng):
    triple = dichotomic_from_levels(1.0, -1, 1, sites=2, factor=0.5)
    rho = np.zeros((9, 9), dtype=complex)
    for _ in range(3):
        ket = np.kron(random_ket(rng, 3), random_ket(rng, 3))
        rho += np.outer(ket, ket.conj()) / 3
    state = MultiSpinState.density(rho, 2, 3)
    base = _variance_trace(state, triple)
    for _ in range(100):
        axis = rng.normal(size=3)
        angle = rng.uniform(0, 2 * np.pi)
        rotated = rotate_triple(triple, axis, angle)
        assert abs(_variance_trace(state, rotated) - base) <= 1e-9


def _variance_trace(state, triple):
    total = 0.0
    for a in triple.collectives:
        total += expect(state, a @ a) - expect(state, a) ** 2
    return total


def test_rotate_rejects_non_closing():
    spin1 = collective_spin(1.0, 2)
    with pytest.raises(NumericalConsistencyError):
        rotate_triple(spin1, (0, 0, 1.0), 0.3)


def test_alpha_check():
    half = collective_spin(0.5, 1)
    # every pure spin-1/2 state saturates the Bloch bound exactly
    assert alpha_check(half, 200, rng_seed=7) == pytest.approx(0.25, abs=1e-12)
    dichotomic = dichotomic_from_levels(1.0, -1, 1, sites=2, factor=0.5)
    sup = alpha_check(dichotomic, 10_000, rng_seed=7)
    assert sup <= 0.25 + 1e-9
    assert sup > 0.15
    with pytest.raises(ValueError):
        alpha_check(half, 0, rng_seed=1)


def test_alpha_zero_outside_subspace():
    triple = dichotomic_from_levels(1.0, -1, 1, sites=1, factor=0.5)
    zero = MultiSpinState.pure([0, 1, 0], 1, 3)
    total = sum(expect(zero, a) ** 2 for a in triple.collectives)
    assert total == pytest.approx(0.0, abs=1e-12)


def test_parse_observable_spec(tmp_path):
    spin = parse_observable_spec("spin:1", sites=2, local_dim=3)
    assert spin.kind == "spin" and spin.alpha == 1.0
    half = parse_observable_spec("spin:1/2", sites=2, local_dim=2)
    assert half.alpha == 0.5
    dich = parse_observable_spec("dichotomic:-1,1", sites=2, local_dim=3)
    assert dich.kind == "dichotomic" and dich.alpha == 0.5
    dich1 = parse_observable_spec("dichotomic:-1,1,1", sites=2, local_dim=3)
    assert dich1.alpha == 1.0

    doc = {
        "p0": [[[1, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0]]],
        "p1": [[[0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [1, 0]]],
    }
    path = tmp_path / "pair.json"
    path.write_text(json.dumps(doc))
    proj = parse_observable_spec(f"projector:{path}", sites=2, local_dim=3)
    assert proj.alpha == 0.5

    with pytest.raises(ValueError):
        parse_observable_spec("spin:1", sites=2, local_dim=2)
    with pytest.raises(ValueError):
        parse_observable_spec("banana:1", sites=2, local_dim=2)
    with pytest.raises(ValueError):
        parse_observable_spec("dichotomic:-1", sites=2, local_dim=3)
