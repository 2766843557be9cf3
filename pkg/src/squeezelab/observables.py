"""Collective observable triples: spin components, dichotomic (two-level)
observables built from level pairs or projector pairs, and the associated
particle-number operator.

A triple bundles three collective Hermitian operators ``A_k = sum_i A_k^(i)``
with their shared single-site factors, the site-number operator
``N_hat = sum_i N^(i)`` and the single-site bound ``alpha`` with
``sum_k <A_k^(i)>^2 <= alpha^2`` for every single-site state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .hilbert import (
    NumericalConsistencyError,
    check_dimension,
    embed_local,
    eye,
    herm_expm,
    require_hermitian,
)

CLOSURE_TOL = 1e-12


def spin_matrices(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin component matrices (j_x, j_y, j_z) for spin quantum number ``j``.

    Basis ordering is m = -j .. +j (index 0 is m = -j).  The matrices
    satisfy [j_x, j_y] = i j_z cyclically and j_x^2+j_y^2+j_z^2 = j(j+1) I.
    """
    two_j = round(2 * j)
    if two_j < 0 or abs(2 * j - two_j) > 1e-12:
        raise ValueError(f"j must be a non-negative half-integer, got {j}")
    dim = two_j + 1
    m = np.arange(dim) - j
    jz = np.diag(m).astype(complex)
    jp = np.zeros((dim, dim), dtype=complex)
    for i in range(dim - 1):
        jp[i + 1, i] = np.sqrt(j * (j + 1) - m[i] * (m[i] + 1))
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    return jx, jy, jz


def collective_sum(op: np.ndarray, sites: int, local_dim: int) -> np.ndarray:
    """sum_i embed_local(op, i) over all sites."""
    total = np.zeros((local_dim**sites,) * 2, dtype=complex)
    for site in range(1, sites + 1):
        total += embed_local(op, site, sites, local_dim)
    return total


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=complex).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ObservableTriple:
    """Three collective observables with their local factors and number operator.

    All sites share one local construction: ``local_ops[k]`` is the d x d
    single-site factor of the collective ``collectives[k]``.
    """

    sites: int
    local_dim: int
    kind: str  # "spin" | "dichotomic"
    alpha: float
    local_ops: tuple[np.ndarray, np.ndarray, np.ndarray]
    number_local: np.ndarray
    collectives: tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)
    number_total: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.local_dim**self.sites

    @cached_property
    def sym_products(self) -> np.ndarray:
        """(3,3,D,D) array of symmetrized products (A_a A_b + A_b A_a)/2."""
        a = self.collectives
        out = np.empty((3, 3, self.dim, self.dim), dtype=complex)
        for p in range(3):
            for q in range(p, 3):
                sym = (a[p] @ a[q] + a[q] @ a[p]) / 2
                out[p, q] = sym
                out[q, p] = sym
        out.setflags(write=False)
        return out

    @cached_property
    def local_square_sums(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """sum_i embed(A_k^(i)^2) for each component k."""
        return tuple(
            _frozen(collective_sum(l @ l, self.sites, self.local_dim)) for l in self.local_ops
        )

    @cached_property
    def local_sym_sums(self) -> np.ndarray:
        """(3,3,D,D) array of sum_i embed((A_a^(i) A_b^(i) + A_b^(i) A_a^(i))/2)."""
        out = np.empty((3, 3, self.dim, self.dim), dtype=complex)
        for p in range(3):
            for q in range(p, 3):
                sym_local = (self.local_ops[p] @ self.local_ops[q] + self.local_ops[q] @ self.local_ops[p]) / 2
                total = collective_sum(sym_local, self.sites, self.local_dim)
                out[p, q] = total
                out[q, p] = total
        out.setflags(write=False)
        return out

    @cached_property
    def number_total_sq(self) -> np.ndarray:
        sq = self.number_total @ self.number_total
        sq.setflags(write=False)
        return sq

    @cached_property
    def embedded_site_ops(self) -> tuple:
        """Per-site embedded (A_x^(i), A_y^(i), A_z^(i), N^(i)), 1-based site order."""
        rows = []
        for site in range(1, self.sites + 1):
            ops = [
                _frozen(embed_local(l, site, self.sites, self.local_dim)) for l in self.local_ops
            ]
            ops.append(_frozen(embed_local(self.number_local, site, self.sites, self.local_dim)))
            rows.append(tuple(ops))
        return tuple(rows)


def _build_triple(sites, local_dim, kind, alpha, local_ops, number_local) -> ObservableTriple:
    check_dimension(local_dim**sites)
    local_ops = tuple(require_hermitian(l) for l in local_ops)
    number_local = require_hermitian(number_local)
    collectives = tuple(
        _frozen(collective_sum(l, sites, local_dim)) for l in local_ops
    )
    number_total = _frozen(collective_sum(number_local, sites, local_dim))
    return ObservableTriple(
        sites=sites,
        local_dim=local_dim,
        kind=kind,
        alpha=float(alpha),
        local_ops=tuple(_frozen(l) for l in local_ops),
        number_local=_frozen(number_local),
        collectives=collectives,
        number_total=number_total,
    )


def collective_spin(j: float, sites: int) -> ObservableTriple:
    """Collective spin triple J_x, J_y, J_z with N^(i) = identity and alpha = j."""
    jx, jy, jz = spin_matrices(j)
    d = jx.shape[0]
    return _build_triple(sites, d, "spin", j, (jx, jy, jz), eye(d))


def _m_index(m: float, j: float) -> int:
    idx = round(m + j)
    if abs(m + j - idx) > 1e-12 or not 0 <= idx <= round(2 * j):
        raise ValueError(f"level m={m} is not in -j..j for j={j}")
    return idx


@dataclass(frozen=True)
class ProjectorPair:
    """Two orthogonal equal-rank projectors with isometry factors for the
    unit-singular-value map between their ranges.

    ``u`` and ``v`` are d x r matrices whose orthonormal columns span
    range(p0) and range(p1); the map sends the k-th column of ``v`` to the
    k-th column of ``u``.  Omitted factors default to the ranges'
    eigenbasis columns in deterministic order.
    """

    p0: np.ndarray
    p1: np.ndarray
    u: np.ndarray | None = None
    v: np.ndarray | None = None

    def __post_init__(self):
        p0 = require_hermitian(self.p0)
        p1 = require_hermitian(self.p1)
        for name, p in (("p0", p0), ("p1", p1)):
            if np.abs(p @ p - p).max() > 1e-10:
                raise ValueError(f"{name} is not a projector (P^2 != P)")
        if np.abs(p0 @ p1).max() > 1e-10:
            raise ValueError("projectors are not orthogonal (P0 P1 != 0)")
        r0 = round(np.trace(p0).real)
        r1 = round(np.trace(p1).real)
        if r0 != r1:
            raise ValueError(f"projector ranks differ: {r0} != {r1}")
        if r0 < 1:
            raise ValueError("projectors must have rank >= 1")
        u = self._range_basis(p0, r0) if self.u is None else np.asarray(self.u, dtype=complex)
        v = self._range_basis(p1, r1) if self.v is None else np.asarray(self.v, dtype=complex)
        for name, w, p in (("u", u, p0), ("v", v, p1)):
            if w.shape != (p0.shape[0], r0):
                raise ValueError(f"{name} must have shape ({p0.shape[0]}, {r0}), got {w.shape}")
            if np.abs(w.conj().T @ w - np.eye(r0)).max() > 1e-10:
                raise ValueError(f"{name} columns are not orthonormal")
            if np.abs(p @ w - w).max() > 1e-10:
                raise ValueError(f"{name} columns do not lie in the projector range")
        object.__setattr__(self, "p0", _frozen(p0))
        object.__setattr__(self, "p1", _frozen(p1))
        object.__setattr__(self, "u", _frozen(u))
        object.__setattr__(self, "v", _frozen(v))

    @staticmethod
    def _range_basis(p: np.ndarray, rank: int) -> np.ndarray:
        w, vecs = np.linalg.eigh(p)
        cols = vecs[:, w > 0.5]
        if cols.shape[1] != rank:
            raise ValueError("projector range dimension does not match its trace")
        # fix global phases for reproducibility: largest-magnitude entry real positive
        for c in range(cols.shape[1]):
            k = int(np.argmax(np.abs(cols[:, c])))
            phase = cols[k, c] / abs(cols[k, c])
            cols[:, c] = cols[:, c] / phase
        return cols

    @property
    def rank(self) -> int:
        return self.u.shape[1]


def _pauli_block(pair: ProjectorPair) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    s_minus = pair.u @ pair.v.conj().T  # maps range(p1) -> range(p0), singular values 1
    s_plus = s_minus.conj().T
    sx = s_minus + s_plus
    sy = -1j * (s_minus - s_plus)
    sz = pair.p0 - pair.p1
    n_local = pair.p0 + pair.p1
    return sx, sy, sz, n_local


def _check_su2_closure(sigmas, n_local) -> None:
    sx, sy, sz = sigmas
    pairs = ((sx, sy, sz), (sy, sz, sx), (sz, sx, sy))
    for a, b, c in pairs:
        if np.abs(a @ b - b @ a - 2j * c).max() > CLOSURE_TOL:
            raise NumericalConsistencyError("dichotomic operators do not close under commutation")
    for s in sigmas:
        if np.abs(s @ s - n_local).max() > CLOSURE_TOL:
            raise NumericalConsistencyError("dichotomic operator square is not the subspace projector")


def dichotomic_from_projectors(
    pair: ProjectorPair, sites: int, factor: float = 0.5
) -> ObservableTriple:
    """Dichotomic triple built on a projector pair; N^(i) = P0 + P1, alpha = factor."""
    if factor not in (0.5, 1.0):
        raise ValueError(f"factor must be 1/2 or 1, got {factor}")
    sx, sy, sz, n_local = _pauli_block(pair)
    _check_su2_closure((sx, sy, sz), n_local)
    d = pair.p0.shape[0]
    return _build_triple(
        sites, d, "dichotomic", factor, (factor * sx, factor * sy, factor * sz), n_local
    )


def dichotomic_from_levels(
    j: float, m0: float, m1: float, sites: int, factor: float = 0.5
) -> ObservableTriple:
    """Dichotomic triple on the two magnetic levels ``m0``, ``m1`` of a spin ``j``.

    sigma_z = |m0><m0| - |m1><m1|, sigma_x/sigma_y the corresponding
    flip operators, N^(i) the projector onto span{|m0>, |m1>}; the local
    observables are ``factor * sigma_k``, with alpha = factor.
    """
    if m0 == m1:
        raise ValueError("m0 and m1 must be distinct levels")
    d = round(2 * j) + 1
    i0 = _m_index(m0, j)
    i1 = _m_index(m1, j)
    basis = eye(d)
    p0 = np.outer(basis[:, i0], basis[:, i0].conj())
    p1 = np.outer(basis[:, i1], basis[:, i1].conj())
    pair = ProjectorPair(p0=p0, p1=p1, u=basis[:, [i0]], v=basis[:, [i1]])
    return dichotomic_from_projectors(pair, sites, factor)


def rotate_triple(triple: ObservableTriple, axis, angle: float) -> ObservableTriple:
    """Conjugate a Pauli-closed triple by the collective rotation generated by
    its own observables about ``axis``; the number operator and alpha are
    unchanged.

    Raises NumericalConsistencyError for triples whose rescaled locals do
    not close as Pauli operators (e.g. collective spin with j >= 1).
    """
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0:
        raise ValueError("rotation axis must be a nonzero 3-vector")
    axis = axis / norm
    sigmas = tuple(l / triple.alpha for l in triple.local_ops)
    _check_su2_closure(sigmas, triple.number_local)
    generator = sum(n_k * l_k for n_k, l_k in zip(axis, triple.local_ops))
    u = herm_expm(generator, 1j * angle)
    rotated = tuple(u @ l @ u.conj().T for l in triple.local_ops)
    return _build_triple(
        triple.sites, triple.local_dim, triple.kind, triple.alpha, rotated, triple.number_local
    )


def alpha_check(triple: ObservableTriple, trials: int, rng_seed: int) -> float:
    """Empirical supremum of sum_k <A_k^(i)>^2 over random pure local states.

    Sampling can only under-estimate the true supremum, so the analytic
    ``alpha`` stays authoritative; a sampled value above alpha^2 + 1e-9
    raises NumericalConsistencyError.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((rng_seed, 0xA1FA))))
    d = triple.local_dim
    best = 0.0
    for _ in range(trials):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v /= np.linalg.norm(v)
        total = sum(np.vdot(v, l @ v).real ** 2 for l in triple.local_ops)
        best = max(best, float(total))
    if best > triple.alpha**2 + 1e-9:
        raise NumericalConsistencyError(
            f"sampled local bound {best!r} exceeds alpha^2 = {triple.alpha ** 2!r}"
        )
    return best


def _parse_half_integer(text: str) -> float:
    return float(Fraction(text))


def parse_observable_spec(spec: str, sites: int, local_dim: int) -> ObservableTriple:
    """Build a triple from a spec string.

    Formats: ``spin:<j>``, ``dichotomic:<m0>,<m1>[,<factor>]`` (levels of the
    spin j = (d-1)/2 implied by the local dimension), or
    ``projector:<file.json>`` with keys ``p0``, ``p1`` and optional ``u``,
    ``v``, ``factor`` (matrices as nested [re, im] pairs).
    """
    head, _, rest = spec.partition(":")
    head = head.strip()
    if head == "spin":
        j = _parse_half_integer(rest.strip())
        if round(2 * j) + 1 != local_dim:
            raise ValueError(f"spin:{rest} needs local dimension {round(2 * j) + 1}, state has {local_dim}")
        return collective_spin(j, sites)
    if head == "dichotomic":
        parts = [p.strip() for p in rest.split(",")]
        if len(parts) not in (2, 3):
            raise ValueError(f"dichotomic spec needs m0,m1[,factor], got {rest!r}")
        j = (local_dim - 1) / 2
        m0 = _parse_half_integer(parts[0])
        m1 = _parse_half_integer(parts[1])
        factor = _parse_half_integer(parts[2]) if len(parts) == 3 else 0.5
        return dichotomic_from_levels(j, m0, m1, sites, factor)
    if head == "projector":
        from .serialize import complex_matrix_from_json

        with open(rest.strip(), encoding="utf-8") as fh:
            doc = json.load(fh)
        p0 = complex_matrix_from_json(doc["p0"])
        p1 = complex_matrix_from_json(doc["p1"])
        u = complex_matrix_from_json(doc["u"]) if "u" in doc else None
        v = complex_matrix_from_json(doc["v"]) if "v" in doc else None
        factor = float(doc.get("factor", 0.5))
        if p0.shape[0] != local_dim:
            raise ValueError(f"projector dimension {p0.shape[0]} does not match state local dimension {local_dim}")
        pair = ProjectorPair(p0=p0, p1=p1, u=u, v=v)
        return dichotomic_from_projectors(pair, sites, factor)
    raise ValueError(f"unknown observable spec {spec!r}; expected spin:, dichotomic: or projector:")
