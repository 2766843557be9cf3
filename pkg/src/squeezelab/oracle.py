"""Brute-force verification layer: random separable states, the
local-state-to-qutrit map, and the inequality chain that underpins the
fluctuating-number suites, all checked by dense numerical evaluation.

Randomness contract: every draw comes from a PCG64 generator seeded with
``SeedSequence((seed, trial))`` -- one independent, reproducible stream
per trial.  Within a trial the draw order is fixed: mixture weights first,
then the site kets of each product component.  Identical seeds therefore
reproduce identical states and margins bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .hilbert import MultiSpinState, NumericalConsistencyError
from .invariant import (
    GENERALIZED_MARGIN_KEYS,
    evaluate_generalized_invariant,
)
from .observables import (
    ObservableTriple,
    collective_spin,
    dichotomic_from_levels,
    rotate_triple,
)
from .witness import (
    ALL_SUBSETS,
    MomentSet,
    delta,
    delta_prime,
    generalized_margin,
    moments,
)

QUTRIT_TRACE_TOL = 1e-12
QUTRIT_PSD_TOL = 1e-10
ETA_DEGENERATE = 1e-14


def rng_stream(seed: int, trial: int) -> np.random.Generator:
    """The per-trial random stream (see module docstring)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, trial))))


@dataclass(frozen=True)
class SeparableSpec:
    """Recipe for a random separable state: a ``terms``-component convex
    mixture of pure product states on ``sites`` sites of dimension
    ``local_dim``."""

    sites: int
    local_dim: int
    terms: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.terms < 1:
            raise ValueError("mixture length must be >= 1")
        if self.sites < 1 or self.local_dim < 1:
            raise ValueError("sites and local_dim must be positive")


def _random_ket(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _draw_components(spec: SeparableSpec, trial: int):
    rng = rng_stream(spec.seed, trial)
    weights = rng.exponential(size=spec.terms)
    weights /= weights.sum()
    components = [
        [_random_ket(rng, spec.local_dim) for _ in range(spec.sites)]
        for _ in range(spec.terms)
    ]
    return weights, components


def sample_product_kets(spec: SeparableSpec, trial: int = 0) -> list[np.ndarray]:
    """Per-site kets of the first product component of the trial's draw."""
    _, components = _draw_components(spec, trial)
    return components[0]


def product_state_from_kets(kets) -> MultiSpinState:
    psi = reduce(np.kron, kets)
    return MultiSpinState.pure(psi, sites=len(kets), local_dim=len(kets[0]))


def sample_pure_product(spec: SeparableSpec, trial: int = 0) -> MultiSpinState:
    """Random pure product state (per-site normalized complex normals)."""
    return product_state_from_kets(sample_product_kets(spec, trial))


def sample_separable(spec: SeparableSpec, trial: int = 0) -> MultiSpinState:
    """Random separable density matrix: flat-simplex convex mixture of
    ``terms`` pure products."""
    weights, components = _draw_components(spec, trial)
    dim = spec.local_dim**spec.sites
    rho = np.zeros((dim, dim), dtype=complex)
    for w, kets in zip(weights, components):
        psi = reduce(np.kron, kets)
        rho += w * np.outer(psi, psi.conj())
    return MultiSpinState.density(rho, spec.sites, spec.local_dim)


def random_local_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random full-rank density matrix (Wishart-like G G^dagger, normalized)."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


# ---------------------------------------------------------------------------
# local-state-to-qutrit map


@dataclass(frozen=True)
class QutritImage:
    """Image of a local state: occupation-weighted mixture of a pure
    qubit-block state (Bloch vector = normalized local first moments) and
    the empty level |2>."""

    r: np.ndarray
    n: float
    eta: float

    def __post_init__(self):
        r = np.asarray(self.r, dtype=complex)
        if r.shape != (3, 3):
            raise ValueError(f"qutrit image must be 3x3, got {r.shape}")
        if np.abs(r - r.conj().T).max() > 1e-12:
            raise NumericalConsistencyError("qutrit image is not Hermitian")
        trace = np.trace(r).real
        if abs(trace - 1.0) > QUTRIT_TRACE_TOL:
            raise NumericalConsistencyError(f"qutrit image trace {trace!r} deviates from 1")
        min_eig = float(np.linalg.eigvalsh(r)[0])
        if min_eig < -QUTRIT_PSD_TOL:
            raise NumericalConsistencyError(f"qutrit image has negative eigenvalue {min_eig:.3e}")
        r = r.copy()
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.r)


_S0 = np.diag([1.0, 1.0, 0.0]).astype(complex)
_SX = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
_SY = np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]], dtype=complex)
_SZ = np.diag([1.0, -1.0, 0.0]).astype(complex)
_P2 = np.diag([0.0, 0.0, 1.0]).astype(complex)


def qutrit_map(rho_local: np.ndarray, local_ops, number_local: np.ndarray, alpha: float) -> QutritImage:
    """Map a single-site state to its three-level image.

    With a = (<A_1>, <A_2>, <A_3>), n = <N> and eta = |a|, the image is
    n * |psi><psi| + (1-n) |2><2| where |psi> lives in the {|0>, |1>}
    block with Bloch vector a/eta.  When eta vanishes the block direction
    is undefined and the continuous limit -- the maximally mixed qubit
    block -- is used instead.
    """
    rho_local = np.asarray(rho_local, dtype=complex)
    a = np.array([np.einsum("ab,ba->", rho_local, np.asarray(op, complex)).real for op in local_ops])
    n = float(np.einsum("ab,ba->", rho_local, np.asarray(number_local, complex)).real)
    eta = float(np.linalg.norm(a))
    if eta > alpha * abs(n) * (1 + 1e-9) + 1e-12:
        raise NumericalConsistencyError(
            f"local moments violate the number bound: eta={eta!r} > alpha*n={alpha * n!r}"
        )
    if eta <= ETA_DEGENERATE:
        r = (n / 2) * _S0 + (1 - n) * _P2
    else:
        bloch = a / eta
        r = n * (_S0 / 2 + (bloch[0] * _SX + bloch[1] * _SY + bloch[2] * _SZ) / 2) + (1 - n) * _P2
    return QutritImage(r=r, n=n, eta=eta)


# ---------------------------------------------------------------------------
# product-state inequality chain


def _require_moments(state, triple, ms):
    if ms is None:
        ms = moments(state, triple)
    return ms


def tighter_bound_margins(
    state: MultiSpinState | None, triple: ObservableTriple, ms: MomentSet | None = None
) -> np.ndarray:
    """Per-component margins of the improved first-moment bound
    <A_k>^2 <= <N> sum_i <A_k^(i)>^2 + alpha^2 <N> (<N> - sum_i <N^(i)>^2),
    valid for pure product states."""
    ms = _require_moments(state, triple, ms)
    s = (ms.local_first**2).sum(axis=0)
    common = triple.alpha**2 * ms.n_mean * (ms.n_mean - (ms.local_n**2).sum())
    return ms.n_mean * s + common - ms.first**2


def check_tighter_bound(
    state: MultiSpinState, triple: ObservableTriple, ms: MomentSet | None = None
) -> float:
    """Minimum over components of the improved first-moment bound margins."""
    return float(tighter_bound_margins(state, triple, ms).min())


def check_subset_bound(
    state: MultiSpinState | None,
    triple: ObservableTriple,
    subset,
    ms: MomentSet | None = None,
) -> float:
    """Margin of the subset-summed first-moment bound
    sum_{k in I} <A_k>^2 <= <N> sum_i sum_{k in I} <A_k^(i)>^2
    + alpha^2 <N> (<N> - sum_i <N^(i)>^2) on a pure product state."""
    ms = _require_moments(state, triple, ms)
    idx = sorted(subset)
    s_in = (ms.local_first[:, idx] ** 2).sum()
    common = triple.alpha**2 * ms.n_mean * (ms.n_mean - (ms.local_n**2).sum())
    return float(ms.n_mean * s_in + common - (ms.first[idx] ** 2).sum())


def check_master_bound(
    state: MultiSpinState | None,
    triple: ObservableTriple,
    subset,
    ms: MomentSet | None = None,
) -> float:
    """Margin of the product-state master inequality
    <N> sum_out mod_var + sum_in mod_var - sum_in mod_second >= -alpha^2 <N>^2."""
    ms = _require_moments(state, triple, ms)
    out_sum = sum(ms.mod_variance[k] for k in range(3) if k not in subset)
    in_var = sum(ms.mod_variance[k] for k in subset)
    in_sec = sum(ms.mod_second[k] for k in subset)
    return float(ms.n_mean * out_sum + in_var - in_sec + triple.alpha**2 * ms.n_mean**2)


def convexity_margins(point_pairs) -> np.ndarray:
    """Midpoint-convexity margins (f(p1)+f(p2))/2 - f((p1+p2)/2) for
    f(x, y) = x^2 / y; nonnegative iff f is midpoint convex there."""
    out = np.empty(len(point_pairs))
    for i, ((x1, y1), (x2, y2)) in enumerate(point_pairs):
        if y1 <= 0 or y2 <= 0:
            raise ValueError("convexity check requires y > 0")
        mid = ((x1 + x2) / 2) ** 2 / ((y1 + y2) / 2)
        out[i] = (x1**2 / y1 + x2**2 / y2) / 2 - mid
    return out


def check_convexity_lemma(point_pairs, tol: float = 1e-12) -> bool:
    """True iff f(x,y) = x^2/y is midpoint convex on every supplied pair."""
    return bool(convexity_margins(point_pairs).min() >= -tol)


# ---------------------------------------------------------------------------
# verification suite


@dataclass
class CheckResult:
    """Outcome of one check: raw minimum margin over all trials, the pass
    tolerance (pass iff min_margin >= -tolerance) and the failing draws."""

    name: str
    trials: int
    min_margin: float
    tolerance: float
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.min_margin >= -self.tolerance and not self.failures

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "min_margin": self.min_margin,
            "tolerance": self.tolerance,
            "failing_seeds": list(self.failures),
            "passed": self.passed,
        }


@dataclass
class VerificationSummary:
    seed: int
    tolerance: float
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "checks": [c.to_json_dict() for c in self.checks],
        }


class _Accumulator:
    """Tracks the minimum margin of a named check and the draws that fail."""

    def __init__(self, name: str, tolerance: float):
        self.name = name
        self.tolerance = tolerance
        self.min_margin = np.inf
        self.trials = 0
        self.failures: list = []

    def add(self, margin: float, tag: dict) -> None:
        self.trials += 1
        if margin < self.min_margin:
            self.min_margin = float(margin)
        if margin < -self.tolerance and len(self.failures) < 20:
            self.failures.append({**tag, "margin": float(margin)})

    def result(self) -> CheckResult:
        return CheckResult(
            name=self.name,
            trials=self.trials,
            min_margin=float(self.min_margin) if self.trials else 0.0,
            tolerance=self.tolerance,
            failures=self.failures,
        )


def _families(sites: int, local_dim: int) -> list[tuple[str, ObservableTriple]]:
    j = (local_dim - 1) / 2
    return [
        ("spin", collective_spin(j, sites)),
        ("dichotomic", dichotomic_from_levels(j, -j, j, sites, factor=0.5)),
    ]


def _configs(max_sites: int, local_dims) -> list[tuple[int, int]]:
    return [(n, d) for n in range(2, max_sites + 1) for d in local_dims]


def run_product_checks(trials, seed, max_sites, local_dims, tolerance) -> list[CheckResult]:
    """Product-state group: the modified-variance identity, the local number
    bound, and the whole first-moment / subset / master inequality chain."""
    identity = _Accumulator("product-variance-identity", 1e-10)
    n_bound = _Accumulator("local-number-bound", tolerance)
    tighter = _Accumulator("first-moment-bound", tolerance)
    subset_b = _Accumulator("subset-moment-bound", tolerance)
    master = _Accumulator("product-master-bound", tolerance)
    dprime = _Accumulator("product-correction-order", tolerance)
    configs = _configs(max_sites, local_dims)
    triples = {cfg: _families(*cfg) for cfg in configs}
    for trial in range(trials):
        cfg = configs[trial % len(configs)]
        sites, local_dim = cfg
        spec = SeparableSpec(sites=sites, local_dim=local_dim, terms=1, seed=seed)
        kets = sample_product_kets(spec, trial)
        state = product_state_from_kets(kets)
        for family, triple in triples[cfg]:
            tag = {"trial": trial, "sites": sites, "local_dim": local_dim, "family": family}
            ms = moments(state, triple)
            dev = np.abs(ms.mod_variance + (ms.local_first**2).sum(axis=0)).max()
            identity.add(-dev, tag)
            alpha2 = triple.alpha**2
            n_bound.add(float((ms.local_n**2 - (ms.local_first**2).sum(axis=1) / alpha2).min()), tag)
            n_bound.add(float((1.0 - ms.local_n**2).min()), tag)
            tighter.add(check_tighter_bound(state, triple, ms=ms), tag)
            for subset in ALL_SUBSETS:
                subset_b.add(check_subset_bound(state, triple, subset, ms=ms), tag)
                master.add(check_master_bound(state, triple, subset, ms=ms), tag)
            # on product states the local-moment correction never exceeds delta
            dprime.add(delta(ms, triple.alpha) - delta_prime(ms, triple.alpha), tag)
    return [a.result() for a in (identity, n_bound, tighter, subset_b, master, dprime)]


def run_separable_checks(trials, seed, max_sites, local_dims, tolerance, mixture_max=5) -> list[CheckResult]:
    """Separable-mixture group: all eight fluctuating-number margins for
    both observable families plus the frame-independent margins."""
    gen = _Accumulator("separable-generalized-margins", tolerance)
    inv = _Accumulator("separable-invariant-margins", tolerance)
    configs = _configs(max_sites, local_dims)
    triples = {cfg: _families(*cfg) for cfg in configs}
    for trial in range(trials):
        cfg = configs[trial % len(configs)]
        sites, local_dim = cfg
        terms = trial % mixture_max + 1
        spec = SeparableSpec(sites=sites, local_dim=local_dim, terms=terms, seed=seed)
        state = sample_separable(spec, trial)
        for family, triple in triples[cfg]:
            tag = {"trial": trial, "sites": sites, "local_dim": local_dim, "family": family}
            ms = moments(state, triple)
            worst = min(generalized_margin(ms, triple.alpha, s) for s in ALL_SUBSETS)
            gen.add(worst, tag)
            if family == "dichotomic":
                margins, _, _, _ = evaluate_generalized_invariant(state, triple)
                inv.add(min(margins[k] for k in GENERALIZED_MARGIN_KEYS), tag)
    return [gen.result(), inv.result()]


def run_local_checks(trials, seed, local_dims, tolerance) -> list[CheckResult]:
    """Local-state group: single-site bounds and the qutrit map's validity
    (trace, positivity, {n, 0, 1-n} spectrum) on random local densities."""
    alpha_b = _Accumulator("local-alpha-bound", tolerance)
    n_bound = _Accumulator("local-number-bound-mixed", tolerance)
    tr_chk = _Accumulator("qutrit-map-trace", QUTRIT_TRACE_TOL)
    psd_chk = _Accumulator("qutrit-map-positivity", QUTRIT_PSD_TOL)
    spec_chk = _Accumulator("qutrit-map-spectrum", 1e-10)
    families = {d: _families(2, d) for d in local_dims}
    for trial in range(trials):
        local_dim = tuple(local_dims)[trial % len(local_dims)]
        rng = rng_stream(seed, trial)
        rho = random_local_density(rng, local_dim)
        for family, triple in families[local_dim]:
            tag = {"trial": trial, "local_dim": local_dim, "family": family}
            a = np.array([np.einsum("ab,ba->", rho, op).real for op in triple.local_ops])
            n = np.einsum("ab,ba->", rho, triple.number_local).real
            alpha_b.add(float(triple.alpha**2 - (a**2).sum()), tag)
            n_bound.add(float(n**2 - (a**2).sum() / triple.alpha**2), tag)
            n_bound.add(float(1.0 - n**2), tag)
            image = qutrit_map(rho, triple.local_ops, triple.number_local, triple.alpha)
            ev = image.eigenvalues()
            tr_chk.add(-abs(float(np.trace(image.r).real) - 1.0), tag)
            psd_chk.add(float(ev[0]), tag)
            want = np.sort([image.n, 0.0, 1.0 - image.n])
            spec_chk.add(-float(np.abs(ev - want).max()), tag)
    return [a.result() for a in (alpha_b, n_bound, tr_chk, psd_chk, spec_chk)]


def run_convexity_check(trials, seed) -> CheckResult:
    rng = rng_stream(seed, 0xC0)
    pairs = [
        ((rng.normal() * 10, rng.exponential() + 1e-6), (rng.normal() * 10, rng.exponential() + 1e-6))
        for _ in range(trials)
    ]
    margins = convexity_margins(pairs)
    acc = _Accumulator("convexity-midpoint", 1e-12)
    for i, m in enumerate(margins):
        acc.add(float(m), {"pair": i})
    return acc.result()


def run_rotation_check(rotations, states, seed, tolerance=1e-9, sites=3, local_dim=3) -> CheckResult:
    """Drift of trC, tr(gamma), delta, <N> and the four frame-independent
    margins under random rotations of a dichotomic triple."""
    j = (local_dim - 1) / 2
    base = dichotomic_from_levels(j, -j, j, sites, factor=0.5)
    acc = _Accumulator("rotation-invariance", tolerance)
    for s_idx in range(states):
        spec = SeparableSpec(sites=sites, local_dim=local_dim, terms=s_idx % 3 + 1, seed=seed)
        state = sample_separable(spec, s_idx)
        margins0, mat0, d0, n0 = evaluate_generalized_invariant(state, base)
        ref = np.array(
            [np.trace(mat0.c), np.trace(mat0.gamma), d0, n0]
            + [margins0[k] for k in GENERALIZED_MARGIN_KEYS]
        )
        rng = rng_stream(seed, 0xB0 + s_idx)
        for r_idx in range(rotations):
            axis = rng.normal(size=3)
            angle = rng.uniform(0, 2 * np.pi)
            rotated = rotate_triple(base, axis, angle)
            margins, mat, d, n = evaluate_generalized_invariant(state, rotated)
            cur = np.array(
                [np.trace(mat.c), np.trace(mat.gamma), d, n]
                + [margins[k] for k in GENERALIZED_MARGIN_KEYS]
            )
            drift = float(np.abs(cur - ref).max())
            acc.add(-drift, {"state": s_idx, "rotation": r_idx})
    return acc.result()


def run_verification(
    trials: int = 1000,
    seed: int = 42,
    max_sites: int = 4,
    local_dims=(2, 3),
    tolerance: float = 1e-9,
    mixture_max: int = 5,
) -> VerificationSummary:
    """Run every check group and collect one summary.

    ``trials`` is the number of sampled states per group (split over the
    (sites, local_dim) grid); identity-style checks keep their structural
    tolerances while inequality margins use ``tolerance``.
    """
    local_dims = tuple(local_dims)
    checks: list[CheckResult] = []
    checks += run_product_checks(trials, seed, max_sites, local_dims, tolerance)
    checks += run_separable_checks(trials, seed, max_sites, local_dims, tolerance, mixture_max)
    checks += run_local_checks(trials, seed, local_dims, tolerance)
    checks.append(run_convexity_check(trials, seed))
    checks.append(run_rotation_check(max(1, min(100, trials // 10)), 5, seed, tolerance))
    return VerificationSummary(seed=seed, tolerance=tolerance, checks=checks)
