"""Modified moments, the number-fluctuation correction ``delta`` and the
collective-observable inequality suites.

Three suites are evaluated over the eight subsets of the component axes:

* ``generalized`` -- valid for every separable state even when the particle
  number fluctuates; margins carry verdicts.
* ``original`` -- the fixed-particle-number suite; valid (and
  verdict-bearing) only for states with a sharp particle number.
* ``naive`` -- the fixed-number suite with the site count replaced by the
  mean particle number and no correction term.  Separable states can
  violate it, so it never yields a verdict: only margins, for diagnosis.

A margin is LHS - RHS of the corresponding inequality; negative means
violated.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .hilbert import MultiSpinState, expect
from .observables import ObservableTriple

VERDICT_TOL = 1e-9
N_VARIANCE_TOL = 1e-10

VERDICT_DETECTED = "entangled-detected"
VERDICT_NOT_DETECTED = "not-detected"

SUITE_GENERALIZED = "generalized"
SUITE_ORIGINAL = "original"
SUITE_NAIVE = "naive"

# All subsets of {0,1,2} by increasing cardinality, then lexicographically.
ALL_SUBSETS: tuple[frozenset, ...] = tuple(
    frozenset(c) for r in range(4) for c in combinations(range(3), r)
)


def subset_key(subset) -> str:
    """Canonical report key, e.g. 'I=' for the empty set, 'I=13' for {x,z}."""
    return "I=" + "".join(str(k + 1) for k in sorted(subset))


def _check_subset(subset) -> frozenset:
    subset = frozenset(subset)
    if not subset <= {0, 1, 2}:
        raise ValueError(f"subset must be contained in {{0, 1, 2}}, got {set(subset)}")
    return subset


@dataclass(frozen=True)
class MomentSet:
    """First and modified second moments of a state under a triple.

    ``mod_second[k]`` is <A_k^2> minus the summed squares of the local
    factors; ``mod_variance[k] = mod_second[k] - first[k]**2`` by
    construction.  Local moments are per site (row) and component (column).
    """

    first: np.ndarray
    mod_second: np.ndarray
    mod_variance: np.ndarray
    n_mean: float
    n_variance: float
    local_first: np.ndarray
    local_n: np.ndarray


def moments(state: MultiSpinState, triple: ObservableTriple) -> MomentSet:
    """Evaluate all moments of ``state`` needed by the inequality suites."""
    if state.dim != triple.dim:
        raise ValueError(f"state dimension {state.dim} does not match triple dimension {triple.dim}")
    first = np.array([expect(state, a) for a in triple.collectives])
    raw_second = np.array([expect(state, triple.sym_products[k, k]) for k in range(3)])
    local_sq = np.array([expect(state, s) for s in triple.local_square_sums])
    mod_second = raw_second - local_sq
    mod_variance = mod_second - first**2
    n_mean = expect(state, triple.number_total)
    n_second = expect(state, triple.number_total_sq)
    local_first = np.empty((triple.sites, 3))
    local_n = np.empty(triple.sites)
    for i, site_ops in enumerate(triple.embedded_site_ops):
        for k in range(3):
            local_first[i, k] = expect(state, site_ops[k])
        local_n[i] = expect(state, site_ops[3])
    return MomentSet(
        first=first,
        mod_second=mod_second,
        mod_variance=mod_variance,
        n_mean=float(n_mean),
        n_variance=float(n_second - n_mean**2),
        local_first=local_first,
        local_n=local_n,
    )


def delta(ms: MomentSet, alpha: float) -> float:
    """Correction term: sum of the three modified variances plus alpha^2 <N>."""
    return float(ms.mod_variance.sum() + alpha**2 * ms.n_mean)


def delta_prime(ms: MomentSet, alpha: float) -> float:
    """Product-state correction term, from local moments only.

    Equals alpha^2 <N> - sum_i s_i + <N> sum_i (s_i - alpha^2 <N^(i)>^2)
    with s_i the summed squared local first moments of site i.  On product
    states delta_prime <= delta; it vanishes when every site saturates the
    local bound with unit occupation (e.g. any pure product of spin-1/2).
    """
    s = (ms.local_first**2).sum(axis=1)
    return float(
        alpha**2 * ms.n_mean - s.sum() + ms.n_mean * (s - alpha**2 * ms.local_n**2).sum()
    )


def generalized_margin(ms: MomentSet, alpha: float, subset) -> float:
    """Margin of the fluctuating-number inequality for one axis subset.

    For the empty subset the inequality reduces to ``delta >= 0`` and the
    margin returned is ``delta`` itself; otherwise it is
    (<N>-1) sum_out mod_variance - sum_in mod_second
    + <N>(<N>-1) alpha^2 + delta.
    """
    subset = _check_subset(subset)
    if not subset:
        return delta(ms, alpha)
    return naive_margin(ms, alpha, subset) + delta(ms, alpha)


def original_margin(
    ms: MomentSet,
    alpha: float,
    n_fixed: int,
    subset,
    allow_fluctuating: bool = False,
) -> float:
    """Margin of the fixed-number inequality with particle number ``n_fixed``.

    Unless ``allow_fluctuating`` is set, requires the state to actually
    hold ``n_fixed`` particles: <N> = n_fixed and Var(N) <= 1e-10.
    """
    subset = _check_subset(subset)
    if not allow_fluctuating:
        if abs(ms.n_mean - n_fixed) > 1e-9 or ms.n_variance > N_VARIANCE_TOL:
            raise ValueError(
                f"state does not have a sharp particle number {n_fixed} "
                f"(<N> = {ms.n_mean!r}, Var(N) = {ms.n_variance!r}); "
                "pass allow_fluctuating=True to evaluate anyway"
            )
    return _fixed_form_margin(ms, alpha, float(n_fixed), subset)


def naive_margin(ms: MomentSet, alpha: float, subset) -> float:
    """Fixed-number margin with the particle count replaced by <N> and no
    correction term.  Not a separability criterion: for diagnosis only."""
    subset = _check_subset(subset)
    return _fixed_form_margin(ms, alpha, ms.n_mean, subset)


def _fixed_form_margin(ms: MomentSet, alpha: float, n: float, subset: frozenset) -> float:
    if not subset:
        return float(ms.mod_variance.sum() + n * alpha**2)
    out_sum = sum(ms.mod_variance[k] for k in range(3) if k not in subset)
    in_sum = sum(ms.mod_second[k] for k in subset)
    return float((n - 1) * out_sum - in_sum + n * (n - 1) * alpha**2)


@dataclass(frozen=True)
class WitnessReport:
    """All eight margins of one suite on one state, with the verdict.

    ``verdict`` is None for the naive suite (quarantined against misuse);
    otherwise 'entangled-detected' iff some margin is below -1e-9.
    """

    suite: str
    margins: dict[str, float]
    delta: float
    n_mean: float
    verdict: str | None
    warnings: tuple[str, ...] = ()

    @property
    def min_margin(self) -> float:
        return min(self.margins.values())

    def to_json_dict(self) -> dict:
        return {
            "suite": self.suite,
            "delta": self.delta,
            "margins": dict(self.margins),
            "verdict": self.verdict,
            "n_mean": self.n_mean,
            "warnings": list(self.warnings),
        }


def full_report(
    state: MultiSpinState,
    triple: ObservableTriple,
    suite: str,
    n_fixed: int | None = None,
    allow_fluctuating: bool = False,
) -> WitnessReport:
    """Evaluate one suite over all eight subsets and attach a verdict."""
    ms = moments(state, triple)
    d = delta(ms, triple.alpha)
    margins: dict[str, float] = {}
    if suite == SUITE_GENERALIZED:
        for subset in ALL_SUBSETS:
            margins[subset_key(subset)] = generalized_margin(ms, triple.alpha, subset)
    elif suite == SUITE_ORIGINAL:
        if n_fixed is None:
            n_fixed = triple.sites
        for subset in ALL_SUBSETS:
            margins[subset_key(subset)] = original_margin(
                ms, triple.alpha, n_fixed, subset, allow_fluctuating=allow_fluctuating
            )
    elif suite == SUITE_NAIVE:
        for subset in ALL_SUBSETS:
            margins[subset_key(subset)] = naive_margin(ms, triple.alpha, subset)
    else:
        raise ValueError(f"unknown suite {suite!r}")
    warnings = ()
    if ms.n_mean < 1.0:
        warnings = (
            f"mean particle number {ms.n_mean:.6g} is below 1; the inequalities are "
            "evaluated as written but may be uninformative in this regime",
        )
    if suite == SUITE_NAIVE:
        verdict = None
    else:
        detected = any(m < -VERDICT_TOL for m in margins.values())
        verdict = VERDICT_DETECTED if detected else VERDICT_NOT_DETECTED
    return WitnessReport(
        suite=suite,
        margins=margins,
        delta=d,
        n_mean=ms.n_mean,
        verdict=verdict,
        warnings=warnings,
    )
