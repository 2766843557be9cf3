"""Coordinate-independent witnesses built from 3x3 moment matrices.

The matrices are

    C_ab     = <A_a A_b + A_b A_a> / 2
    gamma    = C - <A><A>^T
    Q_ab     = per-site symmetrized local version of C minus the isotropic
               j(j+1)/3 diagonal (spin suite only)
    X        = (N-1) gamma + C [- N^2 Q for the spin suite]

Rotating the observable frame conjugates all four by the same orthogonal
matrix, so traces and extremal eigenvalues of X are frame independent and
the suites below detect a violation in the optimal frame without knowing it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import MultiSpinState, NumericalConsistencyError, expect, herm_eig
from .observables import ObservableTriple, collective_spin
from .witness import delta as delta_term
from .witness import moments

SYM_TOL = 1e-10


@dataclass(frozen=True)
class InvariantMatrices:
    """The 3x3 real symmetric moment matrices with the extremal eigenvalues of X."""

    c: np.ndarray
    gamma: np.ndarray
    q: np.ndarray | None
    x: np.ndarray
    lambda_min: float
    lambda_max: float

    def to_json_dict(self) -> dict:
        doc = {
            "C": self.c.tolist(),
            "gamma": self.gamma.tolist(),
            "X": self.x.tolist(),
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
        }
        if self.q is not None:
            doc["Q"] = self.q.tolist()
        return doc


def _symmetrize(m: np.ndarray, name: str) -> np.ndarray:
    defect = np.abs(m - m.T).max()
    if defect > SYM_TOL:
        raise NumericalConsistencyError(f"{name} matrix asymmetric beyond tolerance: {defect:.3e}")
    return (m + m.T) / 2


def _moment_matrices(state: MultiSpinState, triple: ObservableTriple):
    first = np.array([expect(state, a) for a in triple.collectives])
    c = np.empty((3, 3))
    for p in range(3):
        for q in range(p, 3):
            c[p, q] = c[q, p] = expect(state, triple.sym_products[p, q])
    c = _symmetrize(c, "C")
    gamma = _symmetrize(c - np.outer(first, first), "gamma")
    return first, c, gamma


def _extremal(x: np.ndarray) -> tuple[float, float]:
    # one eigensolver code path for everything, including 3x3
    w, _ = herm_eig(x.astype(complex))
    return float(w[0]), float(w[-1])


def build_invariant_spin(
    state: MultiSpinState,
    j: float,
    sites: int,
    triple: ObservableTriple | None = None,
) -> InvariantMatrices:
    """Moment matrices for the collective spin components at fixed particle
    number, including the per-particle Q subtraction."""
    if triple is None:
        triple = collective_spin(j, sites)
    _, c, gamma = _moment_matrices(state, triple)
    q = np.empty((3, 3))
    for p in range(3):
        for r in range(p, 3):
            q[p, r] = q[r, p] = expect(state, triple.local_sym_sums[p, r]) / sites
    q -= np.eye(3) * (j * (j + 1) / 3)
    q = _symmetrize(q, "Q")
    x = (sites - 1) * gamma + c - sites**2 * q
    lo, hi = _extremal(x)
    return InvariantMatrices(c=c, gamma=gamma, q=q, x=x, lambda_min=lo, lambda_max=hi)


def original_invariant_suite(m: InvariantMatrices, j: float, sites: int) -> dict[str, float]:
    """Four frame-independent margins for the fixed-number spin suite."""
    tr_c = float(np.trace(m.c))
    tr_g = float(np.trace(m.gamma))
    n = sites
    return {
        "F1": tr_g - n * j,
        "F2": (n - 1) * tr_g - n * (n - 1) * j + n**2 * j * (j + 1) / 3 - m.lambda_max,
        "F3": -tr_c + n * j * (n * j + 1) - n**2 * j * (j + 1) / 3 + m.lambda_min,
        "F4": -tr_c + n * j * (n * j + 1),
    }


def build_invariant_dichotomic(
    state: MultiSpinState,
    triple: ObservableTriple,
    use_site_count: bool = False,
) -> InvariantMatrices:
    """Moment matrices for a dichotomic triple; X = (n-1) gamma + C.

    ``n`` is the mean particle number by default, which keeps X consistent
    with the fluctuating-number margins; ``use_site_count`` substitutes the
    site count instead.
    """
    if triple.kind != "dichotomic":
        raise ValueError("invariant matrices for this suite require a dichotomic triple")
    _, c, gamma = _moment_matrices(state, triple)
    n = float(triple.sites) if use_site_count else expect(state, triple.number_total)
    x = (n - 1) * gamma + c
    lo, hi = _extremal(x)
    return InvariantMatrices(c=c, gamma=gamma, q=None, x=x, lambda_min=lo, lambda_max=hi)


def generalized_invariant_suite(
    m: InvariantMatrices, delta: float, n_mean: float
) -> dict[str, float]:
    """Four frame-independent margins for the fluctuating-number dichotomic
    suite (half-strength dichotomic observables assumed: the 1/2 and 1/4
    coefficients bake in alpha = 1/2).

    G1..G4 are the separability criteria: nonnegative on every separable
    state.  G2_alt and G3_alt use an alternative particle-number counting
    (n(n-2)/2 in place of n(n-2)/4, and -n/2 in place of +n/2).  They are
    not separability criteria -- simple product states violate them -- so
    they carry no verdict weight; they are reported because the twisting
    example tracks G3_alt, whose violation region is that example's feature
    of interest.
    """
    tr_c = float(np.trace(m.c))
    tr_g = float(np.trace(m.gamma))
    n = n_mean
    return {
        "G1": tr_g - n / 2,
        "G2": delta + (n - 1) * tr_g - n * (n - 2) / 4 - m.lambda_max,
        "G3": delta - tr_c + n / 2 + m.lambda_min,
        "G4": delta - tr_c + n * (n + 2) / 4,
        "G2_alt": delta + (n - 1) * tr_g - n * (n - 2) / 2 - m.lambda_max,
        "G3_alt": delta - tr_c - n / 2 + m.lambda_min,
    }


GENERALIZED_MARGIN_KEYS = ("G1", "G2", "G3", "G4")
ALT_MARGIN_KEYS = ("G2_alt", "G3_alt")


def evaluate_generalized_invariant(
    state: MultiSpinState,
    triple: ObservableTriple,
    use_site_count: bool = False,
) -> tuple[dict[str, float], InvariantMatrices, float, float]:
    """Convenience wrapper: moments -> delta -> matrices -> margins.

    Returns (margins, matrices, delta, n_mean).  Requires a factor-1/2
    dichotomic triple; other triples are rejected because the suite's
    numeric coefficients assume alpha = 1/2.
    """
    if triple.kind != "dichotomic" or abs(triple.alpha - 0.5) > 1e-12:
        raise ValueError(
            "the fluctuating-number invariant suite requires a dichotomic triple "
            f"with factor 1/2; got kind={triple.kind!r}, alpha={triple.alpha}"
        )
    ms = moments(state, triple)
    d = delta_term(ms, triple.alpha)
    matrices = build_invariant_dichotomic(state, triple, use_site_count=use_site_count)
    margins = generalized_invariant_suite(matrices, d, ms.n_mean)
    return margins, matrices, d, ms.n_mean


def evaluate_original_invariant(
    state: MultiSpinState,
    j: float,
    sites: int,
    triple: ObservableTriple | None = None,
) -> tuple[dict[str, float], InvariantMatrices]:
    """Convenience wrapper for the fixed-number spin suite."""
    matrices = build_invariant_spin(state, j, sites, triple=triple)
    return original_invariant_suite(matrices, j, sites), matrices
