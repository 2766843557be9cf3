"""The two built-in worked examples.

Example 1: a one-parameter family of separable two-site spin-1 mixtures on
which the naive fixed-number margin L(p) goes negative (a false positive)
while the corrected margin G(p) = L(p) + delta(p) stays nonnegative.  The
curve has closed forms L = p(p-1), G = p^2, delta = p, and the module
cross-checks the dense evaluation against them on every call.

Example 2: one-axis twisting of N spin-1 sites, watched through (a) the
fixed-number collective-spin margins F1..F4, which stay pinned at N and
N(N-1), and (b) the fluctuating-number margins of the outer-level
dichotomic observables, where the alternative-counting diagnostic G3_alt
dips negative over most of the sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import SUITE_DICHOTOMIC, SUITE_SPIN, product_ket, sweep
from .hilbert import MultiSpinState, NumericalConsistencyError
from .observables import dichotomic_from_levels
from .witness import delta, generalized_margin, moments, naive_margin

VIOLATION_TOL = 1e-9
CLOSED_FORM_TOL = 1e-9


@dataclass(frozen=True)
class ExampleCurve:
    """Labeled series over a parameter grid, with per-series violation masks
    (value < -1e-9)."""

    parameter: str
    grid: np.ndarray
    series: dict[str, np.ndarray]

    def __post_init__(self):
        for name, values in self.series.items():
            if len(values) != len(self.grid):
                raise ValueError(f"series {name!r} length does not match the grid")
            if not np.isfinite(values).all():
                raise ValueError(f"series {name!r} contains non-finite values")

    def violation_mask(self, name: str) -> np.ndarray:
        return self.series[name] < -VIOLATION_TOL

    def violation_intervals(self, name: str) -> list[tuple[float, float]]:
        """Contiguous grid runs where the series is violated, as
        (first, last) parameter values."""
        mask = self.violation_mask(name)
        intervals = []
        start = None
        for i, flag in enumerate(mask):
            if flag and start is None:
                start = i
            elif not flag and start is not None:
                intervals.append((float(self.grid[start]), float(self.grid[i - 1])))
                start = None
        if start is not None:
            intervals.append((float(self.grid[start]), float(self.grid[-1])))
        return intervals


def example1_state(p: float) -> MultiSpinState:
    """The separable two-site spin-1 mixture rho(p).

    With probability p the sites are an even mixture of both-down and
    both-up on the outer levels m = -1, +1; with probability 1-p both
    sites sit in m = 0, outside the watched subspace.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    down = product_ket([-1, -1], 1.0)
    up = product_ket([1, 1], 1.0)
    empty = product_ket([0, 0], 1.0)
    rho = (
        (p / 2) * np.outer(down.data, down.data.conj())
        + (p / 2) * np.outer(up.data, up.data.conj())
        + (1 - p) * np.outer(empty.data, empty.data.conj())
    )
    return MultiSpinState.density(rho, 2, 3)


def example1_curve(p_grid) -> ExampleCurve:
    """L, G and delta along a grid of mixing parameters.

    L is the naive fixed-number margin for the axis subset {z} with the
    site count replaced by the mean particle number; G = L + delta is the
    corrected margin.  Every point is cross-checked against the closed
    forms L = p(p-1), G = p^2, delta = p to 1e-9; disagreement raises.
    """
    grid = np.asarray(p_grid, dtype=float)
    if grid.size and (grid.min() < 0 or grid.max() > 1):
        raise ValueError("p grid must lie within [0, 1]")
    triple = dichotomic_from_levels(1.0, -1, 1, sites=2, factor=0.5)
    z_subset = frozenset({2})
    l_vals = np.empty(grid.size)
    g_vals = np.empty(grid.size)
    d_vals = np.empty(grid.size)
    for i, p in enumerate(grid):
        ms = moments(example1_state(float(p)), triple)
        l_vals[i] = naive_margin(ms, triple.alpha, z_subset)
        d_vals[i] = delta(ms, triple.alpha)
        g_vals[i] = generalized_margin(ms, triple.alpha, z_subset)
    closed = {"L": grid * (grid - 1), "G": grid**2, "delta": grid}
    computed = {"L": l_vals, "G": g_vals, "delta": d_vals}
    for name in closed:
        dev = np.abs(computed[name] - closed[name]).max() if grid.size else 0.0
        if dev > CLOSED_FORM_TOL:
            raise NumericalConsistencyError(
                f"dense evaluation of {name} deviates from its closed form by {dev:.3e}"
            )
    return ExampleCurve(parameter="p", grid=grid, series=computed)


def example2_curves(sites: int, theta_grid) -> tuple[ExampleCurve, ExampleCurve]:
    """Spin and dichotomic curves for one-axis twisting of ``sites`` spin-1.

    Returns (spin, dichotomic): the spin curve holds F1..F4, the
    dichotomic curve holds the strict margins G1..G4 plus the
    alternative-counting diagnostics G2_alt/G3_alt, delta and n_mean.
    """
    grid = np.asarray(theta_grid, dtype=float)
    spin_rows = sweep(sites, 1.0, grid, suite=SUITE_SPIN)
    dich_rows = sweep(sites, 1.0, grid, suite=SUITE_DICHOTOMIC)
    spin_series = {
        key: np.array([row.values[key] for row in spin_rows]) for key in ("F1", "F2", "F3", "F4")
    }
    dich_keys = ("G1", "G2", "G3", "G4", "G2_alt", "G3_alt", "delta", "n_mean")
    dich_series = {
        key: np.array([row.values[key] for row in dich_rows]) for key in dich_keys
    }
    return (
        ExampleCurve(parameter="theta", grid=grid, series=spin_series),
        ExampleCurve(parameter="theta", grid=grid, series=dich_series),
    )
