"""Dense complex linear algebra for small multi-site spin systems.

Operators are plain complex numpy arrays; states are immutable
:class:`MultiSpinState` records.  Everything is dense and the total
Hilbert-space dimension is capped (default 4096, override with the
``SQUEEZELAB_DIM_CAP`` environment variable): the library targets
desk-scale systems of a few low-dimensional spins, not many-body scale.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

DEFAULT_DIM_CAP = 4096
DIM_CAP_ENV = "SQUEEZELAB_DIM_CAP"

HERM_TOL = 1e-12
NORM_TOL = 1e-12
PSD_TOL = 1e-10
IMAG_TOL = 1e-10
EIG_RESIDUAL_TOL = 1e-9


class DimensionCapError(ValueError):
    """Requested tensor-product dimension exceeds the configured cap."""


class HermiticityError(ValueError):
    """A matrix that must be Hermitian is not, within tolerance."""


class StateValidationError(ValueError):
    """State data violates a MultiSpinState invariant."""


class NumericalConsistencyError(ArithmeticError):
    """A computed value violates an exact structural expectation."""


def dimension_cap() -> int:
    """Active dimension cap: ``SQUEEZELAB_DIM_CAP`` if set, else 4096."""
    raw = os.environ.get(DIM_CAP_ENV)
    if raw is None:
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"{DIM_CAP_ENV} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValueError(f"{DIM_CAP_ENV} must be positive, got {cap}")
    return cap


def check_dimension(dim: int) -> int:
    if dim > dimension_cap():
        raise DimensionCapError(
            f"total dimension {dim} exceeds cap {dimension_cap()} "
            f"(override with {DIM_CAP_ENV})"
        )
    return dim


def _as_complex(m) -> np.ndarray:
    return np.asarray(m, dtype=complex)


def hermiticity_defect(m: np.ndarray) -> float:
    """Max entrywise |M - M^dagger|, relative to max |M| (0 for the zero matrix)."""
    m = _as_complex(m)
    scale = np.abs(m).max()
    if scale == 0.0:
        return 0.0
    return float(np.abs(m - m.conj().T).max() / scale)


def require_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    m = _as_complex(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise HermiticityError(f"expected a square matrix, got shape {m.shape}")
    defect = hermiticity_defect(m)
    if defect > tol:
        raise HermiticityError(f"matrix is not Hermitian: relative defect {defect:.3e} > {tol:.1e}")
    return m


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the dimension cap enforced on the result."""
    a = _as_complex(a)
    b = _as_complex(b)
    if a.ndim == 2 and b.ndim == 2:
        check_dimension(a.shape[0] * b.shape[0])
    return np.kron(a, b)


def eye(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def embed_local(op: np.ndarray, site: int, sites: int, local_dim: int) -> np.ndarray:
    """Embed a single-site operator at ``site`` (1-based) into the N-site space.

    Returns identity(d^(site-1)) (x) op (x) identity(d^(N-site)); site 1 is
    the slowest-varying tensor factor.
    """
    op = _as_complex(op)
    if op.shape != (local_dim, local_dim):
        raise ValueError(f"operator shape {op.shape} does not match local dimension {local_dim}")
    if not 1 <= site <= sites:
        raise ValueError(f"site {site} out of range 1..{sites}")
    check_dimension(local_dim**sites)
    left = eye(local_dim ** (site - 1))
    right = eye(local_dim ** (sites - site))
    return np.kron(np.kron(left, op), right)


def herm_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and unitary ``v``
    such that ``m = v @ diag(w) @ v.conj().T``.
    """
    m = require_hermitian(m)
    w, v = np.linalg.eigh(m)
    return w, v


def herm_expm(m: np.ndarray, scale: complex = 1.0) -> np.ndarray:
    """exp(scale * m) for Hermitian ``m`` via eigendecomposition.

    Purely imaginary ``scale`` yields a unitary result.
    """
    w, v = herm_eig(m)
    return (v * np.exp(scale * w)) @ v.conj().T


@dataclass(frozen=True)
class MultiSpinState:
    """A pure vector or density matrix on an N-site space of local dimension d.

    ``data`` is a read-only complex array: a length d^N vector for
    ``kind="pure"`` or a d^N x d^N matrix for ``kind="density"``.
    Invariants (unit norm / unit trace, hermiticity, positivity) are
    enforced at construction.
    """

    sites: int
    local_dim: int
    kind: str
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.sites < 1 or self.local_dim < 1:
            raise StateValidationError("sites and local_dim must be positive")
        dim = check_dimension(self.local_dim**self.sites)
        arr = _as_complex(self.data)
        if self.kind == "pure":
            if arr.shape != (dim,):
                raise StateValidationError(f"pure state must have shape ({dim},), got {arr.shape}")
            norm = np.linalg.norm(arr)
            if abs(norm - 1.0) > NORM_TOL:
                raise StateValidationError(f"pure state norm {norm!r} deviates from 1 beyond {NORM_TOL:.0e}")
        elif self.kind == "density":
            if arr.shape != (dim, dim):
                raise StateValidationError(f"density matrix must have shape ({dim}, {dim}), got {arr.shape}")
            if hermiticity_defect(arr) > HERM_TOL:
                raise StateValidationError("density matrix is not Hermitian within 1e-12")
            trace = np.trace(arr)
            if abs(trace - 1.0) > NORM_TOL * max(1.0, abs(trace)):
                raise StateValidationError(f"density matrix trace {trace!r} deviates from 1 beyond {NORM_TOL:.0e}")
            min_eig = float(np.linalg.eigvalsh(arr)[0])
            if min_eig < -PSD_TOL:
                raise StateValidationError(f"density matrix minimum eigenvalue {min_eig:.3e} below -{PSD_TOL:.0e}")
        else:
            raise StateValidationError(f"kind must be 'pure' or 'density', got {self.kind!r}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return self.local_dim**self.sites

    @classmethod
    def pure(cls, data, sites: int, local_dim: int) -> "MultiSpinState":
        return cls(sites=sites, local_dim=local_dim, kind="pure", data=data)

    @classmethod
    def density(cls, data, sites: int, local_dim: int) -> "MultiSpinState":
        return cls(sites=sites, local_dim=local_dim, kind="density", data=data)

    def to_density(self) -> "MultiSpinState":
        """Explicit conversion; pure states stay vectors until this is called."""
        if self.kind == "density":
            return self
        rho = np.outer(self.data, self.data.conj())
        return MultiSpinState.density(rho, self.sites, self.local_dim)


def expect(state: MultiSpinState, op: np.ndarray) -> float:
    """<psi|op|psi> or Tr(rho op) for Hermitian ``op``; returns the real part.

    Raises NumericalConsistencyError if the imaginary residue exceeds
    1e-10 (relative to the magnitude of the result), which catches
    non-Hermitian operators slipping through.
    """
    op = _as_complex(op)
    if op.shape != (state.dim, state.dim):
        raise ValueError(f"operator shape {op.shape} does not match state dimension {state.dim}")
    if state.kind == "pure":
        value = complex(np.vdot(state.data, op @ state.data))
    else:
        value = complex(np.einsum("ab,ba->", state.data, op))
    if abs(value.imag) > IMAG_TOL * max(1.0, abs(value)):
        raise NumericalConsistencyError(
            f"expectation value has imaginary residue {value.imag:.3e}; operator is likely not Hermitian"
        )
    return value.real
