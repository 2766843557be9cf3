"""File formats: complex arrays as nested [re, im] pairs, deterministic
CSV (15 significant digits, LF endings) and the state-file JSON schema.

State files carry ``sites``, ``local_dim`` and ``kind``:

* ``pure_product``  -- ``kets``: one list of [re, im] amplitudes per site
* ``mixture``       -- ``terms``: [{"weight": w, "kets": [...]}, ...]
* ``dense_density`` -- ``matrix``: full d^N x d^N matrix of [re, im] pairs
* ``preset``        -- ``name``: "example1_rho" (with "p") or "oat"
                       (with "sites", "j", "theta")
"""

from __future__ import annotations

import json
from functools import reduce
from pathlib import Path

import numpy as np

from .hilbert import MultiSpinState


def complex_from_json(entry) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return complex(float(entry[0]), float(entry[1]))
    raise ValueError(f"expected a number or [re, im] pair, got {entry!r}")


def complex_vector_from_json(doc) -> np.ndarray:
    return np.array([complex_from_json(e) for e in doc], dtype=complex)


def complex_matrix_from_json(doc) -> np.ndarray:
    rows = [complex_vector_from_json(row) for row in doc]
    mat = np.array(rows, dtype=complex)
    if mat.ndim != 2:
        raise ValueError("matrix JSON must be a list of equal-length rows")
    return mat


def complex_matrix_to_json(mat: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(mat, complex)]


def format_float(x: float) -> str:
    """15 significant digits, locale independent; negative zero normalized."""
    value = float(x)
    if value == 0.0:
        value = 0.0
    return f"{value:.15g}"


def write_csv(path, header, rows) -> None:
    """Write a CSV with LF endings; numeric cells get 15 significant digits."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(c) if isinstance(c, (int, float)) else str(c) for c in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8", newline="\n")


def _product_from_kets(kets_doc, sites: int, local_dim: int) -> np.ndarray:
    if len(kets_doc) != sites:
        raise ValueError(f"expected {sites} site kets, got {len(kets_doc)}")
    kets = []
    for ket_doc in kets_doc:
        ket = complex_vector_from_json(ket_doc)
        if ket.shape != (local_dim,):
            raise ValueError(f"site ket has length {ket.shape[0]}, expected {local_dim}")
        kets.append(ket)
    return reduce(np.kron, kets)


def load_state_doc(doc: dict) -> MultiSpinState:
    """Build a MultiSpinState from a parsed state-file document."""
    kind = doc.get("kind")
    if kind == "preset":
        return _load_preset(doc)
    try:
        sites = int(doc["sites"])
        local_dim = int(doc["local_dim"])
    except KeyError as exc:
        raise ValueError(f"state file is missing required field {exc}") from exc
    if kind == "pure_product":
        psi = _product_from_kets(doc["kets"], sites, local_dim)
        return MultiSpinState.pure(psi, sites, local_dim)
    if kind == "mixture":
        terms = doc["terms"]
        if not terms:
            raise ValueError("mixture must have at least one term")
        weights = np.array([float(t["weight"]) for t in terms])
        if (weights < 0).any():
            raise ValueError("mixture weights must be nonnegative")
        if abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError(f"mixture weights sum to {weights.sum()!r}, expected 1")
        dim = local_dim**sites
        rho = np.zeros((dim, dim), dtype=complex)
        for w, term in zip(weights, terms):
            psi = _product_from_kets(term["kets"], sites, local_dim)
            rho += w * np.outer(psi, psi.conj())
        return MultiSpinState.density(rho, sites, local_dim)
    if kind == "dense_density":
        rho = complex_matrix_from_json(doc["matrix"])
        return MultiSpinState.density(rho, sites, local_dim)
    raise ValueError(
        f"unknown state kind {kind!r}; expected pure_product, mixture, dense_density or preset"
    )


def _load_preset(doc: dict) -> MultiSpinState:
    name = doc.get("name")
    if name == "example1_rho":
        from .examples import example1_state

        return example1_state(float(doc.get("p", 0.5)))
    if name == "oat":
        from .dynamics import oat_state

        sites = int(doc.get("sites", 5))
        j = float(doc.get("j", 1.0))
        theta = float(doc.get("theta", 0.0))
        return oat_state(sites, j, theta)
    raise ValueError(f"unknown preset {name!r}; expected 'example1_rho' or 'oat'")


def load_state_file(path) -> MultiSpinState:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return load_state_doc(doc)
