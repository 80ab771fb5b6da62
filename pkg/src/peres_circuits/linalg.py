"""Dense linear algebra on multipartite Hilbert spaces.

These routines are the brute-force oracle that every circuit result is
checked against, so they favour obviously-correct reshapes over speed.

Subsystems are addressed 0-based in this API (``sys=1`` is the second
factor, the one written ``T_2`` in the usual notation). The CLI and the
JSON formats are 1-based.
"""
from __future__ import annotations

from math import prod
from typing import Sequence

import numpy as np

from .errors import InvariantError, ShapeError

# physical-property checks (trace, PSD, Hermiticity)
PHYS_TOL = 1e-9
# pure-arithmetic identities
ARITH_TOL = 1e-12

Shape = tuple[int, ...]


def check_shape(dims: Sequence[int], dim: int | None = None) -> Shape:
    """Validate subsystem dimensions, optionally against a total dimension."""
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise ShapeError("shape must have at least one subsystem")
    if any(d < 2 for d in dims):
        raise ShapeError(f"every local dimension must be >= 2, got {dims}")
    if dim is not None and prod(dims) != dim:
        raise ShapeError(f"shape {dims} describes dimension {prod(dims)}, matrix has {dim}")
    return dims


def _square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    return m


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = kron(out, m)
    return out


def partial_transpose(rho: np.ndarray, dims: Sequence[int], sys: int = 1) -> np.ndarray:
    """Transpose the row and column indices belonging to subsystem ``sys``."""
    rho = _square(rho)
    dims = check_shape(dims, rho.shape[0])
    if not 0 <= sys < len(dims):
        raise ShapeError(f"subsystem {sys} out of range for shape {dims}")
    s = len(dims)
    t = rho.reshape(dims + dims)
    axes = list(range(2 * s))
    axes[sys], axes[s + sys] = axes[s + sys], axes[sys]
    return t.transpose(axes).reshape(rho.shape)


def partial_trace(rho: np.ndarray, dims: Sequence[int], sys: int) -> np.ndarray:
    """Trace out subsystem ``sys``; returns the reduced matrix on the rest."""
    rho = _square(rho)
    dims = check_shape(dims, rho.shape[0])
    if not 0 <= sys < len(dims):
        raise ShapeError(f"subsystem {sys} out of range for shape {dims}")
    if len(dims) == 1:
        return np.trace(rho).reshape(1, 1)
    s = len(dims)
    t = np.trace(rho.reshape(dims + dims), axis1=sys, axis2=s + sys)
    keep = prod(dims) // dims[sys]
    return t.reshape(keep, keep)


def hermitian_deviation(m: np.ndarray) -> float:
    m = _square(m)
    return float(np.max(np.abs(m - m.conj().T), initial=0.0))


def hermitian_eigenvalues(m: np.ndarray, tol: float = PHYS_TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, in descending order."""
    m = _square(m)
    dev = hermitian_deviation(m)
    if dev > tol:
        raise InvariantError(f"matrix is not Hermitian (max deviation {dev:.3g})")
    return np.linalg.eigvalsh((m + m.conj().T) / 2)[::-1]


def power_trace(m: np.ndarray, k: int) -> complex:
    """Tr(m^k) by repeated multiplication."""
    m = _square(m)
    if k < 1:
        raise ValueError("k must be a positive integer")
    acc = m
    for _ in range(k - 1):
        acc = acc @ m
    return complex(np.trace(acc))
