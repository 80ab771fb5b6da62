"""Density matrices: construction, seeded random generation and JSON files.

Random states use the Ginibre (Gram) construction ``G G^dagger / Tr`` with
complex Gaussian ``G`` drawn from numpy's PCG64 generator, seeded with a
64-bit integer. Same seed, same matrix, bit for bit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from math import prod
from pathlib import Path
from typing import Sequence

import numpy as np

from . import jsonio
from .errors import InvariantError, ShapeError
from .linalg import PHYS_TOL, Shape, check_shape, hermitian_deviation, kron

__all__ = [
    "DensityMatrix",
    "PureState",
    "bell_state",
    "werner_state",
    "maximally_mixed",
    "product_state",
    "ghz_state",
    "random_density",
    "random_pure",
    "random_unitary",
    "random_local_unitary",
    "save_state",
    "load_state",
    "state_to_dict",
    "state_from_dict",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix with its subsystem shape.

    Construction Hermitizes ``(m + m^dagger)/2`` when the deviation is below
    1e-9 and raises :class:`InvariantError` otherwise.
    """

    matrix: np.ndarray
    dims: Shape

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"density matrix must be square, got {m.shape}")
        dims = check_shape(self.dims, m.shape[0])
        dev = hermitian_deviation(m)
        if dev > PHYS_TOL:
            raise InvariantError(f"not Hermitian: deviation {dev:.3g} exceeds {PHYS_TOL}")
        m = (m + m.conj().T) / 2
        tr = np.trace(m).real
        if abs(tr - 1) > PHYS_TOL:
            raise InvariantError(f"trace is {tr!r}, expected 1")
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -PHYS_TOL:
            raise InvariantError(f"not positive semidefinite: minimum eigenvalue {lo:.3g}")
        object.__setattr__(self, "matrix", _readonly(m))
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def tensor(self) -> np.ndarray:
        """View as a tensor with axes (ket_1..ket_s, bra_1..bra_s)."""
        return self.matrix.reshape(self.dims + self.dims)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    dims: Shape

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).ravel()
        dims = check_shape(self.dims, v.size)
        norm = np.linalg.norm(v)
        if abs(norm - 1) > PHYS_TOL:
            raise InvariantError(f"state vector has norm {norm!r}")
        object.__setattr__(self, "amplitudes", _readonly(v))
        object.__setattr__(self, "dims", dims)

    def density(self) -> DensityMatrix:
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.dims)


def bell_state() -> DensityMatrix:
    """|Phi+><Phi+| on two qubits."""
    v = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return DensityMatrix(np.outer(v, v.conj()), (2, 2))


def maximally_mixed(dims: Sequence[int]) -> DensityMatrix:
    dims = check_shape(dims)
    n = prod(dims)
    return DensityMatrix(np.eye(n) / n, dims)


def werner_state(p: float) -> DensityMatrix:
    """p |Phi+><Phi+| + (1 - p) I/4; entangled iff p > 1/3."""
    if not 0 <= p <= 1:
        raise ValueError(f"Werner parameter must lie in [0, 1], got {p}")
    return DensityMatrix(p * bell_state().matrix + (1 - p) * np.eye(4) / 4, (2, 2))


def ghz_state(n: int = 3) -> PureState:
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return PureState(v, (2,) * n)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & (2**64 - 1)))


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_density(dims: Sequence[int], rank: int | None = None, seed: int = 0) -> DensityMatrix:
    """Ginibre-induced random state of the given rank (full rank by default)."""
    dims = check_shape(dims)
    n = prod(dims)
    rank = n if rank is None else int(rank)
    if not 1 <= rank <= n:
        raise ValueError(f"rank must lie in [1, {n}], got {rank}")
    g = _ginibre(_rng(seed), n, rank)
    w = g @ g.conj().T
    return DensityMatrix(w / np.trace(w).real, dims)


def random_pure(dims: Sequence[int], seed: int = 0) -> PureState:
    dims = check_shape(dims)
    v = _ginibre(_rng(seed), prod(dims), 1).ravel()
    return PureState(v / np.linalg.norm(v), dims)


def product_state(dims: Sequence[int], seed: int = 0) -> DensityMatrix:
    """Tensor product of independent full-rank random local states."""
    dims = check_shape(dims)
    seq = np.random.SeedSequence(int(seed))
    m = np.ones((1, 1), dtype=complex)
    for d, child in zip(dims, seq.spawn(len(dims))):
        g = _ginibre(np.random.Generator(np.random.PCG64(child)), d, d)
        w = g @ g.conj().T
        m = kron(m, w / np.trace(w).real)
    return DensityMatrix(m, dims)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with the phase fix."""
    q, r = np.linalg.qr(_ginibre(rng, d, d) / np.sqrt(2))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_local_unitary(dims: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    u = np.ones((1, 1), dtype=complex)
    for d in check_shape(dims):
        u = kron(u, random_unitary(d, rng))
    return u


def state_to_dict(rho: DensityMatrix) -> dict:
    return {
        "dims": list(rho.dims),
        "re": rho.matrix.real.tolist(),
        "im": rho.matrix.imag.tolist(),
    }


def state_from_dict(obj: dict) -> DensityMatrix:
    try:
        dims = [int(d) for d in obj["dims"]]
        m = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvariantError(f"malformed state object: {exc}") from exc
    if m.ndim != 2:
        raise ShapeError("re/im must be nested row-major arrays")
    return DensityMatrix(m, tuple(dims))


def save_state(rho: DensityMatrix, path: str | Path) -> None:
    Path(path).write_text(jsonio.dumps(state_to_dict(rho)))


def load_state(path: str | Path) -> DensityMatrix:
    """Read a ``{dims, re, im}`` JSON state; invariants are enforced on load."""
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvariantError(f"{path}: not valid JSON ({exc})") from exc
    return state_from_dict(obj)
