"""Ancilla-controlled permutation circuits and their execution backends.

A circuit is the interferometer: Hadamard on the ancilla, a payload of
controlled swaps between corresponding rails of different copies, an
optional S^dagger on the ancilla, and a closing Hadamard. The ancilla's
``<Z>`` is then Re Tr(U rho^{(x)k}) (or Im with the phase gate).

Layout of the joint register is fixed: ancilla first, then copies in
increasing order, subsystems in increasing order within each copy.
Copies and subsystems are 0-based here and 1-based in JSON.

A permutation spec stores, per subsystem, the forward map ``sigma`` on copy
indices: the ket content of copy ``c`` is moved to copy ``sigma(c)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, InvariantError, ShapeError
from .linalg import Shape, check_shape
from .states import DensityMatrix

DENSE_CAP = 4096


class Part(str, enum.Enum):
    REAL = "Real"
    IMAGINARY = "Imaginary"


class Target(str, enum.Enum):
    PLAIN = "PlainMoments"
    PT = "PTMoments"


class Handedness(str, enum.Enum):
    FORWARD = "Forward"
    INVERSE = "Inverse"


class GateKind(str, enum.Enum):
    HADAMARD = "AncillaHadamard"
    PHASE_ADJOINT = "AncillaPhaseAdjoint"
    CSWAP = "ControlledSwap"


@dataclass(frozen=True)
class Rail:
    copy: int
    subsystem: int
    local_dim: int


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    rail_a: Rail | None = None
    rail_b: Rail | None = None

    def __post_init__(self):
        if self.kind is GateKind.CSWAP:
            a, b = self.rail_a, self.rail_b
            if a is None or b is None:
                raise InvariantError("controlled swap needs two rails")
            if a.subsystem != b.subsystem or a.local_dim != b.local_dim:
                raise InvariantError(f"controlled swap between incompatible rails {a}, {b}")
            if a.copy == b.copy:
                raise InvariantError(f"controlled swap of a rail with itself: {a}")
        elif self.rail_a is not None or self.rail_b is not None:
            raise InvariantError(f"{self.kind.value} acts on the ancilla only")


def _check_perm(p: Sequence[int], k: int) -> tuple[int, ...]:
    p = tuple(int(x) for x in p)
    if sorted(p) != list(range(k)):
        raise InvariantError(f"{p} is not a permutation of 0..{k - 1}")
    return p


@dataclass(frozen=True)
class PermutationSpec:
    """One permutation of copy indices per subsystem (0-based forward maps)."""

    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        perms = tuple(tuple(p) for p in self.perms)
        if not perms:
            raise InvariantError("a permutation spec needs at least one subsystem")
        k = len(perms[0])
        if k < 1:
            raise InvariantError("a permutation spec needs at least one copy")
        object.__setattr__(self, "perms", tuple(_check_perm(p, k) for p in perms))

    @property
    def copies(self) -> int:
        return len(self.perms[0])

    @property
    def subsystems(self) -> int:
        return len(self.perms)

    def inverse(self) -> PermutationSpec:
        inv = []
        for p in self.perms:
            q = [0] * len(p)
            for c, t in enumerate(p):
                q[t] = c
            inv.append(tuple(q))
        return PermutationSpec(tuple(inv))

    def then(self, other: PermutationSpec) -> PermutationSpec:
        """Apply ``self`` first, then ``other``."""
        if other.subsystems != self.subsystems or other.copies != self.copies:
            raise ShapeError("cannot compose specs of different sizes")
        return PermutationSpec(
            tuple(tuple(q[p[c]] for c in range(len(p))) for p, q in zip(self.perms, other.perms))
        )

    def is_identity(self) -> bool:
        return all(p == tuple(range(len(p))) for p in self.perms)


def identity_spec(k: int, subsystems: int) -> PermutationSpec:
    return PermutationSpec((tuple(range(k)),) * subsystems)


def cyclic_spec(
    k: int,
    subsystems: int,
    handedness: Handedness | Sequence[Handedness] = Handedness.FORWARD,
) -> PermutationSpec:
    """k-cycle 1->2->...->k->1 (Forward) or its inverse on each subsystem."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if isinstance(handedness, Handedness):
        handedness = [handedness] * subsystems
    if len(handedness) != subsystems:
        raise ValueError("need one handedness per subsystem")
    fwd = tuple((c + 1) % k for c in range(k))
    inv = tuple((c - 1) % k for c in range(k))
    return PermutationSpec(tuple(fwd if Handedness(h) is Handedness.FORWARD else inv for h in handedness))


def adjacent_transpositions(perm: Sequence[int]) -> list[tuple[int, int]]:
    """Adjacent swaps ``(q, q+1)``, in application order, realising ``perm``.

    Slots are filled left to right by bubbling the wanted content leftwards.
    For the forward k-cycle this yields (k-1,k)...(2,3)(1,2); for the
    inverse cycle the reversed order.
    """
    k = len(perm)
    want = [0] * k
    for c, t in enumerate(perm):
        want[t] = c
    slots = list(range(k))
    out = []
    for s in range(k):
        p = slots.index(want[s])
        for q in range(p - 1, s - 1, -1):
            slots[q], slots[q + 1] = slots[q + 1], slots[q]
            out.append((q, q + 1))
    return out


@dataclass(frozen=True)
class Circuit:
    copies: int
    dims: Shape
    gates: tuple[Gate, ...]
    measured_part: Part = Part.REAL

    def __post_init__(self):
        dims = check_shape(self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "measured_part", Part(self.measured_part))
        g = self.gates
        if self.copies < 1:
            raise InvariantError("a circuit needs at least one copy")
        if len(g) < 2 or g[0].kind is not GateKind.HADAMARD or g[-1].kind is not GateKind.HADAMARD:
            raise InvariantError("circuit must begin and end with an ancilla Hadamard")
        inner = g[1:-1]
        n_phase = sum(x.kind is GateKind.PHASE_ADJOINT for x in inner)
        n_had = sum(x.kind is GateKind.HADAMARD for x in inner)
        if n_had:
            raise InvariantError("only the opening and closing gates may be Hadamards")
        if self.measured_part is Part.IMAGINARY:
            if n_phase != 1 or inner[-1].kind is not GateKind.PHASE_ADJOINT:
                raise InvariantError("imaginary-part circuits need one S^dagger just before the final Hadamard")
        elif n_phase:
            raise InvariantError("real-part circuits carry no phase gate")
        for x in self.payload():
            for r in (x.rail_a, x.rail_b):
                if not (0 <= r.copy < self.copies and 0 <= r.subsystem < len(dims)):
                    raise InvariantError(f"rail {r} outside the register")
                if r.local_dim != dims[r.subsystem]:
                    raise InvariantError(f"rail {r} has the wrong local dimension")

    @property
    def shape(self) -> Shape:
        return self.dims

    def payload(self) -> tuple[Gate, ...]:
        return tuple(x for x in self.gates if x.kind is GateKind.CSWAP)

    def permutation_spec(self) -> PermutationSpec:
        """The rail permutation realised by composing the payload."""
        slots = [list(range(self.copies)) for _ in self.dims]
        for x in self.payload():
            s = slots[x.rail_a.subsystem]
            a, b = x.rail_a.copy, x.rail_b.copy
            s[a], s[b] = s[b], s[a]
        perms = []
        for s in slots:
            p = [0] * self.copies
            for pos, content in enumerate(s):
                p[content] = pos
            perms.append(tuple(p))
        return PermutationSpec(tuple(perms))

    def with_part(self, part: Part) -> Circuit:
        return _wrap(self.copies, self.dims, self.payload(), Part(part))


def _wrap(k: int, dims: Shape, payload: Iterable[Gate], part: Part) -> Circuit:
    gates = [Gate(GateKind.HADAMARD), *payload]
    if part is Part.IMAGINARY:
        gates.append(Gate(GateKind.PHASE_ADJOINT))
    gates.append(Gate(GateKind.HADAMARD))
    return Circuit(k, dims, tuple(gates), part)


def circuit_from_spec(spec: PermutationSpec, dims: Sequence[int], part: Part = Part.REAL) -> Circuit:
    """Decompose each subsystem's permutation into adjacent controlled swaps."""
    dims = check_shape(dims)
    if spec.subsystems != len(dims):
        raise ShapeError(f"spec has {spec.subsystems} subsystems, shape {dims} has {len(dims)}")
    payload = []
    for j, p in enumerate(spec.perms):
        for a, b in adjacent_transpositions(p):
            payload.append(Gate(GateKind.CSWAP, Rail(a, j, dims[j]), Rail(b, j, dims[j])))
    return _wrap(spec.copies, dims, payload, Part(part))


def build_moment_circuit(
    k: int, dims: Sequence[int], target: Target = Target.PT, part: Part = Part.REAL
) -> Circuit:
    """Circuit whose ancilla reads Tr(rho^k) (plain) or Tr((rho^T2)^k) (PT)."""
    dims = check_shape(dims)
    target = Target(target)
    if k < 2:
        raise ValueError(
            "k must be >= 2: the first moment needs no circuit since trace is preserved (Tr = 1)"
        )
    if target is Target.PT:
        if len(dims) != 2:
            raise ShapeError("partial-transpose moment circuits are bipartite only")
        spec = cyclic_spec(k, 2, [Handedness.FORWARD, Handedness.INVERSE])
    else:
        spec = cyclic_spec(k, len(dims), Handedness.FORWARD)
    return circuit_from_spec(spec, dims, part)


# -- dense materialisation ---------------------------------------------------


def _rail_dims(k: int, dims: Shape) -> list[int]:
    return [d for _ in range(k) for d in dims]


def _swap_map(k: int, dims: Shape, g: Gate) -> np.ndarray:
    s = len(dims)
    a = g.rail_a.copy * s + g.rail_a.subsystem
    b = g.rail_b.copy * s + g.rail_b.subsystem
    idx = np.arange(prod(dims) ** k).reshape(_rail_dims(k, dims))
    return idx.swapaxes(a, b).ravel()


def permutation_indices(spec: PermutationSpec, dims: Sequence[int]) -> np.ndarray:
    """``idx`` with U|idx[y]> = |y> for the rail permutation of ``spec``."""
    dims = check_shape(dims)
    k, s = spec.copies, len(dims)
    if spec.subsystems != s:
        raise ShapeError("spec/shape subsystem mismatch")
    axes = [0] * (k * s)
    for j, p in enumerate(spec.perms):
        for c in range(k):
            axes[p[c] * s + j] = c * s + j
    idx = np.arange(prod(dims) ** k).reshape(_rail_dims(k, dims))
    return idx.transpose(axes).ravel()


def _check_cap(n: int, what: str):
    if n > DENSE_CAP:
        raise CapacityError(f"{what} dimension {n} exceeds the dense cap {DENSE_CAP}")


def permutation_matrix(spec: PermutationSpec, dims: Sequence[int]) -> np.ndarray:
    """Permutation matrix built directly from a PermutationSpec, with no gates involved."""
    n = prod(check_shape(dims)) ** spec.copies
    _check_cap(n, "k-copy")
    idx = permutation_indices(spec, dims)
    u = np.zeros((n, n))
    u[np.arange(n), idx] = 1.0
    return u


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Compose the payload swaps (ancilla fixed to 1) into a 0/1 matrix."""
    n = prod(c.dims) ** c.copies
    _check_cap(n, "k-copy")
    dest = np.arange(n)
    for g in c.payload():
        dest = _swap_map(c.copies, c.dims, g)[dest]
    u = np.zeros((n, n))
    u[dest, np.arange(n)] = 1.0
    return u


# -- execution ---------------------------------------------------------------

def _power_state(rho: np.ndarray, k: int) -> np.ndarray:
    out = rho
    for _ in range(k - 1):
        out = np.kron(out, rho)
    return out


def _simulate_dense(c: Circuit, rho_k: np.ndarray) -> float:
    """Evolve |0><0| (x) rho_k gate by gate and return the ancilla's <Z>.

    The joint matrix is held as its four ancilla blocks ``b[i][j]``.
    """
    n = rho_k.shape[0]
    zero = np.zeros((n, n), dtype=complex)
    b = [[rho_k.astype(complex), zero], [zero.copy(), zero.copy()]]
    pending = None  # consecutive controlled swaps are fused into one reindexing

    def flush():
        if pending is not None:
            # ancilla-1 rows get P, ancilla-1 columns get P^dagger
            b[1][0] = b[1][0][pending]
            b[1][1] = b[1][1][pending][:, pending]
            b[0][1] = b[0][1][:, pending]

    for g in c.gates:
        if g.kind is GateKind.CSWAP:
            sw = _swap_map(c.copies, c.dims, g)
            # (P_g P_prev M)[y] = M[prev[sw[y]]]
            pending = sw if pending is None else pending[sw]
            continue
        flush()
        pending = None
        if g.kind is GateKind.HADAMARD:
            p, q = b[0][0] + b[1][0], b[0][0] - b[1][0]
            r, s = b[0][1] + b[1][1], b[0][1] - b[1][1]
            b = [[(p + r) / 2, (p - r) / 2], [(q + s) / 2, (q - s) / 2]]
        else:
            b[1][0] *= -1j
            b[0][1] *= 1j
    flush()
    return float(np.trace(b[0][0]).real - np.trace(b[1][1]).real)


def _run_dense(c: Circuit, rho: DensityMatrix) -> complex:
    _check_cap(2 * prod(c.dims) ** c.copies, "joint")
    rho_k = _power_state(np.asarray(rho.matrix), c.copies)
    re = _simulate_dense(c.with_part(Part.REAL), rho_k)
    im = _simulate_dense(c.with_part(Part.IMAGINARY), rho_k)
    return complex(re, im)


def contract_permutation(spec: PermutationSpec, rho: DensityMatrix) -> complex:
    """Tr(U rho^{(x)k}) by index bookkeeping: the bra of copy sigma(c) is tied to the ket of copy c."""
    dims = rho.dims
    s, k = len(dims), spec.copies
    if spec.subsystems != s:
        raise ShapeError("spec/state subsystem mismatch")
    inv = spec.inverse().perms
    t = rho.tensor()
    operands: list = []
    for c in range(k):
        kets = [c * s + j for j in range(s)]
        bras = [inv[j][c] * s + j for j in range(s)]
        operands += [t, kets + bras]
    return complex(np.einsum(*operands, [], optimize="greedy"))


def _backend_for(c: Circuit, backend: str) -> str:
    if backend == "auto":
        return "dense" if 2 * prod(c.dims) ** c.copies <= DENSE_CAP else "contraction"
    if backend not in ("dense", "contraction"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def run_exact(c: Circuit, rho: DensityMatrix, backend: str = "auto") -> complex:
    """Noiseless value Tr(U rho^{(x)k}) of the circuit's permutation U.

    ``dense`` simulates the full ancilla+register density matrix gate by gate
    (joint dimension capped at 4096); ``contraction`` contracts the copies
    with einsum and scales to larger k; ``auto`` picks dense when it fits.
    """
    if tuple(rho.dims) != c.dims:
        raise ShapeError(f"state shape {rho.dims} does not match circuit shape {c.dims}")
    if _backend_for(c, backend) == "dense":
        return _run_dense(c, rho)
    return contract_permutation(c.permutation_spec(), rho)


@dataclass(frozen=True)
class ShotResult:
    estimate: float
    stderr: float
    shots: int


def run_shots(c: Circuit, rho: DensityMatrix, shots: int, seed, backend: str = "auto") -> ShotResult:
    """Sample the ancilla: outcome 0 with probability (1 + m)/2, m the measured part.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts (an int or
    a SeedSequence); draws are deterministic per seed.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    value = run_exact(c, rho, backend)
    m = value.real if c.measured_part is Part.REAL else value.imag
    q = min(1.0, max(0.0, (1 + m) / 2))
    hits = np.random.default_rng(seed).binomial(shots, q)
    f = hits / shots
    return ShotResult(2 * f - 1, 2 * float(np.sqrt(f * (1 - f) / shots)), shots)


def copies_consumed(k: int) -> int:
    return k


def total_copies(dims: Sequence[int]) -> int:
    """Copies used by one run of every circuit k = 2..d1*d2."""
    n = prod(check_shape(dims))
    return n * (n + 1) // 2 - 1


# -- JSON --------------------------------------------------------------------


def _rail_to_dict(r: Rail) -> dict:
    return {"copy": r.copy + 1, "subsystem": r.subsystem + 1}


def circuit_to_dict(c: Circuit) -> dict:
    gates = []
    for g in c.gates:
        item: dict = {"kind": g.kind.value}
        if g.kind is GateKind.CSWAP:
            item["railA"] = _rail_to_dict(g.rail_a)
            item["railB"] = _rail_to_dict(g.rail_b)
        gates.append(item)
    return {
        "copies": c.copies,
        "dims": list(c.dims),
        "measured_part": c.measured_part.value,
        "gates": gates,
    }


def circuit_from_dict(obj: dict) -> Circuit:
    try:
        dims = check_shape(obj["dims"])
        gates = []
        for item in obj["gates"]:
            kind = GateKind(item["kind"])
            if kind is GateKind.CSWAP:
                ra, rb = item["railA"], item["railB"]
                gates.append(
                    Gate(
                        kind,
                        Rail(ra["copy"] - 1, ra["subsystem"] - 1, dims[ra["subsystem"] - 1]),
                        Rail(rb["copy"] - 1, rb["subsystem"] - 1, dims[rb["subsystem"] - 1]),
                    )
                )
            else:
                gates.append(Gate(kind))
        return Circuit(int(obj["copies"]), dims, tuple(gates), Part(obj["measured_part"]))
    except (KeyError, TypeError, IndexError) as exc:
        raise InvariantError(f"malformed circuit object: {exc}") from exc
