"""Polynomial local-unitary invariants as contraction diagrams.

A diagram holds one permutation per subsystem over ``k`` copies of the
state. ``perms[j][c] = t`` means the downstairs (ket) index of subsystem
``j`` on copy ``c`` is summed against the upstairs (bra) index of the same
subsystem on copy ``t``. Identity everywhere closes each copy on itself.

:func:`evaluate_diagram` performs the literal nested summation and is kept
deliberately naive; it is the reference against which circuits are checked.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from .circuits import (
    Circuit,
    Handedness,
    Part,
    PermutationSpec,
    circuit_from_spec,
    cyclic_spec,
    identity_spec,
)
from .errors import CapacityError, InvariantError, ShapeError
from .linalg import Shape, check_shape
from .states import DensityMatrix, PureState

EVAL_CAP = 10**8


@dataclass(frozen=True)
class ContractionDiagram:
    dims: Shape
    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        dims = check_shape(self.dims)
        spec = PermutationSpec(self.perms)  # validates bijections
        if spec.subsystems != len(dims):
            raise ShapeError(f"{spec.subsystems} permutations for {len(dims)} subsystems")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "perms", spec.perms)

    @property
    def copies(self) -> int:
        return len(self.perms[0])

    @property
    def subsystems(self) -> int:
        return len(self.dims)

    def spec(self) -> PermutationSpec:
        return PermutationSpec(self.perms)

    @classmethod
    def from_spec(cls, spec: PermutationSpec, dims: Sequence[int]) -> ContractionDiagram:
        return cls(tuple(dims), spec.perms)


def evaluate_diagram(
    state: DensityMatrix | PureState, diagram: ContractionDiagram, max_cost: int = EVAL_CAP
) -> complex:
    """Sum the diagram's index contraction term by term.

    Pure states contribute ``psi[ket] * conj(psi[bra])`` per copy, mixed
    states ``rho[ket, bra]``. Cost is ``k * (prod dims)^k`` multiply-adds.
    """
    dims = diagram.dims
    if tuple(state.dims) != dims:
        raise ShapeError(f"state shape {state.dims} does not match diagram {dims}")
    k, s = diagram.copies, len(dims)
    dim = prod(dims)
    cost = k * dim**k
    if cost > max_cost:
        raise CapacityError(f"brute-force cost {cost} exceeds cap {max_cost}")

    digits = list(itertools.product(*[range(d) for d in dims]))
    flat = {dg: i for i, dg in enumerate(digits)}
    pure = isinstance(state, PureState)
    if pure:
        psi = np.asarray(state.amplitudes)
        psi_bar = psi.conj()
    else:
        rho = np.asarray(state.matrix)

    total = 0j
    for kets in itertools.product(range(dim), repeat=k):
        # bra digit of (copy perms[j][c], subsystem j) equals ket digit of (c, j)
        bra_digits = [[0] * s for _ in range(k)]
        for c in range(k):
            kd = digits[kets[c]]
            for j in range(s):
                bra_digits[diagram.perms[j][c]][j] = kd[j]
        term = 1 + 0j
        for c in range(k):
            b = flat[tuple(bra_digits[c])]
            if pure:
                term *= psi[kets[c]] * psi_bar[b]
            else:
                term *= rho[kets[c], b]
        total += term
    return complex(total)


def identity_diagram(k: int, dims: Sequence[int]) -> ContractionDiagram:
    dims = check_shape(dims)
    return ContractionDiagram.from_spec(identity_spec(k, len(dims)), dims)


def plain_moment_diagram(k: int, dims: Sequence[int]) -> ContractionDiagram:
    """Same k-cycle on every subsystem: evaluates Tr(rho^k)."""
    dims = check_shape(dims)
    return ContractionDiagram.from_spec(cyclic_spec(k, len(dims)), dims)


def pt_moment_diagram(k: int, dims: Sequence[int] = (2, 2)) -> ContractionDiagram:
    """Opposite-handed k-cycles on the two subsystems: evaluates Tr((rho^T2)^k)."""
    dims = check_shape(dims)
    if len(dims) != 2:
        raise ShapeError("partial-transpose moment diagrams are bipartite")
    return ContractionDiagram.from_spec(
        cyclic_spec(k, 2, [Handedness.FORWARD, Handedness.INVERSE]), dims
    )


def kempe_diagram() -> ContractionDiagram:
    """The degree-6 three-qubit Kempe invariant.

    Qubit 1 carries the forward 3-cycle, qubit 2 the inverse one, and
    qubit 3 is closed on each copy (traced out in place).
    """
    spec = cyclic_spec(3, 3, [Handedness.FORWARD, Handedness.INVERSE, Handedness.FORWARD])
    return ContractionDiagram((2, 2, 2), (spec.perms[0], spec.perms[1], (0, 1, 2)))


def diagram_to_circuit(diagram: ContractionDiagram, part: Part = Part.REAL) -> Circuit:
    """Ket indices become input rails, bra indices output rails; the wiring is the payload."""
    return circuit_from_spec(diagram.spec(), diagram.dims, part)


def is_inversion_closed(diagram: ContractionDiagram) -> bool:
    """True when inverting every permutation gives the same diagram up to a copy relabelling.

    Complex conjugation of a diagram's value inverts its permutations, so
    such diagrams evaluate to real numbers on Hermitian input.
    """
    k = diagram.copies
    inv = diagram.spec().inverse().perms
    for tau in itertools.permutations(range(k)):
        conj = tuple(tuple(tau[p[t_inv]] for t_inv in _inverse(tau)) for p in inv)
        if conj == diagram.perms:
            return True
    return False


def _inverse(p: Sequence[int]) -> tuple[int, ...]:
    q = [0] * len(p)
    for c, t in enumerate(p):
        q[t] = c
    return tuple(q)


def diagram_to_dict(d: ContractionDiagram) -> dict:
    return {
        "copies": d.copies,
        "dims": list(d.dims),
        "perms": [[t + 1 for t in p] for p in d.perms],
    }


def diagram_from_dict(obj: dict) -> ContractionDiagram:
    try:
        perms = tuple(tuple(int(t) - 1 for t in p) for p in obj["perms"])
        d = ContractionDiagram(tuple(obj["dims"]), perms)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvariantError(f"malformed diagram object: {exc}") from exc
    if d.copies != int(obj.get("copies", d.copies)):
        raise InvariantError("copies field disagrees with the permutations")
    return d
