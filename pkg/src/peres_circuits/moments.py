"""Moment campaigns: run the k = 2..d1*d2 circuits on a state.

``p_1`` is never measured. The partial transpose preserves the trace, so
the first moment is fixed to 1 and costs no circuit.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from math import prod
from typing import Sequence

import numpy as np

from .circuits import Target, build_moment_circuit, copies_consumed, run_exact, run_shots, total_copies
from .errors import InvariantError
from .linalg import Shape, check_shape
from .states import DensityMatrix

MIN_SHOTS = 100


class Source(str, enum.Enum):
    EXACT = "Exact"
    SHOTS = "Shots"


@dataclass(frozen=True)
class Exact:
    backend: str = "auto"


@dataclass(frozen=True)
class Shots:
    shots: int
    seed: int
    backend: str = "auto"


@dataclass(frozen=True)
class MomentVector:
    """Power sums p_1..p_n with per-entry standard errors (0 when exact)."""

    dims: Shape
    p: tuple[float, ...]
    sigma: tuple[float, ...]
    source: Source = Source.EXACT
    target: Target = Target.PT
    copies_per_run: tuple[int, ...] = field(default=())

    def __post_init__(self):
        dims = check_shape(self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        object.__setattr__(self, "sigma", tuple(float(x) for x in self.sigma))
        object.__setattr__(self, "source", Source(self.source))
        object.__setattr__(self, "target", Target(self.target))
        if not self.copies_per_run:
            object.__setattr__(self, "copies_per_run", (0,) + tuple(range(2, len(self.p) + 1)))
        if len(self.p) != len(self.sigma) or len(self.p) != len(self.copies_per_run):
            raise InvariantError("p, sigma and copies_per_run must have equal length")
        if not self.p:
            raise InvariantError("empty moment vector")
        if self.p[0] != 1.0 or self.sigma[0] != 0.0:
            raise InvariantError("p_1 is fixed to exactly 1 with zero uncertainty")
        if any(s < 0 or not math.isfinite(s) for s in self.sigma):
            raise InvariantError("standard errors must be finite and non-negative")
        if not all(math.isfinite(x) for x in self.p):
            raise InvariantError("moments must be finite")

    @property
    def n(self) -> int:
        return len(self.p)

    @property
    def total_copies(self) -> int:
        return sum(self.copies_per_run)

    def to_dict(self) -> dict:
        return {
            "shape": list(self.dims),
            "source": self.source.value,
            "target": self.target.value,
            "p": list(self.p),
            "sigma": list(self.sigma),
            "copies_per_run": list(self.copies_per_run),
            "total_copies": self.total_copies,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> MomentVector:
        try:
            mv = cls(
                dims=tuple(obj["shape"]),
                p=tuple(obj["p"]),
                sigma=tuple(obj.get("sigma", [0.0] * len(obj["p"]))),
                source=Source(obj.get("source", "Exact")),
                target=Target(obj.get("target", "PTMoments")),
                copies_per_run=tuple(obj.get("copies_per_run", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvariantError):
                raise
            raise InvariantError(f"malformed moment object: {exc}") from exc
        if "total_copies" in obj and int(obj["total_copies"]) != mv.total_copies:
            raise InvariantError("total_copies disagrees with copies_per_run")
        return mv


def _measure(rho: DensityMatrix, target: Target, mode: Exact | Shots) -> MomentVector:
    n = prod(rho.dims)
    p, sigma = [1.0], [0.0]
    # one independent stream per k, derived from the campaign seed
    streams = np.random.SeedSequence(mode.seed).spawn(n + 1) if isinstance(mode, Shots) else None
    for k in range(2, n + 1):
        c = build_moment_circuit(k, rho.dims, target)
        if isinstance(mode, Shots):
            res = run_shots(c, rho, mode.shots, streams[k], mode.backend)
            p.append(res.estimate)
            sigma.append(res.stderr)
        else:
            p.append(run_exact(c, rho, mode.backend).real)
            sigma.append(0.0)
    source = Source.SHOTS if isinstance(mode, Shots) else Source.EXACT
    copies = (0,) + tuple(copies_consumed(k) for k in range(2, n + 1))
    return MomentVector(rho.dims, tuple(p), tuple(sigma), source, target, copies)


def measure_pt_moments(rho: DensityMatrix, mode: Exact | Shots = Exact()) -> MomentVector:
    """Tr((rho^T2)^k) for k = 1..d1*d2 from the opposite-handed cycle circuits."""
    return _measure(rho, Target.PT, mode)


def measure_plain_moments(rho: DensityMatrix, mode: Exact | Shots = Exact()) -> MomentVector:
    return _measure(rho, Target.PLAIN, mode)


def campaign_copy_cost(dims: Sequence[int]) -> int:
    return total_copies(dims)


def shot_planner(target_eig_error: float, dims: Sequence[int]) -> int:
    """Shots per circuit for a rough eigenvalue error target.

    Heuristic: spread the budget uniformly as eps_p = target / (n * 2^n),
    a worst-case Newton-identity amplification, and take 1/eps_p^2 shots
    (floored at 100). Acceptance rests on the empirical coverage tests.
    """
    if target_eig_error <= 0:
        raise ValueError("target error must be positive")
    n = prod(check_shape(dims))
    shots = (n * 2**n / target_eig_error) ** 2
    # round away representation noise before the ceiling
    return max(MIN_SHOTS, math.ceil(round(shots, 6)))
