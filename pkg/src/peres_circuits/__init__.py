"""Noiseless interferometer circuits for moments of a partially transposed state.

The circuits measure Tr((rho^T2)^k) with ancilla-controlled swaps, the
moments are turned into the spectrum of rho^T2, and the Peres test is
read off its smallest eigenvalue. Every circuit value can be checked
against dense linear algebra in :mod:`peres_circuits.linalg`.
"""
from .circuits import (
    Circuit,
    Handedness,
    Part,
    PermutationSpec,
    Target,
    build_moment_circuit,
    circuit_unitary,
    copies_consumed,
    cyclic_spec,
    run_exact,
    run_shots,
    total_copies,
)
from .errors import CapacityError, DomainError, InvariantError, ReconstructionError, ShapeError
from .invariants import (
    ContractionDiagram,
    diagram_to_circuit,
    evaluate_diagram,
    kempe_diagram,
    pt_moment_diagram,
)
from .moments import Exact, MomentVector, Shots, measure_plain_moments, measure_pt_moments, shot_planner
from .spectrum import SpectrumReport, Verdict, newton_elementary, peres_verdict, reconstruct, spa_shift
from .states import DensityMatrix, PureState, bell_state, random_density, random_pure, werner_state

__version__ = "0.1.0"
