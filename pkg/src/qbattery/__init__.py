"""Simulator for adiabatic charging of an open three-level quantum battery."""

from .bath import BathSpec, rate_arrays, rate_set, spectral_rate
from .dynamics import Basis, DensityMatrix, Trajectory, evolve, initial_dark_state
from .errors import (BasisError, DegenerateGapError, DomainError, IntegrationError,
                     OutputError, QBatteryError)
from .hamiltonian import DriveSchedule, Ordering, eigensystem, gap_min, m_coupling
from .lindblad import Variant, build_generator, lindblad_ops
from .observables import BatterySpec, ergotropy, gibbs_state, record, trace_distance
from .sweep import SweepConfig, SweepResult, distance_trace, emit, sweep_tf

__all__ = [
    "BathSpec", "Basis", "BasisError", "BatterySpec", "DegenerateGapError", "DensityMatrix",
    "DomainError", "DriveSchedule", "IntegrationError", "Ordering", "OutputError",
    "QBatteryError", "SweepConfig", "SweepResult", "Trajectory", "Variant",
    "build_generator", "distance_trace", "eigensystem", "emit", "ergotropy", "evolve",
    "gap_min", "gibbs_state", "initial_dark_state", "lindblad_ops", "m_coupling",
    "rate_arrays", "rate_set", "record", "spectral_rate", "sweep_tf", "trace_distance",
]
