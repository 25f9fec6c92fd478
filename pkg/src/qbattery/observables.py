"""Battery figures of merit: stored energy, ergotropy, efficiency, distance to Gibbs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bath import BathSpec
from .dynamics import Basis, DensityMatrix, Trajectory
from .errors import BasisError, DomainError
from .hamiltonian import DriveSchedule, eigenvectors

EFFICIENCY_GUARD = 1e-9


@dataclass(frozen=True)
class BatterySpec:
    """Bare level energies, strictly increasing."""

    levels: tuple[float, float, float] = (0.0, 1.0, 1.95)

    def __post_init__(self):
        lv = tuple(float(v) for v in self.levels)
        if len(lv) != 3:
            raise DomainError(f"expected three levels, got {len(lv)}")
        if not (lv[0] < lv[1] < lv[2]):
            raise DomainError(f"levels must be strictly increasing, got {lv}")
        object.__setattr__(self, "levels", lv)

    @property
    def hamiltonian(self) -> np.ndarray:
        return np.diag(self.levels)


@dataclass(frozen=True)
class ObservableRecord:
    s: float
    stored_energy: float
    ergotropy: float
    efficiency: float | None
    dark_population: float
    trace_distance_to_gibbs: float


def _matrix(rho) -> np.ndarray:
    return rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _require_basis(rho, basis: Basis, what: str):
    if isinstance(rho, DensityMatrix) and rho.basis is not basis:
        raise BasisError(f"{what} expects a {basis.value}-basis state, got {rho.basis.value}")


def to_bare_basis(rho: DensityMatrix, sched: DriveSchedule, s: float) -> DensityMatrix:
    """rho_bare = V(s) rho V(s)^T."""
    _require_basis(rho, Basis.EIGEN, "to_bare_basis")
    v = eigenvectors(sched, s)
    return DensityMatrix(v @ _matrix(rho) @ v.T, Basis.BARE)


def to_eigen_basis(rho: DensityMatrix, sched: DriveSchedule, s: float) -> DensityMatrix:
    _require_basis(rho, Basis.BARE, "to_eigen_basis")
    v = eigenvectors(sched, s)
    return DensityMatrix(v.T @ _matrix(rho) @ v, Basis.EIGEN)


def energy(rho, spec: BatterySpec) -> float:
    """Tr(rho H0); H0 is diagonal, so only the populations enter."""
    return float(np.real(np.diag(_matrix(rho))) @ np.asarray(spec.levels))


def stored_energy(rho_bare, spec: BatterySpec, rho0_bare) -> float:
    _require_basis(rho_bare, Basis.BARE, "stored_energy")
    _require_basis(rho0_bare, Basis.BARE, "stored_energy")
    return energy(rho_bare, spec) - energy(rho0_bare, spec)


def passive_energy(rho_bare, spec: BatterySpec) -> float:
    """Energy of the passive state: populations sorted down against levels sorted up."""
    r = np.sort(np.linalg.eigvalsh(_hermitian(_matrix(rho_bare))))[::-1]
    return float(np.dot(r, np.sort(spec.levels)))


def _hermitian(m):
    return 0.5 * (m + m.conj().T)


def ergotropy(rho_bare, spec: BatterySpec) -> float:
    """Maximum work extractable by a cyclic unitary."""
    _require_basis(rho_bare, Basis.BARE, "ergotropy")
    m = _matrix(rho_bare)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        raise DomainError("ergotropy needs a finite 3x3 state")
    return energy(m, spec) - passive_energy(m, spec)


def efficiency(work: float, stored: float) -> float | None:
    """W / Delta E, or None when the stored energy is zero."""
    if abs(stored) < EFFICIENCY_GUARD:
        return None
    return work / stored


def gibbs_state(sched: DriveSchedule, s: float, beta: float) -> DensityMatrix:
    """Instantaneous thermal state, diagonal in the eigenbasis."""
    a, b = sched.amplitudes(s)
    gap = float(np.hypot(a, b))
    levels = np.array([-gap, 0.0, gap])
    if math.isinf(beta):
        weights = np.array([1.0, 0.0, 0.0])
    else:
        weights = np.exp(-beta * (levels - levels[0]))
    return DensityMatrix(np.diag(weights / weights.sum()).astype(complex), Basis.EIGEN)


def trace_distance(rho, sigma) -> float:
    """||rho - sigma||_1, the sum of singular values (no 1/2 factor)."""
    if isinstance(rho, DensityMatrix) and isinstance(sigma, DensityMatrix):
        if rho.basis is not sigma.basis:
            raise BasisError("trace distance between states in different bases")
    diff = _matrix(rho) - _matrix(sigma)
    return float(np.linalg.svd(diff, compute_uv=False).sum())


def observe(rho_eigen: np.ndarray, s: float, sched: DriveSchedule, bath: BathSpec,
            spec: BatterySpec, rho0_bare: DensityMatrix) -> ObservableRecord:
    """All observables for one eigenbasis sample."""
    state = DensityMatrix(rho_eigen, Basis.EIGEN)
    bare = to_bare_basis(state, sched, s)
    d_e = stored_energy(bare, spec, rho0_bare)
    w = ergotropy(bare, spec)
    return ObservableRecord(
        s=float(s),
        stored_energy=d_e,
        ergotropy=w,
        efficiency=efficiency(w, d_e),
        dark_population=float(np.real(state.entries[1, 1])),
        trace_distance_to_gibbs=trace_distance(state, gibbs_state(sched, s, bath.beta)),
    )


def record(trajectory: Trajectory, sched: DriveSchedule, bath: BathSpec,
           spec: BatterySpec) -> list[ObservableRecord]:
    """Observables at every stored sample; Delta E is measured from the initial state."""
    rho0_bare = to_bare_basis(DensityMatrix(trajectory.rho[0]), sched, float(trajectory.s[0]))
    return [observe(r, s, sched, bath, spec, rho0_bare)
            for s, r in zip(trajectory.s, trajectory.rho)]


def final_record(trajectory: Trajectory, sched: DriveSchedule, bath: BathSpec,
                 spec: BatterySpec) -> ObservableRecord:
    rho0_bare = to_bare_basis(DensityMatrix(trajectory.rho[0]), sched, float(trajectory.s[0]))
    return observe(trajectory.rho[-1], float(trajectory.s[-1]), sched, bath, spec, rho0_bare)
