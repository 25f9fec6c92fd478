"""Fixed-step integration of the adiabatic master equation over s in [0, 1]."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .bath import BathSpec
from .errors import BasisError, DomainError, IntegrationError
from .hamiltonian import DriveSchedule
from .lindblad import Variant, generator_stack

logger = logging.getLogger(__name__)

N_SAMPLES = 1001
MIN_STEPS = 100
VIOLATION_TOL = 1e-6
_CHUNK_STEPS = 4000


class Basis(enum.Enum):
    EIGEN = "eigen"
    BARE = "bare"


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray
    basis: Basis = Basis.EIGEN

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (3, 3):
            raise DomainError(f"density matrix must be 3x3, got shape {m.shape}")
        object.__setattr__(self, "entries", m)

    def violations(self) -> dict[str, float]:
        m = self.entries
        return {
            "hermiticity": float(np.abs(m - m.conj().T).max()),
            "trace": float(abs(np.trace(m) - 1.0)),
            "min_eigenvalue": float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min()),
        }

    def is_valid(self, herm_tol=1e-10, trace_tol=1e-10, eig_tol=1e-8) -> bool:
        v = self.violations()
        return (v["hermiticity"] <= herm_tol and v["trace"] <= trace_tol
                and v["min_eigenvalue"] >= -eig_tol)

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.entries))


def initial_dark_state() -> DensityMatrix:
    """Pure dark state diag(0, 1, 0) in the eigenbasis."""
    return DensityMatrix(np.diag([0.0, 1.0, 0.0]).astype(complex), Basis.EIGEN)


@dataclass(frozen=True)
class Trajectory:
    s: np.ndarray          # (n,)
    rho: np.ndarray        # (n, 3, 3), eigenbasis
    tf: float
    variant: Variant
    steps: int
    max_violation: float
    trace_drift: float
    hermiticity_drift: float
    min_eigenvalue: float
    meta: dict = field(default_factory=dict)

    @property
    def samples(self) -> list[tuple[float, DensityMatrix]]:
        return [(float(s), DensityMatrix(r, Basis.EIGEN)) for s, r in zip(self.s, self.rho)]

    @property
    def final(self) -> DensityMatrix:
        return DensityMatrix(self.rho[-1], Basis.EIGEN)


@numba.njit(cache=True)
def _matvec(g, v, out):
    for i in range(9):
        acc = 0j
        for j in range(9):
            acc += g[i, j] * v[j]
        out[i] = acc


@numba.njit(cache=True)
def _rk4_chunk(rho, gens, h, n_steps, stride, samples, sample_offset, stats):
    """Advance ``rho`` by ``n_steps`` RK4 steps.

    gens[2k], gens[2k+1], gens[2k+2] are the generators at the start, middle
    and end of step k. After every step rho is made Hermitian and its trace
    reset to one; the deviations found before the fix-up go into ``stats``
    as running maxima (trace, hermiticity). Every ``stride`` steps rho is
    written to ``samples``.
    """
    k1 = np.empty(9, dtype=np.complex128)
    k2 = np.empty(9, dtype=np.complex128)
    k3 = np.empty(9, dtype=np.complex128)
    k4 = np.empty(9, dtype=np.complex128)
    tmp = np.empty(9, dtype=np.complex128)
    written = 0
    for k in range(n_steps):
        g0 = gens[2 * k]
        g1 = gens[2 * k + 1]
        g2 = gens[2 * k + 2]
        _matvec(g0, rho, k1)
        for i in range(9):
            tmp[i] = rho[i] + 0.5 * h * k1[i]
        _matvec(g1, tmp, k2)
        for i in range(9):
            tmp[i] = rho[i] + 0.5 * h * k2[i]
        _matvec(g1, tmp, k3)
        for i in range(9):
            tmp[i] = rho[i] + h * k3[i]
        _matvec(g2, tmp, k4)
        for i in range(9):
            rho[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])

        herm = 0.0
        for i in range(3):
            for j in range(i, 3):
                a = rho[3 * i + j]
                b = rho[3 * j + i]
                dev = abs(a - b.conjugate())
                if dev > herm:
                    herm = dev
                avg = 0.5 * (a + b.conjugate())
                rho[3 * i + j] = avg
                rho[3 * j + i] = avg.conjugate()
        tr = rho[0].real + rho[4].real + rho[8].real
        if not (abs(tr) < np.inf) or tr == 0.0:
            stats[0] = np.inf  # blown up; the caller retries or gives up
            return written
        drift = abs(tr - 1.0)
        for i in range(9):
            rho[i] /= tr
        if drift > stats[0]:
            stats[0] = drift
        if herm > stats[1]:
            stats[1] = herm
        if (k + 1) % stride == 0:
            samples[sample_offset + written] = rho
            written += 1
    return written


def default_steps(tf: float) -> int:
    """max(20000, 200 tf), rounded up to a whole number of sample intervals."""
    raw = max(20000, int(math.ceil(200.0 * tf)))
    return _round_steps(raw)


def _round_steps(steps: int) -> int:
    per = N_SAMPLES - 1
    return int(math.ceil(steps / per) * per)


def _validate_initial(rho0: DensityMatrix):
    if rho0.basis is not Basis.EIGEN:
        raise BasisError("initial state must be given in the eigenbasis")
    if not rho0.is_valid():
        raise DomainError(f"initial state is not a valid density matrix: {rho0.violations()}")


def _integrate(sched, bath, tf, variant, rho0, steps, phases):
    h = 1.0 / steps
    stride = steps // (N_SAMPLES - 1)
    chunk = max(stride, (_CHUNK_STEPS // stride) * stride)
    rho = np.ascontiguousarray(rho0.entries.reshape(9), dtype=np.complex128).copy()
    samples = np.full((N_SAMPLES, 9), np.nan, dtype=np.complex128)
    samples[0] = rho
    stats = np.zeros(2)
    written = 1
    done = 0
    while done < steps:
        n = min(chunk, steps - done)
        s_half = (2 * done + np.arange(2 * n + 1)) * (0.5 * h)
        np.clip(s_half, 0.0, 1.0, out=s_half)
        gens = np.ascontiguousarray(generator_stack(sched, bath, s_half, tf, variant, phases=phases))
        written += _rk4_chunk(rho, gens, h, n, stride, samples, written, stats)
        done += n
        if not math.isfinite(stats[0]):
            break
    rho_s = samples.reshape(N_SAMPLES, 3, 3)
    herm_s = 0.5 * (rho_s + np.conj(np.swapaxes(rho_s, 1, 2)))
    if not np.all(np.isfinite(rho_s)):
        return rho_s, float(stats[0]), float(stats[1]), -math.inf
    min_eig = float(np.linalg.eigvalsh(herm_s).min())
    return rho_s, float(stats[0]), float(stats[1]), min_eig


def evolve(sched: DriveSchedule, bath: BathSpec, tf: float,
           variant: Variant | str = Variant.FULL,
           rho0: DensityMatrix | None = None, steps: int | None = None, *,
           phases: bool = True, max_steps: int | None = None,
           tol: float = VIOLATION_TOL) -> Trajectory:
    """Integrate d rho/ds = G(s) rho from s = 0 to 1 with classical RK4.

    The state is re-symmetrised and trace-normalised after each step;
    positivity is only monitored. If the largest constraint violation exceeds
    ``tol`` the step count is doubled, up to ``max_steps`` (default 8x the
    initial count), after which :class:`IntegrationError` is raised.
    """
    variant = Variant.parse(variant)
    if not (tf > 0 and math.isfinite(tf)):
        raise DomainError(f"tf must be positive and finite, got {tf}")
    rho0 = initial_dark_state() if rho0 is None else rho0
    _validate_initial(rho0)
    steps = default_steps(tf) if steps is None else int(steps)
    if steps < MIN_STEPS:
        raise DomainError(f"steps must be >= {MIN_STEPS}, got {steps}")
    steps = _round_steps(steps)
    max_steps = 8 * steps if max_steps is None else max_steps

    while True:
        rho_s, drift, herm, min_eig = _integrate(sched, bath, tf, variant, rho0, steps, phases)
        violation = max(drift, herm, max(0.0, -min_eig))
        if violation <= tol and np.all(np.isfinite(rho_s)):
            break
        diagnostics = dict(tf=tf, steps=steps, trace_drift=drift,
                           hermiticity_drift=herm, min_eigenvalue=min_eig)
        if 2 * steps > max_steps:
            raise IntegrationError(
                f"constraint violation {violation:.3g} > {tol:g} at {steps} steps", diagnostics)
        logger.info("violation %.3g at %d steps, retrying with %d", violation, steps, 2 * steps)
        steps *= 2

    return Trajectory(
        s=np.linspace(0.0, 1.0, N_SAMPLES), rho=rho_s, tf=float(tf), variant=variant,
        steps=steps, max_violation=violation, trace_drift=drift,
        hermiticity_drift=herm, min_eigenvalue=min_eig,
    )
