"""Time-dependent Lindblad operators and the master-equation generator.

Everything lives in the instantaneous eigenbasis {|e1>, |e2>, |e3>} with
energies (-Delta, 0, +Delta). The density matrix is vectorised row-major,
vec(rho)[3*i + j] = rho[i, j], so that

    vec(A rho B) = kron(A, B.T) @ vec(rho).

The generator acts on d/ds (not d/dt):

    d rho/ds = t_f * (-i [H_diag, rho] + D_s[rho]) + [rho, K(s)],

where D_s is the weak-coupling dissipator summed over both coupling channels
and all Bohr frequencies, and K(s) = V^T dV/ds is the eigenbasis rotation with
K[1, 0] = K[1, 2] = M(s). The adiabatic-limit variant drops the K term.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bath import BathSpec, rate_arrays, spectral_rate
from .errors import DegenerateGapError, DomainError
from .hamiltonian import SQRT2, DriveSchedule, eigenvectors, m_coupling, schedule_eval

SPIN1_X = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]) / SQRT2
SPIN1_Z = np.diag([1.0, 0.0, -1.0])

_I3 = np.eye(3)
HARMONICS = (0, 1, -1, 2, -2)  # Bohr frequency = harmonic * Delta


class Channel(enum.Enum):
    X = "x"
    Z = "z"


class Variant(enum.Enum):
    FULL = "full"
    ADIABATIC = "adiabatic"

    @classmethod
    def parse(cls, value: "str | Variant") -> "Variant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("adiabatic_limit", "adiabaticlimit", "adiabatic-limit"):
            key = "adiabatic"
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown variant {value!r}") from None


def _unit(i, j):
    m = np.zeros((3, 3))
    m[i, j] = 1.0
    return m


# Operator shapes per (channel, harmonic); amplitudes are attached separately.
_SHAPE = {
    (Channel.X, 0): np.diag([-1.0, 0.0, 1.0]),
    (Channel.X, 1): -_unit(0, 1) + _unit(1, 2),
    (Channel.X, 2): np.zeros((3, 3)),
    (Channel.Z, 0): np.diag([1.0, -2.0, 1.0]),
    (Channel.Z, 1): -_unit(0, 1) - _unit(1, 2),
    (Channel.Z, 2): _unit(0, 2),
}
for (_ch, _k), _m in list(_SHAPE.items()):
    if _k:
        _SHAPE[(_ch, -_k)] = _m.T.copy()


def _amplitudes(a, b):
    """Operator amplitudes (p, q, a, b) for L_x0, L_z0 / L_z(+-2D), L_x(+-D), L_z(+-D)."""
    d2 = a * a + b * b
    d = np.sqrt(d2)
    p = (a + b) / (SQRT2 * d)
    q = (a * a - b * b) / (2.0 * d2)
    ax = (a - b) / (2.0 * d)
    bz = SQRT2 * a * b / d2
    return p, q, ax, bz


def _amplitude(channel, harmonic, amps):
    p, q, ax, bz = amps
    if channel is Channel.X:
        return {0: p, 1: ax, 2: 0.0}[abs(harmonic)]
    return {0: q, 1: bz, 2: q}[abs(harmonic)]


@dataclass(frozen=True)
class LindbladOp:
    channel: Channel
    harmonic: int
    bohr_freq: float
    matrix: np.ndarray

    @property
    def dag(self) -> np.ndarray:
        return self.matrix.conj().T


def lindblad_ops(sched: DriveSchedule, s: float) -> list[LindbladOp]:
    """The ten jump operators L_(alpha, omega) in closed form (eigenbasis)."""
    a, b = schedule_eval(sched, s)
    gap = math.hypot(a, b)
    if gap == 0.0:
        raise DegenerateGapError(f"gap vanished at s={s}")
    amps = _amplitudes(a, b)
    ops = []
    for ch in Channel:
        for k in HARMONICS:
            ops.append(LindbladOp(ch, k, k * gap, _amplitude(ch, k, amps) * _SHAPE[(ch, k)]))
    return ops


def projected_ops(sched: DriveSchedule, s: float) -> list[LindbladOp]:
    """Same operators built generically from <e_a|A|e_b> |e_a><e_b| over e_b - e_a = omega."""
    a, b = schedule_eval(sched, s)
    gap = math.hypot(a, b)
    if gap == 0.0:
        raise DegenerateGapError(f"gap vanished at s={s}")
    v = eigenvectors(sched, s)
    levels = (-1, 0, 1)
    ops = []
    for ch, coupling in ((Channel.X, SPIN1_X), (Channel.Z, SPIN1_Z)):
        proj = v.T @ coupling @ v
        for k in HARMONICS:
            m = np.zeros((3, 3))
            for i in range(3):
                for j in range(3):
                    if levels[j] - levels[i] == k:
                        m[i, j] = proj[i, j]
            ops.append(LindbladOp(ch, k, k * gap, m))
    return ops


def _dissipator_super(l_beta, l_alpha):
    """Superoperator of rho -> L_b rho L_a^dag - {L_a^dag L_b, rho}/2."""
    ad_b = l_alpha.conj().T @ l_beta
    return (np.kron(l_beta, l_alpha.conj())
            - 0.5 * (np.kron(ad_b, _I3) + np.kron(_I3, ad_b.T)))


def _commutator_super(h):
    """Superoperator of rho -> -i [h, rho]."""
    return -1j * (np.kron(h, _I3) - np.kron(_I3, h.T))


# d/ds contribution of the rotating eigenbasis, rho -> [rho, K] with unit M
_K_UNIT = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 1.0], [0.0, -1.0, 0.0]])
ROTATION_SUPER = np.kron(_I3, _K_UNIT.T) - np.kron(_K_UNIT, _I3)
PHASE_SUPER = _commutator_super(np.diag([-1.0, 0.0, 1.0]))


@dataclass(frozen=True)
class Generator:
    matrix: np.ndarray  # (9, 9) complex
    variant: Variant
    s: float
    tf: float

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return (self.matrix @ np.asarray(rho, dtype=complex).reshape(9)).reshape(3, 3)


def _cross_allowed(bath, alpha, beta):
    return alpha is beta or bath.cross_correlated


def dissipator_super(sched: DriveSchedule, bath: BathSpec, s: float) -> np.ndarray:
    """Dissipator summed term by term over channel pairs and Bohr frequencies."""
    ops = {(op.channel, op.harmonic): op for op in lindblad_ops(sched, s)}
    out = np.zeros((9, 9), dtype=complex)
    for k in HARMONICS:
        for alpha in Channel:
            for beta in Channel:
                if not _cross_allowed(bath, alpha, beta):
                    continue
                la, lb = ops[(alpha, k)], ops[(beta, k)]
                rate = spectral_rate(bath, la.bohr_freq)
                out += rate * _dissipator_super(lb.matrix, la.matrix)
    return out


def build_generator(sched: DriveSchedule, bath: BathSpec, s: float, tf: float,
                    variant: Variant | str = Variant.FULL, *, phases: bool = True) -> Generator:
    """Assemble the 9x9 generator of d vec(rho)/ds at scaled time ``s``.

    ``phases=False`` drops the -i[H_diag, rho] coherence phases.
    """
    variant = Variant.parse(variant)
    if not tf > 0:
        raise DomainError(f"tf must be positive, got {tf}")
    a, b = schedule_eval(sched, s)
    gap = math.hypot(a, b)
    matrix = tf * dissipator_super(sched, bath, s)
    if phases:
        matrix = matrix + tf * _commutator_super(np.diag([-gap, 0.0, gap]))
    if variant is Variant.FULL:
        matrix = matrix + m_coupling(sched, s) * ROTATION_SUPER
    return Generator(matrix=matrix, variant=variant, s=float(s), tf=float(tf))


# Rate index -> (alpha, beta, harmonic) of the dissipator term it multiplies.
_X_TERMS = [
    (Channel.X, Channel.X, 1), (Channel.X, Channel.X, -1),
    (Channel.X, Channel.Z, 1), (Channel.X, Channel.Z, -1),
    (Channel.Z, Channel.X, 1), (Channel.Z, Channel.X, -1),
    (Channel.Z, Channel.Z, 1), (Channel.Z, Channel.Z, -1),
    (Channel.Z, Channel.Z, 2), (Channel.Z, Channel.Z, -2),
]
_Y_TERMS = [
    (Channel.X, Channel.X, 0), (Channel.Z, Channel.Z, 0),
    (Channel.X, Channel.Z, 0), (Channel.Z, Channel.X, 0),
]
RATE_BASIS = np.stack([
    _dissipator_super(_SHAPE[(beta, k)], _SHAPE[(alpha, k)])
    for alpha, beta, k in _X_TERMS + _Y_TERMS
]).reshape(14, 81).real
_REAL_BASIS = np.vstack([RATE_BASIS, ROTATION_SUPER.reshape(1, 81)])
_PHASE_IMAG = PHASE_SUPER.imag.reshape(81)


def generator_stack(sched: DriveSchedule, bath: BathSpec, s, tf: float,
                    variant: Variant | str = Variant.FULL, *, phases: bool = True) -> np.ndarray:
    """Generators at many scaled times at once, shape (n, 9, 9).

    Each dissipator term is a fixed superoperator scaled by one of the rates
    x1..x10, y1..y4, so the stack is a single matrix product.
    """
    variant = Variant.parse(variant)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    x, y = rate_arrays(bath, sched, s)
    coef = np.empty((s.size, 15))
    coef[:, :10] = tf * x
    coef[:, 10:14] = tf * y
    coef[:, 14] = m_coupling(sched, s) if variant is Variant.FULL else 0.0
    out = np.empty((s.size, 81), dtype=complex)
    out.real = coef @ _REAL_BASIS
    if phases:
        a, b = sched.amplitudes(s)
        np.multiply.outer(tf * np.hypot(a, b), _PHASE_IMAG, out=out.imag)
    else:
        out.imag = 0.0
    return out.reshape(-1, 9, 9)


def component_rhs(sched: DriveSchedule, bath: BathSpec, s: float, tf: float,
                  variant: Variant | str, rho: np.ndarray, *, phases: bool = True) -> np.ndarray:
    """d rho/ds written element by element in terms of the rates x_i, y_i.

    Independent of the superoperator assembly; used to cross-check it.
    """
    variant = Variant.parse(variant)
    if not tf > 0:
        raise DomainError(f"tf must be positive, got {tf}")
    x, y = rate_arrays(bath, sched, s)
    x1, x2, x3, x4, x5, x6, x7, x8, x9, x10 = x[0]
    y1, y2, y3, y4 = y[0]
    a, b = schedule_eval(sched, s)
    gap = math.hypot(a, b)
    m = m_coupling(sched, s) if variant is Variant.FULL else 0.0

    r = np.asarray(rho, dtype=complex)
    r11, r12, r13 = r[0]
    r21, r22, r23 = r[1]
    r31, r32, r33 = r[2]

    down_21 = x1 + x3 + x5 + x7   # e2 -> e1
    down_32 = x1 - x3 - x5 + x7   # e3 -> e2
    up_12 = x2 + x4 + x6 + x8     # e1 -> e2
    up_23 = x2 - x4 - x6 + x8     # e2 -> e3

    d = np.empty((3, 3), dtype=complex)
    d[0, 0] = tf * (down_21 * r22 - (up_12 + x10) * r11 + x9 * r33) + m * (r12 + r21)
    d[1, 1] = (tf * (up_12 * r11 - (down_21 + up_23) * r22 + down_32 * r33)
               - m * (r12 + r21 + r23 + r32))
    d[2, 2] = tf * (x10 * r11 + up_23 * r22 - (down_32 + x9) * r33) + m * (r23 + r32)

    c12 = (-0.5 * (x1 + x3 + x5 + x7 + x10) - x2 - x8
           - 0.5 * y1 - 4.5 * y2 + 0.5 * y3 + 2.5 * y4)
    c21 = (-0.5 * (x1 + x3 + x5 + x7 + x10) - x2 - x8
           - 0.5 * y1 - 4.5 * y2 + 2.5 * y3 + 0.5 * y4)
    d[0, 1] = tf * (c12 * r12 + (-x1 - x3 + x5 + x7) * r23) - m * (r11 + r13 - r22)
    d[1, 0] = tf * (c21 * r21 + (-x1 + x3 - x5 + x7) * r32) - m * (r11 + r31 - r22)

    c13_x = -0.5 * (x1 + x2 - x3 + x4 - x5 + x6 + x7 + x8 + x9 + x10)
    d[0, 2] = tf * (c13_x - 2.0 * y1 + y3 - y4) * r13 + m * (r12 + r23)
    d[2, 0] = tf * (c13_x - 2.0 * y1 - y3 + y4) * r31 + m * (r21 + r32)

    c23 = (-x1 - x7 - 0.5 * (x2 - x4 - x6 + x8 + x9)
           - 0.5 * y1 - 4.5 * y2 - 2.5 * y3 - 0.5 * y4)
    c32 = (-x1 - x7 - 0.5 * (x2 - x4 - x6 + x8 + x9)
           - 0.5 * y1 - 4.5 * y2 - 0.5 * y3 - 2.5 * y4)
    d[1, 2] = tf * (c23 * r23 + (-x2 - x4 + x6 + x8) * r12) + m * (r22 - r13 - r33)
    d[2, 1] = tf * (c32 * r32 + (-x2 + x4 - x6 + x8) * r21) + m * (r22 - r31 - r33)

    if phases:
        w = tf * gap
        d[0, 1] += 1j * w * r12
        d[1, 0] -= 1j * w * r21
        d[1, 2] += 1j * w * r23
        d[2, 1] -= 1j * w * r32
        d[0, 2] += 2j * w * r13
        d[2, 0] -= 2j * w * r31
    return d
