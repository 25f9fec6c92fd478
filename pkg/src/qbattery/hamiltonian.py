"""Drive schedules and the instantaneous eigensystem of the rotating-frame Hamiltonian.

The driven three-level battery in the frame rotating with its bare Hamiltonian is

    H(s) = A(s) (|1><2| + |2><1|) + B(s) (|2><3| + |3><2|),    s = t / t_f,

with eigenvalues (-Delta, 0, +Delta), Delta = sqrt(A^2 + B^2). The zero-energy
eigenvector has no weight on the middle level; it is the dark state that
carries population from |1> (empty) to |3> (full).

All functions here are pure and work in dimensionless units with hbar = 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DegenerateGapError, DomainError

if TYPE_CHECKING:
    from .bath import BathSpec

SQRT2 = math.sqrt(2.0)
GAP_EPS = 1e-14


class Ordering(enum.Enum):
    """Which drive ramps up and which ramps down.

    ``CHARGE``: A(s) = omega_a * s, B(s) = omega_b * (1 - s). The dark state
    starts on |1> and ends on |3>.

    ``DISCHARGE``: A(s) = omega_a * (1 - s), B(s) = omega_b * s. The dark
    state runs from |3> to |1>; this is the literal linear interpolation.
    """

    CHARGE = "charge"
    DISCHARGE = "discharge"

    @classmethod
    def parse(cls, value: "str | Ordering") -> "Ordering":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("literal", "reverse"):
            return cls.DISCHARGE
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown ordering {value!r}") from None


@dataclass(frozen=True)
class DriveSchedule:
    """Linear drive ramps with peak amplitudes ``omega_a`` and ``omega_b``.

    ``freeze_at`` holds the amplitudes at their value for that scaled time,
    which gives a static Hamiltonian (zero eigenbasis rotation).
    """

    omega_a: float = 1.0
    omega_b: float = 1.0
    ordering: Ordering = Ordering.CHARGE
    freeze_at: float | None = None

    def __post_init__(self):
        if not (self.omega_a > 0 and self.omega_b > 0):
            raise DomainError(
                f"drive frequencies must be positive, got "
                f"omega_a={self.omega_a}, omega_b={self.omega_b}")
        if not isinstance(self.ordering, Ordering):
            object.__setattr__(self, "ordering", Ordering.parse(self.ordering))
        if self.freeze_at is not None:
            _check_s(self.freeze_at)

    def frozen(self, s: float) -> "DriveSchedule":
        return DriveSchedule(self.omega_a, self.omega_b, self.ordering, float(s))

    def amplitudes(self, s):
        """(A, B) at scaled time(s) ``s``; accepts scalars or arrays."""
        s = np.asarray(s, dtype=float)
        if self.freeze_at is not None:
            s = np.full_like(s, self.freeze_at)
        if self.ordering is Ordering.CHARGE:
            return self.omega_a * s, self.omega_b * (1.0 - s)
        return self.omega_a * (1.0 - s), self.omega_b * s

    def derivatives(self):
        """(dA/ds, dB/ds); constant for linear ramps."""
        if self.freeze_at is not None:
            return 0.0, 0.0
        if self.ordering is Ordering.CHARGE:
            return self.omega_a, -self.omega_b
        return -self.omega_a, self.omega_b


@dataclass(frozen=True)
class InstantEigensystem:
    s: float
    a_val: float
    b_val: float
    gap: float
    eigvals: np.ndarray
    eigvecs: np.ndarray  # columns |e1>, |e2>, |e3> in the bare basis

    @property
    def dark_state(self) -> np.ndarray:
        return self.eigvecs[:, 1]


def _check_s(s) -> None:
    arr = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"scaled time must lie in [0, 1], got {s!r}")


def hamiltonian_matrix(sched: DriveSchedule, s: float) -> np.ndarray:
    """3x3 rotating-frame Hamiltonian in the bare basis."""
    a, b = schedule_eval(sched, s)
    return np.array([[0.0, a, 0.0], [a, 0.0, b], [0.0, b, 0.0]])


def schedule_eval(sched: DriveSchedule, s: float) -> tuple[float, float]:
    _check_s(s)
    a, b = sched.amplitudes(s)
    return float(a), float(b)


def eigenvectors(sched: DriveSchedule, s) -> np.ndarray:
    """Eigenvector matrices V(s), shape ``s.shape + (3, 3)``.

    Columns are the eigenstates for (-Delta, 0, +Delta). The closed form keeps
    every component continuous in s: the dark state's |3> weight A/Delta and
    the bright states' |2> weights -+1/sqrt(2) never change sign.
    """
    _check_s(s)
    a, b = sched.amplitudes(s)
    gap = np.hypot(a, b)
    if np.any(gap <= GAP_EPS):
        raise DegenerateGapError("instantaneous gap vanished")
    ua, ub = a / gap, b / gap
    h = 1.0 / SQRT2
    v = np.empty(np.shape(gap) + (3, 3))
    v[..., 0, 0] = h * ua
    v[..., 1, 0] = -h
    v[..., 2, 0] = h * ub
    v[..., 0, 1] = -ub
    v[..., 1, 1] = 0.0
    v[..., 2, 1] = ua
    v[..., 0, 2] = h * ua
    v[..., 1, 2] = h
    v[..., 2, 2] = h * ub
    return v


def eigensystem(sched: DriveSchedule, s: float) -> InstantEigensystem:
    a, b = schedule_eval(sched, s)
    gap = math.hypot(a, b)
    if gap <= GAP_EPS:
        raise DegenerateGapError(f"gap vanished at s={s}")
    return InstantEigensystem(
        s=float(s), a_val=a, b_val=b, gap=gap,
        eigvals=np.array([-gap, 0.0, gap]),
        eigvecs=eigenvectors(sched, float(s)),
    )


def gap_min(sched: DriveSchedule) -> tuple[float, float]:
    """Minimum instantaneous gap and the scaled time where it occurs."""
    wa2, wb2 = sched.omega_a ** 2, sched.omega_b ** 2
    if sched.freeze_at is not None:
        a, b = sched.amplitudes(sched.freeze_at)
        return float(np.hypot(a, b)), float(sched.freeze_at)
    delta_min = sched.omega_a * sched.omega_b / math.sqrt(wa2 + wb2)
    if sched.ordering is Ordering.DISCHARGE:
        s_min = wa2 / (wa2 + wb2)
    else:
        s_min = wb2 / (wa2 + wb2)
    return delta_min, s_min


def m_coupling(sched: DriveSchedule, s):
    """Non-adiabatic coupling M(s) = <e2| d/ds |e1>.

    M = (A B' - B A') / (sqrt(2) Delta^2); the same value couples e3 to e2.
    """
    _check_s(s)
    a, b = sched.amplitudes(s)
    da, db = sched.derivatives()
    gap2 = a * a + b * b
    if np.any(gap2 <= GAP_EPS ** 2):
        raise DegenerateGapError("instantaneous gap vanished")
    m = (a * db - b * da) / (SQRT2 * gap2)
    return float(m) if np.ndim(m) == 0 else m


def dimensionless_time(sched: DriveSchedule, tf):
    """tf scaled by the closed-system adiabatic time, sqrt2 wa^2 wb^2 / (wa^2+wb^2)^(3/2)."""
    wa2, wb2 = sched.omega_a ** 2, sched.omega_b ** 2
    return np.asarray(tf) * SQRT2 * wa2 * wb2 / (wa2 + wb2) ** 1.5


def adiabatic_bounds(sched: DriveSchedule, bath: "BathSpec") -> tuple[float, float]:
    """Lower bounds on t_f from the gap condition and from the bath time scale."""
    wa2, wb2 = sched.omega_a ** 2, sched.omega_b ** 2
    tf_gap = (wa2 + wb2) ** 1.5 / (SQRT2 * wa2 * wb2)
    tau_b = bath.beta / (2.0 * math.pi)
    tf_bath = tau_b ** 2 * math.sqrt(wa2 + wb2) / SQRT2
    return tf_gap, tf_bath
