"""Ohmic thermal bath: spectral rate, KMS symmetry and the master-equation rates.

The rates x1..x10, y1..y4 are products of Lindblad-operator amplitudes with the
bath rate gamma at the Bohr frequencies +-Delta, +-2 Delta and 0:

    x1, x2   = (A-B)^2 / (4 Delta^2)                  * gamma_xx(+-Delta)
    x3, x4   = A B (A-B) / (sqrt2 Delta^3)            * gamma_xz(+-Delta)
    x5, x6   = A B (A-B) / (sqrt2 Delta^3)            * gamma_zx(+-Delta)
    x7, x8   = 2 A^2 B^2 / Delta^4                    * gamma_zz(+-Delta)
    x9, x10  = (A^2-B^2)^2 / (4 Delta^4)              * gamma_zz(+-2 Delta)
    y1       = (A+B)^2 / (2 Delta^2)                  * gamma_xx(0)
    y2       = (A^2-B^2)^2 / (4 Delta^4)              * gamma_zz(0)
    y3, y4   = (A+B)(A^2-B^2) / (2 sqrt2 Delta^3)     * gamma_xz(0), gamma_zx(0)

Both coupling channels see the same Ohmic function. The cross-channel rates
(x3..x6, y3, y4) carry the sign of A-B and can be negative; only the 2x2 rate
matrix per frequency has to be positive semidefinite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGapError, DomainError
from .hamiltonian import SQRT2, DriveSchedule, _check_s, gap_min

DEFAULT_ETA_G2 = 1e-4
DEFAULT_BETA = 1.0 / 2.6
DEFAULT_OMEGA_C = 8.0 * math.pi

# |beta * omega| below this uses the first-order series of omega / (1 - e^{-beta omega})
SERIES_THRESHOLD = 1e-8


@dataclass(frozen=True)
class BathSpec:
    """Ohmic bath: coupling eta*g^2, inverse temperature, cutoff frequency.

    ``cross_correlated=False`` zeroes the x-z cross rates gamma_xz, gamma_zx.
    """

    eta_g2: float = DEFAULT_ETA_G2
    beta: float = DEFAULT_BETA
    omega_c: float = DEFAULT_OMEGA_C
    cross_correlated: bool = True

    def __post_init__(self):
        if not self.eta_g2 >= 0:
            raise DomainError(f"eta_g2 must be >= 0, got {self.eta_g2}")
        if not self.beta > 0:
            raise DomainError(f"beta must be > 0, got {self.beta}")
        if not self.omega_c > 0:
            raise DomainError(f"omega_c must be > 0, got {self.omega_c}")

    def with_(self, **changes) -> "BathSpec":
        fields = dict(eta_g2=self.eta_g2, beta=self.beta, omega_c=self.omega_c,
                      cross_correlated=self.cross_correlated)
        fields.update(changes)
        return BathSpec(**fields)


@dataclass(frozen=True)
class RateSet:
    s: float
    x: np.ndarray  # x1..x10
    y: np.ndarray  # y1..y4


def spectral_rate(bath: BathSpec, omega):
    """gamma(omega) = 2 pi eta g^2 omega e^{-|omega|/omega_c} / (1 - e^{-beta omega})."""
    w = np.asarray(omega, dtype=float)
    bw = bath.beta * w
    small = np.abs(bw) < SERIES_THRESHOLD
    # omega / (1 - e^{-beta omega}); the small branch replaces the removable 0/0
    # expm1 overflows to inf deep in the Boltzmann tail, where the rate is 0
    with np.errstate(over="ignore"):
        denom = -np.expm1(-np.where(small, 1.0, bw))
    bose = np.where(small, (1.0 + 0.5 * bw) / bath.beta, np.where(small, 0.0, w) / denom) + 0.0
    out = 2.0 * math.pi * bath.eta_g2 * np.exp(-np.abs(w) / bath.omega_c) * bose
    return float(out) if out.ndim == 0 else out


def kms_residual(bath: BathSpec, omega: float) -> float:
    """|gamma(-w) - e^{-beta w} gamma(w)| / gamma(|w|)."""
    if omega == 0:
        raise DomainError("KMS residual is undefined at omega = 0")
    up = spectral_rate(bath, omega)
    down = spectral_rate(bath, -omega)
    return abs(down - math.exp(-bath.beta * omega) * up) / spectral_rate(bath, abs(omega))


def bath_correlation_time(bath: BathSpec) -> float:
    """tau_B = beta / (2 pi), valid when omega_c >> 1/beta."""
    if bath.omega_c * bath.beta < 5.0:
        warnings.warn(
            f"omega_c*beta = {bath.omega_c * bath.beta:.3g}: cutoff not well above "
            "the thermal frequency, tau_B = beta/2pi is unreliable",
            RuntimeWarning, stacklevel=2)
    return bath.beta / (2.0 * math.pi)


def check_weak_coupling(bath: BathSpec, sched: DriveSchedule, ratio: float = 0.1) -> list[str]:
    """Warn when the Born-Markov assumptions look violated.

    Only the product eta*g^2 is known, so the zero-frequency rate gamma(0)
    (of order g^2 tau_B) stands in for g^2 tau_B, and sqrt(gamma(0) tau_B)
    for g tau_B.
    """
    tau_b = bath.beta / (2.0 * math.pi)
    g2_tau = spectral_rate(bath, 0.0)
    delta_min, _ = gap_min(sched)
    problems = []
    if g2_tau > ratio * delta_min:
        problems.append(f"weak coupling: g^2 tau_B ~ {g2_tau:.3g} vs Delta_min = {delta_min:.3g}")
    if math.sqrt(g2_tau * tau_b) > ratio:
        problems.append(f"Markov: g tau_B ~ {math.sqrt(g2_tau * tau_b):.3g} not << 1")
    for msg in problems:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return problems


def rate_arrays(bath: BathSpec, sched: DriveSchedule, s) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised rates: x of shape (n, 10) and y of shape (n, 4)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    _check_s(s)
    a, b = sched.amplitudes(s)
    d2 = a * a + b * b
    if np.any(d2 <= 0.0):
        raise DegenerateGapError("instantaneous gap vanished")
    d = np.sqrt(d2)

    g_up = spectral_rate(bath, d)
    g_dn = spectral_rate(bath, -d)
    g2_up = spectral_rate(bath, 2.0 * d)
    g2_dn = spectral_rate(bath, -2.0 * d)
    g0 = spectral_rate(bath, np.zeros_like(d))
    cross = 1.0 if bath.cross_correlated else 0.0

    c_xx = (a - b) ** 2 / (4.0 * d2)
    c_xz = a * b * (a - b) / (SQRT2 * d2 * d)
    c_zz = 2.0 * a * a * b * b / (d2 * d2)
    c_2d = (a * a - b * b) ** 2 / (4.0 * d2 * d2)
    c_y1 = (a + b) ** 2 / (2.0 * d2)
    c_y3 = (a + b) * (a * a - b * b) / (2.0 * SQRT2 * d2 * d)

    x = np.stack([
        c_xx * g_up, c_xx * g_dn,
        cross * c_xz * g_up, cross * c_xz * g_dn,
        cross * c_xz * g_up, cross * c_xz * g_dn,
        c_zz * g_up, c_zz * g_dn,
        c_2d * g2_up, c_2d * g2_dn,
    ], axis=-1)
    y = np.stack([
        c_y1 * g0, c_2d * g0, cross * c_y3 * g0, cross * c_y3 * g0,
    ], axis=-1)
    return x, y


def rate_set(bath: BathSpec, sched: DriveSchedule, s: float) -> RateSet:
    x, y = rate_arrays(bath, sched, s)
    return RateSet(s=float(s), x=x[0], y=y[0])
