"""Bath spectral functions and derived rate coefficients.

Everything is in natural units (hbar = k_B = 1). The spectral density is
Ohmic with an algebraic ultraviolet rolloff,

    J(w) = lambda_sq * w * cutoff^2 / (w^2 + cutoff^2),

odd in w. Decay rates at signed frequency follow from it together with
the Bose occupation; the drift coefficient Delta and noise coefficient
Sigma are the odd/even combinations of the rates at +/-w that enter the
moment-dynamics matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ValidationError

__all__ = [
    "BathSpec",
    "CombinedRates",
    "bose_occupation",
    "combined_coeffs",
    "decay_rate",
    "delta_coeff",
    "sigma_coeff",
    "spectral_density",
]

# exp() overflows double precision just above this argument
_EXP_ARG_MAX = 700.0


@dataclass(frozen=True)
class BathSpec:
    """One thermal bath: squared coupling strength, temperature, UV cutoff."""

    lambda_sq: float
    temperature: float
    cutoff: float

    def __post_init__(self):
        for name in ("lambda_sq", "temperature", "cutoff"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0.0:
                raise ValidationError(
                    f"BathSpec.{name} must be finite and positive, got {value!r}"
                )
            object.__setattr__(self, name, value)


def spectral_density(bath: BathSpec, omega: float) -> float:
    """Ohmic spectral density with algebraic cutoff, odd in omega."""
    if not math.isfinite(omega):
        raise DomainError(f"omega must be finite, got {omega!r}")
    return bath.lambda_sq * omega * bath.cutoff**2 / (omega**2 + bath.cutoff**2)


def bose_occupation(temperature: float, omega: float) -> float:
    """Occupation 1/(exp(w/T) - 1); T = 0 returns the limits 0 (w>0), -1 (w<0).

    Large |w/T| is guarded: the occupation underflows to exactly 0 or -1
    instead of overflowing exp().
    """
    if omega == 0.0:
        raise DomainError("bose_occupation has a pole at omega = 0")
    if temperature < 0.0:
        raise DomainError(f"temperature must be >= 0, got {temperature!r}")
    if temperature == 0.0:
        return 0.0 if omega > 0.0 else -1.0
    x = omega / temperature
    if x > _EXP_ARG_MAX:
        return 0.0
    if x < -_EXP_ARG_MAX:
        return -1.0
    return 1.0 / math.expm1(x)


def _thermal_weight(x: float) -> float:
    """1 + 1/(e^x - 1) = e^x/(e^x - 1), evaluated without cancellation.

    Computing 1 + n directly loses all precision for x << 0 (n -> -1);
    the ratio form keeps relative accuracy at machine level on both
    sides, with saturation to the exact limits past the exp() range.
    """
    if x > _EXP_ARG_MAX:
        return 1.0
    if x < -_EXP_ARG_MAX:
        return 0.0
    return math.exp(x) / math.expm1(x)


def decay_rate(bath: BathSpec, omega: float) -> float:
    """Golden-rule rate 2 J(w) (1 + n(w)) at signed frequency w.

    A single analytic formula covers both signs: 1 + n(-w) = -n(w) makes
    the w < 0 branch come out as 2 J(|w|) n(|w|) exactly.
    """
    if omega == 0.0:
        raise DomainError("decay_rate is undefined at omega = 0")
    if bath.temperature == 0.0:
        weight = 1.0 if omega > 0.0 else 0.0
    else:
        weight = _thermal_weight(omega / bath.temperature)
    return 2.0 * spectral_density(bath, omega) * weight


def delta_coeff(bath: BathSpec, omega: float) -> float:
    """Drift coefficient (rate(-w) - rate(w)) / (2w), for w > 0.

    Equals -J(w)/w identically, so it is temperature independent and
    always negative.
    """
    if omega <= 0.0:
        raise DomainError(f"delta_coeff requires omega > 0, got {omega!r}")
    return (decay_rate(bath, -omega) - decay_rate(bath, omega)) / (2.0 * omega)


def sigma_coeff(bath: BathSpec, omega: float) -> float:
    """Noise coefficient (rate(-w) + rate(w)) / (2w) = (J(w)/w) coth(w/2T) > 0."""
    if omega <= 0.0:
        raise DomainError(f"sigma_coeff requires omega > 0, got {omega!r}")
    return (decay_rate(bath, -omega) + decay_rate(bath, omega)) / (2.0 * omega)


@dataclass(frozen=True)
class CombinedRates:
    """Half-sum and half-difference rate coefficients of the two baths.

    Indexed by normal mode: entry j belongs to the channel at frequency
    Omega_j. `mean` holds (hot + cold)/2, `split` holds (hot - cold)/2.
    """

    delta_mean: tuple[float, float]
    sigma_mean: tuple[float, float]
    delta_split: tuple[float, float]
    sigma_split: tuple[float, float]


def combined_coeffs(
    hot: BathSpec, cold: BathSpec, omega1: float, omega2: float
) -> CombinedRates:
    """All eight half-sum/half-difference coefficients at the two channel
    frequencies."""
    if omega1 <= 0.0 or omega2 <= 0.0:
        raise DomainError("channel frequencies must be positive")
    dh = (delta_coeff(hot, omega1), delta_coeff(hot, omega2))
    dc = (delta_coeff(cold, omega1), delta_coeff(cold, omega2))
    sh = (sigma_coeff(hot, omega1), sigma_coeff(hot, omega2))
    sc = (sigma_coeff(cold, omega1), sigma_coeff(cold, omega2))
    return CombinedRates(
        delta_mean=(0.5 * (dh[0] + dc[0]), 0.5 * (dh[1] + dc[1])),
        sigma_mean=(0.5 * (sh[0] + sc[0]), 0.5 * (sh[1] + sc[1])),
        delta_split=(0.5 * (dh[0] - dc[0]), 0.5 * (dh[1] - dc[1])),
        sigma_split=(0.5 * (sh[0] - sc[0]), 0.5 * (sh[1] - sc[1])),
    )
