"""Magnetocrystalline anisotropy: crystal angle to magnon frequency.

Rotating a magnetized YIG sphere changes the first-order anisotropy
contribution to the Kittel-mode frequency. For rotation in the {110}
plane (azimuth fixed at pi/4) and H_A << H_e0 the resonance reduces to

    f = (gamma/2pi) * [H_e0 + H_A * g(theta)],
    g(theta) = -3/16 + 5/4*cos(2*theta) + 15/16*cos(4*theta)

whose extrema {2, -4/3} span 10/3, fixing the full angular tuning range
at (gamma/2pi)*H_A*10/3. The full quadratic law keeps all angle terms and
is what the simplified law is checked against.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import GAMMA_2PI, ModelError

QUARTER_PI = 0.25 * math.pi

ANGULAR_FACTOR_MAX = 2.0  # g(0)
ANGULAR_FACTOR_MIN = -4.0 / 3.0  # g at cos(2*theta) = -1/3
ANGULAR_FACTOR_SPAN = ANGULAR_FACTOR_MAX - ANGULAR_FACTOR_MIN


class AnisotropyRegimeWarning(UserWarning):
    """H_A is not small against the bias field; the simple law degrades."""


@dataclass(frozen=True)
class AnisotropyParams:
    """Bias field, anisotropy field, and crystal-frame parameters.

    H_e0:  bias field, tesla
    H_A:   first-order anisotropy field, tesla (signed)
    gamma: gyromagnetic ratio over 2*pi, Hz/T
    phi0:  azimuth of the magnetization, rad (pi/4 keeps the rotation in
           the {110} plane)
    M0:    saturation magnetization, A/m (only enters the demagnetization
           tensor components, never the frequencies)
    """

    H_e0: float
    H_A: float
    gamma: float = GAMMA_2PI
    phi0: float = QUARTER_PI
    M0: float = 1.0

    def __post_init__(self):
        if self.H_e0 <= 0:
            raise ModelError("H_e0 must be > 0")
        if self.gamma <= 0:
            raise ModelError("gamma must be > 0")
        if abs(self.H_A) > 0.1 * self.H_e0:
            warnings.warn(
                "H_A/H_e0 exceeds 0.1; the simplified angle law is outside "
                "its validity regime",
                AnisotropyRegimeWarning,
                stacklevel=2,
            )


def demag_tensor(theta_h, phi0, H_A, M0):
    """Effective demagnetization components (N11, N22, N12, N33).

    Cubic first-order anisotropy of a sphere, projected on the
    magnetization-referenced axes.
    """
    if M0 == 0:
        raise ModelError("M0 must be nonzero")
    ratio = H_A / M0
    s2t = math.sin(theta_h) ** 2
    s2p = math.sin(2.0 * phi0) ** 2
    n11 = -3.0 * ratio * s2t * s2p
    n22 = -3.0 * ratio * s2t * (1.0 - 0.25 * s2p)
    n12 = -3.0 * ratio * s2t * math.cos(theta_h) * math.sin(4.0 * phi0)
    n33 = ratio * (1.0 + math.cos(2.0 * theta_h) ** 2 - s2t ** 2 * s2p)
    return n11, n22, n12, n33


def resonance_full(p, theta_h):
    """Resonance frequency from the full quadratic law, Hz.

    Keeps every angle term including the sin^2(theta)*sin^2(2*theta)*
    sin^2(4*phi0) cross term; rejects parameter sets with a negative
    radicand (unsaturated or unphysical regime).
    """
    c2 = math.cos(2.0 * theta_h)
    c4 = math.cos(4.0 * theta_h)
    s2p = math.sin(2.0 * p.phi0) ** 2
    first = p.H_e0 + p.H_A * (
        1.5 + 0.5 * c4 + (-15.0 / 8.0 + 2.0 * c2 - c4 / 8.0) * s2p
    )
    second = p.H_e0 + p.H_A * (2.0 * c4 + (0.5 * c2 - 0.5 * c4) * s2p)
    cross = (
        2.25
        * p.H_A ** 2
        * math.sin(theta_h) ** 2
        * math.sin(2.0 * theta_h) ** 2
        * math.sin(4.0 * p.phi0) ** 2
    )
    radicand = first * second - cross
    if radicand <= 0:
        raise ModelError(f"negative radicand at theta={theta_h}: unphysical regime")
    return p.gamma * math.sqrt(radicand)


def angular_factor(theta_h):
    """g(theta) of the simplified law (vectorized)."""
    theta_h = np.asarray(theta_h, dtype=float)
    return -3.0 / 16.0 + 1.25 * np.cos(2.0 * theta_h) + 15.0 / 16.0 * np.cos(4.0 * theta_h)


def resonance_simple(p, theta_h):
    """First-order resonance f = gamma*(H_e0 + H_A*g(theta)), Hz.

    Valid for H_A << H_e0 and phi0 = pi/4; even and pi-periodic in theta.
    """
    return p.gamma * (p.H_e0 + p.H_A * angular_factor(theta_h))


def h_a_for_tuning_range(tuning_range_hz, gamma=GAMMA_2PI):
    """Anisotropy field whose full angular tuning span equals the given range."""
    return tuning_range_hz / (gamma * ANGULAR_FACTOR_SPAN)


def angle_sweep(p, thetas, which="simple"):
    """Resonance frequency at each angle, in input order."""
    if which == "simple":
        return [float(resonance_simple(p, th)) for th in thetas]
    if which == "full":
        return [resonance_full(p, th) for th in thetas]
    raise ModelError(f"which must be 'full' or 'simple', got {which!r}")
