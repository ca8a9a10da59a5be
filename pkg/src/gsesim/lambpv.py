"""Principal-value integrals behind the giant-ensemble decay and Lamb shift.

The waveguide-mediated self-energy of a two-point ensemble reduces to
Abel-regularized principal-value integrals over photon frequency,

    A(x) = PV int_0^inf  w*cos(w*x) / (w +- 1) dw
    B(x) = PV int_0^inf  w*sin(w*x) / (w +- 1) dw

in units of the magnon frequency, with x the phase across the ensemble.
Both close in terms of the sine and cosine integrals; this module carries
the closed forms, an independent quadrature oracle, and the physical
decay/shift decomposition (2*pi*cos(x), -pi*sin(x)) that assembles into
the interference-modulated decay rate 2*kappa*(1 + cos x) and shift
kappa*sin(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import ModelError

EULER_GAMMA = 0.5772156649015328606
_HALF_PI = 0.5 * math.pi
_SERIES_SPLIT = 4.0


class PvDivergence(ModelError):
    """The principal-value integral diverges at the requested argument."""


class PvConvergenceError(ModelError):
    """The quadrature oracle failed to converge to the requested residual."""


def _sici_series(x):
    # alternating Taylor series; below the split point the largest term is
    # ~e^4, so cancellation costs at most ~2 digits
    total, num, k = 0.0, x, 0
    while True:
        term = num / (2 * k + 1)
        total += term
        if abs(term) < 1e-18 * abs(total) + 1e-300:
            break
        num *= -x * x / ((2 * k + 2) * (2 * k + 3))
        k += 1
    si_val = total

    total, num, k = 0.0, 0.5 * x * x, 1
    while True:
        term = num / (2 * k)
        total += term
        if abs(term) < 1e-18 * abs(total) + 1e-300:
            break
        num *= -x * x / ((2 * k + 1) * (2 * k + 2))
        k += 1
    ci_val = EULER_GAMMA + math.log(x) - total
    return si_val, ci_val


def _e1_imag_axis(x, maxiter=20000):
    # modified Lentz continued fraction for E1(i*x), x real > 0
    tiny = 1e-300
    z = 1j * x
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, maxiter):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return np.exp(-z) * h
    raise ModelError(f"continued fraction for E1(i*{x}) did not converge")


def si(x):
    """Sine integral Si(x) = int_0^x sin(t)/t dt (odd in x)."""
    if not math.isfinite(x):
        raise ModelError(f"si requires finite x, got {x!r}")
    if x < 0:
        return -si(-x)
    if x == 0.0:
        return 0.0
    if x < _SERIES_SPLIT:
        return _sici_series(x)[0]
    return _HALF_PI + _e1_imag_axis(x).imag


def ci(x):
    """Cosine integral Ci(x) for x > 0 (log-singular at the origin)."""
    if not math.isfinite(x) or x <= 0:
        raise ModelError(f"ci requires finite x > 0, got {x!r}")
    if x < _SERIES_SPLIT:
        return _sici_series(x)[1]
    return -_e1_imag_axis(x).real


def m_aux(x):
    """Auxiliary M(x): A(+ branch) = -pi*M(x), A(- branch) = pi*M(x) - pi*sin(x)."""
    return (-math.cos(x) * ci(x) + math.sin(x) * (_HALF_PI - si(x))) / math.pi


def n_aux(x):
    """Auxiliary N(x): B(+ branch) = 1/x - pi*N(x)."""
    return (math.cos(x) * (_HALF_PI - si(x)) + math.sin(x) * ci(x)) / math.pi


@dataclass(frozen=True)
class PvResult:
    """Values of the two regularized integrals at one argument."""

    argument: float
    branch: str
    a_value: float
    b_value: float

    @property
    def a_over_pi(self):
        return self.a_value / math.pi

    @property
    def b_over_pi(self):
        return self.b_value / math.pi


def _check_branch(x, branch):
    if branch not in ("+", "-"):
        raise ModelError(f"branch must be '+' or '-', got {branch!r}")
    if not math.isfinite(x):
        raise ModelError(f"argument must be finite, got {x!r}")
    if x == 0.0:
        raise PvDivergence("the regularized integrals diverge as x -> 0")


def pv_closed(x, branch):
    """Closed-form A(x), B(x) in terms of Si and Ci.

    Derived by splitting w/(w +- 1) = 1 -+ 1/(w +- 1) and Abel-regularizing
    the non-decaying piece; checked against pv_quadrature on both branches.
    """
    _check_branch(x, branch)
    if x < 0:
        raise ModelError("pv_closed expects x > 0 (phase across the ensemble)")
    s, c = si(x), ci(x)
    if branch == "+":
        a = math.cos(x) * c + math.sin(x) * (s - _HALF_PI)
        b = 1.0 / x - math.cos(x) * (_HALF_PI - s) - math.sin(x) * c
    else:
        a = -math.cos(x) * c - math.sin(x) * (s + _HALF_PI)
        b = 1.0 / x + math.cos(x) * (s + _HALF_PI) - math.sin(x) * c
    return PvResult(x, branch, a, b)


def _extrapolate(alphas, vals):
    # Neville polynomial extrapolation of I(alpha) to alpha -> 0
    tab = [list(vals)]
    n = len(vals)
    for j in range(1, n):
        tab.append(
            [
                (alphas[i] * tab[j - 1][i + 1] - alphas[i + j] * tab[j - 1][i])
                / (alphas[i] - alphas[i + j])
                for i in range(n - j)
            ]
        )
    return tab[-1][0], abs(tab[-1][0] - tab[-2][0])


def _regularized_integrals(x, branch, alpha):
    # I(alpha) = int_0^inf w*trig(w*x)*exp(-alpha*w)/(w +- 1) dw; the pole
    # of the '-' branch is taken as a Cauchy principal value on [0, 2] and
    # the oscillatory tail uses Fourier-weight quadrature
    if branch == "+":
        env = lambda w: w * math.exp(-alpha * w) / (w + 1.0)
        a = integrate.quad(env, 0, np.inf, weight="cos", wvar=x, limit=400)[0]
        b = integrate.quad(env, 0, np.inf, weight="sin", wvar=x, limit=400)[0]
        return a, b
    hc = lambda w: w * math.cos(w * x) * math.exp(-alpha * w)
    hs = lambda w: w * math.sin(w * x) * math.exp(-alpha * w)
    env = lambda w: w * math.exp(-alpha * w) / (w - 1.0)
    a = (
        integrate.quad(hc, 0, 2, weight="cauchy", wvar=1.0, limit=400)[0]
        + integrate.quad(env, 2, np.inf, weight="cos", wvar=x, limit=400)[0]
    )
    b = (
        integrate.quad(hs, 0, 2, weight="cauchy", wvar=1.0, limit=400)[0]
        + integrate.quad(env, 2, np.inf, weight="sin", wvar=x, limit=400)[0]
    )
    return a, b


def pv_quadrature(x, branch, residual_tol=1e-5):
    """Numerical A(x), B(x): converging-factor sequence pushed to alpha -> 0.

    Independent oracle for pv_closed. Evaluates the integrals at a
    geometric sequence of converging factors exp(-alpha*w) and Richardson-
    extrapolates; raises PvConvergenceError when the extrapolation
    residual exceeds residual_tol.
    """
    _check_branch(x, branch)
    if x < 0:
        raise ModelError("pv_quadrature expects x > 0")
    alphas = [0.08 * 2.0 ** (-k) for k in range(7)]
    pairs = [_regularized_integrals(x, branch, al) for al in alphas]
    a, res_a = _extrapolate(alphas, [p[0] for p in pairs])
    b, res_b = _extrapolate(alphas, [p[1] for p in pairs])
    if max(res_a, res_b) > residual_tol:
        raise PvConvergenceError(
            f"extrapolation residual {max(res_a, res_b):.2e} at x={x}, branch {branch!r}"
        )
    return PvResult(x, branch, a, b)


def decay_shift_decomposition(x):
    """Per-point-pair factors (2*pi*cos(x), -pi*sin(x)) of the self-energy.

    The cosine term drives the collective radiative decay and the sine
    term the Lamb shift; assembled over a two-point ensemble they give
    kappa_G = 2*kappa*(1 + cos x) and shift kappa*sin(x).
    """
    return 2.0 * math.pi * math.cos(x), -math.pi * math.sin(x)
