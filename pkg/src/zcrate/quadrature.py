"""Shared numeric-integration helpers.

Thin wrappers around scipy's adaptive quadrature that turn silent accuracy
loss into a hard error, plus the log-singular integrals that the water-filling
rate and the arcosh identity need.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable

import numpy as np
from scipy import integrate

__all__ = ["NumericalError", "quad_checked", "log_sine_integral", "gauss_legendre"]


class NumericalError(RuntimeError):
    """Raised when a quadrature fails to reach the requested accuracy."""


def quad_checked(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    label: str = "integral",
    epsabs: float = 1e-12,
    epsrel: float = 1e-12,
    limit: int = 200,
    **kwargs,
) -> float:
    """scipy.integrate.quad with the error estimate actually enforced."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, abserr = integrate.quad(
            f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, **kwargs
        )
    tol = max(epsabs, abs(value) * epsrel) * 100.0
    if not math.isfinite(value) or abserr > max(tol, 1e-9 * max(1.0, abs(value))):
        raise NumericalError(
            f"{label}: quadrature on [{a}, {b}] did not converge "
            f"(value={value!r}, abserr={abserr!r})"
        )
    return value


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached Gauss-Legendre nodes/weights on [-1, 1]."""
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def log_sine_integral(x: float, n_nodes: int = 80) -> float:
    """integral_0^x ln(sin(pi f)) df for 0 <= x <= 1/2.

    The integrand has a logarithmic endpoint singularity at f = 0; it is
    split off analytically: ln sin(pi f) = ln(pi f) + ln(sinc-like smooth
    part), leaving Gauss-Legendre with a smooth remainder.
    """
    if x < 0 or x > 0.5 + 1e-12:
        raise ValueError(f"x must lie in [0, 1/2], got {x}")
    if x == 0:
        return 0.0
    # analytic piece: int_0^x ln(pi f) df = x (ln(pi x) - 1)
    analytic = x * (math.log(math.pi * x) - 1.0)
    nodes, weights = gauss_legendre(n_nodes)
    f = 0.5 * x * (nodes + 1.0)
    smooth = np.log(np.sinc(f))  # np.sinc(f) = sin(pi f)/(pi f)
    return analytic + 0.5 * x * float(np.dot(weights, smooth))
