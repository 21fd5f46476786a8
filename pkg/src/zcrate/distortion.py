"""Lowpass-distortion statistics of the transmit signal.

The transmit signal is not strictly bandlimited; the ideal filters clip the
out-of-band tail.  The clipped energy acts as an extra noise source whose
variance is only known up to the PSD sandwich.  With the substitution
u = omega * beta both tail integrals become parameter-free, leaving two
universal constants:

    c0 = 4 pi^5 int_pi^inf (1 + cos u) / (u^2 (pi^2 - u^2)^2) du
    c2 = 4 pi^3 int_pi^inf (1 + cos u) / (pi^2 - u^2)^2 du

with closed forms in terms of Si/Ci.  Everything else in this module is
bookkeeping around them: the variance bounds, the curvature bound of the
distortion ACF, the total-noise combination, and the signal-to-distortion
ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import sici

from .params import DerivedParams
from .quadrature import NumericalError, quad_checked
from .spectrum import g_mag_sq

__all__ = [
    "c0_constant",
    "c2_constant",
    "c1_of_k",
    "DistortionBounds",
    "distortion_bounds",
    "acf_tail_moment",
    "distortion_acf_upper",
]


@lru_cache(maxsize=1)
def c0_constant() -> float:
    """Universal constant of the clipped-energy integral (Si/Ci closed form)."""
    gamma = np.euler_gamma
    si_pi, _ = sici(math.pi)
    si_2pi, ci_2pi = sici(2.0 * math.pi)
    return float(
        -3.0 * gamma
        - 3.0 * math.log(2.0 * math.pi)
        + 3.0 * ci_2pi
        - math.pi**2
        + 4.0 * math.pi * si_pi
        - math.pi * si_2pi
    )


@lru_cache(maxsize=1)
def c2_constant() -> float:
    """Universal constant of the clipped second-spectral-moment integral."""
    gamma = np.euler_gamma
    si_2pi, ci_2pi = sici(2.0 * math.pi)
    return float(
        math.pi**2 - gamma - math.log(2.0 * math.pi) - math.pi * si_2pi + ci_2pi
    )


def c1_of_k(k: float) -> float:
    """Correlation factor at the band edge, c1 = c(2 pi W), as a function of k."""
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    return 1.0 / (math.sqrt(1.0 + 4.0 * math.pi**2 * k**2) - 1.0)


def _w_shape(u):
    """Parameter-free pulse-spectrum shape w(u) = |G(u/beta)|^2 / beta^2."""
    return g_mag_sq(u, 1.0)


def acf_tail_moment(m: int, r: float, kind: str = "cos") -> float:
    """int_pi^inf u^m w(u) trig(u r) du for m in {0, 1, 2}.

    These are the building blocks of the distortion ACF and its derivatives
    at lag tau = r * beta.  The finite stretch [pi, 4 pi] carries the
    removable singularity of w; beyond it the (1 + cos u) factor is expanded
    so the oscillatory tails can be handed to QUADPACK's weighted rules.
    """
    if m not in (0, 1, 2):
        raise ValueError(f"m must be 0, 1, or 2, got {m}")
    if kind not in ("cos", "sin"):
        raise ValueError(f"kind must be 'cos' or 'sin', got {kind!r}")
    r = float(r)
    trig = np.cos if kind == "cos" else np.sin
    a = 4.0 * math.pi
    label = f"acf_tail_moment(m={m}, r={r:.6g}, {kind})"

    head = quad_checked(
        lambda u: u**m * _w_shape(u) * trig(u * r),
        math.pi,
        a,
        label=label,
        epsabs=1e-13,
        limit=300,
    )

    # tail: u^m w(u) = h(u) (1 + cos u) with h smooth and monotone decaying
    def h(u):
        return 2.0 * math.pi**4 * u ** (m - 2) / (math.pi**2 - u**2) ** 2

    # trig(ur)(1+cos u) = trig(ur) + [trig(u(r+1)) + trig(u(r-1))]/2
    if kind == "cos":
        parts = [(1.0, r), (0.5, r + 1.0), (0.5, abs(r - 1.0))]
    else:
        parts = [(1.0, r), (0.5, r + 1.0), (0.5 * math.copysign(1.0, r - 1.0), abs(r - 1.0))]
    tail = 0.0
    for coeff, wvar in parts:
        if coeff == 0.0:
            continue
        if wvar < 1e-12:
            if kind == "sin":
                continue  # sin(0 * u) term vanishes
            piece, abserr = integrate.quad(h, a, np.inf, epsabs=1e-13, epsrel=1e-12)
        else:
            piece, abserr = integrate.quad(
                h, a, np.inf, weight=kind, wvar=wvar, epsabs=1e-13, epsrel=1e-12,
                limlst=200, limit=200,
            )
        if not math.isfinite(piece) or abserr > 1e-8:
            raise NumericalError(f"{label}: oscillatory tail did not converge")
        tail += coeff * piece
    return head + tail


def distortion_acf_upper(tau, params: DerivedParams):
    """ACF of the lowpass distortion built from the flattened upper PSD bound.

    Uses the band-edge-frozen correlation factor (1 + 2 c1), the same
    bounding step the closed-form variance and curvature bounds apply, so
    this ACF reproduces those closed forms exactly at tau = 0.
    """
    p = params
    c1 = c1_of_k(p.k)
    scale = (1.0 + 2.0 * c1) * p.P_hat * p.beta / (math.pi * p.T_avg)
    tau = np.asarray(tau, dtype=float)
    scalar = tau.ndim == 0
    out = np.array(
        [acf_tail_moment(0, t / p.beta, "cos") for t in np.atleast_1d(tau)]
    )
    out *= scale
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class DistortionBounds:
    """Bounds on the clipped-energy variance and related total-noise terms.

    sigma_xt_sq_lo/hi  : distortion variance sandwich (hi/lo = (1+2c1)^2)
    s2_xt_lo           : lower (most negative) bound on the distortion ACF
                         curvature at lag 0
    sigma_z_sq_lo/hi   : total-noise variance, filtered noise + distortion
    s2_zz_lo           : lower bound on the total-noise ACF curvature
    sdr_lo/hi          : signal-to-distortion ratio sandwich, P/sigma_xt^2
    rho_star_lo/hi     : diagnostic post-filter SNR bounds (P - sigma_xt^2)/(N0 W)
    """

    sigma_xt_sq_lo: float
    sigma_xt_sq_hi: float
    s2_xt_lo: float
    sigma_z_sq_lo: float
    sigma_z_sq_hi: float
    s2_zz_lo: float
    sdr_lo: float
    sdr_hi: float
    rho_star_lo: float
    rho_star_hi: float


def distortion_bounds(params: DerivedParams) -> DistortionBounds:
    p = params
    c1 = c1_of_k(p.k)
    c0 = c0_constant()
    c2 = c2_constant()
    base = p.P_hat * p.beta * c0 / (2.0 * p.T_avg * math.pi**2)
    sigma_xt_sq_hi = (1.0 + 2.0 * c1) * base
    sigma_xt_sq_lo = base / (1.0 + 2.0 * c1)
    s2_xt_lo = -(1.0 + 2.0 * c1) * p.P_hat * c2 / (2.0 * p.T_avg * p.beta)
    noise_var = p.sigma_nhat_sq
    # curvature of the filtered-noise ACF N0 W sinc(2 W tau) at 0
    s2_nn = -(4.0 / 3.0) * math.pi**2 * p.N0 * p.W**3
    return DistortionBounds(
        sigma_xt_sq_lo=sigma_xt_sq_lo,
        sigma_xt_sq_hi=sigma_xt_sq_hi,
        s2_xt_lo=s2_xt_lo,
        sigma_z_sq_lo=noise_var + sigma_xt_sq_lo,
        sigma_z_sq_hi=noise_var + sigma_xt_sq_hi,
        s2_zz_lo=s2_nn + s2_xt_lo,
        sdr_lo=p.P / sigma_xt_sq_hi,
        sdr_hi=p.P / sigma_xt_sq_lo,
        rho_star_lo=(p.P - sigma_xt_sq_hi) / noise_var,
        rho_star_hi=(p.P - sigma_xt_sq_lo) / noise_var,
    )
