"""Exact moment integrals against the relaxation kernel exp(-(s-u)/m).

Everything stiff in this package reduces to integrals of the form

    M_p(s) = int_0^s u^p exp(-(s-u)/m) du,
    J_p(s) = int_0^s u^p (1 - exp(-(s-u)/m)) du = s^(p+1)/(p+1) - M_p(s),

with a polynomial factor u^p coming from a local polynomial model of the
smooth (non-stiff) part of the integrand.  Computing these moments in closed
form keeps the quadrature error independent of the stiffness ratio s/m.
"""

from __future__ import annotations

import math

import numpy as np

# Taylor fallback: M_p = s^(p+1) * sum_j (-z)^j p!/(p+j+1)!, z = s/m.
_SERIES_Z = 1e-3
_SERIES_TERMS = 10


def exp_moments(sigma, m: float, pmax: int):
    """Return [M_0(sigma), ..., M_pmax(sigma)] for the kernel exp(-(s-u)/m).

    `sigma` may be a scalar or ndarray of nonnegative reals; m > 0.
    Uses the recurrence M_p = m*(sigma^p - p*M_{p-1}) away from sigma << m
    and a Taylor series in z = sigma/m below it (the recurrence cancels
    catastrophically there).
    """
    s = np.asarray(sigma, dtype=float)
    z = s / m
    small = z < _SERIES_Z

    out = []
    mp = -m * np.expm1(-z)
    out.append(mp)
    for p in range(1, pmax + 1):
        mp = m * (s**p - p * mp)
        out.append(mp)

    if np.any(small):
        for p in range(pmax + 1):
            acc = np.zeros_like(z)
            zj = np.ones_like(z)
            for j in range(_SERIES_TERMS):
                acc = acc + zj * (math.factorial(p) / math.factorial(p + j + 1))
                zj = zj * (-z)
            out[p] = np.where(small, s ** (p + 1) * acc, out[p])
    return out


def one_sided_moments(sigma, m: float, pmax: int):
    """Return ([M_p], [J_p]) with J_p = sigma^(p+1)/(p+1) - M_p, stably.

    J_p also cancels for sigma << m, so it gets its own series branch:
    J_p = s^(p+1) * sum_{j>=1} (-1)^(j+1) z^j p!/(p+j+1)!.
    """
    s = np.asarray(sigma, dtype=float)
    z = s / m
    small = z < _SERIES_Z
    mom = exp_moments(s, m, pmax)

    jom = []
    for p in range(pmax + 1):
        jp = s ** (p + 1) / (p + 1) - mom[p]
        if np.any(small):
            acc = np.zeros_like(z)
            zj = np.full_like(z, 1.0)
            for j in range(1, _SERIES_TERMS):
                zj = zj * (-z)
                acc = acc - zj * (math.factorial(p) / math.factorial(p + j + 1))
            jp = np.where(small, s ** (p + 1) * acc, jp)
        jom.append(jp)
    return mom, jom


def scalar_relax_moments(sigma: float, m: float):
    """(M0, M1, M2, J0, J1, J2) for scalar sigma, avoiding array overhead."""
    z = sigma / m
    if z >= _SERIES_Z:
        m0 = -m * math.expm1(-z)
        m1 = m * (sigma - m0)
        m2 = m * (sigma * sigma - 2.0 * m1)
        return m0, m1, m2, sigma - m0, 0.5 * sigma * sigma - m1, sigma**3 / 3.0 - m2
    mm = [0.0, 0.0, 0.0]
    jj = [0.0, 0.0, 0.0]
    for p in range(3):
        acc_m = 0.0
        acc_j = 0.0
        zj = 1.0
        for j in range(_SERIES_TERMS):
            c = zj * (math.factorial(p) / math.factorial(p + j + 1))
            acc_m += c
            if j >= 1:
                acc_j -= c
            zj *= -z
        mm[p] = sigma ** (p + 1) * acc_m
        jj[p] = sigma ** (p + 1) * acc_j
    return mm[0], mm[1], mm[2], jj[0], jj[1], jj[2]


def hermite_cell_integrals(f0, df0, f1, df1, d, m: float):
    """Integrate exp(-(d-u)/m) * H(u) over [0, d] per cell.

    H is the cubic Hermite matching values/derivatives (f0, df0) at u=0 and
    (f1, df1) at u=d.  All of f0, df0, f1, df1 may carry trailing channel
    axes; `d` is broadcast against them (one length per cell).
    Returns the integral with the same trailing shape.
    """
    d = np.asarray(d, dtype=float)
    if d.ndim < np.asarray(f0).ndim:
        dd = d.reshape(d.shape + (1,) * (np.asarray(f0).ndim - d.ndim))
    else:
        dd = d
    c0 = f0
    c1 = df0
    with np.errstate(invalid="ignore", divide="ignore"):
        c2 = (3.0 * (f1 - f0) - dd * (2.0 * df0 + df1)) / dd**2
        c3 = (-2.0 * (f1 - f0) + dd * (df0 + df1)) / dd**3
    c2 = np.where(dd > 0, c2, 0.0)
    c3 = np.where(dd > 0, c3, 0.0)
    mom = exp_moments(d, m, 3)
    mom = [np.reshape(mp, dd.shape) if np.ndim(mp) else mp for mp in mom]
    return c0 * mom[0] + c1 * mom[1] + c2 * mom[2] + c3 * mom[3]
