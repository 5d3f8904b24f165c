"""Vectorized double-double helpers for phase-critical evaluation.

The q-periodicity and q-derivative identities checked by this package hold
to within 1e-12 of the local scale, but a plain float64 pipeline loses
roughly ``2 * k**2 * |ln x| * eps`` of phase accuracy before the modulator
even sees its argument, which for steep modulators is orders of magnitude
above that budget.  The fix is standard compensated arithmetic: a value is
a pair ``(hi, lo)`` of float64 arrays with ``hi + lo`` accurate to about
1e-32 relative.  Only the handful of operations needed here are provided.

All functions broadcast over numpy arrays and also accept Python floats.
References for the algorithms: Dekker (1971), Knuth TAOCP vol 2, and the
usual QD library recurrences.
"""

from __future__ import annotations

import math

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1

# ln 2 = LN2_HI + LN2_LO to ~1e-33
LN2_HI = 0.6931471805599453
LN2_LO = 2.3190468138462996e-17

# 2*pi = TWO_PI_HI + TWO_PI_LO
TWO_PI_HI = 6.283185307179586
TWO_PI_LO = 2.4492935982947064e-16

_SQRT_HALF = 0.7071067811865476


def two_sum(a, b):
    """Error-free sum: returns (s, e) with s + e == a + b exactly."""
    s = a + b
    t = s - a
    e = (a - (s - t)) + (b - t)
    return s, e


def two_prod(a, b):
    """Error-free product: returns (p, e) with p + e == a * b exactly."""
    p = a * b
    ta = _SPLITTER * a
    ahi = ta - (ta - a)
    alo = a - ahi
    tb = _SPLITTER * b
    bhi = tb - (tb - b)
    blo = b - bhi
    e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, e


def dd_add(xh, xl, yh, yl):
    sh, se = two_sum(xh, yh)
    te = se + (xl + yl)
    h = sh + te
    l = te - (h - sh)
    return h, l


def dd_add_d(xh, xl, y):
    sh, se = two_sum(xh, y)
    te = se + xl
    h = sh + te
    l = te - (h - sh)
    return h, l


def dd_mul(xh, xl, yh, yl):
    p, e = two_prod(xh, yh)
    e = e + (xh * yl + xl * yh)
    h = p + e
    l = e - (h - p)
    return h, l


def dd_mul_d(xh, xl, y):
    p, e = two_prod(xh, y)
    e = e + xl * y
    h = p + e
    l = e - (h - p)
    return h, l


def dd_div(xh, xl, yh, yl):
    q1 = xh / yh
    p, e = two_prod(q1, yh)
    rh, rl = dd_add(xh, xl, -p, -e - q1 * yl)
    q2 = (rh + rl) / yh
    h = q1 + q2
    l = q2 - (h - q1)
    return h, l


def dd_sq(xh, xl):
    p, e = two_prod(xh, xh)
    e = e + 2.0 * (xh * xl)
    h = p + e
    l = e - (h - p)
    return h, l


# Coefficients 1/(2n+1) for the atanh series, as (hi, lo) pairs.  With the
# mantissa reduced to [sqrt(1/2), sqrt(2)) the series variable z satisfies
# z**2 <= 0.0294, so 24 terms leave a truncation error below 1e-36.
_ATANH_COEFF = []
for _n in range(24):
    _d = float(2 * _n + 1)
    _chi = 1.0 / _d
    _p, _e = two_prod(_chi, _d)
    _clo = -((_p - 1.0) + _e) / _d
    _ATANH_COEFF.append((_chi, _clo))
_ATANH_COEFF_REV = _ATANH_COEFF[::-1]
del _n, _d, _chi, _p, _e, _clo


def dd_log(x):
    """Natural log of positive x as a double-double pair.

    Accuracy is about 1e-32 absolute for the mantissa part plus an exactly
    represented multiple of ln 2, which is far more than the phase budget
    downstream needs.  Input must be positive and finite.
    """
    x = np.asarray(x, dtype=np.float64)
    m, e = np.frexp(x)
    # Recenter the mantissa into [sqrt(1/2), sqrt(2)); doubling is exact.
    low = m < _SQRT_HALF
    m = np.where(low, m + m, m)
    e = (e - low).astype(np.float64)

    # z = (m - 1) / (m + 1); the numerator is exact by Sterbenz' lemma.
    num = m - 1.0
    den_h, den_l = two_sum(m, 1.0)
    zh, zl = dd_div(num, np.zeros_like(num), den_h, den_l)
    z2h, z2l = dd_sq(zh, zl)

    sh = np.full_like(m, _ATANH_COEFF_REV[0][0])
    sl = np.full_like(m, _ATANH_COEFF_REV[0][1])
    for ch, cl in _ATANH_COEFF_REV[1:]:
        sh, sl = dd_mul(sh, sl, z2h, z2l)
        sh, sl = dd_add_d(sh, sl, ch)
        sl = sl + cl
    # ln m = 2 * z * s
    lh, ll = dd_mul(sh, sl, zh, zl)
    lh, ll = dd_mul_d(lh, ll, 2.0)
    # ln x = e * ln2 + ln m
    th, tl = two_prod(e, LN2_HI)
    tl = tl + e * LN2_LO
    return dd_add(th, tl, lh, ll)


def dd_frac(xh, xl):
    """Fractional part of a double-double value, reduced into [0, 1).

    The returned pair can have ``hi == 1.0`` with a negative ``lo`` when
    the value sits just below 1; the represented value is still inside
    [0, 1).  Range tests therefore look at both words, not just ``hi``.
    """
    f = np.floor(xh)
    # xh - f is NOT always exact (e.g. negative xh close to 0), so run it
    # through an error-free transform and fold the residual into lo.
    dh, de = two_sum(xh, -f)
    rh, rl = dd_add_d(dh, de, xl)
    under = (rh < 0.0) | ((rh == 0.0) & (rl < 0.0))
    rh2, rl2 = dd_add_d(rh, rl, 1.0)
    rh = np.where(under, rh2, rh)
    rl = np.where(under, rl2, rl)
    over = (rh > 1.0) | ((rh == 1.0) & (rl >= 0.0))
    rh3, rl3 = dd_add_d(rh, rl, -1.0)
    rh = np.where(over, rh3, rh)
    rl = np.where(over, rl3, rl)
    return rh, rl


def dd_exp_to_double(xh, xl):
    """exp of a double-double argument, returned as a plain float64.

    ``exp(xh) * (1 + xl)`` keeps the relative error near machine epsilon
    even when ``|xh|`` is large, where ``exp`` of the rounded sum alone
    would lose ``|xh| * eps / 2`` relative accuracy.  Requires |xl| small,
    which dd normalization guarantees.
    """
    return np.exp(xh) * (1.0 + xl)


def fold_harmonic(wh, wl, b):
    """Map a phase w in [0,1) to frac(b * w) for an integer harmonic b.

    b must be exactly representable in float64 (b <= 2**53).  The result
    stays a double-double pair so repeated folding loses only O(eps**2)
    per step relative to the incoming phase.
    """
    ph, pl = dd_mul_d(wh, wl, float(b))
    return dd_frac(ph, pl)
