"""Bessel functions of the orders needed by the kernel catalog.

Only the orders ``nu = n/2 - 1`` for dimensions ``n = 2..5`` are supported,
i.e. ``nu in {0, 1/2, 1, 3/2}``. Half orders are evaluated from their closed
trigonometric / hyperbolic forms (with short power series near the origin
where the closed forms cancel), integer orders are delegated to the Cephes
routines shipped with :mod:`scipy.special`.

All functions accept scalars or arrays and return ``float`` / ``ndarray``.
"""
from fractions import Fraction

import numpy as np
from scipy import special

__all__ = [
    "BesselOrder",
    "ORDERS",
    "bessel_first_kind",
    "bessel_second_kind",
    "modified_bessel_first",
    "modified_bessel_second",
    "modified_bessel_first_scaled",
    "modified_bessel_second_scaled",
    "bessel_first_kind_deriv",
    "bessel_second_kind_deriv",
    "modified_bessel_first_deriv",
    "modified_bessel_second_deriv",
    "bessel_first_kind_zeros",
    "order_for_dimension",
]

ORDERS = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2))

# I_nu overflows double precision just past 713; keep a margin.
OVERFLOW_LIMIT = 700.0
# Below this argument the half-order closed forms lose digits to cancellation
# and a truncated power series is used instead (error < 1e-16 relative).
_HALF_SERIES_CUT = 0.5


class BesselOrder:
    """One of the four supported orders 0, 1/2, 1, 3/2."""

    __slots__ = ("value",)

    def __init__(self, value):
        frac = Fraction(value).limit_denominator(2)
        if frac not in ORDERS or abs(float(frac) - float(value)) > 1e-12:
            raise ValueError(f"unsupported Bessel order {value!r}; expected one of 0, 1/2, 1, 3/2")
        self.value = frac

    @property
    def is_half(self):
        return self.value.denominator == 2

    def __float__(self):
        return float(self.value)

    def __eq__(self, other):
        if isinstance(other, BesselOrder):
            return self.value == other.value
        try:
            return self.value == Fraction(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"BesselOrder({self.value})"


def order_for_dimension(n):
    """Order ``n/2 - 1`` used by the n-dimensional Helmholtz kernels (n >= 2)."""
    if n not in (2, 3, 4, 5):
        raise ValueError(f"dimension {n} has no supported Bessel order")
    return BesselOrder(Fraction(n, 2) - 1)


def _as_order(order):
    return order if isinstance(order, BesselOrder) else BesselOrder(order)


def _finite(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _series_half(x, nu, sign):
    """Power series of J_nu (sign=-1) or I_nu (sign=+1) for half orders, small x."""
    x = np.asarray(x, dtype=float)
    q = sign * 0.25 * x * x
    term = np.ones_like(x) / special.gamma(nu + 1.0)
    total = term.copy()
    for m in range(1, 14):
        term = term * q / (m * (m + nu))
        total = total + term
    return total * (0.5 * x) ** nu


# ---------------------------------------------------------------------------
# Bessel functions of the first and second kind
# ---------------------------------------------------------------------------

def _j_half(nu, x):
    with np.errstate(divide="ignore", invalid="ignore"):
        pref = np.sqrt(2.0 / (np.pi * x))
        s, c = np.sin(x), np.cos(x)
        if nu == 0.5:
            val = pref * s
        else:
            val = pref * (s / x - c)
    small = x < _HALF_SERIES_CUT
    if np.any(small):
        val = np.where(small, _series_half(np.where(small, x, 0.0), nu, -1.0), val)
    return val


def _y_half(nu, x):
    pref = np.sqrt(2.0 / (np.pi * x))
    if nu == 0.5:
        return -pref * np.cos(x)
    return -pref * (np.cos(x) / x + np.sin(x))


def bessel_first_kind(order, x):
    """J_nu(x) for x >= 0."""
    nu = _as_order(order)
    arr = _finite(x)
    if np.any(arr < 0):
        raise ValueError("x must be >= 0")
    if nu.value == 0:
        val = special.j0(arr)
    elif nu.value == 1:
        val = special.j1(arr)
    else:
        val = _j_half(float(nu), arr)
    return _out(val, x)


def bessel_second_kind(order, x):
    """Y_nu(x) for x > 0."""
    nu = _as_order(order)
    arr = _finite(x)
    if np.any(arr <= 0):
        raise ValueError("Y_nu is singular at x <= 0")
    if nu.value == 0:
        val = special.y0(arr)
    elif nu.value == 1:
        val = special.y1(arr)
    else:
        val = _y_half(float(nu), arr)
    return _out(val, x)


# ---------------------------------------------------------------------------
# Modified Bessel functions
# ---------------------------------------------------------------------------

def _i_half_scaled(nu, x):
    """exp(-x) * I_nu(x) for half orders."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        pref = np.sqrt(2.0 / (np.pi * x))
        e2 = np.exp(-2.0 * x)
        sh = 0.5 * (1.0 - e2)  # exp(-x) sinh(x)
        ch = 0.5 * (1.0 + e2)  # exp(-x) cosh(x)
        if nu == 0.5:
            val = pref * sh
        else:
            val = pref * (ch - sh / x)
    small = x < _HALF_SERIES_CUT
    if np.any(small):
        xs = np.where(small, x, 0.0)
        val = np.where(small, _series_half(xs, nu, 1.0) * np.exp(-xs), val)
    return val


def _k_half_scaled(nu, x):
    """exp(x) * K_nu(x) for half orders."""
    pref = np.sqrt(np.pi / (2.0 * x))
    if nu == 0.5:
        return pref
    return pref * (1.0 + 1.0 / x)


def modified_bessel_first_scaled(order, x):
    """exp(-x) I_nu(x); no overflow guard, valid for any finite x >= 0."""
    nu = _as_order(order)
    arr = _finite(x)
    if np.any(arr < 0):
        raise ValueError("x must be >= 0")
    if nu.value == 0:
        val = special.i0e(arr)
    elif nu.value == 1:
        val = special.i1e(arr)
    else:
        val = _i_half_scaled(float(nu), arr)
    return _out(val, x)


def modified_bessel_second_scaled(order, x):
    """exp(x) K_nu(x) for x > 0."""
    nu = _as_order(order)
    arr = _finite(x)
    if np.any(arr <= 0):
        raise ValueError("K_nu is singular at x <= 0")
    if nu.value == 0:
        val = special.k0e(arr)
    elif nu.value == 1:
        val = special.k1e(arr)
    else:
        val = _k_half_scaled(float(nu), arr)
    return _out(val, x)


def modified_bessel_first(order, x):
    """I_nu(x) for 0 <= x <= 700."""
    arr = _finite(x)
    if np.any(arr > OVERFLOW_LIMIT):
        raise OverflowError(f"I_nu(x) overflows for x > {OVERFLOW_LIMIT}")
    val = np.asarray(modified_bessel_first_scaled(order, arr)) * np.exp(arr)
    return _out(val, x)


def modified_bessel_second(order, x):
    """K_nu(x) for x > 0."""
    arr = _finite(x)
    val = np.asarray(modified_bessel_second_scaled(order, arr)) * np.exp(-arr)
    return _out(val, x)


# ---------------------------------------------------------------------------
# Derivatives via the recurrences C'_nu = C_{nu-1} - (nu/x) C_nu
# ---------------------------------------------------------------------------

def _lower_j(nu, x):
    # J_{nu-1}
    if nu == 0:
        return -special.j1(x)
    if nu == 1:
        return special.j0(x)
    if nu == 0.5:
        return np.sqrt(2.0 / (np.pi * x)) * np.cos(x)
    return _j_half(0.5, x)


def _lower_y(nu, x):
    if nu == 0:
        return -special.y1(x)
    if nu == 1:
        return special.y0(x)
    if nu == 0.5:
        return np.sqrt(2.0 / (np.pi * x)) * np.sin(x)
    return _y_half(0.5, x)


def bessel_first_kind_deriv(order, x):
    """dJ_nu/dx for x > 0 (x = 0 allowed for integer orders)."""
    nu = float(_as_order(order))
    arr = _finite(x)
    if nu == 0:
        val = -special.j1(arr)
    elif nu == 1:
        val = 0.5 * (special.j0(arr) - special.jv(2, arr))
    else:
        if np.any(arr <= 0):
            raise ValueError("derivative of half-order J requires x > 0")
        val = _lower_j(nu, arr) - nu / arr * _j_half(nu, arr)
    return _out(val, x)


def bessel_second_kind_deriv(order, x):
    nu = float(_as_order(order))
    arr = _finite(x)
    if np.any(arr <= 0):
        raise ValueError("Y_nu is singular at x <= 0")
    if nu == 0:
        val = -special.y1(arr)
    else:
        ynu = bessel_second_kind(order, arr)
        val = _lower_y(nu, arr) - nu / arr * ynu
    return _out(val, x)


def modified_bessel_first_deriv(order, x):
    nu = float(_as_order(order))
    arr = _finite(x)
    if nu == 0:
        val = modified_bessel_first(1, arr)
    elif nu == 1:
        val = 0.5 * (modified_bessel_first(0, arr) + special.iv(2, arr))
    else:
        if np.any(arr <= 0):
            raise ValueError("derivative of half-order I requires x > 0")
        if nu == 0.5:
            lower = np.sqrt(2.0 / (np.pi * arr)) * np.cosh(arr)
        else:
            lower = modified_bessel_first(0.5, arr)
        val = lower - nu / arr * modified_bessel_first(order, arr)
    return _out(val, x)


def modified_bessel_second_deriv(order, x):
    nu = float(_as_order(order))
    arr = _finite(x)
    if np.any(arr <= 0):
        raise ValueError("K_nu is singular at x <= 0")
    if nu == 0:
        val = -modified_bessel_second(1, arr)
    else:
        lower_order = {0.5: 0.5, 1.0: 0, 1.5: 0.5}[nu]
        # K_{-1/2} = K_{1/2}
        val = -modified_bessel_second(lower_order, arr) - nu / arr * modified_bessel_second(order, arr)
    return _out(val, x)


def bessel_first_kind_zeros(order, count):
    """First ``count`` positive zeros of J_nu, located by bracketing and Brent's method."""
    from scipy.optimize import brentq

    nu = _as_order(order)
    zeros = []
    step = 0.1
    a = 1e-6
    fa = bessel_first_kind(nu, a)
    while len(zeros) < count:
        b = a + step
        fb = bessel_first_kind(nu, b)
        if fa == 0.0:
            zeros.append(a)
        elif fa * fb < 0:
            zeros.append(brentq(lambda t: bessel_first_kind(nu, t), a, b, xtol=1e-15, rtol=1e-15))
        a, fa = b, fb
    return np.array(zeros[:count])
