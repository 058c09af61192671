"""Euler gamma, real-order parabolic cylinder functions and oscillator states.

``pcf_D`` uses three regions in the argument y:

* ``-y_switch <= y <= y_switch / 2``: even/odd Maclaurin solutions of
  Weber's equation, combined with the exact values D(0) and D'(0). The
  recessive side cancels like exp(y^2/2), hence the shorter reach there.
* ``y > y_switch / 2``: the recessive side. Two seed orders in [-3, -1) come from
  the integral representation (a smooth, non-oscillatory integrand) and the
  order is raised with the three-term recurrence, which runs in its dominant
  direction there.
* ``y < -y_switch``: reflection ``D(-y) = cos(pi nu) D(y) + dominant part``,
  where the dominant part is a sign-definite combination of the Maclaurin
  solutions, so nothing cancels even for near-integer orders.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from .errors import ConvergenceFailure, OrderOutOfRange, PoleAtNonPositiveInteger

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_EPS = np.finfo(float).eps


def _sinpi(x: float) -> float:
    """sin(pi x) with the argument reduced exactly to |r| <= 1/2 first."""
    r = x - 2.0 * round(0.5 * x)  # in [-1, 1], exact
    if r > 0.5:
        return math.sin(math.pi * (1.0 - r))
    if r < -0.5:
        return -math.sin(math.pi * (1.0 + r))
    return math.sin(math.pi * r)


def _cospi(x: float) -> float:
    return _sinpi(x + 0.5)


def _is_pole(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def _gamma_lanczos(x: float) -> float:
    x -= 1.0
    a = _LANCZOS[0]
    t = x + _LANCZOS_G + 0.5
    for i in range(1, len(_LANCZOS)):
        a += _LANCZOS[i] / (x + i)
    return math.sqrt(2 * math.pi) * math.exp((x + 0.5) * math.log(t) - t) * a


def gamma(x: float) -> float:
    """Euler's gamma function for real x (Lanczos with reflection)."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("gamma needs a finite argument")
    if _is_pole(x):
        raise PoleAtNonPositiveInteger(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (_sinpi(x) * _gamma_lanczos(1.0 - x))
    return _gamma_lanczos(x)


def rgamma(x: float) -> float:
    """1/Gamma(x), equal to zero at the poles."""
    x = float(x)
    if _is_pole(x):
        return 0.0
    if x < 0.5:
        return _sinpi(x) * _gamma_lanczos(1.0 - x) / math.pi
    return 1.0 / _gamma_lanczos(x)


# ---------------------------------------------------------------------------
# Weber's equation  w'' + (nu + 1/2 - y^2/4) w = 0


def _kummer_scaled(a: float, b: float, s: np.ndarray) -> np.ndarray:
    """exp(-s/2) * M(a, b, s) for s >= 0, summed with scaled terms."""
    term = np.exp(-0.5 * s)
    total = term.copy()
    k = 0
    kmax = int(200 + 2 * np.max(s, initial=0.0) + 20 * math.sqrt(np.max(s, initial=0.0)))
    while True:
        term = term * ((a + k) / (b + k)) * s / (k + 1)
        total = total + term
        k += 1
        if k > abs(a) + 2 and np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            return total
        if k > kmax:
            raise ConvergenceFailure(f"Maclaurin series for M({a}, {b}, s) did not converge "
                                     f"after {k} terms (max s = {np.max(s):.3g})")


def _weber_even_odd(nu: float, y: np.ndarray):
    s = 0.5 * y * y
    u1 = _kummer_scaled(-0.5 * nu, 0.5, s)
    u2 = y * _kummer_scaled(0.5 * (1.0 - nu), 1.5, s)
    return u1, u2


def _origin_values(nu: float):
    d0 = 2.0 ** (0.5 * nu) * math.sqrt(math.pi) * rgamma(0.5 * (1.0 - nu))
    d0p = -(2.0 ** (0.5 * (nu + 1))) * math.sqrt(math.pi) * rgamma(-0.5 * nu)
    return d0, d0p


def _integral_negative_order(s: float, y: float) -> float:
    """D_s(y) for s < 0 from exp(-y^2/4)/Gamma(-s) * int t^(-s-1) exp(-y t - t^2/2)."""
    alpha = -s - 1.0
    top = 10.0 + max(0.0, -y) if y <= 0 else min(60.0 / y, 10.0)
    val, err = quad(lambda t: math.exp(-y * t - 0.5 * t * t), 0.0, top, weight="alg",
                    wvar=(alpha, 0.0), epsabs=0.0, epsrel=2e-14, limit=200)
    if not (err <= 1e-11 * abs(val)):
        raise ConvergenceFailure(f"integral for D_{s}({y}) has error estimate {err:.2e} (value {val:.3e})")
    return math.exp(-0.25 * y * y) * rgamma(-s) * val


def _recessive_side(nu: float, y: float) -> float:
    if nu < -1.0:
        return _integral_negative_order(nu, y)
    frac = nu - math.floor(nu)
    lo = frac - 3.0  # seeds at orders in [-3, -1)
    d_prev = _integral_negative_order(lo, y)
    d_cur = _integral_negative_order(lo + 1.0, y)
    order = lo + 1.0
    while order < nu - 0.5:
        d_prev, d_cur = d_cur, y * d_cur - order * d_prev
        order += 1.0
    return d_cur


def pcf_D(nu: float, y, y_switch: float = 4.0):
    """Parabolic cylinder function D_nu(y) for real order and argument.

    Follows the Whittaker convention, in which
    ``D' + (y/2) D = nu D_{nu-1}`` and ``-D' + (y/2) D = D_{nu+1}``.
    """
    nu = float(nu)
    if not math.isfinite(nu) or abs(nu) > 200:
        raise OrderOutOfRange(f"order {nu} outside the supported range |nu| <= 200")
    if not 0.0 < y_switch <= 8.0:
        raise ValueError("y_switch must lie in (0, 8]")
    yarr = np.asarray(y, dtype=float)
    flat = np.atleast_1d(yarr).ravel()
    if not np.all(np.isfinite(flat)):
        raise ValueError("pcf_D needs finite arguments")
    out = np.empty_like(flat)
    d0, d0p = _origin_values(nu)

    y_rec = 0.5 * y_switch
    mid = (flat >= -y_switch) & (flat <= y_rec)
    if np.any(mid):
        u1, u2 = _weber_even_odd(nu, flat[mid])
        out[mid] = d0 * u1 + d0p * u2

    for i in np.flatnonzero(flat > y_rec):
        out[i] = _recessive_side(nu, flat[i])

    neg = flat < -y_switch
    if np.any(neg):
        ay = -flat[neg]
        u1, u2 = _weber_even_odd(nu, ay)
        c = _cospi(nu)
        one_minus = 2.0 * _sinpi(0.5 * nu) ** 2
        one_plus = 2.0 * _cospi(0.5 * nu) ** 2
        rec = np.array([_recessive_side(nu, v) for v in ay])
        out[neg] = c * rec + one_minus * d0 * u1 - one_plus * d0p * u2

    if yarr.ndim == 0:
        return float(out[0])
    return out.reshape(yarr.shape)


def pcf_D_prime(nu: float, y, y_switch: float = 4.0):
    """Derivative from the mean of the two lowering/raising relations."""
    lower = pcf_D(nu - 1.0, y, y_switch)
    upper = pcf_D(nu + 1.0, y, y_switch)
    return 0.5 * (nu * lower - upper)


# ---------------------------------------------------------------------------
# harmonic oscillator eigenfunctions


def hermite_functions(n_max: int, xi) -> np.ndarray:
    """Dimensionless normalized Hermite functions h_0..h_{n_max} at xi.

    Returns an array of shape ``(n_max + 1,) + xi.shape``.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    xi = np.asarray(xi, dtype=float)
    out = np.empty((n_max + 1,) + xi.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * xi * xi)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for n in range(2, n_max + 1):
        out[n] = math.sqrt(2.0 / n) * xi * out[n - 1] - math.sqrt((n - 1) / n) * out[n - 2]
    return out


def hermite_states(n_max: int, x, m: float, omega: float, hbar: float) -> np.ndarray:
    """<x|n> for n = 0..n_max, normalized in x."""
    scale = math.sqrt(m * omega / hbar)
    return math.sqrt(scale) * hermite_functions(n_max, np.asarray(x, dtype=float) * scale)


def hermite_state(n: int, x, m: float, omega: float, hbar: float) -> np.ndarray:
    if int(n) != n or n < 0:
        raise ValueError("n must be a non-negative integer")
    return hermite_states(int(n), x, m, omega, hbar)[int(n)]


def ladder_lower(f: np.ndarray, h: float, x: np.ndarray, m: float, omega: float, hbar: float,
                 order: int = 8) -> np.ndarray:
    """b f with b = sqrt(m omega / 2 hbar) (x + (hbar / m omega) d/dx)."""
    from .core import first_derivative

    return math.sqrt(m * omega / (2 * hbar)) * (x * f + hbar / (m * omega) * first_derivative(f, h, order))


def ladder_raise(f: np.ndarray, h: float, x: np.ndarray, m: float, omega: float, hbar: float,
                 order: int = 8) -> np.ndarray:
    """b† f with b† = sqrt(m omega / 2 hbar) (x - (hbar / m omega) d/dx)."""
    from .core import first_derivative

    return math.sqrt(m * omega / (2 * hbar)) * (x * f - hbar / (m * omega) * first_derivative(f, h, order))
