"""Quasi-classical quantization for the Witten model and its Dirac counterpart.

Unbroken SUSY uses the condition ∫ p dx = ħπn (n >= 0) and broken SUSY
∫ p dx = ħπ(n - 1/2) (n >= 1), with p = √(2m(ε - Φ²)) between the turning
points. The relativistic forms integrate √(E² - m²c⁴ - W²) against cħπ(...).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core import PhysicalConstants, PotentialSpec, default_grid
from .errors import NotConfining, QuadratureFailure, RegimeMismatch, RootNotBracketed
from .witten import classify_susy

ScalarFn = Callable[[np.ndarray], np.ndarray]

BASE_NODES = 128
MAX_NODES = 1 << 15
SCAN_POINTS = 4001


@dataclass(frozen=True)
class QuantizationResult:
    """One quasi-classical level.

    ``value`` is ε (nonrelativistic) or E² (relativistic). ``energies`` holds
    (E⁺, E⁻) for relativistic results; E⁺ is None at n = 0.
    """

    n: int
    regime: tuple[str, str]
    value: float
    turning_points: tuple[float, float]
    quadrature_error: float
    iterations: int
    energies: tuple[float | None, float] | None = None


def _domain(spec: PotentialSpec | None) -> tuple[float, float]:
    if spec is not None and spec.family == "tabulated":
        return float(spec.params["x"][0]), float(spec.params["x"][-1])
    return -1e6, 1e6


def _minimum(f: ScalarFn, domain: tuple[float, float], scale: float = 1.0) -> tuple[float, float]:
    """Location and value of the global minimum of f, from a scan plus a bounded polish."""
    lo, hi = max(domain[0], -64 * scale), min(domain[1], 64 * scale)
    x = np.linspace(lo, hi, SCAN_POINTS)
    y = f(x)
    i = int(np.argmin(y))
    a, b = x[max(i - 1, 0)], x[min(i + 1, len(x) - 1)]
    if b > a:
        res = minimize_scalar(lambda t: float(f(np.array([t]))[0]), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-14})
        if res.fun < y[i]:
            return float(res.x), float(res.fun)
    return float(x[i]), float(y[i])


def turning_points(f: ScalarFn, value: float, domain: tuple[float, float] = (-1e6, 1e6),
                   scale: float = 1.0, x0: float | None = None) -> tuple[float, float]:
    """The two solutions x_L <= x_R of f(x) = value for a confining f.

    The search window grows geometrically from ``scale`` until f exceeds the
    value at both ends. Each side of the minimum x0 must then hold exactly one
    crossing, which is refined by bracketing.
    """
    if x0 is None:
        x0, fmin = _minimum(f, domain, scale)
    else:
        fmin = float(f(np.array([x0]))[0])
    if not fmin < value:
        raise NotConfining(f"level {value:.6g} does not exceed min f = {fmin:.6g}")
    lo_lim, hi_lim = domain
    half = scale
    while True:
        lo, hi = max(lo_lim, x0 - half), min(hi_lim, x0 + half)
        ends = f(np.array([lo, hi])) - value
        if ends[0] > 0 and ends[1] > 0:
            break
        if lo == lo_lim and hi == hi_lim:
            raise NotConfining(f"f - {value:.6g} does not become positive at both ends of {domain}")
        half *= 2.0

    def g(t):
        return float(f(np.array([t]))[0]) - value

    # scan at least the range searched for the minimum so a second well is seen
    lo = max(lo_lim, min(lo, x0 - 64 * scale))
    hi = min(hi_lim, max(hi, x0 + 64 * scale))
    roots = []
    for a, b in ((lo, x0), (x0, hi)):
        x = np.linspace(a, b, SCAN_POINTS // 2)
        d = f(x) - value
        flips = np.flatnonzero(np.sign(d[:-1]) != np.sign(d[1:]))
        if len(flips) != 1:
            raise NotConfining(f"found {len(flips)} crossings of the level {value:.6g} on one side "
                               "of the minimum; multi-well profiles are not supported")
        i = flips[0]
        roots.append(brentq(g, x[i], x[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
    return roots[0], roots[1]


def _gauss_legendre_theta(n: int):
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * math.pi * (t + 1), 0.5 * math.pi * w


def _chord_integral(integrand: ScalarFn, xl: float, xr: float, nodes: int) -> float:
    """∫_{xl}^{xr} integrand dx with x = mid - half·cos θ.

    The substitution turns square-root zeros at both ends into smooth
    behaviour in θ, so Gauss-Legendre converges quickly.
    """
    theta, w = _gauss_legendre_theta(nodes)
    mid, half = 0.5 * (xl + xr), 0.5 * (xr - xl)
    x = mid - half * np.cos(theta)
    return float(half * np.sum(w * integrand(x) * np.sin(theta)))


def _adaptive_chord(integrand: ScalarFn, xl: float, xr: float, tol: float) -> tuple[float, float]:
    nodes = BASE_NODES
    prev = _chord_integral(integrand, xl, xr, nodes)
    while nodes < MAX_NODES:
        nodes *= 2
        cur = _chord_integral(integrand, xl, xr, nodes)
        err = abs(cur - prev)
        if err <= tol * max(1.0, abs(cur)):
            return cur, err
        prev = cur
    raise QuadratureFailure(f"action integral did not settle to {tol:.1e} with {nodes} nodes "
                            f"(last change {err:.2e})")


def _phi2(spec: PotentialSpec, consts: PhysicalConstants) -> ScalarFn:
    return lambda x: spec.phi(x, consts) ** 2


def _w2(spec: PotentialSpec, consts: PhysicalConstants) -> ScalarFn:
    return lambda x: spec.W(x, consts) ** 2


def action_integral(spec: PotentialSpec, eps: float, consts: PhysicalConstants,
                    tol: float = 1e-9) -> tuple[float, float, tuple[float, float]]:
    """∫ √(2m(ε - Φ²)) dx between the turning points.

    Returns (value, error estimate, (x_L, x_R)). A vanishing classically
    allowed interval gives 0.
    """
    f = _phi2(spec, consts)
    dom = _domain(spec)
    scale = spec.natural_length(consts)
    x0, fmin = _minimum(f, dom, scale)
    if eps <= fmin:
        if eps == fmin:
            return 0.0, 0.0, (x0, x0)
        raise NotConfining(f"ε = {eps:.6g} lies below min Φ² = {fmin:.6g}")
    xl, xr = turning_points(f, eps, dom, scale, x0)
    m = consts.m
    val, err = _adaptive_chord(lambda x: np.sqrt(np.maximum(2 * m * (eps - f(x)), 0.0)), xl, xr, tol)
    return val, err, (xl, xr)


def relativistic_action(spec: PotentialSpec, e2: float, consts: PhysicalConstants,
                        tol: float = 1e-9) -> tuple[float, float, tuple[float, float]]:
    """∫ √(E² - m²c⁴ - W²) dx between the turning points of W²."""
    f = _w2(spec, consts)
    dom = _domain(spec)
    scale = spec.natural_length(consts)
    s = e2 - consts.mc2**2
    x0, fmin = _minimum(f, dom, scale)
    if s <= fmin:
        if s == fmin:
            return 0.0, 0.0, (x0, x0)
        raise NotConfining(f"E² - m²c⁴ = {s:.6g} lies below min W² = {fmin:.6g}")
    xl, xr = turning_points(f, s, dom, scale, x0)
    val, err = _adaptive_chord(lambda x: np.sqrt(np.maximum(s - f(x), 0.0)), xl, xr, tol)
    return val, err, (xl, xr)


# ---------------------------------------------------------------------------
# regime bookkeeping


def _regime(spec: PotentialSpec, consts: PhysicalConstants, override: str | None) -> str:
    if override is not None:
        if override not in ("unbroken", "broken"):
            raise ValueError("override must be 'unbroken' or 'broken'")
        return override
    phase = classify_susy(spec, consts, default_grid(spec, consts))
    return "unbroken" if phase.unbroken else "broken"


def _check_level(rule: str, n: int, regime: str) -> None:
    if int(n) != n:
        raise ValueError("n must be an integer")
    if rule == "cbc":
        if regime != "unbroken":
            raise RegimeMismatch("the CBC rule needs unbroken SUSY; use the EIJ rule")
        if n < 0:
            raise ValueError("CBC levels start at n = 0")
    else:
        if regime != "broken":
            raise RegimeMismatch("the EIJ rule needs broken SUSY; use the CBC rule")
        if n < 1:
            raise ValueError("EIJ levels start at n = 1")


def _solve_monotone(action: Callable[[float], tuple[float, float, tuple]], target: float,
                    lo: float, step: float, tol: float):
    """Root of action(v) = target for v > lo, with geometric bracket growth."""
    calls = 0

    def g(v):
        nonlocal calls
        calls += 1
        return action(v)[0] - target

    hi = lo + step
    g_prev = -target
    for _ in range(200):
        gh = g(hi)
        if gh < g_prev:
            raise RootNotBracketed(f"action decreased between {lo:.6g} and {hi:.6g}; not monotone")
        if gh > 0:
            break
        g_prev = gh
        step *= 2.0
        hi = lo + step
    else:
        raise RootNotBracketed(f"action never reached the target {target:.6g}")
    root = brentq(g, lo, hi, xtol=1e-15 * max(1.0, abs(hi)), rtol=4 * np.finfo(float).eps, maxiter=300)
    val, err, tp = action(root)
    # monotonicity around the root
    if action(root * (1 + 1e-6) + 1e-300)[0] < val:
        raise RootNotBracketed("action is not increasing at the root")
    return root, err, tp, calls


def _level_scale(spec: PotentialSpec, consts: PhysicalConstants) -> float:
    """Energy step of order ħ²/(m l²) for the bracket search."""
    ell = spec.natural_length(consts)
    return consts.hbar**2 / (consts.m * ell**2)


def _nonrel_level(spec, consts, n, rule, override, tol) -> QuantizationResult:
    regime = _regime(spec, consts, override)
    _check_level(rule, n, regime)
    tag = ("cbc_unbroken" if rule == "cbc" else "eij_broken", "nonrelativistic")
    if rule == "cbc" and n == 0:
        return QuantizationResult(0, tag, 0.0, (math.nan, math.nan), 0.0, 0)
    target = consts.hbar * math.pi * (n if rule == "cbc" else n - 0.5)
    _, fmin = _minimum(_phi2(spec, consts), _domain(spec), spec.natural_length(consts))
    eps, err, tp, calls = _solve_monotone(lambda e: action_integral(spec, e, consts, tol), target,
                                          fmin, _level_scale(spec, consts), tol)
    return QuantizationResult(int(n), tag, float(eps), tp, err, calls)


def _rel_level(spec, consts, n, rule, override, tol) -> QuantizationResult:
    regime = _regime(spec, consts, override)
    _check_level(rule, n, regime)
    tag = ("cbc_unbroken" if rule == "cbc" else "eij_broken", "relativistic")
    mc2 = consts.mc2
    if rule == "cbc" and n == 0:
        return QuantizationResult(0, tag, mc2 * mc2, (math.nan, math.nan), 0.0, 0, (None, -mc2))
    target = consts.c * consts.hbar * math.pi * (n if rule == "cbc" else n - 0.5)
    _, fmin = _minimum(_w2(spec, consts), _domain(spec), spec.natural_length(consts))
    step = 2 * mc2 * _level_scale(spec, consts)
    s, err, tp, calls = _solve_monotone(lambda v: relativistic_action(spec, v + mc2 * mc2, consts, tol),
                                        target, fmin, step, tol)
    e2 = s + mc2 * mc2
    e = math.sqrt(e2)
    return QuantizationResult(int(n), tag, float(e2), tp, err, calls, (e, -e))


def cbc_level(spec: PotentialSpec, consts: PhysicalConstants, n: int,
              override: str | None = None, tol: float = 1e-9) -> QuantizationResult:
    """ε_n from ∫√(2m(ε - Φ²)) dx = ħπn (unbroken SUSY, n >= 0)."""
    return _nonrel_level(spec, consts, n, "cbc", override, tol)


def eij_level(spec: PotentialSpec, consts: PhysicalConstants, n: int,
              override: str | None = None, tol: float = 1e-9) -> QuantizationResult:
    """ε_n from ∫√(2m(ε - Φ²)) dx = ħπ(n - 1/2) (broken SUSY, n >= 1)."""
    return _nonrel_level(spec, consts, n, "eij", override, tol)


def relativistic_cbc_level(spec: PotentialSpec, consts: PhysicalConstants, n: int,
                           override: str | None = None, tol: float = 1e-9) -> QuantizationResult:
    """E² from ∫√(E² - m²c⁴ - W²) dx = cħπn (unbroken SUSY, n >= 0)."""
    return _rel_level(spec, consts, n, "cbc", override, tol)


def relativistic_eij_level(spec: PotentialSpec, consts: PhysicalConstants, n: int,
                           override: str | None = None, tol: float = 1e-9) -> QuantizationResult:
    """E² from ∫√(E² - m²c⁴ - W²) dx = cħπ(n - 1/2) (broken SUSY, n >= 1)."""
    return _rel_level(spec, consts, n, "eij", override, tol)


def quasiclassical_level(spec: PotentialSpec, consts: PhysicalConstants, n: int,
                         relativistic: bool = False, override: str | None = None,
                         tol: float = 1e-9) -> QuantizationResult:
    """Pick CBC or EIJ from the SUSY phase."""
    regime = _regime(spec, consts, override)
    rule = "cbc" if regime == "unbroken" else "eij"
    fn = _rel_level if relativistic else _nonrel_level
    return fn(spec, consts, n, rule, regime, tol)
