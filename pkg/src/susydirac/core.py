"""Constants, grids, superpotential families and finite-difference stencils."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GridTooCoarse, NonConstantV, TrivialSusyWarning

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PhysicalConstants:
    """Mass, speed of light, reduced Planck constant and charge."""

    m: float = 1.0
    c: float = 1.0
    hbar: float = 1.0
    e: float = 1.0

    def __post_init__(self):
        for name in ("m", "c", "hbar"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if not np.isfinite(self.e):
            raise ValueError("charge must be finite")

    @property
    def mc2(self) -> float:
        return self.m * self.c**2


@dataclass(frozen=True)
class Grid:
    """Uniform grid including both end points. Functions vanish outside."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be smaller than x_max")
        if int(self.n_points) != self.n_points or self.n_points < 16:
            raise ValueError("n_points must be an integer >= 16")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def inner(self, f, g) -> complex:
        """Rectangle-rule inner product <f|g> (conjugate-linear in f)."""
        return self.h * np.vdot(f, g)

    def norm(self, f) -> float:
        return float(np.sqrt(self.h * np.sum(np.abs(f) ** 2)))

    def normalize(self, f):
        return f / self.norm(f)

    def index_of(self, x0: float) -> int:
        """Index of the grid node nearest to x0."""
        i = int(round((x0 - self.x_min) / self.h))
        if i < 0 or i >= self.n_points:
            raise ValueError(f"point {x0} lies outside the grid")
        return i

    def snap(self, x0: float) -> float:
        return self.x_min + self.index_of(x0) * self.h


# central stencils: coefficient of f[i+k] for k = 0..p (second derivative),
# k = 1..p (first derivative, antisymmetric)
SECOND_DERIVATIVE = {
    2: (-2.0, 1.0),
    4: (-5.0 / 2, 4.0 / 3, -1.0 / 12),
    6: (-49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90),
    8: (-205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560),
}
FIRST_DERIVATIVE = {
    2: (0.5,),
    4: (2.0 / 3, -1.0 / 12),
    6: (3.0 / 4, -3.0 / 20, 1.0 / 60),
    8: (4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280),
}
DEFAULT_ORDER = 4


def check_order(order: int, grid: Grid | None = None) -> int:
    if order not in SECOND_DERIVATIVE:
        raise GridTooCoarse(f"stencil order {order} not available; use one of {sorted(SECOND_DERIVATIVE)}")
    if grid is not None and grid.n_points < 4 * order:
        raise GridTooCoarse(f"{grid.n_points} points cannot support an order-{order} stencil")
    return order


def first_derivative(f: np.ndarray, h: float, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Central difference of the given order, zero padding beyond the ends."""
    coef = FIRST_DERIVATIVE[check_order(order)]
    p = len(coef)
    fp = np.concatenate([np.zeros(p, dtype=f.dtype), f, np.zeros(p, dtype=f.dtype)])
    n = len(f)
    out = np.zeros_like(f)
    for k, a in enumerate(coef, start=1):
        out = out + a * (fp[p + k : p + k + n] - fp[p - k : p - k + n])
    return out / h


def second_derivative(f: np.ndarray, h: float, order: int = DEFAULT_ORDER) -> np.ndarray:
    coef = SECOND_DERIVATIVE[check_order(order)]
    p = len(coef) - 1
    fp = np.concatenate([np.zeros(p, dtype=f.dtype), f, np.zeros(p, dtype=f.dtype)])
    n = len(f)
    out = coef[0] * f
    for k in range(1, p + 1):
        out = out + coef[k] * (fp[p + k : p + k + n] + fp[p - k : p - k + n])
    return out / h**2


def _as_poly(p):
    if p is None or callable(p):
        return p
    return np.polynomial.Polynomial(np.asarray(p, dtype=float))


@dataclass(frozen=True)
class PotentialSpec:
    """A superpotential family plus optional scalar S(x) and electrostatic V(x).

    Families
    --------
    oscillator : ``W = m c omega x``
    power      : ``Phi = strength |x|^d + offset`` or ``strength sgn(x)|x|^d + offset``
    tabulated  : cubic spline through samples of Phi (or of W)
    custom     : user callables for W and W'

    ``sign`` multiplies W; flipping it moves a zero mode between the partners.
    """

    family: str
    params: Mapping = field(default_factory=dict)
    S: ArrayFn | None = None
    V: ArrayFn | None = None
    sign: float = 1.0

    # constructors ---------------------------------------------------------
    @classmethod
    def oscillator(cls, omega: float, **kw) -> "PotentialSpec":
        if not omega > 0:
            raise ValueError("omega must be positive")
        return cls("oscillator", {"omega": float(omega)}, **_sv(kw))

    @classmethod
    def power(cls, d: float, signed: bool = False, strength: float = 1.0,
              offset: float = 0.0, **kw) -> "PotentialSpec":
        if not d >= 1:
            raise ValueError("power family needs d >= 1 so that Phi' is finite")
        return cls("power", {"d": float(d), "signed": bool(signed),
                             "strength": float(strength), "offset": float(offset)}, **_sv(kw))

    @classmethod
    def tabulated(cls, x, values, quantity: str = "phi", **kw) -> "PotentialSpec":
        x = np.asarray(x, dtype=float)
        values = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.shape != values.shape or len(x) < 4:
            raise ValueError("tabulated potential needs >= 4 matching samples")
        if np.any(np.diff(x) <= 0):
            raise ValueError("tabulated samples must be strictly increasing in x")
        if not np.all(np.isfinite(values)):
            raise ValueError("tabulated values must be finite")
        if quantity not in ("phi", "W"):
            raise ValueError("quantity must be 'phi' or 'W'")
        spline = CubicSpline(x, values)
        return cls("tabulated", {"x": x, "values": values, "quantity": quantity,
                                 "spline": spline, "dspline": spline.derivative()}, **_sv(kw))

    @classmethod
    def custom(cls, W: ArrayFn, dW: ArrayFn, **kw) -> "PotentialSpec":
        return cls("custom", {"W": W, "dW": dW}, **_sv(kw))

    def flipped(self) -> "PotentialSpec":
        return replace(self, sign=-self.sign)

    # evaluation -----------------------------------------------------------
    def _phi_family(self, x, consts, deriv):
        p = self.params
        if self.family == "power":
            d, s = p["d"], p["strength"]
            ax = np.abs(x)
            if deriv:
                # d/dx |x|^d = d sgn(x)|x|^(d-1);  d/dx sgn(x)|x|^d = d |x|^(d-1)
                base = d * ax ** (d - 1)
                return s * (base if p["signed"] else np.sign(x) * base)
            val = ax**d
            return s * (np.sign(x) * val if p["signed"] else val) + p["offset"]
        # tabulated
        lo, hi = p["x"][0], p["x"][-1]
        if np.min(x) < lo - 1e-12 * (hi - lo) or np.max(x) > hi + 1e-12 * (hi - lo):
            raise ValueError(f"tabulated potential only covers [{lo}, {hi}]")
        out = (p["dspline"] if deriv else p["spline"])(x)
        if p["quantity"] == "W":
            out = out / math.sqrt(2 * consts.mc2)
        return out

    def W(self, x, consts: PhysicalConstants) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.family == "oscillator":
            out = consts.m * consts.c * self.params["omega"] * x
        elif self.family == "custom":
            out = np.broadcast_to(np.asarray(self.params["W"](x), dtype=float), x.shape).copy()
        else:
            out = math.sqrt(2 * consts.mc2) * self._phi_family(x, consts, False)
        return self.sign * out

    def dW(self, x, consts: PhysicalConstants) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.family == "oscillator":
            out = np.full(x.shape, consts.m * consts.c * self.params["omega"])
        elif self.family == "custom":
            out = np.broadcast_to(np.asarray(self.params["dW"](x), dtype=float), x.shape).copy()
        else:
            out = math.sqrt(2 * consts.mc2) * self._phi_family(x, consts, True)
        return self.sign * out

    def phi(self, x, consts):
        return self.W(x, consts) / math.sqrt(2 * consts.mc2)

    def dphi(self, x, consts):
        return self.dW(x, consts) / math.sqrt(2 * consts.mc2)

    def scalar(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.zeros_like(x) if self.S is None else np.broadcast_to(self.S(x), x.shape).astype(float)

    def electrostatic(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.zeros_like(x) if self.V is None else np.broadcast_to(self.V(x), x.shape).astype(float)

    def natural_length(self, consts: PhysicalConstants) -> float:
        """Length scale on which the low-lying states live."""
        if self.family == "oscillator":
            return math.sqrt(consts.hbar / (consts.m * self.params["omega"]))
        if self.family == "power":
            s = abs(self.params["strength"])
            if s == 0:
                return 1.0
            # balance hbar^2 / (2 m l^2) against (s l^d)^2
            return (consts.hbar / (math.sqrt(2 * consts.m) * s)) ** (1.0 / (self.params["d"] + 1))
        return 1.0


def _sv(kw):
    unknown = set(kw) - {"S", "V"}
    if unknown:
        raise TypeError(f"unexpected arguments {sorted(unknown)}")
    return {k: _as_poly(v) for k, v in kw.items()}


def rescale_pseudoscalar(spec: PotentialSpec, consts: PhysicalConstants) -> ArrayFn:
    """Return Phi(x) = W(x) / sqrt(2 m c^2) as a callable."""
    return lambda x: spec.phi(x, consts)


def default_grid(spec: PotentialSpec, consts: PhysicalConstants, n_points: int = 4001) -> Grid:
    if spec.family == "tabulated":
        return Grid(float(spec.params["x"][0]), float(spec.params["x"][-1]), n_points)
    L = 12.0 * spec.natural_length(consts)
    return Grid(-L, L, n_points)


def is_trivial(spec: PotentialSpec, consts: PhysicalConstants, grid: Grid, tol: float = 1e-12) -> bool:
    """True when W is constant on the grid, giving constant partner Hamiltonians."""
    w = spec.W(grid.x, consts)
    return bool(np.ptp(w) <= tol * max(1.0, np.max(np.abs(w))))


def scalar_to_pseudoscalar(spec: PotentialSpec, consts: PhysicalConstants, grid: Grid,
                           tol: float = 1e-10) -> PotentialSpec:
    """Map a pure scalar potential onto the pseudo-scalar form.

    The new superpotential is ``W(x) = m c^2 + S(x)`` with the mass term then
    carried entirely by W. V must be constant on the grid.
    """
    x = grid.x
    v = spec.electrostatic(x)
    if np.max(np.abs(v - v.mean())) > tol * max(1.0, abs(v.mean())):
        raise NonConstantV(f"V varies by {np.ptp(v):.3e} on the grid")
    S = spec.S
    if S is None:
        S = np.polynomial.Polynomial([0.0])
    if not hasattr(S, "deriv"):
        raise TypeError("S must be a numpy Polynomial (its derivative is needed)")
    dS = S.deriv()
    mc2 = consts.mc2
    new = PotentialSpec.custom(lambda t: mc2 + S(t), lambda t: dS(t) + 0.0 * t, V=spec.V)
    if np.max(np.abs(mc2 + S(x))) <= tol * mc2:
        warnings.warn("W = m c^2 + S vanishes identically: degenerate SUSY structure",
                      TrivialSusyWarning, stacklevel=2)
    elif is_trivial(new, consts, grid):
        warnings.warn("constant W gives constant partner Hamiltonians", TrivialSusyWarning,
                      stacklevel=2)
    return new
