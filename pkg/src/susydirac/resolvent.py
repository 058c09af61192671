"""Dirac resolvent G_D(z) = (H_D - z)^-1 assembled from the partner resolvents.

With ζ(z) = z²/2mc² - mc²/2 and G±(ζ) = (H± - ζ)^-1 the kernel is

    G_D = [[(z + mc²) G₊, A G₋], [A† G₊, (z - mc²) G₋]] / 2mc²,

which follows from (H_D - z)(H_D + z) = 2mc² diag(H₊ - ζ, H₋ - ζ).

Three independent routes are provided:

* ``grid_inverse``: banded solves of the partner operators on a grid.
* ``spectral_truncated``: eigen-expansion over Dirac eigenspinors.
* ``closed_form_oscillator``: parabolic cylinder functions for W = mcωx.

Kernel entries follow the convention ``G[a, b] = <x″, a| G_D |x′, b>`` with
(H_D - z) acting on x″.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eig_banded, solve_banded

from .core import (DEFAULT_ORDER, FIRST_DERIVATIVE, Grid, PhysicalConstants, PotentialSpec,
                   check_order, default_grid, first_derivative)
from .dirac import apply_dirac, dirac_eigenspinors
from .errors import MethodUnavailable, NearPole
from .special_functions import gamma, hermite_functions, pcf_D
from .witten import WittenOperator, apply_A, apply_A_dagger, build_partner, witten_levels

METHODS = ("grid_inverse", "spectral_truncated", "closed_form_oscillator")
POLE_GUARD = 1e-6


def zeta_map(z: complex, consts: PhysicalConstants) -> complex:
    """ζ(z) = z²/2mc² - mc²/2."""
    mc2 = consts.mc2
    return z * z / (2 * mc2) - mc2 / 2


@dataclass(frozen=True)
class SpectralParameter:
    """Complex energy z with its partner spectral parameter ζ and, for the
    oscillator, ε = ζ/ħω."""

    z: complex
    zeta: complex
    eps: complex | None = None

    @classmethod
    def from_z(cls, z: complex, consts: PhysicalConstants, omega: float | None = None) -> "SpectralParameter":
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValueError("z must be finite")
        zeta = zeta_map(z, consts)
        eps = None if omega is None else zeta / (consts.hbar * omega)
        return cls(z, zeta, eps)

    def check(self, energies: Sequence[float], consts: PhysicalConstants, delta: float = POLE_GUARD) -> None:
        """Raise NearPole when |z - E| < delta·mc² for any listed eigenvalue E."""
        if len(energies) == 0:
            return
        d = np.abs(np.asarray(energies, dtype=float) - self.z)
        i = int(np.argmin(d))
        if d[i] < delta * consts.mc2:
            raise NearPole(f"z = {self.z} lies within {d[i]:.2e} of the eigenvalue {energies[i]:.12g}")


@dataclass(frozen=True, eq=False)
class ResolventKernel:
    """Samples of the 2×2 resolvent kernel at pairs (x″, x′).

    ``entries`` has shape (k, 2, 2). ``truncation`` is the highest level kept
    by spectral sums, ``tail_estimate`` the size of what lies beyond it.
    """

    z: complex
    zeta: complex
    eps: complex | None
    x2: np.ndarray
    x1: np.ndarray
    entries: np.ndarray
    method: str
    truncation: int | None = None
    tail_estimate: float | None = None
    grid: Grid | None = None
    extra: dict = field(default_factory=dict)

    def entry(self, a: int, b: int) -> np.ndarray:
        return self.entries[:, a, b]


def _as_pairs(points) -> tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1 and pts.shape == (2,):
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x2, x1) pairs")
    return pts[:, 0].copy(), pts[:, 1].copy()


def _require_plain(spec: PotentialSpec) -> None:
    if spec.S is not None or spec.V is not None:
        raise MethodUnavailable("the resolvent is built for a pure pseudo-scalar W; "
                                "map scalar potentials with scalar_to_pseudoscalar first")


def _is_plain_oscillator(spec: PotentialSpec) -> bool:
    return spec.family == "oscillator" and spec.sign > 0 and spec.S is None and spec.V is None


def oscillator_spectrum(consts: PhysicalConstants, omega: float, e_max: float) -> np.ndarray:
    """Dirac oscillator eigenvalues with |E| <= e_max (zero mode -mc² included)."""
    mc2 = consts.mc2
    n_top = max(1, int(math.ceil((e_max**2 - mc2**2) / (2 * mc2 * consts.hbar * omega))) + 1)
    n = np.arange(1, n_top + 1)
    e = mc2 * np.sqrt(1 + 2 * n * consts.hbar * omega / mc2)
    return np.concatenate([[-mc2], e, -e])


# ---------------------------------------------------------------------------
# closed form for the Dirac oscillator


def _real_eps(par: SpectralParameter) -> float:
    eps = par.eps
    if abs(eps.imag) > 1e-12 * max(1.0, abs(eps)):
        raise MethodUnavailable("the closed form needs real ε, i.e. real or purely imaginary z")
    return float(eps.real)


def oscillator_greens_closed_form(z: complex, x2, x1, consts: PhysicalConstants, omega: float,
                                  variant: str = "derived", delta: float = POLE_GUARD) -> np.ndarray:
    """Closed-form Dirac oscillator resolvent kernel, shape ``x2.shape + (2, 2)``.

    ``variant='derived'`` is the kernel obtained from the block formula with
    Weber-function partner resolvents; it agrees with the eigen-expansion.
    ``variant='alternate'`` arranges the same functions with the Weber indices
    of the two diagonal entries exchanged, a diagonal prefactor larger by √2 and
    x₊/x₋ ordering off the diagonal. It is kept so that its disagreement with
    the eigen-expansion can be measured.
    """
    if variant not in ("derived", "alternate"):
        raise ValueError("variant must be 'derived' or 'alternate'")
    par = SpectralParameter.from_z(z, consts, omega)
    par.check(oscillator_spectrum(consts, omega, abs(par.z) + 1.0 * consts.mc2), consts, delta)
    eps = _real_eps(par)
    hbar, c, m, mc2 = consts.hbar, consts.c, consts.m, consts.mc2
    mu = math.sqrt(2 * m * omega / hbar)
    x2 = np.asarray(x2, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    x2, x1 = np.broadcast_arrays(x2, x1)
    xp, xm = np.maximum(x2, x1), np.minimum(x2, x1)
    s = np.sign(x2 - x1)
    zz = par.z
    g1 = gamma(1 - eps)
    # (z - mc²) Γ(-ε) / 2mc² = ħω ε Γ(-ε) / (z + mc²) = -ħω Γ(1 - ε) / (z + mc²),
    # using (z + mc²)(z - mc²) = 2mc²ħω ε; finite at the removable point z = +mc²
    g22 = -hbar * omega * g1 / (zz + mc2)
    off = 1.0 / (hbar * c * math.sqrt(2 * math.pi))
    out = np.empty(x2.shape + (2, 2), dtype=complex)

    if variant == "derived":
        pref = math.sqrt(m / (math.pi * omega * hbar**3))
        out[..., 0, 0] = (zz + mc2) / (2 * mc2) * pref * g1 * pcf_D(eps - 1, mu * xp) * pcf_D(eps - 1, -mu * xm)
        out[..., 1, 1] = g22 * pref * pcf_D(eps, mu * xp) * pcf_D(eps, -mu * xm)

        def upper(sg):
            return sg * off * g1 * pcf_D(eps - 1, sg * mu * x2) * pcf_D(eps, -sg * mu * x1)

        def lower(sg):
            return sg * off * g1 * pcf_D(eps, sg * mu * x2) * pcf_D(eps - 1, -sg * mu * x1)

        # the off-diagonal entries jump by 1/(ħc) across x″ = x′; take the mean there
        g12 = np.where(s > 0, upper(1.0), np.where(s < 0, upper(-1.0), 0.5 * (upper(1.0) + upper(-1.0))))
        g21 = np.where(s > 0, lower(1.0), np.where(s < 0, lower(-1.0), 0.5 * (lower(1.0) + lower(-1.0))))
        out[..., 0, 1] = 1j * g12
        out[..., 1, 0] = 1j * g21
    else:
        diag = 1.0 / (hbar * c * math.sqrt(2 * math.pi * mc2 * hbar * omega))
        out[..., 0, 1] = 1j * s * off * g1 * pcf_D(eps - 1, mu * xp) * pcf_D(eps, -mu * xm)
        out[..., 1, 0] = 1j * s * off * g1 * pcf_D(eps, mu * xp) * pcf_D(eps - 1, -mu * xm)
        out[..., 0, 0] = (zz + mc2) * diag * g1 * pcf_D(eps, mu * xp) * pcf_D(eps, -mu * xm)
        g0 = math.inf if eps == 0 else gamma(-eps)
        out[..., 1, 1] = (zz - mc2) * diag * g0 * pcf_D(eps - 1, mu * xp) * pcf_D(eps - 1, -mu * xm)
    return out


# ---------------------------------------------------------------------------
# eigen-expansion for the Dirac oscillator with a Mehler tail


def _mehler_core(t, a, b):
    sh = np.sinh(t)
    expo = ((a - b) ** 2 + (a * a + b * b) * 2 * np.sinh(0.5 * t) ** 2) / (2 * sh)
    return np.exp(-expo) / np.sqrt(2 * np.pi * sh)


_GENERATING = {
    "minus": lambda t, a, b: np.exp(0.5 * t) * _mehler_core(t, a, b),
    "plus": lambda t, a, b: np.exp(-0.5 * t) * _mehler_core(t, a, b),
    "12": lambda t, a, b: np.exp(0.5 * t) * _mehler_core(t, a, b) * (b - a * np.exp(-t)) / (math.sqrt(2) * np.sinh(t)),
    "21": lambda t, a, b: np.exp(0.5 * t) * _mehler_core(t, a, b) * (a - b * np.exp(-t)) / (math.sqrt(2) * np.sinh(t)),
}


def _series_coefficients(n_max: int, a: float, b: float) -> dict[str, np.ndarray]:
    """Coefficients f_n of the four sums Σ f_n / (n - ε), n = 0..n_max."""
    h = hermite_functions(n_max, np.array([a, b]))
    ha, hb = h[:, 0], h[:, 1]
    sq = np.sqrt(np.arange(1, n_max + 1))
    zero = np.zeros(1)
    return {
        "minus": ha * hb,
        "plus": np.concatenate([zero, ha[:-1] * hb[:-1]]),
        "12": np.concatenate([zero, sq * ha[:-1] * hb[1:]]),
        "21": np.concatenate([zero, sq * ha[1:] * hb[:-1]]),
    }


def _mehler_remainder(key: str, coef: np.ndarray, eps: complex, a: float, b: float) -> complex:
    """Σ_{n > N} f_n/(n - ε) as ∫₀^∞ e^{εt} [F(t) - Σ_{n<=N} e^{-nt} f_n] dt.

    F is the closed generating function of the whole series. Substituting
    t = u² removes the 1/√t behaviour at the origin.
    """
    n = np.arange(len(coef))
    n_top = len(coef) - 1
    gen = _GENERATING[key]
    u_max = math.sqrt(45.0 / (n_top + 1 - eps.real))

    # the off-diagonal generating functions carry a jump across a = b through
    # ±(a - b) t^{-3/2} e^{-(a-b)²/2t} / 2√π; it is subtracted with a decay
    # e^{-(N+1)t} and added back in closed form, so that nearly coincident
    # points do not hinge on resolving a spike of width |a - b|
    jump = {"12": b - a, "21": a - b}.get(key, 0.0)
    side = math.copysign(1.0, jump) if jump != 0.0 else 0.0
    d = abs(a - b)
    if 0.0 < d < 1e-10:
        # the spike is unresolvable; integrate at the midpoint, keep the side, error O(d)
        a = b = 0.5 * (a + b)
        jump, d = 0.0, 0.0
    kappa = n_top + 1

    def singular(t):
        if jump == 0.0 or t == 0.0:
            return 0.0
        return jump * math.exp(-d * d / (2 * t) - kappa * t) / (2 * math.sqrt(math.pi) * t**1.5)

    def integrand(u):
        t = u * u
        return 2 * u * (cmath.exp(eps * t) * (gen(t, a, b) - np.dot(np.exp(-n * t), coef)) - singular(t))

    gap = d / math.sqrt(2)
    pts = [gap] if 0 < gap < u_max else None
    kw = dict(points=pts, limit=400, epsabs=1e-15, epsrel=1e-12)
    re = quad(lambda u: integrand(u).real, 0.0, u_max, **kw)[0]
    im = quad(lambda u: integrand(u).imag, 0.0, u_max, **kw)[0] if eps.imag != 0 else 0.0
    closed = side * math.exp(-d * math.sqrt(2 * kappa)) / math.sqrt(2)
    return complex(re + closed, im)


def _oscillator_spectral_pair(eps: complex, a: float, b: float, n_top: int, tail: bool):
    """Dimensionless sums for one (ξ″, ξ′) pair; returns (sums, tail sizes)."""
    coef = _series_coefficients(n_top, a, b)
    n = np.arange(n_top + 1)
    denom = n - eps
    sums, tails = {}, {}
    for key, f in coef.items():
        # n = 0 enters only the H- series; the caller adds it with its exact prefactor
        explicit = complex(np.sum(f[1:] / denom[1:]))
        if tail:
            rem = _mehler_remainder(key, f, eps, a, b)
            sums[key] = explicit + rem
            tails[key] = abs(rem)
        else:
            half = n_top // 2
            sums[key] = explicit
            tails[key] = abs(complex(np.sum(f[half + 1:] / denom[half + 1:])))
    return sums, tails, float(coef["minus"][0])


def oscillator_greens_spectral(z: complex, x2, x1, consts: PhysicalConstants, omega: float,
                               truncation: int = 400, tail: bool = True,
                               delta: float = POLE_GUARD) -> tuple[np.ndarray, float]:
    """Eigen-expansion of the Dirac oscillator kernel over Hermite states.

    Levels n <= truncation are summed explicitly. With ``tail=True`` the rest
    of the series is added from Mehler's closed generating function; otherwise
    the returned tail size is the partial sum over the upper half of the kept
    levels. Returns (entries of shape (k, 2, 2), tail size).
    """
    if truncation < 2:
        raise ValueError("truncation must be >= 2")
    par = SpectralParameter.from_z(z, consts, omega)
    par.check(oscillator_spectrum(consts, omega, abs(par.z) + consts.mc2), consts, delta)
    eps = complex(par.eps)
    hbar, mc2 = consts.hbar, consts.mc2
    ell = math.sqrt(hbar / (consts.m * omega))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2, x1 = np.broadcast_arrays(x2, x1)
    out = np.empty((x2.size, 2, 2), dtype=complex)
    scale_diag = 1.0 / (2 * mc2 * hbar * omega * ell)
    scale_off = 1.0 / (ell * math.sqrt(2 * mc2 * hbar * omega))
    worst = 0.0
    for i, (b2, b1) in enumerate(zip(x2.ravel() / ell, x1.ravel() / ell)):
        sums, tails, f0 = _oscillator_spectral_pair(eps, float(b2), float(b1), truncation, tail)
        out[i, 0, 0] = (par.z + mc2) * scale_diag * sums["plus"]
        # zero-mode term -|0><0|/(z + mc²), exact even at z = +mc²
        out[i, 1, 1] = (par.z - mc2) * scale_diag * sums["minus"] - f0 / (ell * (par.z + mc2))
        out[i, 0, 1] = -1j * scale_off * sums["12"]
        out[i, 1, 0] = 1j * scale_off * sums["21"]
        worst = max(worst, abs(par.z + mc2) * scale_diag * tails["plus"],
                    abs(par.z - mc2) * scale_diag * tails["minus"],
                    scale_off * tails["12"], scale_off * tails["21"])
    return out, worst


# ---------------------------------------------------------------------------
# grid inverse


def partner_resolvent_grid(op: WittenOperator, zeta: complex, sources: Sequence[int] | None = None,
                           delta: float = POLE_GUARD) -> np.ndarray:
    """Columns G±(x, x_j) solving (H± - ζ) g = e_j / h on the grid.

    Returns shape (len(sources), n_points). Raises NearPole when ζ lies within
    delta·mc² of a grid eigenvalue of the partner operator.
    """
    n = op.grid.n_points
    sources = np.arange(n) if sources is None else np.asarray(sources, dtype=int)
    guard = delta * op.consts.mc2
    near = eig_banded(op.banded, lower=True, select="v",
                      select_range=(zeta.real - guard - 1e-300, zeta.real + guard), eigvals_only=True)
    for e in near:
        if abs(e - zeta) < guard:
            raise NearPole(f"ζ = {zeta} lies within {abs(e - zeta):.2e} of the grid eigenvalue {e:.12g}")
    p = op.bandwidth
    band = op.full_band().astype(complex)
    band[p] -= zeta
    rhs = np.zeros((n, len(sources)), dtype=complex)
    rhs[sources, np.arange(len(sources))] = 1.0 / op.grid.h
    return solve_banded((p, p), band, rhs, check_finite=False).T


def partner_residual(op: WittenOperator, zeta: complex, columns: np.ndarray, sources: Sequence[int]) -> float:
    """max |h (H - ζ) g_j - e_j| over the given columns."""
    mat = op.sparse()
    worst = 0.0
    for g, j in zip(columns, sources):
        r = op.grid.h * (mat @ g - zeta * g)
        r[j] -= 1.0
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def _one_sided_fit(x: np.ndarray, g: np.ndarray, j: int, side: int, radius: int, q: int):
    """Polynomial through q nodes beyond the radius on one side of node j."""
    idx = j + side * np.arange(radius + 1, radius + q + 1)
    t = (x[idx] - x[j])
    # complex coefficients from separate real fits keep polyfit well scaled
    scale = abs(t).max()
    cre = np.polyfit(t / scale, g[idx].real, q - 1)
    cim = np.polyfit(t / scale, g[idx].imag, q - 1)
    poly = np.poly1d(cre) + 1j * np.poly1d(cim)
    return poly, scale


def _repair_column(grid: Grid, g: np.ndarray, j: int, order: int):
    """Replace the near-source samples of a Green's function column.

    The discrete kernel carries stencil artefacts within a few bandwidths of
    the source and a kink at it. Each side is re-sampled from a polynomial
    fitted further out. Returns (values, derivatives); at the source both are
    the mean of the two one-sided limits.
    """
    radius = 3 * len(FIRST_DERIVATIVE[order])
    q = order + 2
    x = grid.x
    val = g.copy()
    fits = []
    for side in (-1, 1):
        if not 0 <= j + side * (radius + q) < grid.n_points:
            continue
        poly, scale = _one_sided_fit(x, g, j, side, radius, q)
        k = j + side * np.arange(1, radius + 1)
        t = (x[k] - x[j]) / scale
        val[k] = poly(t)
        fits.append((k, poly(0.0), poly.deriv()(t) / scale, poly.deriv()(0.0) / scale))
    if len(fits) == 2:
        val[j] = 0.5 * (fits[0][1] + fits[1][1])
    # FD beyond the radius only sees one side of the kink
    der = first_derivative(val, grid.h, order)
    for k, _, dk, _ in fits:
        der[k] = dk
    if len(fits) == 2:
        der[j] = 0.5 * (fits[0][3] + fits[1][3])
    return val, der


class GridDiracResolvent:
    """Dirac resolvent from banded solves of the two partner operators."""

    def __init__(self, spec: PotentialSpec, consts: PhysicalConstants, grid: Grid, z: complex,
                 order: int = DEFAULT_ORDER, delta: float = POLE_GUARD):
        _require_plain(spec)
        check_order(order, grid)
        self.spec, self.consts, self.grid, self.order = spec, consts, grid, order
        self.par = SpectralParameter.from_z(z, consts)
        self.delta = delta
        self.ops = {s: build_partner(spec, consts, grid, s, order) for s in (1, -1)}
        self._check_poles()

    def _check_poles(self) -> None:
        """Compare z with the Dirac eigenvalues mapped from nearby partner levels."""
        mc2 = self.consts.mc2
        z = self.par.z
        d = self.delta
        window = d * (2 * abs(z) + d * mc2) / 2 + 1e-12 * mc2
        zr = self.par.zeta.real
        energies = []
        for s, op in self.ops.items():
            near = eig_banded(op.banded, lower=True, select="v",
                              select_range=(zr - window, zr + window), eigvals_only=True)
            for e in near:
                root = math.sqrt(max(mc2 * mc2 + 2 * mc2 * e, 0.0))
                # a zero mode only produces E = -mc²; E = +mc² is removable, but
                # the banded solve cannot cancel (z - mc²) against 1/ζ, so both are guarded
                energies.extend([root, -root])
        self.par.check(energies, self.consts, d)

    def _solve(self, sign: int, rhs: np.ndarray) -> np.ndarray:
        op = self.ops[sign]
        p = op.bandwidth
        band = op.full_band().astype(complex)
        band[p] -= self.par.zeta
        return solve_banded((p, p), band, rhs, check_finite=False)

    def kernel(self, points, repair: bool = True) -> ResolventKernel:
        """Kernel samples with both points snapped to the nearest grid nodes."""
        x2, x1 = _as_pairs(points)
        i2 = np.array([self.grid.index_of(v) for v in x2])
        i1 = np.array([self.grid.index_of(v) for v in x1])
        sources = np.unique(i1)
        n = self.grid.n_points
        rhs = np.zeros((n, len(sources)), dtype=complex)
        rhs[sources, np.arange(len(sources))] = 1.0 / self.grid.h
        gp = self._solve(1, rhs).T
        gm = self._solve(-1, rhs).T
        mc2 = self.consts.mc2
        z = self.par.z
        w = self.spec.W(self.grid.x, self.consts)
        hc = self.consts.hbar * self.consts.c
        cols = {}
        for c, j in enumerate(sources):
            if repair:
                vp, dp = _repair_column(self.grid, gp[c], j, self.order)
                vm, dm = _repair_column(self.grid, gm[c], j, self.order)
            else:
                vp, dp = gp[c], first_derivative(gp[c], self.grid.h, self.order)
                vm, dm = gm[c], first_derivative(gm[c], self.grid.h, self.order)
            cols[j] = ((z + mc2) * vp / (2 * mc2),
                       -1j * (hc * dm + w * vm) / (2 * mc2),
                       -1j * (hc * dp - w * vp) / (2 * mc2),
                       (z - mc2) * vm / (2 * mc2))
        out = np.empty((len(x2), 2, 2), dtype=complex)
        for k, (a, b) in enumerate(zip(i2, i1)):
            g11, g12, g21, g22 = cols[b]
            out[k] = [[g11[a], g12[a]], [g21[a], g22[a]]]
        x = self.grid.x
        return ResolventKernel(z, self.par.zeta, None, x[i2], x[i1], out, "grid_inverse",
                               grid=self.grid, extra={"repaired": repair, "order": self.order})

    def apply(self, upper: np.ndarray, lower: np.ndarray):
        """G_D acting on a grid spinor."""
        mc2 = self.consts.mc2
        z = self.par.z
        up = self._solve(1, np.asarray(upper, dtype=complex))
        lo = self._solve(-1, np.asarray(lower, dtype=complex))
        A = apply_A(lo, self.spec, self.consts, self.grid, self.order)
        Ad = apply_A_dagger(up, self.spec, self.consts, self.grid, self.order)
        return (((z + mc2) * up + A) / (2 * mc2), (Ad + (z - mc2) * lo) / (2 * mc2))

    def identity_residual(self, probes: Sequence[tuple[np.ndarray, np.ndarray]]) -> float:
        """max over probe spinors f of ‖(H_D - z) G_D f - f‖ / ‖f‖."""
        worst = 0.0
        g = self.grid
        for u, l in probes:
            gu, gl = self.apply(u, l)
            hu, hl = apply_dirac(gu, gl, self.spec, self.consts, g, self.order)
            ru = hu - self.par.z * gu - u
            rl = hl - self.par.z * gl - l
            num = math.hypot(g.norm(ru), g.norm(rl))
            den = math.hypot(g.norm(u), g.norm(l))
            worst = max(worst, num / den)
        return worst


def gaussian_probes(grid: Grid, centers: Sequence[float], width: float = 0.25) -> list:
    """Normalized smooth probe spinors: a Gaussian in the upper, then lower slot."""
    x = grid.x
    probes = []
    for c in centers:
        f = grid.normalize(np.exp(-0.5 * ((x - c) / width) ** 2)).astype(complex)
        zero = np.zeros_like(f)
        probes.extend([(f, zero), (zero, f)])
    return probes


# ---------------------------------------------------------------------------
# eigen-expansion on grid eigen-data


def _grid_spectral(par: SpectralParameter, spec, consts, grid, order, x2, x1, truncation, delta):
    levels = witten_levels(spec, consts, grid, truncation, order, check_edges=False)
    pairs = dirac_eigenspinors(levels, consts)
    par.check([p.E for p in pairs], consts, delta)
    i2 = np.array([grid.index_of(v) for v in x2])
    i1 = np.array([grid.index_of(v) for v in x1])
    out = np.zeros((len(x2), 2, 2), dtype=complex)
    upper_half = np.zeros_like(out)
    cut = truncation // 2
    for p in pairs:
        psi2 = np.stack([p.upper[i2], p.lower[i2]], axis=-1)
        psi1 = np.stack([p.upper[i1], p.lower[i1]], axis=-1)
        term = psi2[:, :, None] * psi1.conj()[:, None, :] / (p.E - par.z)
        out += term
        if p.n > cut:
            upper_half += term
    x = grid.x
    return x[i2], x[i1], out, float(np.max(np.abs(upper_half), initial=0.0)), levels.unbroken


# ---------------------------------------------------------------------------
# front door


def dirac_resolvent(z: complex, spec: PotentialSpec, consts: PhysicalConstants, points,
                    method: str = "grid_inverse", grid: Grid | None = None,
                    order: int = DEFAULT_ORDER, truncation: int = 400, tail: bool = True,
                    delta: float = POLE_GUARD, variant: str = "derived") -> ResolventKernel:
    """Sample G_D(z) at (x″, x′) pairs by the requested method.

    ``spectral_truncated`` uses Hermite states (plus the Mehler tail when
    ``tail`` is set) for the plain oscillator and grid eigenspinors otherwise;
    the zero-mode term appears exactly when SUSY is unbroken.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    _require_plain(spec)
    x2, x1 = _as_pairs(points)
    omega = spec.params.get("omega") if spec.family == "oscillator" else None

    if method == "closed_form_oscillator":
        if not _is_plain_oscillator(spec):
            raise MethodUnavailable("the closed form exists only for the Dirac oscillator W = mcωx")
        par = SpectralParameter.from_z(z, consts, omega)
        g = oscillator_greens_closed_form(z, x2, x1, consts, omega, variant, delta)
        return ResolventKernel(par.z, par.zeta, par.eps, x2, x1, g, method,
                               extra={"variant": variant})

    if method == "spectral_truncated" and _is_plain_oscillator(spec):
        par = SpectralParameter.from_z(z, consts, omega)
        g, tail_size = oscillator_greens_spectral(z, x2, x1, consts, omega, truncation, tail, delta)
        return ResolventKernel(par.z, par.zeta, par.eps, x2, x1, g, method, truncation, tail_size,
                               extra={"basis": "hermite", "mehler_tail": tail, "zero_mode": True})

    grid = default_grid(spec, consts) if grid is None else grid
    if method == "spectral_truncated":
        par = SpectralParameter.from_z(z, consts)
        s2, s1, g, tail_size, unbroken = _grid_spectral(par, spec, consts, grid, order, x2, x1,
                                                        truncation, delta)
        return ResolventKernel(par.z, par.zeta, None, s2, s1, g, method, truncation, tail_size, grid,
                               extra={"basis": "grid", "zero_mode": unbroken})
    return GridDiracResolvent(spec, consts, grid, z, order, delta).kernel(np.column_stack([x2, x1]))
