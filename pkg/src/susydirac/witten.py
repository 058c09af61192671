"""Witten partner Hamiltonians H± = p²/2m + Φ² ± (ħ/√2m) Φ′ on a uniform grid."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.linalg import eig_banded, solve_banded
from scipy.sparse import diags

from .core import (DEFAULT_ORDER, SECOND_DERIVATIVE, Grid, PhysicalConstants, PotentialSpec,
                   check_order, first_derivative, is_trivial)
from .errors import BoxTooSmall, ContinuumThresholdWarning, Indeterminate, NotNormalizable


class SusyPhase(str, enum.Enum):
    UNBROKEN_MINUS = "unbroken_minus"
    UNBROKEN_PLUS_AFTER_FLIP = "unbroken_plus_after_flip"
    BROKEN = "broken"

    @property
    def unbroken(self) -> bool:
        return self is not SusyPhase.BROKEN


@dataclass(frozen=True, eq=False)
class WittenOperator:
    """Banded finite-difference discretization of one partner Hamiltonian.

    ``banded`` is in LAPACK lower form: row k holds the k-th subdiagonal.
    Dirichlet conditions are implied by zero values beyond the grid ends.
    """

    sign: int
    grid: Grid
    consts: PhysicalConstants
    phi: np.ndarray
    dphi: np.ndarray
    order: int
    banded: np.ndarray

    @property
    def potential(self) -> np.ndarray:
        return self.phi**2 + self.sign * self.consts.hbar / math.sqrt(2 * self.consts.m) * self.dphi

    @property
    def bandwidth(self) -> int:
        return self.banded.shape[0] - 1

    def sparse(self):
        p = self.bandwidth
        n = self.grid.n_points
        offs = list(range(-p, p + 1))
        data = [self.banded[abs(k), : n - abs(k)] for k in offs]
        return diags(data, offs, shape=(n, n), format="csr")

    def matvec(self, f: np.ndarray) -> np.ndarray:
        return self.sparse() @ f

    def full_band(self) -> np.ndarray:
        """(2p+1, N) band storage as used by scipy.linalg.solve_banded."""
        p = self.bandwidth
        n = self.grid.n_points
        full = np.zeros((2 * p + 1, n))
        full[p] = self.banded[0]
        for k in range(1, p + 1):
            full[p - k, k:] = self.banded[k, : n - k]
            full[p + k, : n - k] = self.banded[k, : n - k]
        return full


def build_partner(spec: PotentialSpec, consts: PhysicalConstants, grid: Grid, sign: int,
                  order: int = DEFAULT_ORDER) -> WittenOperator:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    check_order(order, grid)
    x = grid.x
    phi = spec.phi(x, consts)
    dphi = spec.dphi(x, consts)
    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(dphi))):
        raise ValueError("Phi or Phi' is not finite on the grid")
    coef = SECOND_DERIVATIVE[order]
    kin = consts.hbar**2 / (2 * consts.m * grid.h**2)
    ab = np.zeros((len(coef), grid.n_points))
    ab[0] = -kin * coef[0] + phi**2 + sign * consts.hbar / math.sqrt(2 * consts.m) * dphi
    for k in range(1, len(coef)):
        ab[k, : grid.n_points - k] = -kin * coef[k]
    return WittenOperator(sign, grid, consts, phi, dphi, order, ab)


class Spectrum(NamedTuple):
    energies: np.ndarray
    states: np.ndarray  # shape (k, n_points), grid-normalized


def _fix_sign(v: np.ndarray) -> np.ndarray:
    amax = np.max(np.abs(v))
    first = np.flatnonzero(np.abs(v) > 1e-3 * amax)[0]
    return v if v[first] > 0 else -v


def _inverse_iteration(op: WittenOperator, e: float, max_iter: int = 8) -> np.ndarray:
    p = op.bandwidth
    band = op.full_band()
    scale = max(1.0, abs(e))
    band[p] -= e - 1e-13 * scale
    v = np.random.default_rng(12345).standard_normal(op.grid.n_points)
    mat = op.sparse()
    for _ in range(max_iter):
        v = solve_banded((p, p), band, v, check_finite=False)
        v /= np.linalg.norm(v)
        if np.linalg.norm(mat @ v - e * v) <= 1e-10 * scale:
            break
    return v


def solve_spectrum(op: WittenOperator, k: int, edge_tol: float = 1e-8,
                   check_edges: bool = True) -> Spectrum:
    """Lowest k eigenpairs, sorted by energy, with an a-posteriori edge check."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > op.grid.n_points:
        raise ValueError("more levels requested than grid points")
    # eigenvalues by band reduction + bisection; vectors by banded inverse
    # iteration (forming the full band eigenvector matrix costs O(N^3))
    w = eig_banded(op.banded, lower=True, select="i", select_range=(0, k - 1), eigvals_only=True)
    v = np.array([_inverse_iteration(op, e) for e in w])
    states = np.array([_fix_sign(s) for s in v / math.sqrt(op.grid.h)])
    if check_edges:
        threshold = min(op.phi[0] ** 2, op.phi[-1] ** 2)
        p = op.bandwidth + 1
        for n, (e, s) in enumerate(zip(w, states)):
            edge = max(np.max(np.abs(s[:p])), np.max(np.abs(s[-p:]))) / np.max(np.abs(s))
            if edge <= edge_tol:
                continue
            if e >= threshold:
                warnings.warn(f"level {n} (energy {e:.6g}) lies above the continuum threshold "
                              f"{threshold:.6g}; it is a box artifact", ContinuumThresholdWarning,
                              stacklevel=2)
                continue
            raise BoxTooSmall(f"level {n} has edge amplitude {edge:.2e} > {edge_tol:.0e}; "
                              "widen the grid")
    return Spectrum(w, states)


def apply_A(f: np.ndarray, spec: PotentialSpec, consts: PhysicalConstants, grid: Grid,
            order: int = DEFAULT_ORDER) -> np.ndarray:
    """A f = -i ħ c f′ - i W f."""
    check_order(order, grid)
    w = spec.W(grid.x, consts)
    return -1j * (consts.hbar * consts.c * first_derivative(np.asarray(f), grid.h, order) + w * f)


def apply_A_dagger(f: np.ndarray, spec: PotentialSpec, consts: PhysicalConstants, grid: Grid,
                   order: int = DEFAULT_ORDER) -> np.ndarray:
    """A† f = -i ħ c f′ + i W f."""
    check_order(order, grid)
    w = spec.W(grid.x, consts)
    return -1j * (consts.hbar * consts.c * first_derivative(np.asarray(f), grid.h, order) - w * f)


def _log_zero_mode(spec, consts, grid) -> np.ndarray:
    """(1/ħc) ∫ W, anchored at the grid node closest to x = 0."""
    x = grid.x
    F = cumulative_simpson(spec.W(x, consts), x=x, initial=0.0) / (consts.hbar * consts.c)
    i0 = int(np.argmin(np.abs(x)))
    return F - F[i0]


def _edge_ratio(f: np.ndarray, width: int = 3) -> float:
    return max(np.max(np.abs(f[:width])), np.max(np.abs(f[-width:]))) / np.max(np.abs(f))


def ground_state_unbroken(spec: PotentialSpec, consts: PhysicalConstants, grid: Grid,
                          edge_tol: float = 1e-8) -> np.ndarray:
    """Zero mode N exp(-(1/ħc) ∫₀ˣ W) by cumulative Simpson quadrature."""
    F = _log_zero_mode(spec, consts, grid)
    f = np.exp(-(F - F.min()))
    if _edge_ratio(f) > edge_tol:
        raise NotNormalizable("exp(-∫W/ħc) does not decay at the grid edges; "
                              "SUSY is broken or the box is too short")
    return grid.normalize(f)


def _tail_sign(values: np.ndarray) -> int:
    if np.all(values > 0):
        return 1
    if np.all(values < 0):
        return -1
    if np.all(values == 0):
        return 0
    raise Indeterminate("Phi changes sign inside a grid tail; tails too short to classify")


def classify_susy(spec: PotentialSpec, consts: PhysicalConstants, grid: Grid,
                  tail_fraction: float = 0.1, edge_tol: float = 1e-8) -> SusyPhase:
    """Broken or unbroken SUSY from the tail signs of Φ and normalizability of exp(∓∫W).

    A constant W counts as broken (trivial SUSY, constant partners).
    """
    if is_trivial(spec, consts, grid):
        return SusyPhase.BROKEN
    x = grid.x
    phi = spec.phi(x, consts)
    width = max(3, int(tail_fraction * grid.n_points))
    left, right = _tail_sign(phi[:width]), _tail_sign(phi[-width:])
    if (left, right) == (-1, 1):
        sign, phase = 1.0, SusyPhase.UNBROKEN_MINUS
    elif (left, right) == (1, -1):
        sign, phase = -1.0, SusyPhase.UNBROKEN_PLUS_AFTER_FLIP
    else:
        return SusyPhase.BROKEN
    F = _log_zero_mode(spec, consts, grid)
    f = np.exp(-sign * (F - (F.min() if sign > 0 else F.max())))
    if _edge_ratio(f) > edge_tol:
        raise Indeterminate("zero-mode candidate has not decayed at the grid edges; "
                            "extend the grid to decide normalizability")
    return phase


def normalize_susy(spec: PotentialSpec, consts: PhysicalConstants, grid: Grid):
    """Return (spec, phase) with W flipped when the zero mode would sit in H₊."""
    phase = classify_susy(spec, consts, grid)
    if phase is SusyPhase.UNBROKEN_PLUS_AFTER_FLIP:
        return spec.flipped(), phase
    return spec, phase


@dataclass(frozen=True, eq=False)
class EigenPair:
    """Level n of the Witten model.

    ``phi_plus`` and ``phi_minus`` are real, grid-normalized and have a
    positive leading component. ``phase`` (±i, or 1 for the zero mode) makes
    ``A (phase·φ⁻) = √(2mc²ε) φ⁺`` hold exactly as written.
    """

    n: int
    eps: float
    phi_minus: np.ndarray
    phi_plus: np.ndarray | None = None
    phase: complex = 1.0

    @property
    def susy_phi_minus(self) -> np.ndarray:
        return self.phase * self.phi_minus


@dataclass(frozen=True, eq=False)
class LevelSet:
    spec: PotentialSpec          # sign convention actually used (zero mode in H₋)
    phase: SusyPhase
    grid: Grid
    order: int
    levels: list
    eps_minus: np.ndarray
    eps_plus: np.ndarray

    @property
    def unbroken(self) -> bool:
        return self.phase.unbroken

    def level(self, n: int) -> EigenPair:
        for lv in self.levels:
            if lv.n == n:
                return lv
        raise KeyError(n)

    @property
    def isospectral_mismatch(self) -> float:
        a = self.eps_minus[1:] if self.unbroken else self.eps_minus
        m = min(len(a), len(self.eps_plus))
        return float(np.max(np.abs(a[:m] - self.eps_plus[:m]), initial=0.0))


def align_phase(phi_plus: np.ndarray, phi_minus: np.ndarray, spec: PotentialSpec,
                consts: PhysicalConstants, grid: Grid, order: int = DEFAULT_ORDER) -> complex:
    """The factor ±i with A(±i φ⁻) ∝ +φ⁺."""
    t = grid.inner(phi_plus, 1j * apply_A(phi_minus, spec, consts, grid, order)).real
    return 1j if t >= 0 else -1j


def witten_levels(spec: PotentialSpec, consts: PhysicalConstants, grid: Grid, n_max: int,
                  order: int = DEFAULT_ORDER, phase: SusyPhase | None = None,
                  edge_tol: float = 1e-8, check_edges: bool = True) -> LevelSet:
    """Paired eigen-data of both partners up to level n_max.

    Unbroken SUSY yields n = 0..n_max with a zero mode; broken SUSY n = 1..n_max.
    """
    if phase is None:
        spec, phase = normalize_susy(spec, consts, grid)
    elif phase is SusyPhase.UNBROKEN_PLUS_AFTER_FLIP:
        spec = spec.flipped()
    first = 0 if phase.unbroken else 1
    if n_max < max(first, 1) and not (phase.unbroken and n_max == 0):
        raise ValueError("n_max too small for the requested SUSY phase")
    k_minus = n_max + 1 - first
    k_plus = n_max
    hm = solve_spectrum(build_partner(spec, consts, grid, -1, order), k_minus, edge_tol, check_edges)
    hp = (solve_spectrum(build_partner(spec, consts, grid, +1, order), k_plus, edge_tol, check_edges)
          if k_plus > 0 else Spectrum(np.zeros(0), np.zeros((0, grid.n_points))))
    levels = []
    for j in range(k_minus):
        n = j + first
        eps = float(hm.energies[j])
        phim = hm.states[j]
        if n == 0:
            levels.append(EigenPair(0, eps, phim))
            continue
        ip = j - 1 if phase.unbroken else j
        phip = hp.states[ip]
        ph = align_phase(phip, phim, spec, consts, grid, order)
        levels.append(EigenPair(n, eps, phim, phip, ph))
    return LevelSet(spec, phase, grid, order, levels, hm.energies, hp.energies)
