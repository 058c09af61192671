"""Relativistic eigen-data of H_D = [[mc², A], [A†, -mc²]] built from the Witten model."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .core import DEFAULT_ORDER, Grid, PhysicalConstants, PotentialSpec
from .errors import IncompleteBasis, InvalidLevel, MissingPartner, NegativeEpsilon
from .special_functions import hermite_states
from .witten import EigenPair, LevelSet, apply_A, apply_A_dagger


@dataclass(frozen=True)
class SusyConditionReport:
    passed: bool
    max_abs_V: float
    S_spread: float
    S_mean: float
    effective_rest_energy: float
    tolerance: float
    messages: tuple = ()


def check_susy_condition(spec: PotentialSpec, consts: PhysicalConstants, grid: Grid,
                         tol: float = 1e-10) -> SusyConditionReport:
    """V must vanish and S must be constant; a constant S shifts the rest energy."""
    x = grid.x
    v = spec.electrostatic(x)
    s = spec.scalar(x)
    max_v = float(np.max(np.abs(v)))
    spread = float(np.max(np.abs(s - s.mean())))
    msgs = []
    if max_v > tol:
        msgs.append(f"electrostatic potential does not vanish (max |V| = {max_v:.3e})")
    if spread > tol:
        msgs.append(f"scalar potential is not constant (spread {spread:.3e})")
    if spread <= tol and abs(s.mean()) > tol:
        msgs.append(f"constant S = {s.mean():.6g} absorbed into the rest energy")
    return SusyConditionReport(max_v <= tol and spread <= tol, max_v, spread, float(s.mean()),
                               consts.mc2 + float(s.mean()), tol, tuple(msgs))


class RelativisticLevel(NamedTuple):
    n: int
    E_plus: float | None
    E_minus: float


def relativistic_energies(eps: Sequence[float], consts: PhysicalConstants, unbroken: bool,
                          tol: float = 1e-8) -> list[RelativisticLevel]:
    """E±ₙ = ±√(2mc²εₙ + m²c⁴). With unbroken SUSY the first entry is the zero mode."""
    eps = np.asarray(eps, dtype=float)
    if np.any(np.diff(eps) < 0):
        raise ValueError("epsilon values must be sorted")
    mc2 = consts.mc2
    out = []
    start = 0
    if unbroken:
        if len(eps) == 0:
            raise ValueError("unbroken SUSY needs the zero-mode entry")
        out.append(RelativisticLevel(0, None, -mc2))
        start = 1
    for j, e in enumerate(eps[start:], start=start):
        if e < -tol:
            raise NegativeEpsilon(f"epsilon_{j} = {e} < 0")
        if e <= tol and not unbroken:
            raise NegativeEpsilon(f"broken SUSY needs strictly positive epsilon, got {e}")
        n = j if unbroken else j + 1
        E = math.sqrt(2 * mc2 * max(e, 0.0) + mc2 * mc2)
        out.append(RelativisticLevel(n, E, -E))
    return out


@dataclass(frozen=True, eq=False)
class DiracEigenpair:
    n: int
    branch: str  # "+" or "-"
    E: float
    upper: np.ndarray
    lower: np.ndarray

    @property
    def psi(self) -> np.ndarray:
        return np.stack([self.upper, self.lower])

    def norm(self, grid: Grid) -> float:
        return math.sqrt(grid.norm(self.upper) ** 2 + grid.norm(self.lower) ** 2)


def spinor_coefficients(E: float, consts: PhysicalConstants) -> tuple[float, float]:
    """(√(1+mc²/E)/√2, √(1−mc²/E)/√2) for E > 0."""
    r = consts.mc2 / E
    return math.sqrt((1 + r) / 2), math.sqrt((1 - r) / 2)


def _pair_spinors(lv: EigenPair, consts: PhysicalConstants):
    if lv.phi_plus is None:
        raise MissingPartner(f"level {lv.n} has no H+ partner state")
    E = math.sqrt(2 * consts.mc2 * lv.eps + consts.mc2**2)
    a, b = spinor_coefficients(E, consts)
    fp = lv.phi_plus.astype(complex)
    fm = lv.susy_phi_minus.astype(complex)
    return (DiracEigenpair(lv.n, "+", E, a * fp, b * fm),
            DiracEigenpair(lv.n, "-", -E, -b * fp, a * fm))


def dirac_eigenspinors(levels: LevelSet | Sequence[EigenPair], consts: PhysicalConstants,
                       unbroken: bool | None = None) -> list[DiracEigenpair]:
    """Eigenspinors ψₙ± for n ≥ 1 and the zero mode ψ₀⁻ = (0, φ₀⁻)."""
    if isinstance(levels, LevelSet):
        unbroken = levels.unbroken if unbroken is None else unbroken
        levels = levels.levels
    if unbroken is None:
        unbroken = any(lv.n == 0 for lv in levels)
    out = []
    for lv in levels:
        if lv.n == 0:
            if not unbroken:
                raise ValueError("level 0 only exists with unbroken SUSY")
            z = np.zeros_like(lv.phi_minus, dtype=complex)
            out.append(DiracEigenpair(0, "-", -consts.mc2, z, lv.susy_phi_minus.astype(complex)))
            continue
        out.extend(_pair_spinors(lv, consts))
    return out


def apply_dirac(upper: np.ndarray, lower: np.ndarray, spec: PotentialSpec,
                consts: PhysicalConstants, grid: Grid, order: int = DEFAULT_ORDER):
    mc2 = consts.mc2
    return (mc2 * upper + apply_A(lower, spec, consts, grid, order),
            apply_A_dagger(upper, spec, consts, grid, order) - mc2 * lower)


def residual_check(pair: DiracEigenpair, spec: PotentialSpec, consts: PhysicalConstants,
                   grid: Grid, order: int = DEFAULT_ORDER) -> float:
    """‖H_D ψ − E ψ‖ in the grid norm."""
    u, l = apply_dirac(pair.upper, pair.lower, spec, consts, grid, order)
    return math.sqrt(grid.norm(u - pair.E * pair.upper) ** 2 + grid.norm(l - pair.E * pair.lower) ** 2)


def gram_matrix(pairs: Sequence[DiracEigenpair], grid: Grid) -> np.ndarray:
    psi = np.array([np.concatenate([p.upper, p.lower]) for p in pairs])
    return grid.h * psi.conj() @ psi.T


# ---------------------------------------------------------------------------
# SUSY charge Q₁ = [[0, A], [A†, 0]]


@dataclass(frozen=True, eq=False)
class SusyChargeData:
    chi_plus: dict = field(default_factory=dict)    # n -> (2, N) spinor
    chi_minus: dict = field(default_factory=dict)
    q1_values: dict = field(default_factory=dict)   # n -> √(2mc²εₙ)
    chi_zero: np.ndarray | None = None


def q1_eigenstates(levels: LevelSet | Sequence[EigenPair], consts: PhysicalConstants) -> SusyChargeData:
    """χₙ± = (φₙ⁺, ±φₙ⁻)/√2 and the zero mode χ₀⁻ = (0, φ₀⁻)."""
    if isinstance(levels, LevelSet):
        levels = levels.levels
    data = SusyChargeData()
    zero = None
    for lv in levels:
        fm = lv.susy_phi_minus.astype(complex)
        if lv.n == 0:
            zero = np.stack([np.zeros_like(fm), fm])
            continue
        if lv.phi_plus is None:
            raise MissingPartner(f"level {lv.n} has no H+ partner state")
        fp = lv.phi_plus.astype(complex)
        data.chi_plus[lv.n] = np.stack([fp, fm]) / math.sqrt(2)
        data.chi_minus[lv.n] = np.stack([fp, -fm]) / math.sqrt(2)
        data.q1_values[lv.n] = math.sqrt(2 * consts.mc2 * lv.eps)
    return SusyChargeData(data.chi_plus, data.chi_minus, data.q1_values, zero)


def apply_q1(chi: np.ndarray, spec, consts, grid, order: int = DEFAULT_ORDER) -> np.ndarray:
    return np.stack([apply_A(chi[1], spec, consts, grid, order),
                     apply_A_dagger(chi[0], spec, consts, grid, order)])


def apply_sign_q1(chi: np.ndarray, levels: LevelSet) -> np.ndarray:
    """sgn Q₁ on the truncated eigenbasis.

    Uses (AA†)^{-1/2} A φₙ⁻ = φₙ⁺ and (A†A)^{-1/2} A† φₙ⁺ = φₙ⁻, so the
    off-diagonal blocks act as partner swaps; the kernel of A is mapped to 0.
    """
    grid = levels.grid
    up = np.zeros(grid.n_points, dtype=complex)
    lo = np.zeros(grid.n_points, dtype=complex)
    for lv in levels.levels:
        if lv.n == 0:
            continue
        fm = lv.susy_phi_minus
        up += lv.phi_plus * grid.inner(fm, chi[1])
        lo += fm * grid.inner(lv.phi_plus, chi[0])
    return np.stack([up, lo])


# ---------------------------------------------------------------------------
# Foldy-Wouthuysen block diagonalization on a truncated basis


@dataclass(frozen=True, eq=False)
class FWReport:
    offdiag_max: float
    diag_error: float
    energies_upper: np.ndarray
    energies_lower: np.ndarray
    target_upper: np.ndarray
    target_lower: np.ndarray
    U: np.ndarray
    H_fw: np.ndarray
    zero_mode_identity_error: float | None


def fw_blockdiag_check(levels: LevelSet, consts: PhysicalConstants, n_max: int) -> FWReport:
    """Assemble U spectrally and return the block structure of U H_D U†.

    Basis: upper states (φₙ⁺, 0) for n = 1..n_max followed by lower states
    (0, φₙ⁻) for n = 0 (unbroken only) .. n_max. H_D is evaluated on the grid
    with finite-difference A, so the check is independent of the spectral
    relations that define U.
    """
    grid, spec, order = levels.grid, levels.spec, levels.order
    have = {lv.n for lv in levels.levels}
    first = 0 if levels.unbroken else 1
    need = set(range(first, n_max + 1))
    if not need <= have or n_max < 1:
        raise IncompleteBasis(f"levels {sorted(need - have)} missing (n_max={n_max})")
    lv = {n: levels.level(n) for n in need}
    ns_up = list(range(1, n_max + 1))
    ns_lo = list(range(first, n_max + 1))
    up = np.array([lv[n].phi_plus.astype(complex) for n in ns_up])
    lo = np.array([lv[n].susy_phi_minus.astype(complex) for n in ns_lo])
    mc2 = consts.mc2
    h = grid.h
    a_lo = np.array([apply_A(f, spec, consts, grid, order) for f in lo])
    M11 = mc2 * h * up.conj() @ up.T
    M22 = -mc2 * h * lo.conj() @ lo.T
    M12 = h * up.conj() @ a_lo.T
    M = np.block([[M11, M12], [M12.conj().T, M22]])
    nu, nl = len(ns_up), len(ns_lo)
    U = np.zeros((nu + nl, nu + nl))
    E = {}
    for i, n in enumerate(ns_up):
        E[n] = math.sqrt(2 * mc2 * lv[n].eps + mc2 * mc2)
        kappa = mc2 / E[n]
        c, s = math.sqrt((1 + kappa) / 2), math.sqrt((1 - kappa) / 2)
        j = nu + ns_lo.index(n)
        U[i, i] = c
        U[i, j] = s
        U[j, i] = -s
        U[j, j] = c
    zero_err = None
    if first == 0:
        j0 = nu + ns_lo.index(0)
        U[j0, j0] = 1.0
        zero_err = float(np.max(np.abs(U[j0] - np.eye(nu + nl)[j0])))
    H = U @ M @ U.T
    off = float(np.max(np.abs(H[:nu, nu:])))
    du, dl = np.real(np.diag(H)[:nu]), np.real(np.diag(H)[nu:])
    tu = np.array([E[n] for n in ns_up])
    tl = np.array([-mc2 if n == 0 else -E[n] for n in ns_lo])
    diag_err = float(max(np.max(np.abs(du - tu) / np.abs(tu)), np.max(np.abs(dl - tl) / np.abs(tl))))
    return FWReport(off, diag_err, du, dl, tu, tl, U, H, zero_err)


# ---------------------------------------------------------------------------
# Dirac oscillator W = m c ω x


def oscillator_energy(n: int, branch: str, consts: PhysicalConstants, omega: float) -> float:
    if branch == "+":
        if n < 1:
            raise InvalidLevel("the + branch starts at n = 1")
        return consts.mc2 * math.sqrt(1 + 2 * n * consts.hbar * omega / consts.mc2)
    if branch == "-":
        if n < 0:
            raise InvalidLevel("n must be >= 0")
        return -consts.mc2 * math.sqrt(1 + 2 * n * consts.hbar * omega / consts.mc2)
    raise ValueError("branch must be '+' or '-'")


def oscillator_exact(n: int, branch: str, consts: PhysicalConstants, omega: float,
                     grid: Grid) -> DiracEigenpair:
    """Closed-form Dirac oscillator eigenspinor sampled on the grid.

    Partner states are φₙ⁺ = |n−1⟩ and φₙ⁻ = i|n⟩; the factor i is the SUSY
    phase that makes A φₙ⁻ = √(2mc²εₙ) φₙ⁺ exact. The zero mode is (0, |0⟩).
    """
    if int(n) != n or n < 0:
        raise InvalidLevel("n must be a non-negative integer")
    E = oscillator_energy(n, branch, consts, omega)
    ket = hermite_states(n, grid.x, consts.m, omega, consts.hbar)
    if n == 0:
        return DiracEigenpair(0, "-", E, np.zeros(grid.n_points, dtype=complex), ket[0].astype(complex))
    a, b = spinor_coefficients(abs(E), consts)
    fp, fm = ket[n - 1].astype(complex), 1j * ket[n]
    if branch == "+":
        return DiracEigenpair(n, "+", E, a * fp, b * fm)
    return DiracEigenpair(n, "-", E, -b * fp, a * fm)


def massless_scan(masses: Sequence[float], two_m_omega: float, n_max: int, c: float = 1.0,
                  hbar: float = 1.0) -> np.ndarray:
    """Oscillator energies E⁺ₙ for decreasing m at fixed 2mω.

    As m → 0 they approach c√(n ħ·2mω), the massless spectrum. Rows follow
    ``masses``, columns n = 1..n_max.
    """
    out = np.empty((len(masses), n_max))
    for i, m in enumerate(masses):
        consts = PhysicalConstants(m=m, c=c, hbar=hbar)
        omega = two_m_omega / (2 * m)
        out[i] = [oscillator_energy(n, "+", consts, omega) for n in range(1, n_max + 1)]
    return out
