import math
import warnings

import numpy as np
import pytest

from susydirac.core import Grid, PhysicalConstants, PotentialSpec
from susydirac.errors import BoxTooSmall, ContinuumThresholdWarning, NotNormalizable
from susydirac.special_functions import hermite_states
from susydirac.witten import (SusyPhase, apply_A, build_partner, classify_susy, ground_state_unbroken,
                              solve_spectrum, witten_levels)


def test_oscillator_partner_spectra(natural, oscillator, wide_grid):
    em = solve_spectrum(build_partner(oscillator, natural, wide_grid, -1), 5).energies
    ep = solve_spectrum(build_partner(oscillator, natural, wide_grid, +1), 4).energies
    assert np.allclose(em, [0, 1, 2, 3, 4], atol=1e-6)
    assert np.allclose(ep, [1, 2, 3, 4], atol=1e-6)


def test_minus_partner_is_shifted_oscillator(natural, oscillator, wide_grid):
    op = build_partner(oscillator, natural, wide_grid, -1)
    x = wide_grid.x
    assert np.allclose(op.potential, 0.5 * x**2 - 0.5, atol=1e-12)


def test_free_operator_for_zero_phi(natural):
    g = Grid(-1, 1, 201)
    op = build_partner(PotentialSpec.custom(lambda t: 0 * t, lambda t: 0 * t), natural, g, -1, order=2)
    assert np.all(op.potential == 0)
    # lowest Dirichlet level of -f''/2 on a box of length L = 2 + 2h
    L = 2 + 2 * g.h
    assert solve_spectrum(op, 1, check_edges=False).energies[0] == pytest.approx(0.5 * (math.pi / L) ** 2, rel=1e-4)


def test_signed_quadratic_has_zero_mode(natural, quartic_grid):
    spec = PotentialSpec.power(2, signed=True)
    e = solve_spectrum(build_partner(spec, natural, quartic_grid, -1), 1).energies[0]
    assert abs(e) < 1e-5


def test_broken_partners_isospectral(natural, quartic_grid):
    spec = PotentialSpec.power(2)
    em = solve_spectrum(build_partner(spec, natural, quartic_grid, -1), 2).energies
    ep = solve_spectrum(build_partner(spec, natural, quartic_grid, +1), 2).energies
    assert np.allclose(em, ep, atol=1e-6)
    assert em[0] > 0.1


def test_eigenstates_normalized_and_ordered(oscillator_levels, wide_grid):
    for lv in oscillator_levels.levels:
        assert wide_grid.norm(lv.phi_minus) == pytest.approx(1, abs=1e-8)
        if lv.phi_plus is not None:
            assert wide_grid.norm(lv.phi_plus) == pytest.approx(1, abs=1e-8)
    assert np.all(np.diff(oscillator_levels.eps_minus) > 0)
    assert oscillator_levels.eps_minus[0] >= -1e-8
    assert oscillator_levels.isospectral_mismatch < 1e-6


def test_zero_mode_annihilated(natural, oscillator, wide_grid, oscillator_levels):
    f = oscillator_levels.level(0).phi_minus
    assert wide_grid.norm(apply_A(f, oscillator, natural, wide_grid)) / wide_grid.norm(f) < 1e-6
    g0 = ground_state_unbroken(oscillator, natural, wide_grid)
    ref = hermite_states(0, wide_grid.x, 1, 1, 1)[0]
    assert np.max(np.abs(g0 - ref)) < 1e-8


@pytest.mark.parametrize("n", range(1, 7))
def test_susy_transformation(natural, oscillator, wide_grid, oscillator_levels, n):
    lv = oscillator_levels.level(n)
    af = apply_A(lv.susy_phi_minus, oscillator, natural, wide_grid)
    assert wide_grid.norm(af - math.sqrt(2 * natural.mc2 * lv.eps) * lv.phi_plus) <= 1e-4
    assert wide_grid.norm(af) ** 2 == pytest.approx(2 * lv.eps, rel=1e-5)


def test_apply_A_free():
    consts = PhysicalConstants(hbar=0.7, c=1.3)
    g = Grid(-8, 8, 2001)
    f = np.exp(-g.x**2) * np.exp(2j * g.x)
    zero = PotentialSpec.custom(lambda t: 0 * t, lambda t: 0 * t)
    ref = -1j * 0.7 * 1.3 * (-2 * g.x + 2j) * f
    assert np.max(np.abs(apply_A(f, zero, consts, g, 8) - ref)) < 1e-8


def test_zero_mode_errors(natural):
    g = Grid(-10, 10, 2001)
    const = PotentialSpec.custom(lambda t: 1 + 0 * t, lambda t: 0 * t)
    with pytest.raises(NotNormalizable):
        ground_state_unbroken(const, natural, g)
    quartic = ground_state_unbroken(PotentialSpec.power(3, signed=True), natural, g)
    i = np.argmax(quartic)
    assert g.x[i] == pytest.approx(0, abs=g.h)
    # exp(-√2 x⁴/4): the log profile is quartic
    inner = np.abs(g.x) < 1.2
    logp = np.log(quartic[inner] / quartic[i])
    assert np.allclose(logp, -math.sqrt(2) * g.x[inner] ** 4 / 4, atol=1e-6)


@pytest.mark.parametrize("spec, expected", [
    (PotentialSpec.power(1, signed=True), SusyPhase.UNBROKEN_MINUS),
    (PotentialSpec.power(2, offset=1.0), SusyPhase.BROKEN),
    (PotentialSpec.power(1, signed=True, strength=-1.0), SusyPhase.UNBROKEN_PLUS_AFTER_FLIP),
    (PotentialSpec.power(2), SusyPhase.BROKEN),
    (PotentialSpec.power(3, signed=True), SusyPhase.UNBROKEN_MINUS),
    (PotentialSpec.custom(lambda t: 2 + 0 * t, lambda t: 0 * t), SusyPhase.BROKEN),
])
def test_classification(natural, spec, expected):
    assert classify_susy(spec, natural, Grid(-8, 8, 1601)) is expected


def test_flip_moves_zero_mode(natural):
    g = Grid(-10, 10, 2001)
    levels = witten_levels(PotentialSpec.power(1, signed=True, strength=-1.0), natural, g, 2)
    assert levels.unbroken and levels.spec.sign == -1
    assert abs(levels.level(0).eps) < 1e-6


def test_box_too_small(natural, oscillator):
    with pytest.raises(BoxTooSmall):
        witten_levels(oscillator, natural, Grid(-7, 7, 1401), 19)


def test_bounded_phi_warns_above_threshold(natural):
    spec = PotentialSpec.custom(lambda t: math.sqrt(2) * np.tanh(t), lambda t: math.sqrt(2) / np.cosh(t) ** 2)
    with pytest.warns(ContinuumThresholdWarning):
        solve_spectrum(build_partner(spec, natural, Grid(-60, 60, 6001), -1), 4)
