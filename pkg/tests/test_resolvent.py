import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from susydirac.core import Grid, PhysicalConstants, PotentialSpec
from susydirac.errors import MethodUnavailable, NearPole
from susydirac.resolvent import (METHODS, GridDiracResolvent, SpectralParameter, dirac_resolvent,
                                 gaussian_probes, oscillator_greens_closed_form, partner_residual,
                                 partner_resolvent_grid, zeta_map)
from susydirac.special_functions import hermite_state
from susydirac.witten import build_partner, solve_spectrum

# node-aligned sample pairs on the [-12, 12] / 4001 grid (h = 0.006)
H = 0.006
PAIRS = [(a * 50 * H, b * 50 * H) for a, b in
         [(0, 0), (1, -1), (-1, 1), (3, 2), (-4, 5), (2, 2), (6, -3), (0, 7), (-8, -8), (5, 0), (1, 0), (0, 1)]]


@pytest.mark.parametrize("z, expected", [(1.0, 0.0), (-1.0, 0.0), (0.0, -0.5), (math.sqrt(3), 1.0), (2j, -2.5)])
def test_zeta_map(natural, z, expected):
    assert zeta_map(z, natural) == pytest.approx(expected, abs=1e-15)


def test_spectral_parameter(natural):
    par = SpectralParameter.from_z(math.sqrt(5), natural, omega=2.0)
    assert par.eps == pytest.approx(1.0)
    with pytest.raises(ValueError):
        SpectralParameter.from_z(complex(math.inf, 0), natural)
    with pytest.raises(NearPole):
        par.check([math.sqrt(5) + 1e-8], natural)


def test_partner_residual(natural, oscillator, wide_grid):
    op = build_partner(oscillator, natural, wide_grid, -1)
    src = [500, 2000, 3100]
    cols = partner_resolvent_grid(op, -0.37, src)
    assert partner_residual(op, -0.37, cols, src) <= 1e-6


def test_partner_resolvent_large_negative_zeta(natural, oscillator, wide_grid):
    # far below the spectrum the kernel decays like exp(-κ|x - x′|), κ = sqrt(2(V - ζ))
    op = build_partner(oscillator, natural, wide_grid, -1)
    zeta = -200.0
    col = partner_resolvent_grid(op, zeta, [2000])[0]
    kappa = math.sqrt(2 * (op.potential[2000] - zeta))
    assert np.all(np.abs(col.imag) < 1e-12) and np.all(col.real >= 0)
    rate = math.log(col[2050].real / col[2100].real) / (50 * wide_grid.h)
    assert rate == pytest.approx(kappa, rel=1e-2)
    assert col[1950].real == pytest.approx(col[2050].real, rel=1e-3)
    assert abs(col[2500]) < 1e-20


def test_partner_resolvent_matches_eigen_sum(natural, oscillator):
    g = Grid(-8, 8, 801)
    op = build_partner(oscillator, natural, g, -1)
    w, v = np.linalg.eigh(op.sparse().toarray())
    zeta = 0.3 + 0.2j
    src = [300, 400, 555]
    cols = partner_resolvent_grid(op, zeta, src)
    ref = (v / (w - zeta)) @ v[src].T / g.h
    assert np.max(np.abs(cols - ref.T)) < 1e-10


def test_partner_resolvent_near_pole(natural, oscillator, wide_grid):
    op = build_partner(oscillator, natural, wide_grid, -1)
    e1 = solve_spectrum(op, 2).energies[1]
    with pytest.raises(NearPole):
        partner_resolvent_grid(op, complex(e1 + 1e-9), [10])


@pytest.fixture(scope="module")
def three_routes():
    natural = PhysicalConstants()
    spec = PotentialSpec.oscillator(1.0)
    grid = Grid(-12, 12, 4001)
    out = {}
    for z in (0.0, 0.5j, 1.2):
        cf = dirac_resolvent(z, spec, natural, PAIRS, "closed_form_oscillator")
        sp = dirac_resolvent(z, spec, natural, PAIRS, "spectral_truncated", truncation=400)
        gi = GridDiracResolvent(spec, natural, grid, z)
        out[z] = (cf, sp, gi.kernel(PAIRS), gi)
    return out


@pytest.mark.parametrize("z", [0.0, 0.5j, 1.2])
def test_triple_equivalence(three_routes, z):
    cf, sp, gi, _ = three_routes[z]
    assert np.allclose(gi.x2, cf.x2, atol=1e-12) and np.allclose(gi.x1, cf.x1, atol=1e-12)
    assert np.max(np.abs(cf.entries - sp.entries)) <= 1e-5
    assert np.max(np.abs(cf.entries - gi.entries)) <= 1e-5
    assert np.max(np.abs(sp.entries - gi.entries)) <= 1e-5


@pytest.mark.parametrize("z", [0.0, 0.5j, 1.2])
def test_resolvent_identity(three_routes, wide_grid, z):
    gi = three_routes[z][3]
    assert gi.identity_residual(gaussian_probes(wide_grid, [-1.0, 0.0, 0.7])) <= 1e-5


def test_mehler_tail_matters(natural, oscillator):
    raw = dirac_resolvent(0.0, oscillator, natural, [(0.3, 0.3)], "spectral_truncated", tail=False)
    full = dirac_resolvent(0.0, oscillator, natural, [(0.3, 0.3)], "spectral_truncated", tail=True)
    diff = np.max(np.abs(raw.entries - full.entries))
    assert diff > 1e-4
    assert raw.tail_estimate > 1e-4
    assert full.tail_estimate < 0.1


def test_alternate_variant_disagrees(natural):
    x2 = np.array([0.6, -0.3, 1.2])
    x1 = np.array([-0.6, 0.9, 0.0])
    a = oscillator_greens_closed_form(0.5j, x2, x1, natural, 1.0, "derived")
    b = oscillator_greens_closed_form(0.5j, x2, x1, natural, 1.0, "alternate")
    sp = dirac_resolvent(0.5j, PotentialSpec.oscillator(1.0), natural, np.column_stack([x2, x1]),
                         "spectral_truncated").entries
    assert np.max(np.abs(a - sp)) < 1e-8
    assert np.max(np.abs(b - sp)) > 0.1


@pytest.mark.parametrize("z", [0.0, 0.5j, 1.2])
def test_transpose_symmetry(natural, z):
    # transposition flips the signs of p and σ₂W, so the diagonal entries are
    # symmetric and the off-diagonal pair is antisymmetric under x″ <-> x′
    x2 = np.array([0.4, -1.1, 2.0])
    x1 = np.array([-0.7, 0.3, 0.5])
    a = oscillator_greens_closed_form(z, x2, x1, natural, 1.0)
    b = oscillator_greens_closed_form(z, x1, x2, natural, 1.0)
    assert np.allclose(a[..., 0, 0], b[..., 0, 0], atol=1e-12)
    assert np.allclose(a[..., 1, 1], b[..., 1, 1], atol=1e-12)
    assert np.allclose(a[..., 0, 1], -b[..., 1, 0], atol=1e-12)


def test_real_kernel_in_gap(natural, oscillator):
    # for real z in the gap the diagonal entries are real and the off-diagonal imaginary
    k = dirac_resolvent(0.3, oscillator, natural, PAIRS[:6], "closed_form_oscillator")
    assert np.max(np.abs(k.entry(0, 0).imag)) < 1e-14
    assert np.max(np.abs(k.entry(1, 1).imag)) < 1e-14
    assert np.max(np.abs(k.entry(0, 1).real)) < 1e-14


def test_offdiagonal_jump(natural):
    # the off-diagonal kernel jumps by ∓i/ħc across the diagonal
    eps = 1e-9
    up = oscillator_greens_closed_form(0.2, np.array([0.5 + eps]), np.array([0.5]), natural, 1.0)[0]
    dn = oscillator_greens_closed_form(0.2, np.array([0.5 - eps]), np.array([0.5]), natural, 1.0)[0]
    mid = oscillator_greens_closed_form(0.2, np.array([0.5]), np.array([0.5]), natural, 1.0)[0]
    assert abs((up[0, 1] - dn[0, 1]) - 1j) < 1e-6
    assert abs((up[1, 0] - dn[1, 0]) - 1j) < 1e-6
    assert abs(mid[0, 1] - 0.5 * (up[0, 1] + dn[0, 1])) < 1e-6


@pytest.mark.parametrize("method", ["closed_form_oscillator", "spectral_truncated"])
def test_zero_mode_pole(natural, oscillator, method):
    pts = [(0.0, 0.0), (0.3, -0.6), (1.0, 1.0)]
    for eta in (1e-3, 1e-4, 1e-5):
        k = dirac_resolvent(-1 + eta, oscillator, natural, pts, method)
        ref = -hermite_state(0, k.x2, 1, 1, 1) * hermite_state(0, k.x1, 1, 1, 1)
        assert np.max(np.abs(eta * k.entry(1, 1) - ref)) <= 2 * eta
        # the upper entry has no pole at -mc²
        assert np.max(np.abs(eta * k.entry(0, 0))) < 2 * eta


def test_removable_point_plus_mc2(natural, oscillator):
    k = dirac_resolvent(1.0, oscillator, natural, [(0.0, 0.0), (0.5, -0.2)], "closed_form_oscillator")
    ref = -hermite_state(0, k.x2, 1, 1, 1) * hermite_state(0, k.x1, 1, 1, 1) / 2
    assert np.allclose(k.entry(1, 1), ref, atol=1e-12)


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("z", [-1.0, math.sqrt(3), -math.sqrt(5) + 1e-8])
def test_near_pole(natural, oscillator, wide_grid, method, z):
    with pytest.raises(NearPole):
        dirac_resolvent(z, oscillator, natural, [(0.0, 0.1)], method, grid=wide_grid, truncation=20)


def test_method_unavailable(natural):
    quartic = PotentialSpec.power(3, signed=True)
    with pytest.raises(MethodUnavailable):
        dirac_resolvent(0.0, quartic, natural, [(0.0, 0.1)], "closed_form_oscillator")
    with pytest.raises(MethodUnavailable):
        dirac_resolvent(0.0, PotentialSpec.oscillator(1.0, S=[0, 1]), natural, [(0.0, 0.1)])
    with pytest.raises(MethodUnavailable):
        dirac_resolvent(0.3 + 0.2j, PotentialSpec.oscillator(1.0), natural, [(0.0, 0.1)],
                        "closed_form_oscillator")
    with pytest.raises(ValueError):
        dirac_resolvent(0.0, quartic, natural, [(0.0, 0.1)], "nonsense")


def test_zero_mode_term_follows_classification(natural):
    g = Grid(-7, 7, 1401)
    unbroken = dirac_resolvent(0.1, PotentialSpec.power(1, signed=True, strength=2.0), natural,
                               [(0.0, 0.0)], "spectral_truncated", grid=g, truncation=30)
    broken = dirac_resolvent(0.1, PotentialSpec.power(2, offset=1.0), natural,
                             [(0.0, 0.0)], "spectral_truncated", grid=g, truncation=30)
    assert unbroken.extra["zero_mode"] is True
    assert broken.extra["zero_mode"] is False


def test_grid_spectral_converges_for_nonoscillator(natural):
    spec = PotentialSpec.power(3, signed=True)
    g = Grid(-6, 6, 1201)
    pts = [(0.0, 0.0), (0.4, -0.3)]
    ref = dirac_resolvent(0.3j, spec, natural, pts, "grid_inverse", grid=g).entries
    errs = [np.max(np.abs(dirac_resolvent(0.3j, spec, natural, pts, "spectral_truncated",
                                          grid=g, truncation=n).entries - ref))
            for n in (25, 100)]
    assert errs[1] < errs[0]


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-0.9, 0.9))
def test_closed_form_matches_series(natural, a, b, z):
    x2, x1 = np.array([a]), np.array([b])
    cf = oscillator_greens_closed_form(z, x2, x1, natural, 1.0)
    sp = dirac_resolvent(z, PotentialSpec.oscillator(1.0), natural, [(a, b)], "spectral_truncated",
                         truncation=60).entries
    assert np.max(np.abs(cf - sp)) < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(-2, 2), st.floats(-2, 2))
def test_units_scaling(omega, a, b):
    # c = 2, hbar = 0.5, m = 1.5: the closed form and the eigen-expansion share conventions
    consts = PhysicalConstants(m=1.5, c=2.0, hbar=0.5)
    z = 0.37 * consts.mc2
    cf = oscillator_greens_closed_form(z, np.array([a]), np.array([b]), consts, omega)
    sp = dirac_resolvent(z, PotentialSpec.oscillator(omega), consts, [(a, b)], "spectral_truncated",
                         truncation=60).entries
    assert np.max(np.abs(cf - sp)) < 1e-7 * max(1.0, np.max(np.abs(cf)))
