import numpy as np
import pytest

from optomech_lc.errors import DegenerateState, SingularBracket
from optomech_lc.semiclassical import (amplitude_distribution, dts_fano, find_limit_cycles,
                                       onresonance_fano, phase_diffusion, rate_arrays)
from optomech_lc.semiclassical.limit_cycle import _derivative

from conftest import FIG2, FIG3


def test_red_detuning_has_no_cycle():
    assert find_limit_cycles(FIG3.replace(delta=-5.0)) == []


def test_fig2_single_stable_cycle_and_minimum_fano():
    fanos = []
    for delta in np.arange(4.5, 5.51, 0.1):
        p = FIG2.replace(delta=delta)
        stable = [c for c in find_limit_cycles(p) if c.stable]
        assert len(stable) == 1
        fanos.append(amplitude_distribution(p).fano)
    assert 0.85 <= min(fanos) <= 0.95


def test_roots_and_stability():
    p = FIG2
    for lc in find_limit_cycles(p):
        total = p.gamma_m + lc.gamma_ba
        assert abs(total) < 1e-10 * p.gamma_m
        eps = 1e-3
        left, right = p.gamma_m + rate_arrays(np.array([lc.b0 - eps, lc.b0 + eps]), p)["gamma_ba"]
        # a stable cycle is anti-damped below and damped above
        assert (left < 0 < right) == lc.stable
        assert lc.stable == (lc.gamma_l > 0)


def test_cycle_fields():
    lc = [c for c in find_limit_cycles(FIG3) if c.stable][0]
    assert lc.sigma2 > 0
    assert lc.fano == 4 * lc.sigma2
    assert lc.lambda_0 == lc.gamma_l / 2
    assert lc.lambda_m == lc.d_phi / 2
    assert lc.n_avg == pytest.approx(lc.b0 ** 2 - 0.5 + abs(lc.beta_c) ** 2)
    assert lc.d_phi == pytest.approx(lc.d_phi_direct + lc.d_phi_spring)


def test_derivative_against_wide_stencil():
    b0 = 7.0
    dg, dw = _derivative(FIG3, __import__("optomech_lc.semiclassical.limit_cycle",
                                          fromlist=["_root_opts"])._root_opts(
        __import__("optomech_lc.semiclassical", fromlist=["SemiclassicalOptions"])
        .SemiclassicalOptions()), b0)
    xs = b0 + np.array([-2e-2, -1e-2, 1e-2, 2e-2])
    g = rate_arrays(xs, FIG3)["gamma_ba"]
    five_point = (g[0] - 8 * g[1] + 8 * g[2] - g[3]) / (12 * 1e-2)
    assert dg == pytest.approx(five_point, rel=1e-5)


def test_on_resonance_bracket_small_z():
    p = FIG3.replace(g=0.01, omega_m=5.0)
    z = 0.05
    b0 = z * p.omega_m / p.g
    f = onresonance_fano(b0, p)
    prefactor = 1 + p.g ** 2 * b0 ** 2 / (4 * p.omega_m ** 2)
    assert f / prefactor == pytest.approx(4 / z ** 2, rel=0.01)


def test_on_resonance_scales_with_occupation():
    p = FIG3.replace(g=1e-3)
    b0 = 0.05 * p.omega_m / p.g
    f0 = onresonance_fano(b0, p)
    f5 = onresonance_fano(b0, p.replace(nbar=5.0))
    shift = (p.g * b0 / p.omega_m) ** 2 / 4
    assert f5 / f0 == pytest.approx((6.0 + shift) / (1.0 + shift), rel=1e-12)
    assert f5 / f0 == pytest.approx(6.0, rel=1e-3)


def test_on_resonance_close_to_full_distribution_at_centre():
    lc = [c for c in find_limit_cycles(FIG2) if c.stable][0]
    assert onresonance_fano(lc.b0, FIG2) == pytest.approx(amplitude_distribution(FIG2).fano,
                                                          rel=0.05)


def test_singular_bracket():
    from scipy.optimize import brentq
    from scipy.special import jv
    z0 = brentq(lambda z: jv(2, z), 4.0, 6.0)  # J_1 - z J_1' = z J_2
    p = FIG3.replace(g=1.0, omega_m=1.0)
    with pytest.raises(SingularBracket):
        onresonance_fano(z0, p)


@pytest.mark.parametrize("b0,nbar,expected", [
    (3.0, 0.0, 1.0), (0.2, 0.0, 1.0), (0.0, 2.0, 3.0), (10.0, 1.0, 302 / 101)])
def test_displaced_thermal_fano(b0, nbar, expected):
    assert dts_fano(b0, nbar) == pytest.approx(expected, rel=1e-15)


def test_displaced_thermal_degenerate():
    with pytest.raises(DegenerateState):
        dts_fano(0.0, 0.0)


def test_phase_diffusion_decomposition():
    centre = [c for c in find_limit_cycles(FIG3) if c.stable][0]
    assert centre.d_phi_spring < 0.01 * centre.d_phi_direct
    for delta in (4.0, 5.75):
        side = [c for c in find_limit_cycles(FIG3.replace(delta=delta)) if c.stable][0]
        assert side.d_phi_spring > side.d_phi_direct


def test_phase_diffusion_scales_as_inverse_square_amplitude():
    from dataclasses import replace
    lc = [c for c in find_limit_cycles(FIG3) if c.stable][0]
    doubled = replace(lc, b0=2 * lc.b0)
    assert phase_diffusion(doubled, FIG3).total == pytest.approx(
        phase_diffusion(lc, FIG3).total / 4, rel=1e-14)
