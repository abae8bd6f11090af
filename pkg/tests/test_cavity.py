import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optomech_lc.errors import NoConvergence
from optomech_lc.semiclassical import (SemiclassicalOptions, backaction_rates, cavity_response,
                                       rate_arrays)
from optomech_lc.semiclassical.cavity import SMALL_B, _Sidebands, _rates_from_bands, n_max_for

from conftest import FIG1A, FIG3


def test_uncoupled_cavity():
    p = FIG3.replace(g=0.0, delta=2.0)
    r = cavity_response(3.0, p)
    assert r.beta_c == 0
    assert r.delta_tilde == 2.0
    zero = list(r.orders).index(0)
    assert r.alpha_n[zero] == pytest.approx(-1j * p.omega_drive / (0.5 - 2j), rel=1e-14)
    others = np.delete(r.alpha_n, zero)
    assert np.all(others == 0)


def test_static_shift_at_zero_amplitude():
    p = FIG3.replace(delta=1.0)
    r = cavity_response(0.0, p)
    assert np.count_nonzero(r.alpha_n) == 1
    # leading order in gamma_m / omega_m, with the single band's photon number
    assert r.beta_c.real == pytest.approx(p.g * r.photon_number / (2 * p.omega_m), rel=1e-9)
    # and close to the bare photon number: the detuning shift is small
    assert r.beta_c.real == pytest.approx(p.g * abs(p.alpha_free) ** 2 / (2 * p.omega_m),
                                          rel=1e-3)


def test_sideband_sum_converged_and_peaked_at_resonance():
    p = FIG3
    r = cavity_response(3.0, p)
    assert n_max_for(r.z) == 25
    weights = np.abs(r.alpha_n) ** 2
    tail = weights[np.abs(r.orders) == r.orders.max()].sum()
    assert tail < 1e-10 * weights.sum()
    peak = r.orders[np.argmax(weights)]
    assert peak == round(r.delta_tilde / p.omega_m)


def test_sideband_bound():
    p = FIG3
    r = cavity_response(6.0, p)
    h = p.gamma_c / 2 + 1j * (r.orders * p.omega_m - r.delta_tilde)
    assert np.all(np.abs(r.alpha_n) <= p.omega_drive / np.abs(h) * (1 + 1e-12))


def test_self_consistency_of_detuning():
    p = FIG3.replace(g=3.0, omega_drive=0.3)
    r = cavity_response(4.0, p)
    recomputed = 0.5j * p.g * r.photon_number / (1j * p.omega_m + p.gamma_m / 2)
    assert abs(recomputed - r.beta_c) < 1e-10
    assert r.delta_tilde == pytest.approx(p.delta + p.g * recomputed.real, abs=1e-10)


def test_phase_only_rotates_sidebands():
    p = FIG3
    a = cavity_response(4.0, p, phi=0.0)
    b = cavity_response(4.0, p, phi=1.1)
    assert np.allclose(np.abs(a.alpha_n), np.abs(b.alpha_n), rtol=1e-14, atol=0)
    assert a.beta_c == b.beta_c


def two_term_limit(p, delta_tilde):
    h = lambda n: p.gamma_c / 2 + 1j * (delta_tilde + n * p.omega_m)
    value = (-1j * p.g ** 2 * p.omega_drive ** 2 / (4 * p.omega_m)) * (
        1 / (h(0) * np.conj(h(1))) - 1 / (h(-1) * np.conj(h(0))))
    return 2 * value.real, value.imag


@pytest.mark.parametrize("sign", [1, -1])
def test_small_amplitude_back_action(sign):
    p = FIG3.replace(delta=sign * FIG3.omega_m)
    for b in (0.0, 1e-9, 1e-6):
        r = cavity_response(b, p)
        ba = backaction_rates(b, r, p)
        gamma, shift = two_term_limit(p, r.delta_tilde)
        assert ba.gamma_ba == pytest.approx(gamma, rel=1e-6)
        assert ba.delta_omega == pytest.approx(shift, rel=1e-6)
        assert np.sign(ba.gamma_ba) == -sign  # blue amplifies, red cools


def test_switch_to_small_amplitude_limit_is_continuous():
    p = FIG3
    below = rate_arrays(np.array([0.999 * SMALL_B]), p)["gamma_ba"][0]
    above = rate_arrays(np.array([1.001 * SMALL_B]), p)["gamma_ba"][0]
    assert below == pytest.approx(above, rel=1e-6)


def test_red_blue_antisymmetry_at_small_amplitude():
    p = FIG3.replace(gamma_m=1e-12, g=1e-3)
    blue = rate_arrays(np.array([0.0]), p.replace(delta=4.0))["gamma_ba"][0]
    red = rate_arrays(np.array([0.0]), p.replace(delta=-4.0))["gamma_ba"][0]
    assert blue == pytest.approx(-red, rel=1e-6)


def test_diffusion_identity_at_zero_amplitude():
    p = FIG3.replace(delta=4.3)
    r = rate_arrays(np.array([0.0]), p)
    h = lambda n: p.gamma_c / 2 + 1j * (r["delta_tilde"][0] + n * p.omega_m)
    expected = (p.gamma_c * p.g ** 2 * p.omega_drive ** 2 / 8) / abs(h(0)) ** 2 * (
        1 / abs(h(1)) ** 2 + 1 / abs(h(-1)) ** 2)
    assert r["d_plus"][0] == r["d_minus"][0]
    assert r["d_minus"][0] == pytest.approx(expected, rel=1e-12)


def test_truncation_invariance():
    p = FIG3
    b = np.array([0.5, 3.0, 9.0, 20.0])
    bands = _Sidebands(b, p)
    dt = rate_arrays(b, p)["delta_tilde"]
    base = _rates_from_bands(bands, dt)
    wide = _Sidebands(b, p)
    wide.n_max += 15
    wide.orders, wide.J = __import__(
        "optomech_lc.semiclassical.bessel", fromlist=["signed_table"]).signed_table(
            wide.n_max + 2, np.abs(wide.z))
    more = _rates_from_bands(wide, dt)
    for x, y in zip(base, more):
        assert np.allclose(x, y, rtol=1e-8, atol=0)


def test_negating_drive_is_bit_identical():
    b = np.linspace(0, 12, 50)
    a = rate_arrays(b, FIG3)
    n = rate_arrays(b, FIG3.replace(omega_drive=-FIG3.omega_drive))
    for key in a:
        assert np.array_equal(a[key], n[key])


@settings(max_examples=40, deadline=None)
@given(b=st.floats(0, 30), delta=st.floats(-12, 12), g=st.floats(0.01, 3))
def test_diffusion_is_nonnegative(b, delta, g):
    r = rate_arrays(np.array([b]), FIG3.replace(delta=delta, g=g))
    assert r["d_minus"][0] >= 0 and r["d_plus"][0] >= 0
    assert np.isfinite(r["gamma_ba"][0]) and np.isfinite(r["delta_omega"][0])


def test_non_convergence_without_fallback():
    p = FIG3.replace(g=40.0, omega_drive=3.0)
    strict = SemiclassicalOptions(max_iter=2, fallback_linear=False)
    with pytest.raises(NoConvergence):
        cavity_response(1.0, p, opts=strict)
    with pytest.warns(RuntimeWarning):
        cavity_response(1.0, p, opts=SemiclassicalOptions(max_iter=2))


def test_fig1a_rates_vectorise():
    b = np.linspace(0, 10, 7)
    r = rate_arrays(b, FIG1A)
    for i, x in enumerate(b):
        single = rate_arrays(np.array([x]), FIG1A)
        assert r["gamma_ba"][i] == pytest.approx(single["gamma_ba"][0], rel=1e-12)
