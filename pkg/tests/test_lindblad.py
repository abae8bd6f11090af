import numpy as np
import pytest

from optomech_lc.errors import DimensionOverflow
from optomech_lc.lindblad import (HilbertConfig, build_liouvillian, cavity_occupation, evolve,
                                  observables, spectral_peak, steady_state)
from optomech_lc.lindblad.steady import thermal_populations
from optomech_lc.params import SystemParams

pytestmark = pytest.mark.filterwarnings("ignore::optomech_lc.params.WeakDampingWarning")

SMALL = HilbertConfig(n_cav=3, n_res=30, coherence_band=30)
FREE = SystemParams(omega_m=1.0, g=0.0, gamma_m=0.05, delta=0.75, omega_drive=0.3, nbar=0.5)
# weakly coupled point with a modest resonator occupation
COUPLED = SystemParams(omega_m=1.0, g=0.4, gamma_m=0.05, delta=0.75, omega_drive=0.3, nbar=0.2)


@pytest.fixture(scope="module")
def free_state():
    L = build_liouvillian(FREE, SMALL)
    return L, steady_state(L)


@pytest.fixture(scope="module")
def coupled_state():
    L = build_liouvillian(COUPLED, HilbertConfig(n_cav=4, n_res=30, coherence_band=12))
    return L, steady_state(L)


def test_uncoupled_state_is_vacuum_times_thermal(free_state):
    L, rho = free_state
    cav = rho.cavity_populations
    assert cav[0] == pytest.approx(1.0, abs=1e-10)  # displaced frame: cavity vacuum
    assert np.allclose(rho.resonator_populations, thermal_populations(FREE.nbar, SMALL.n_res),
                       atol=1e-10)
    obs = observables(rho)
    assert obs.fano == pytest.approx(FREE.nbar + 1, rel=1e-6)


def test_lab_frame_cavity_occupation(free_state):
    p = FREE
    assert cavity_occupation(free_state[1]) == pytest.approx(
        p.omega_drive ** 2 / (0.25 + p.delta ** 2), rel=1e-9)


def test_undisplaced_frame_gives_same_physics():
    L = build_liouvillian(FREE, HilbertConfig(n_cav=6, n_res=30, displaced=False,
                                              coherence_band=30))
    rho = steady_state(L)
    assert cavity_occupation(rho) == pytest.approx(
        FREE.omega_drive ** 2 / (0.25 + FREE.delta ** 2), rel=1e-4)
    assert observables(rho).n_avg == pytest.approx(FREE.nbar, rel=1e-6)


def test_generator_preserves_trace_and_hermiticity(coupled_state):
    L, _ = coupled_state
    # trace functional annihilates L
    assert np.abs(L.trace_vector @ L.matrix).max() < 1e-10
    rng = np.random.default_rng(0)
    x = rng.normal(size=(L.dim, L.dim)) + 1j * rng.normal(size=(L.dim, L.dim))
    n = L.dim
    res = np.arange(n) % L.hc.n_res
    x[np.abs(res[:, None] - res[None, :]) > L.hc.coherence_band] = 0
    x = x + x.conj().T
    y = L.unvectorize(L.matvec(L.vectorize(x)))
    inner = np.abs(res[:, None] - res[None, :]) <= L.hc.coherence_band - 2
    assert np.allclose(y[inner], y.conj().T[inner], atol=1e-10)


def test_steady_state_properties(coupled_state):
    L, rho = coupled_state
    assert rho.residual < 1e-8
    assert np.trace(rho.matrix).real == pytest.approx(1.0)
    assert np.allclose(rho.matrix, rho.matrix.conj().T)
    assert np.linalg.eigvalsh(rho.matrix).min() > -1e-8
    obs = observables(rho)
    assert obs.populations.sum() == pytest.approx(1.0)
    assert obs.populations[-3:].sum() < 1e-6  # basis is large enough


def test_number_statistics_of_known_states():
    from optomech_lc.lindblad.steady import DensityMatrix
    pops = np.zeros(10)
    pops[4] = 1.0
    fock = observables(DensityMatrix(np.diag(pops).astype(complex), 1, 10, 0j))
    assert fock.n_avg == 4 and fock.fano == 0
    th = thermal_populations(2.0, 200)
    obs = observables(DensityMatrix(np.diag(th).astype(complex), 1, 200, 0j))
    assert obs.n_avg == pytest.approx(2.0, rel=1e-9)
    assert obs.fano == pytest.approx(3.0, rel=1e-9)


def test_time_evolution_reaches_steady_state(coupled_state):
    L, rho = coupled_state
    n = L.dim
    starts = [np.zeros((n, n), complex), np.zeros((n, n), complex)]
    starts[0][0, 0] = 1.0
    k = 3  # cavity vacuum, three resonator quanta
    starts[1][k, k] = 1.0
    for r0 in starts:
        final = evolve(L, r0, [0.0, 200.0])[-1]
        assert np.trace(final.matrix).real == pytest.approx(1.0, abs=1e-9)
        assert np.abs(final.matrix - rho.matrix).max() < 1e-3


def test_coherence_band_convergence():
    narrow = steady_state(build_liouvillian(COUPLED, HilbertConfig(n_cav=4, n_res=30,
                                                                   coherence_band=8)))
    wide = steady_state(build_liouvillian(COUPLED, HilbertConfig(n_cav=4, n_res=30,
                                                                 coherence_band=16)))
    a, b = observables(narrow), observables(wide)
    assert a.n_avg == pytest.approx(b.n_avg, rel=1e-3)
    assert a.fano == pytest.approx(b.fano, rel=1e-3)


def test_resonator_basis_convergence(coupled_state):
    big = steady_state(build_liouvillian(COUPLED, HilbertConfig(n_cav=4, n_res=40,
                                                                coherence_band=12)))
    a, b = observables(coupled_state[1]), observables(big)
    assert a.n_avg == pytest.approx(b.n_avg, rel=1e-6)
    assert a.fano == pytest.approx(b.fano, rel=1e-5)


def test_memory_budget_is_enforced():
    with pytest.raises(DimensionOverflow):
        build_liouvillian(FREE, HilbertConfig(n_cav=3, n_res=120, coherence_band=25,
                                              memory_budget_mb=10))


def test_thermal_spectrum_width(free_state):
    L, rho = free_state
    peak = spectral_peak(L, rho, "mechanical", omega_guess=FREE.omega_m, points=41)
    assert peak.eigenvalue.real == pytest.approx(-FREE.gamma_m / 2, rel=1e-8)
    assert peak.fit.center == pytest.approx(FREE.omega_m, abs=1e-6)
    assert peak.fit.half_width == pytest.approx(FREE.gamma_m / 2, rel=1e-4)
    # peak height of 2 Re[(2 nbar + 1) / (gamma_m / 2)]
    assert peak.fit.height == pytest.approx(2 * (2 * FREE.nbar + 1) / (FREE.gamma_m / 2),
                                            rel=1e-4)


def test_limit_cycle_population_is_a_ring():
    from conftest import FIG1A
    from optomech_lc.semiclassical import find_limit_cycles
    obs = observables(steady_state(build_liouvillian(FIG1A)))
    b0 = [c for c in find_limit_cycles(FIG1A) if c.stable][-1].b0
    peak = int(np.argmax(obs.populations))
    width = np.sqrt(obs.fano * obs.n_avg)
    assert abs(peak - (b0 ** 2 - 0.5)) < width
    assert obs.populations[0] < 1e-6 * obs.populations[peak]
