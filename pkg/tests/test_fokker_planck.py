import numpy as np
import pytest
from scipy.integrate import trapezoid

from optomech_lc.errors import BoundaryMass, GridTooCoarse
from optomech_lc.semiclassical import (SemiclassicalOptions, amplitude_distribution,
                                       find_limit_cycles)

from conftest import FIG1A, FIG2, FIG3


@pytest.mark.parametrize("nbar", [0.5, 1.0, 5.0])
def test_thermal_state_without_coupling(nbar):
    p = FIG3.replace(g=0.0, nbar=nbar)
    ad = amplitude_distribution(p)
    # U = B^2 / (nbar + 1/2) exactly
    assert np.allclose(ad.potential, ad.grid ** 2 / (nbar + 0.5), rtol=1e-12, atol=1e-12)
    assert ad.n_avg == pytest.approx(nbar, rel=1e-5)
    assert ad.fano == pytest.approx(nbar + 1, rel=1e-5)
    assert ad.mean_b2 == pytest.approx(nbar + 0.5, rel=1e-5)


def test_vacuum_without_coupling():
    ad = amplitude_distribution(FIG3.replace(g=0.0))
    assert abs(ad.n_avg) < 1e-5


def test_density_invariants():
    ad = amplitude_distribution(FIG1A)
    assert ad.potential[0] == 0.0
    assert np.all(ad.density >= 0)
    assert trapezoid(ad.density, ad.grid) == pytest.approx(1.0, abs=1e-9)


def test_fig1a_limit_cycle_is_single_peaked_and_quiet():
    ad = amplitude_distribution(FIG1A)
    d = ad.density
    interior_max = np.nonzero((d[1:-1] > d[:-2]) & (d[1:-1] >= d[2:]))[0]
    assert len(interior_max) == 1
    assert ad.peak > 3.0
    assert ad.fano < 1.1


def test_deep_cycle_matches_gaussian_width():
    for delta in (4.75, 5.0, 5.25):
        p = FIG2.replace(delta=delta)
        ad = amplitude_distribution(p)
        assert ad.well_depth > 10
        lc = [c for c in find_limit_cycles(p) if c.stable][0]
        assert abs(ad.fano - lc.fano) / ad.fano < 0.05


def test_boundary_mass_is_detected():
    with pytest.raises(BoundaryMass):
        amplitude_distribution(FIG2, b_max=5.0)


def test_explicit_coarse_grid_is_reported():
    p = FIG3.replace(g=0.0, nbar=0.5)
    with pytest.raises(GridTooCoarse):
        amplitude_distribution(p, b_max=60.0, grid_n=200)
    # the automatic grid refines until the doubling check passes
    assert amplitude_distribution(p, b_max=60.0).n_avg == pytest.approx(0.5, rel=1e-4)


def test_flat_measure_is_available():
    flat = amplitude_distribution(FIG2, opts=SemiclassicalOptions(measure="flat"))
    polar = amplitude_distribution(FIG2)
    assert flat.measure == "flat"
    assert flat.n_avg == pytest.approx(polar.n_avg, rel=0.02)


def test_static_shift_enters_mean_only():
    ad = amplitude_distribution(FIG2)
    assert ad.n_avg == pytest.approx(ad.mean_b2 - 0.5 + abs(ad.beta_c) ** 2, rel=1e-14)
