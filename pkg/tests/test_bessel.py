import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from optomech_lc.semiclassical.bessel import bessel_j, bessel_table, signed_table


def test_origin_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(3, 0.0) == 0.0


def power_series(n, z, terms=40):
    # independent oracle: direct summation of the defining series
    total = 0.0
    for k in range(terms):
        total += (-1) ** k / (math.factorial(k) * math.factorial(k + n)) * (z / 2) ** (2 * k + n)
    return total


def test_j1_at_two_against_series():
    assert bessel_j(1, 2.0) == pytest.approx(power_series(1, 2.0), abs=1e-12)
    assert bessel_j(1, 2.0) == pytest.approx(0.576724807, abs=1e-9)


def test_table_matches_reference_on_full_domain():
    z = np.linspace(0.0, 50.0, 1001)
    table = bessel_table(80, z)
    ref = special.jv(np.arange(81)[:, None], z[None, :])
    assert np.max(np.abs(table - ref)) < 1e-12


@given(n=st.integers(-80, 80), z=st.floats(0, 50))
def test_scalar_matches_reference(n, z):
    assert bessel_j(n, z) == pytest.approx(special.jv(n, z), abs=1e-12)


def test_negative_orders():
    orders, table = signed_table(4, np.array([1.3]))
    assert list(orders) == list(range(-4, 5))
    for n, row in zip(orders, table):
        assert row[0] == pytest.approx(special.jv(n, 1.3), abs=1e-14)
