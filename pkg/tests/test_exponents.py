from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mtlab.errors import ConfigError
from mtlab.exponents import ExponentTable


@given(st.integers(min_value=2, max_value=6))
def test_identities_exact(n):
    t = ExponentTable(n)
    checks = t.checks()
    assert all(checks.values()), checks


def test_n2_values():
    t = ExponentTable(2)
    assert (t.p, t.r) == (6, Fraction(3, 2))
    assert t.a_mt == Fraction(1, 3)
    assert t.a_tube == Fraction(1, 3)
    assert t.e_plank == -1
    assert t.e_tube == Fraction(-2, 3)
    assert t.e_slab == Fraction(-2, 3)
    assert t.e_hyperslab == Fraction(-2, 3)


def test_n3_lower_bounds():
    t = ExponentTable(3)
    assert t.lower_slab == Fraction(-3, 2)
    assert t.lower_tube == Fraction(-5, 6)
    assert t.lower_hyperslab == Fraction(-5, 3)


def test_transfer_identity_all_n():
    for n in range(2, 7):
        t = ExponentTable(n)
        assert Fraction(n - 1) + t.e_slab == t.a_mt
        assert Fraction(n - 1) + t.e_tube == t.a_tube


def test_rhs_power_dispatch():
    t = ExponentTable(2)
    assert t.rhs_power("cor31a") == t.e_plank
    assert t.rhs_power("thm41") == Fraction(1) + t.e_hyperslab
    with pytest.raises(ConfigError):
        t.rhs_power("nope")
