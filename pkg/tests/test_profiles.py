import numpy as np
import pytest

from mtlab import profiles


def test_plateau_support_and_flat_region():
    xi = np.linspace(-1, 1, 2001)
    vals = profiles.profile_hat(xi)
    assert np.all(vals[np.abs(xi) <= 0.25] == 1.0)
    assert np.all(vals[np.abs(xi) >= 0.5] == 0.0)
    assert np.all((vals >= 0) & (vals <= 1))


def test_phi_table_matches_direct_quadrature():
    xs = np.array([0.0, 0.25, 1.0, 3.0, 7.5, 16.0, 33.25])
    direct = profiles._phi_exact(xs)
    assert np.max(np.abs(direct - profiles.phi(xs))) < 5e-6


def test_phi_parseval_real_vs_frequency():
    # int phi^2 dx == int phat^2 dxi
    assert profiles.phi_lp_power(2.0) == pytest.approx(profiles.phi_l2sq_freq(), rel=1e-10)


def test_decay_constants_finite_to_order_8():
    consts = profiles.decay_constants(8)
    assert set(consts) == set(range(1, 9))
    assert all(np.isfinite(v) and v > 0 for v in consts.values())


def test_lattice_sum_is_one():
    # Poisson: sum_j phi(j) = phat(0) = 1 since supp phat misses Z \ {0}
    js = np.arange(-192, 193).astype(float)
    assert np.sum(profiles.phi(js)) == pytest.approx(1.0, abs=1e-7)


def test_phi_beyond_table_is_zero():
    assert profiles.phi(np.array([250.0]))[0] == 0.0
