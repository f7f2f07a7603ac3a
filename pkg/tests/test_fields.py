import numpy as np
import pytest

from mtlab.fields import DomainError, Field, GridSpec, field_from_evaluator, zero_field


def test_grid_points_shape():
    g = GridSpec(n=2, radius=4)
    pts = g.points()
    assert pts.shape == (81, 2)
    assert g.shape == (9, 9)


def test_field_binary_round_trip(tmp_path):
    g = GridSpec(n=2, radius=3)
    f = field_from_evaluator(g, lambda p: (p[:, 0] + 1j * p[:, 1]).astype(complex))
    blob = f.to_binary()
    back = Field.from_binary(blob)
    assert back.grid == f.grid
    assert np.allclose(back.values, f.values, atol=1e-5)  # complex64 storage


def test_field_csv_export(tmp_path):
    g = GridSpec(n=2, radius=2)
    f = field_from_evaluator(g, lambda p: np.ones(len(p), dtype=complex))
    path = tmp_path / "f.csv"
    f.to_csv(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "x1,x2,re,im"
    assert len(rows) == 26  # 25 points + header


def test_field_at_lattice_lookup():
    g = GridSpec(n=2, radius=4)
    f = field_from_evaluator(g, lambda p: (p[:, 0] * 2).astype(complex))
    f.source = None
    v = f.at(np.array([[1.0, 0.0], [100.0, 0.0]]))
    assert v[0] == 2.0 and v[1] == 0.0
    with pytest.raises(DomainError):
        f.at(np.array([[0.5, 0.5]]))


def test_field_norms_within_ball():
    g = GridSpec(n=2, radius=8)
    f = field_from_evaluator(g, lambda p: np.ones(len(p), dtype=complex))
    full = f.l2sq()
    ball = f.l2sq(within=4.0)
    assert ball < full
    assert ball == pytest.approx(np.pi * 16, rel=0.15)


def test_zero_field():
    z = zero_field(GridSpec(n=3, radius=2))
    assert z.l2sq() == 0.0
    assert z.sup() == 0.0


def test_lattice_l2_exact_for_band_limited():
    # frequency support radius <= 1/4: the unit-lattice rectangle rule equals
    # the continuum L2 norm (alias-free), far within the 0.1% contract
    from mtlab import profiles

    g = GridSpec(n=2, radius=256)
    f = field_from_evaluator(
        g, lambda p: (profiles.phi(p[:, 0] / 4.0) * profiles.phi(p[:, 1] / 4.0)).astype(complex)
    )
    continuum = (4.0 * profiles.phi_lp_power(2.0)) ** 2
    assert abs(f.l2sq() - continuum) / continuum < 1e-3
