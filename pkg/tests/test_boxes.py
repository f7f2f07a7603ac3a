import numpy as np
import pytest

from mtlab.boxes import (curvature_boxes, derived_family, hyperplane_slab, incidence_count,
                         normalize_scale, plank, slab_count, tile_index)
from mtlab.curves import moment_curve, sine_curve_3d


@pytest.fixture(scope="module")
def boxes2():
    return curvature_boxes(moment_curve(2), 2**8)[0]


@pytest.fixture(scope="module")
def boxes3():
    return curvature_boxes(sine_curve_3d(), 2**9)[0]


def test_box_counts(boxes2, boxes3):
    assert len(boxes2) == 16  # R^(1/2)
    assert len(boxes3) == 8  # R^(1/3)


def test_box_sides(boxes2):
    b = boxes2[3]
    norms = b.col_norms()
    assert norms[0] == pytest.approx(2**-4, rel=0.6)  # ~ delta (times |G'|)
    assert norms[1] == pytest.approx(2**-8, rel=0.1)


def test_scale_rounding_metadata():
    _, meta = curvature_boxes(moment_curve(2), 100)
    assert meta["rounded"] and meta["R"] == 128
    with pytest.raises(ValueError):
        normalize_scale(1)


def test_arc_containment_sampled(boxes2, boxes3):
    for boxes, curve in ((boxes2, moment_curve(2)), (boxes3, sine_curve_3d())):
        for b in boxes[::5]:
            ts = np.linspace(b.xi - b.delta, b.xi + b.delta, 100)
            assert b.contains_freq(curve.point(ts)).all()


def test_sleeve_covers_nearby_curve_points(boxes2):
    # curve points within 1/R (in parameter) of a box's arc stay in the union
    curve = moment_curve(2)
    R = 2**8
    b = boxes2[7]
    ts = np.linspace(b.xi - b.delta - 1 / R, b.xi + b.delta + 1 / R, 50)
    ts = np.clip(ts, 0, 1)
    pts = curve.point(ts)
    member = np.zeros(len(pts), dtype=bool)
    for bb in boxes2:
        member |= bb.contains_freq(pts)
    assert member.all()


def test_tiling_unique_membership(boxes2):
    rng = np.random.default_rng(1)
    b = boxes2[5]
    x = rng.uniform(-256, 256, size=(10000, 2))
    m = tile_index(b, x)
    # the rounded tile contains the point; neighbours do not
    assert plank(b, m[17]).contains(x[17:18])[0]
    offs = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])
    hits = np.zeros(len(x), dtype=np.int64)
    for o in [np.zeros(2, dtype=np.int64)] + list(offs):
        for i in range(0, len(x), 2048):
            mm = m[i : i + 2048] + o
            u = b.u_coords(x[i : i + 2048])
            inside = np.all((u >= mm - 0.5) & (u < mm + 0.5), axis=1)
            hits[i : i + 2048] += inside
    assert np.all(hits == 1)


def test_volume_law(boxes2, boxes3):
    for boxes, R, n in ((boxes2, 2**8, 2), (boxes3, 2**9, 3)):
        ratios = [b.tile_volume / R ** ((n + 1) / 2) for b in boxes]
        assert 0.05 < min(ratios) and max(ratios) < 20


def test_derived_family_counts(boxes2, boxes3):
    t2 = plank(boxes2[4], np.zeros(2))
    slabs = derived_family(t2, "L")
    assert len(slabs) == 16
    assert derived_family(slabs[0], "P") == [slabs[0]]  # plane collapse

    t3 = plank(boxes3[2], np.zeros(3))
    slabs3 = derived_family(t3, "L")
    assert len(slabs3) == 8
    tubes = derived_family(slabs3[0], "P")
    assert len(tubes) == 64  # R^((n-1)/2 - 1/n) = 2^(9*2/3)


def test_derived_family_partition(boxes2):
    # slabs tile the plank: random interior points land in exactly one slab
    t = plank(boxes2[9], np.array([2.0, -1.0]))
    slabs = derived_family(t, "L")
    rng = np.random.default_rng(3)
    u = rng.uniform(-0.499, 0.499, size=(2000, 2)) + np.array([2.0, -1.0])
    x = np.linalg.solve(t.box.tmat, u.T).T
    counts = np.zeros(len(x), dtype=int)
    for s in slabs:
        counts += s.contains(x)
    assert np.all(counts == 1)


def test_tube_partition_3d(boxes3):
    # the 64 unit tubes of a slab partition it (every interior point in
    # exactly one)
    t = plank(boxes3[5], np.array([1.0, 0.0, -2.0]))
    slab = derived_family(t, "L")[2]
    tubes = derived_family(slab, "P")
    rng = np.random.default_rng(8)
    u = rng.uniform(slab.lo + 1e-9, slab.hi - 1e-9, size=(1500, 3))
    x = np.linalg.solve(t.box.tmat, u.T).T
    counts = np.zeros(len(x), dtype=int)
    for tube in tubes:
        counts += tube.contains(x)
    assert np.all(counts == 1)


def test_epsilon_dilated_tube_count(boxes3):
    t3 = plank(boxes3[2], np.zeros(3))
    slab = derived_family(t3, "L")[0]
    eps = 0.05
    tubes = derived_family(slab, "P", epsilon=eps)
    assert len(tubes) >= 64


def test_hyperplane_slab(boxes2, boxes3):
    for boxes in (boxes2, boxes3):
        t = plank(boxes[1], np.zeros(boxes[1].n))
        slab = derived_family(t, "L")[3]
        S = hyperplane_slab(slab)
        assert S.halfwidth == 1.0
        assert S.contains(slab.corners_x()).all()
        far = slab.center_x() + 3.0 * S.normal
        assert not S.contains(far.reshape(1, -1))[0]
        assert S.distance(far.reshape(1, -1))[0] == pytest.approx(2.0, abs=1e-9)


def test_incidence_counts(boxes2):
    n = 2
    side = 16.0
    center = np.zeros(n)
    # far plank
    far = plank(boxes2[0], np.array([50.0, 50.0]))
    assert incidence_count(center, side, [far], dilate=2.0) == 0
    # containing plank centred at the cube
    t0 = plank(boxes2[0], np.zeros(n))
    assert incidence_count(center, side, [t0], dilate=2.0) == 1
    # bush: brute-force corner membership agrees with the predicate
    R = 2**6
    boxes_small = curvature_boxes(moment_curve(2), R)[0]
    bush = [plank(b, np.zeros(2)) for b in boxes_small]
    side_small = 8.0
    count = incidence_count(center, side_small, bush, dilate=2.0)
    brute = 0
    for t in bush:
        corners = np.array([[sx, sy] for sx in (-4, 4) for sy in (-4, 4)], dtype=float)
        brute += int(t.dilate(2.0).contains_closed(corners).all())
    assert count == brute


def test_ball_predicates(boxes3):
    t = plank(boxes3[4], np.zeros(3))
    c = t.center_x()
    assert t.contains_ball(c, 1.0)
    far = c + 10000.0 * boxes3[4].frenet().tangent
    assert t.separates_ball(far, 1.0)
    assert t.distance_to_point(c) == 0.0
    d = t.distance_to_point(far)
    assert d > 100
