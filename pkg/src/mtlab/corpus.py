"""Deterministic random instance corpus for the inequality monitors.

Each (inequality id, n, R, seed) produces one instance: packet ids get a
random sleeve packet set, extension ids a curve density; weights rotate
through sparse cells, well-spread unit balls, and (in the plane) plank
indicators so every geometric functional gets exercised.
"""

from __future__ import annotations

import numpy as np

from .boxes import curvature_boxes, plank
from .curves import get_curve
from .extension import arc_sum_density, sample_density
from .inequalities import InequalityInstance
from .packets import PacketSet
from .weights import Weight, indicator_cells, region_weight, spread_points

PACKET_IDS = ("cor31a", "cor33", "cor34", "cor35", "thm22")
EXTENSION_IDS = ("thm11", "thm16", "thm41")


def random_packets(boxes, R: float, rng, per_box: int = 3) -> PacketSet:
    n = boxes[0].n
    ms, amps = [], []
    for box in boxes:
        anchor = rng.uniform(-R / 2, R / 2, size=n)
        base = np.rint(box.u_coords(anchor.reshape(1, -1))[0]).astype(np.int64)
        offs = rng.integers(-2, 3, size=(per_box, n))
        mset = np.unique(base[None, :] + offs, axis=0)
        ms.append(mset)
        amps.append(rng.normal(size=len(mset)) + 1j * rng.normal(size=len(mset)))
    return PacketSet(boxes=list(boxes), ms=ms, amps=amps)


def random_weight(n: int, R: float, rng, kind: int) -> Weight:
    if kind == 0:
        k = int(rng.integers(50, 300))
        pts = rng.uniform(-R, R, size=(4 * k, n))
        pts = pts[(pts**2).sum(axis=1) <= R**2][:k]
        vals = np.abs(rng.normal(size=len(pts))) + 0.1
        return Weight(n, np.rint(pts).astype(np.int64), vals, R)
    if kind == 1:
        cfg = spread_points(n, 64, n + 3, R, seed=int(rng.integers(1 << 30)),
                            verify="sampled", sample_budget=200, improve_rounds=0)
        return indicator_cells(cfg.points, R)
    # plank indicator (plane only; elsewhere fall back to dense-ish cells);
    # subsampled beyond 2000 cells to keep instance costs flat in R
    if n == 2:
        curve = get_curve("moment", n)
        boxes, _ = curvature_boxes(curve, R)
        box = boxes[int(rng.integers(len(boxes)))]
        anchor = rng.uniform(-R / 4, R / 4, size=n)
        m = np.rint(box.u_coords(anchor.reshape(1, -1))[0])
        w = region_weight(plank(box, m), R)
        if len(w.points) > 2000:
            pick = rng.choice(len(w.points), size=2000, replace=False)
            w = Weight(n, w.points[pick], w.values[pick], w.ball_radius)
        return w
    return random_weight(n, R, rng, 0)


def make_instance(ineq_id: str, n: int, R: float, seed: int) -> InequalityInstance:
    rng = np.random.default_rng(seed)
    curve = get_curve("moment", n)
    boxes, _ = curvature_boxes(curve, R)
    w = random_weight(n, R, rng, kind=seed % 3)
    if ineq_id in PACKET_IDS:
        ps = random_packets(boxes, R, rng)
        return InequalityInstance(
            ineq_id=ineq_id, n=n, R=float(R), boxes=boxes, weight=w,
            packets=ps, seed=seed, label=f"corpus-{seed % 3}",
        )
    if ineq_id in EXTENSION_IDS:
        mode = seed % 3
        if mode == 0:
            g = sample_density(curve, R, 1.0)
        elif mode == 1:
            K = max(2, int(min(np.sqrt(R), 12)))
            centers = (np.arange(K) + 0.5) / K
            phases = np.exp(2j * np.pi * rng.uniform(size=K))
            g = arc_sum_density(curve, R, centers, phases)
        else:
            k = int(rng.integers(1, 4))
            g = sample_density(curve, R, lambda xi: np.exp(2j * np.pi * k * xi) * (1 + 0.5 * np.cos(2 * np.pi * xi)))
        return InequalityInstance(
            ineq_id=ineq_id, n=n, R=float(R), boxes=boxes, weight=w,
            density=g, seed=seed, label=f"corpus-{mode}",
        )
    from .errors import ConfigError

    raise ConfigError(f"unknown inequality id {ineq_id!r}")
