"""Non-negative weights on the unit lattice, region masses, suprema over the
geometric families, unit-scale mollification, and well-spread point
configurations (every small subset has a large convex hull).

Weights are stored sparsely: lattice points with positive values.  Masses
over a region are plain sums of w^r at the lattice points the region
contains; this is the unit-scale realization of the corresponding integral
for weights constant at unit scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .boxes import GeomFamily, HyperplaneSlab, URegion, slab_count
from .errors import PackingError


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def contains(self, x: np.ndarray) -> np.ndarray:
        d = np.asarray(x, dtype=float) - self.center
        return (d**2).sum(axis=-1) <= self.radius**2 + 1e-9


@dataclass
class Weight:
    n: int
    points: np.ndarray  # (N, n) integer lattice points
    values: np.ndarray  # (N,) non-negative
    ball_radius: float  # the ambient B_{CR} the weight lives in

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points))
        self.values = np.asarray(self.values, dtype=float)
        if np.any(self.values < 0):
            raise ValueError("weights are non-negative")

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def power_values(self, r: float) -> np.ndarray:
        return self.values**r

    def shifted(self, v: np.ndarray) -> "Weight":
        return Weight(self.n, self.points + np.asarray(v, dtype=np.int64), self.values.copy(), self.ball_radius)

    def eval_at(self, pts: np.ndarray) -> np.ndarray:
        """Dense evaluation at lattice points (0 off the support)."""
        pts = np.atleast_2d(np.asarray(pts))
        lookup = {tuple(p): v for p, v in zip(map(tuple, np.asarray(self.points, dtype=np.int64)), self.values)}
        return np.array([lookup.get(tuple(np.asarray(p, dtype=np.int64)), 0.0) for p in pts])


def indicator_cells(points: np.ndarray, ball_radius: float) -> Weight:
    """Characteristic weight of unit cells at the given (rounded) centers;
    the single-cell realization of a union of unit balls with separated
    centers (separation >= 2 makes the rounding injective)."""
    pts = np.rint(np.atleast_2d(points)).astype(np.int64)
    pts = np.unique(pts, axis=0)
    return Weight(pts.shape[1], pts, np.ones(len(pts)), ball_radius)


def ones_ball(n: int, R: float) -> Weight:
    """w = 1 on the lattice points of B_R (guarded against huge grids)."""
    k = int(math.floor(R))
    if (2 * k + 1) ** n > 4e7:
        raise MemoryError(f"dense ball weight too large at R={R}, n={n}")
    ax = np.arange(-k, k + 1)
    grids = np.meshgrid(*([ax] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    pts = pts[(pts**2).sum(axis=1) <= R**2 + 1e-9]
    return Weight(n, pts.astype(np.int64), np.ones(len(pts)), R)


def bump_ball_weight(n: int, R: float) -> Weight:
    """w(x) = Phi(x/R) on the lattice of B_R (a spread bump of total mass
    comparable to R^n)."""
    from . import profiles

    base = ones_ball(n, R)
    vals = np.prod(profiles.phi(base.points / R), axis=-1)
    vals = np.maximum(vals, 0.0)
    keep = vals > 0
    return Weight(n, base.points[keep], vals[keep], R)


def region_weight(region: URegion, ball_radius: float) -> Weight:
    """Indicator weight of the lattice points inside a u-box region."""
    pts = lattice_points_in_region(region)
    return Weight(region.n, pts, np.ones(len(pts)), ball_radius)


def lattice_points_in_region(region: URegion) -> np.ndarray:
    """Integer points in a u-box region; 2-D scans the bounding box, 3-D
    solves the third coordinate's interval per (x1, x2) column."""
    corners = region.corners_x()
    lo = np.floor(corners.min(axis=0)).astype(np.int64)
    hi = np.ceil(corners.max(axis=0)).astype(np.int64)
    n = region.n
    if n == 2:
        if np.prod(hi - lo + 1) > 5e7:
            raise MemoryError("region bounding box too large")
        ax0 = np.arange(lo[0], hi[0] + 1)
        ax1 = np.arange(lo[1], hi[1] + 1)
        g0, g1 = np.meshgrid(ax0, ax1, indexing="ij")
        pts = np.stack([g0.ravel(), g1.ravel()], axis=-1)
        return pts[region.contains(pts)]
    if n == 3:
        M = region.box.lin  # u = x @ M
        ax0 = np.arange(lo[0], hi[0] + 1)
        ax1 = np.arange(lo[1], hi[1] + 1)
        g0, g1 = np.meshgrid(ax0, ax1, indexing="ij")
        cols = np.stack([g0.ravel(), g1.ravel()], axis=-1).astype(float)
        base = cols @ M[:2, :]  # (K, 3): u at x3 = 0
        out = []
        m3 = M[2, :]
        lo_u, hi_u = region.lo, region.hi
        t_lo = np.full(len(cols), -np.inf)
        t_hi = np.full(len(cols), np.inf)
        for j in range(3):
            if abs(m3[j]) < 1e-15:
                bad = (base[:, j] < lo_u[j]) | (base[:, j] > hi_u[j])
                t_lo[bad], t_hi[bad] = 1.0, 0.0
                continue
            a = (lo_u[j] - base[:, j]) / m3[j]
            b = (hi_u[j] - base[:, j]) / m3[j]
            t_lo = np.maximum(t_lo, np.minimum(a, b))
            t_hi = np.minimum(t_hi, np.maximum(a, b))
        for (x1, x2), a, b in zip(cols, t_lo, t_hi):
            if b < a:
                continue
            for x3 in range(int(math.ceil(a - 1e-12)), int(math.floor(b + 1e-12)) + 1):
                out.append((int(x1), int(x2), x3))
        pts = np.array(out, dtype=np.int64).reshape(-1, 3)
        return pts[region.contains(pts)]
    raise NotImplementedError("lattice enumeration wired for n in {2,3}")


# ---------------------------------------------------------------------------
# masses


def region_mask(region, points: np.ndarray) -> np.ndarray:
    if isinstance(region, (URegion, HyperplaneSlab, Ball)):
        return region.contains(points)
    raise TypeError(f"unsupported region {type(region)!r}")


def power_mass(w: Weight, region, r: float) -> float:
    """w^r(E) = sum over lattice points of E of w^r."""
    if len(w.points) == 0:
        return 0.0
    mask = region_mask(region, w.points)
    return float(np.sum(w.power_values(r)[mask]))


def mass(w: Weight, region, r: float = 1.0) -> float:
    """(sum_{x in E} w(x)^r)^(1/r); empty regions give 0."""
    if r < 1:
        raise ValueError("mass needs r >= 1")
    return power_mass(w, region, r) ** (1.0 / r)


# ---------------------------------------------------------------------------
# suprema over the geometric families (index mapping, exact per sampler)


def _group_max(keys: np.ndarray, vals: np.ndarray) -> tuple[float, np.ndarray]:
    """Max of grouped sums over rows of integer keys."""
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    sums = np.bincount(inv, weights=vals, minlength=len(uniq))
    i = int(np.argmax(sums))
    return float(sums[i]), uniq[i]

def sup_mass(w: Weight, fam: GeomFamily, r: float = 1.0, origin=None) -> tuple[float, dict]:
    """Supremum of mass over the sampled family; returns the value and a
    descriptor of the maximizer.  Sampling per kind:
      T: all dual tiles of each box;
      L: unit-thickness tangential slices of the tiles;
      P: unit tubes (extra slicing of the non-final axes);
      S: per-box tangent normals with unit-spaced offsets, halfwidth 1.
    origin shifts the family's anchor (translating weight and origin by the
    same vector leaves the supremum unchanged, exactly)."""
    if len(w.points) == 0:
        return 0.0, {}
    pv = w.power_values(r)
    pts = np.asarray(w.points, dtype=float)
    if origin is not None:
        pts = pts - np.asarray(origin, dtype=float)[None, :]
    best = -1.0
    desc: dict = {}
    for box in fam.boxes:
        u = box.u_coords(pts)
        if fam.kind == "S":
            nu = box.frenet().tangent
            proj = pts @ nu
            cell = np.floor(proj).astype(np.int64)
            lo = cell.min()
            counts = np.bincount(cell - lo, weights=pv)
            # slab at offset o covers floor cells o-1 and o
            sums = counts[1:] + counts[:-1] if len(counts) > 1 else counts
            if len(sums) == 0:
                continue
            i = int(np.argmax(sums))
            val = float(sums[i])
            if val > best:
                best = val
                desc = {"kind": "S", "theta": box.index, "offset": int(i + lo + 1)}
            continue
        m = np.rint(u).astype(np.int64)
        if fam.kind == "T":
            val, key = _group_max(m, pv)
            if val > best:
                best, desc = val, {"kind": "T", "theta": box.index, "m": key.tolist()}
            continue
        K = slab_count(box)
        s0 = np.clip(np.floor((u[:, 0] - (m[:, 0] - 0.5)) * K).astype(np.int64), 0, K - 1)
        if fam.kind == "L":
            keys = np.concatenate([m, s0[:, None]], axis=1)
            val, key = _group_max(keys, pv)
            if val > best:
                best, desc = val, {"kind": "L", "theta": box.index, "m": key[:-1].tolist(), "slab": int(key[-1])}
            continue
        if fam.kind == "P":
            cols = [m, s0[:, None]]
            for j in range(1, box.n - 1):
                Kj = K ** (j + 1)
                sj = np.clip(np.floor((u[:, j] - (m[:, j] - 0.5)) * Kj).astype(np.int64), 0, Kj - 1)
                cols.append(sj[:, None])
            keys = np.concatenate(cols, axis=1)
            val, key = _group_max(keys, pv)
            if val > best:
                best, desc = val, {"kind": "P", "theta": box.index, "key": key.tolist()}
            continue
    return best ** (1.0 / r) if best > 0 else 0.0, desc


# ---------------------------------------------------------------------------
# unit-scale mollification


def mollifier_kernel(cutoff: int = 64) -> np.ndarray:
    """1-D taps of the non-negative normalized bump: phi^2 / ||phi||_2^2.
    Its transform is the self-convolution of the plateau (support in [-1,1]
    vanishing at the endpoints), so the lattice taps sum to exactly
    ||phi||_2^2 by Poisson summation and the normalized sum is exactly 1."""
    from . import profiles

    ker = profiles.phi(np.arange(-cutoff, cutoff + 1).astype(float)) ** 2
    return ker / profiles.phi_lp_power(2.0)


def mollify_unit(w: Weight, cutoff: int = 64) -> tuple[Weight, dict]:
    """Phi * w on the lattice with the non-negative unit-mass bump above;
    preserves total mass up to the cutoff tail and makes the weight
    constant at unit scale (recorded adjacent-ratio constant)."""
    from scipy.ndimage import convolve1d

    pts = np.asarray(w.points, dtype=np.int64)
    lo = pts.min(axis=0) - cutoff
    hi = pts.max(axis=0) + cutoff
    shape = tuple(int(h - l + 1) for l, h in zip(lo, hi))
    if np.prod(shape) > 6e7:
        raise MemoryError("mollification box too large")
    dense = np.zeros(shape)
    dense[tuple((pts - lo).T)] = w.values
    ker = mollifier_kernel(cutoff)
    for axis in range(w.n):
        dense = convolve1d(dense, ker, axis=axis, mode="constant")
    nz = np.argwhere(dense > 1e-300)
    vals = dense[tuple(nz.T)]
    out = Weight(w.n, nz + lo, vals, w.ball_radius)
    # constancy constant: max adjacent ratio on the support above a floor
    floor = vals.max() * 1e-9
    cmax = 1.0
    core = np.argwhere(dense > floor)
    sel = core[:: max(1, len(core) // 4096)]
    for axis in range(w.n):
        shiftp = sel.copy()
        shiftp[:, axis] += 1
        ok = shiftp[:, axis] < shape[axis]
        a = dense[tuple(sel[ok].T)]
        b = dense[tuple(shiftp[ok].T)]
        m = (a > floor) & (b > floor)
        if m.any():
            cmax = max(cmax, float(np.max(np.maximum(a[m] / b[m], b[m] / a[m]))))
    ker_tail = 1.0 - ker.sum() ** w.n
    return out, {"constancy": cmax, "mass_rel_err": abs(out.total - w.total) / max(w.total, 1e-300), "kernel_tail": ker_tail}


# ---------------------------------------------------------------------------
# convex hull volumes (own 2-D oracle plus scipy route)


def hull_area_2d(pts: np.ndarray) -> float:
    """Monotone chain + shoelace; independent of scipy."""
    p = np.unique(np.asarray(pts, dtype=float), axis=0)
    if len(p) < 3:
        return 0.0
    order = np.lexsort((p[:, 1], p[:, 0]))
    p = p[order]

    def half(points):
        out = []
        for q in points:
            while len(out) >= 2:
                a, b = out[-2], out[-1]
                if (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]) <= 0:
                    out.pop()
                else:
                    break
            out.append(q)
        return out

    lower = half(p)
    upper = half(p[::-1])
    poly = np.array(lower[:-1] + upper[:-1])
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def hull_volume(pts: np.ndarray) -> float:
    """Convex hull volume via scipy; degenerate sets count as volume 0."""
    from scipy.spatial import ConvexHull, QhullError

    pts = np.asarray(pts, dtype=float)
    try:
        return float(ConvexHull(pts).volume)
    except (QhullError, ValueError):
        return 0.0


def hull_volume_det(pts: np.ndarray) -> float:
    """Determinant-based volume: fan of simplices from the centroid over the
    hull facets (independent arithmetic from the library's volume field)."""
    from scipy.spatial import ConvexHull, QhullError

    pts = np.asarray(pts, dtype=float)
    n = pts.shape[1]
    try:
        hull = ConvexHull(pts)
    except (QhullError, ValueError):
        return 0.0
    c = pts[hull.vertices].mean(axis=0)
    vol = 0.0
    for simplex in hull.simplices:
        mat = pts[simplex] - c
        vol += abs(np.linalg.det(mat)) / math.factorial(n)
    return float(vol)


# ---------------------------------------------------------------------------
# well-spread point configurations


@dataclass
class PointConfiguration:
    points: np.ndarray  # (N, n), inside B_R, pairwise >= 2 apart
    N: int
    mu: int
    n: int
    R: float
    seed: int
    certified_volume: float | None = None  # min mu-subset hull volume
    certificate: str = "none"  # 'exhaustive' | 'sampled' | 'none'
    subsets_checked: int = 0

    def target_volume(self, c: float = 1.0) -> float:
        """c (mu/N)^((mu-1)/(mu-n)) R^n."""
        expo = (self.mu - 1) / (self.mu - self.n)
        return c * (self.mu / self.N) ** expo * self.R**self.n

    def implied_constant(self) -> float | None:
        if self.certified_volume is None:
            return None
        return self.certified_volume / self.target_volume(1.0)

    def to_json_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "R": self.R,
            "N": self.N,
            "mu": self.mu,
            "n": self.n,
            "seed": self.seed,
            "certified_volume": self.certified_volume,
            "certificate": self.certificate,
        }


def _sample_lattice_sites(n: int, N: int, R: float, rng, step: int = 3) -> np.ndarray:
    """N distinct sites of step*Z^n inside B_{R-1}: separation >= step comes
    for free and the draw is fully vectorized (used for large N)."""
    k = int((R - 1) // step)
    ax = np.arange(-k, k + 1)
    grids = np.meshgrid(*([ax] * n), indexing="ij")
    sites = np.stack([g.ravel() for g in grids], axis=-1) * step
    sites = sites[(sites**2).sum(axis=1) <= (R - 1) ** 2]
    if len(sites) < N:
        raise PackingError(f"only {len(sites)} lattice sites available for {N} points")
    pick = rng.choice(len(sites), size=N, replace=False)
    return sites[pick].astype(float)


def _sample_separated(n: int, N: int, R: float, rng, min_sep: float = 2.0, budget: int = 400) -> np.ndarray:
    """Rejection sampling with a cell hash; PackingError when infeasible."""
    from .extension import ball_volume

    if N * ball_volume(n, min_sep / 2) > 0.3 * ball_volume(n, max(R - 1, 1)):
        raise PackingError(f"{N} points at separation {min_sep} will not pack into B_{R}")
    cell = min_sep / math.sqrt(n)
    grid: dict[tuple, np.ndarray] = {}
    pts: list[np.ndarray] = []
    neigh = range(-2, 3)
    offsets = np.array(np.meshgrid(*([list(neigh)] * n), indexing="ij")).reshape(n, -1).T
    tries = 0
    while len(pts) < N and tries < budget * N:
        tries += 1
        cand = rng.uniform(-R + 1, R - 1, size=n)
        if (cand**2).sum() > (R - 1) ** 2:
            continue
        key = tuple((cand // cell).astype(np.int64))
        ok = True
        for o in offsets:
            k2 = tuple(np.asarray(key) + o)
            if k2 in grid and ((grid[k2] - cand) ** 2).sum() < min_sep**2:
                ok = False
                break
        if ok:
            grid[key] = cand
            pts.append(cand)
    if len(pts) < N:
        raise PackingError(f"placed only {len(pts)}/{N} points within the retry budget")
    return np.array(pts)


def min_subset_hull(
    points: np.ndarray, mu: int, exhaustive: bool, rng=None, samples: int = 20000
) -> tuple[float, int]:
    """Minimum hull volume over mu-subsets: all of them, or a random sample."""
    N = len(points)
    n = points.shape[1]
    vol = hull_area_2d if n == 2 else hull_volume
    best = np.inf
    checked = 0
    if exhaustive:
        for idx in combinations(range(N), mu):
            v = vol(points[list(idx)])
            checked += 1
            if v < best:
                best = v
    else:
        assert rng is not None
        for _ in range(samples):
            idx = rng.choice(N, size=mu, replace=False)
            v = vol(points[idx])
            checked += 1
            if v < best:
                best = v
    return float(best), checked


def spread_points(
    n: int,
    N: int,
    mu: int,
    R: float,
    seed: int = 0,
    verify: str = "auto",
    min_sep: float = 2.0,
    improve_rounds: int = 6,
    target_c: float = 0.02,
    sample_budget: int = 20000,
) -> PointConfiguration:
    """N points in B_R, pairwise >= min_sep apart, with every mu-subset's
    convex hull volume bounded below.

    Such configurations exist for some dimensional constant, and random
    separated configurations achieve the bound with high probability at
    these sizes, so the construction is rejection sampling plus a few greedy
    re-draw rounds targeting subsets that fall under target_c times the
    nominal volume.  Verification is
    exhaustive when the subset count is small (or verify='exhaustive'),
    sampled otherwise; the certificate records which.
    """
    if mu < n + 2:
        raise ValueError("need mu >= n + 2")
    if N < mu:
        raise ValueError("need N >= mu")
    rng = np.random.default_rng(seed)
    if N > 4000:
        pts = _sample_lattice_sites(n, N, R, rng)
        min_sep = 2.0
    else:
        pts = _sample_separated(n, N, R, rng, min_sep=min_sep)
    expo = (mu - 1) / (mu - n)
    nominal = (mu / N) ** expo * R**n
    vol = hull_area_2d if n == 2 else hull_volume

    # greedy re-draw of points in violating subsets
    for _ in range(improve_rounds):
        worst_v, worst_idx = np.inf, None
        for _ in range(min(sample_budget, 4000)):
            idx = rng.choice(N, size=mu, replace=False)
            v = vol(pts[idx])
            if v < worst_v:
                worst_v, worst_idx = v, idx
        if worst_v >= target_c * nominal:
            break
        j = worst_idx[int(rng.integers(mu))]
        for _ in range(200):
            cand = rng.uniform(-R + 1, R - 1, size=n)
            if (cand**2).sum() > (R - 1) ** 2:
                continue
            d = ((pts - cand) ** 2).sum(axis=1)
            d[j] = np.inf
            if d.min() >= min_sep**2:
                pts[j] = cand
                break

    n_subsets = math.comb(N, mu)
    exhaustive = verify == "exhaustive" or (verify == "auto" and n_subsets <= 200000)
    if verify == "exhaustive" and n_subsets > 5_000_000:
        raise ValueError(f"exhaustive verification over {n_subsets} subsets is intractable")
    best, checked = min_subset_hull(pts, mu, exhaustive, rng=rng, samples=sample_budget)
    return PointConfiguration(
        points=pts, N=N, mu=mu, n=n, R=R, seed=seed,
        certified_volume=best,
        certificate="exhaustive" if exhaustive else "sampled",
        subsets_checked=checked,
    )


def multibush_weight(config: PointConfiguration) -> Weight:
    """Indicator of the union of unit balls at the configuration points
    (single-cell lattice realization)."""
    return indicator_cells(config.points, config.R)


# ---------------------------------------------------------------------------
# serialization


def weight_to_json_dict(w: Weight) -> dict:
    return {
        "points": np.asarray(w.points).tolist(),
        "values": w.values.tolist(),
        "R": w.ball_radius,
        "n": w.n,
    }


def weight_from_json_dict(data: dict) -> Weight:
    return Weight(
        int(data["n"]),
        np.asarray(data["points"], dtype=np.int64),
        np.asarray(data["values"], dtype=float),
        float(data["R"]),
    )


def weight_to_field(w: Weight):
    """Dense materialization in the shared field binary layout."""
    from .fields import Field, GridSpec

    radius = float(np.abs(w.points).max(initial=1))
    grid = GridSpec(n=w.n, radius=radius)
    vals = np.zeros(grid.shape)
    k = grid.half_count
    idx = np.asarray(w.points, dtype=np.int64) + k
    vals[tuple(idx.T)] = w.values
    return Field(grid=grid, values=vals.astype(complex))


def weight_from_field(f, ball_radius: float | None = None) -> Weight:
    pts = f.grid.points()
    vals = np.real(f.values.ravel())
    keep = vals > 0
    return Weight(
        f.grid.n,
        np.rint(pts[keep]).astype(np.int64),
        vals[keep],
        ball_radius if ball_radius is not None else f.grid.radius,
    )
