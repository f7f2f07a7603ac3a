"""Anisotropic curvature boxes, their dual plank lattices, and the derived
slab / tube / hyperplane-slab families.

Scale conventions: R is snapped up to a power of two (with a warning recorded
by curvature_boxes); the box scale is the largest dyadic delta = 2^-r with
2^-r <= R^(-1/n).  For R in 2^(n N) the two coincide.  Frequency boxes live
at scale delta^j along the j-th derivative direction; the dual planks tile
space with sides ~ delta^-j = R^(j/n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import CurveSpec, frenet_frame


def normalize_scale(R: float) -> tuple[int, bool]:
    """Snap R up to a power of two; flag whether rounding happened."""
    R = float(R)
    if R < 2:
        raise ValueError("scale R must be at least 2")
    k = math.ceil(math.log2(R) - 1e-12)
    snapped = 2**k
    return snapped, (snapped != R)


def dyadic_delta(R: float, n: int) -> float:
    """Largest dyadic 2^-r not exceeding R^(-1/n)."""
    r = math.ceil(math.log2(R) / n - 1e-12)
    return 2.0**-r


@dataclass(frozen=True)
class AnisotropicBox:
    """Frequency box theta = center + sum_j delta^j G^(j)(xi_i) eta_j / j!,
    eta in [-1,1]^n.  Columns of `lin` are the half-axis vectors; `tmat`,
    the transpose of the linear part, maps space to tile coordinates."""

    curve: CurveSpec
    index: int
    xi: float
    delta: float
    center: np.ndarray  # Gamma(xi_i), shape (n,)
    lin: np.ndarray  # shape (n, n), column j-1 = delta^j G^(j)/j!
    pad: float = 0.0  # arc-containment padding, O(delta)

    @property
    def n(self) -> int:
        return self.curve.n

    @property
    def tmat(self) -> np.ndarray:
        return self.lin.T

    @property
    def det(self) -> float:
        """|det T_theta| = |det lin|; the dual tile volume is its inverse."""
        return abs(float(np.linalg.det(self.lin)))

    @property
    def tile_volume(self) -> float:
        return 1.0 / self.det

    def col_norms(self) -> np.ndarray:
        return np.linalg.norm(self.lin, axis=0)

    def u_coords(self, x: np.ndarray) -> np.ndarray:
        """u = T_theta x for points x of shape (..., n)."""
        return np.asarray(x, dtype=float) @ self.lin

    def freq_coords(self, xi_pts: np.ndarray) -> np.ndarray:
        """eta with xi = center + lin @ eta."""
        d = np.asarray(xi_pts, dtype=float) - self.center
        return np.linalg.solve(self.lin, d.T).T

    def contains_freq(self, xi_pts: np.ndarray, frac: float = 1.0) -> np.ndarray:
        """Membership of frequency points in frac*theta (plus the pad)."""
        eta = self.freq_coords(xi_pts)
        return np.all(np.abs(eta) <= frac * (1.0 + self.pad), axis=-1)

    def frenet(self):
        return frenet_frame(self.curve, self.xi)


def _taylor_pad(curve: CurveSpec, xi: float, delta: float, lin: np.ndarray) -> float:
    """Sampled bound on how far the arc's box coordinates exceed [-1,1]."""
    ts = np.linspace(-1.0, 1.0, 33)
    pts = curve.point(xi + ts * delta)
    eta = np.linalg.solve(lin, (pts - curve.point(xi)).T).T
    excess = np.max(np.abs(eta)) - 1.0
    return max(0.0, 2.0 * excess) + 1e-9


def curvature_boxes(curve: CurveSpec, R: float) -> tuple[list[AnisotropicBox], dict]:
    """Maximal delta-separated centers along the parameter interval, one box
    per center.  Returns (boxes, metadata); metadata records scale rounding
    and the dyadic convention factor."""
    R_snap, rounded = normalize_scale(R)
    n = curve.n
    delta = dyadic_delta(R_snap, n)
    lo, hi = curve.interval
    count = int(round((hi - lo) / delta))
    boxes = []
    for i in range(count):
        xi = lo + (i + 0.5) * delta
        curve.check_wellcurved(xi)
        cols = np.stack(
            [delta**j * curve.deriv(j, xi) / math.factorial(j) for j in range(1, n + 1)],
            axis=1,
        )
        pad = _taylor_pad(curve, xi, delta, cols)
        boxes.append(
            AnisotropicBox(
                curve=curve, index=i, xi=float(xi), delta=delta,
                center=curve.point(xi), lin=cols, pad=pad,
            )
        )
    meta = {
        "R": R_snap,
        "R_requested": float(R),
        "rounded": rounded,
        "delta": delta,
        "delta_vs_R": delta * R_snap ** (1.0 / n),
        "count": count,
    }
    return boxes, meta


# ---------------------------------------------------------------------------
# dual planks and u-space box regions


@dataclass(frozen=True)
class URegion:
    """Axis box in the u = T_theta x coordinates: lo <= u <= hi."""

    box: AnisotropicBox
    lo: np.ndarray
    hi: np.ndarray

    @property
    def n(self) -> int:
        return self.box.n

    def center_u(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def center_x(self) -> np.ndarray:
        return np.linalg.solve(self.box.tmat, self.center_u())

    def dilate(self, rho: float) -> "URegion":
        c = self.center_u()
        h = 0.5 * rho * (self.hi - self.lo)
        return URegion(self.box, c - h, c + h)

    def contains(self, x: np.ndarray) -> np.ndarray:
        u = self.box.u_coords(x)
        return np.all((u >= self.lo) & (u < self.hi), axis=-1)

    def contains_closed(self, x: np.ndarray) -> np.ndarray:
        u = self.box.u_coords(x)
        return np.all((u >= self.lo - 1e-12) & (u <= self.hi + 1e-12), axis=-1)

    def corners_x(self) -> np.ndarray:
        n = self.n
        out = np.empty((2**n, n))
        for k in range(2**n):
            u = np.where([(k >> j) & 1 for j in range(n)], self.hi, self.lo)
            out[k] = np.linalg.solve(self.box.tmat, u)
        return out

    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo) * self.box.tile_volume)

    def contains_ball(self, c: np.ndarray, rho: float = 1.0) -> bool:
        """Exact: u_j over B(c,rho) spans u_j(c) +- rho*|M_j|."""
        u = self.box.u_coords(c)
        r = rho * self.box.col_norms()
        return bool(np.all((u - r >= self.lo) & (u + r <= self.hi)))

    def separates_ball(self, c: np.ndarray, rho: float = 1.0) -> bool:
        """Sufficient condition for B(c,rho) and the region to be disjoint:
        some slab constraint already excludes the whole ball."""
        u = self.box.u_coords(c)
        r = rho * self.box.col_norms()
        return bool(np.any((u - r > self.hi) | (u + r < self.lo)))

    def contains_cube(self, center: np.ndarray, side: float, dilate: float = 1.0) -> bool:
        """Exact containment of an axis cube in the dilate of the region."""
        u = self.box.u_coords(center)
        l1 = 0.5 * side * np.abs(self.box.lin).sum(axis=0)
        c = self.center_u()
        h = 0.5 * dilate * (self.hi - self.lo)
        return bool(np.all((u - l1 >= c - h) & (u + l1 <= c + h)))

    def distance_to_point(self, c: np.ndarray, iters: int = 400) -> float:
        """Euclidean distance from c to the region (projected gradient in u)."""
        tmat = self.box.tmat
        binv = np.linalg.inv(tmat)  # x = binv @ u
        g = binv.T @ binv
        lip = float(np.linalg.norm(g, 2))
        u = np.clip(self.box.u_coords(c), self.lo, self.hi)
        target = np.asarray(c, dtype=float)
        for _ in range(iters):
            grad = g @ u - binv.T @ target
            u = np.clip(u - grad / lip, self.lo, self.hi)
        return float(np.linalg.norm(binv @ u - target))


def plank(box: AnisotropicBox, m: np.ndarray) -> URegion:
    """Dual tile T = T_theta^{-1}(m + [-1/2,1/2]^n)."""
    m = np.asarray(m, dtype=float)
    return URegion(box, m - 0.5, m + 0.5)


def tile_index(box: AnisotropicBox, x: np.ndarray) -> np.ndarray:
    """Lattice index of the tile containing each point (round half to even,
    ties measure zero; decompositions assign boundaries to the lower index)."""
    return np.rint(box.u_coords(x)).astype(np.int64)


def planks_near(box: AnisotropicBox, pts: np.ndarray, pad: int = 0) -> list[URegion]:
    """Planks whose index is within pad of some point's index (dedup)."""
    idx = tile_index(box, np.atleast_2d(pts))
    seen = set()
    out = []
    offsets = np.arange(-pad, pad + 1)
    grids = np.meshgrid(*([offsets] * box.n), indexing="ij")
    offs = np.stack([g.ravel() for g in grids], axis=-1)
    for m in idx:
        for o in offs:
            key = tuple((m + o).tolist())
            if key not in seen:
                seen.add(key)
                out.append(plank(box, np.array(key)))
    return out


@dataclass(frozen=True)
class HyperplaneSlab:
    """|<x, normal> - offset| <= halfwidth, normal a unit vector."""

    normal: np.ndarray
    offset: float
    halfwidth: float = 1.0

    def contains(self, x: np.ndarray) -> np.ndarray:
        s = np.asarray(x, dtype=float) @ self.normal
        return np.abs(s - self.offset) <= self.halfwidth

    def distance(self, x: np.ndarray) -> np.ndarray:
        s = np.asarray(x, dtype=float) @ self.normal
        return np.maximum(np.abs(s - self.offset) - self.halfwidth, 0.0)


def slab_count(box: AnisotropicBox) -> int:
    """Number of unit-thickness tangential slices of a plank: 1/delta."""
    return int(round(1.0 / box.delta))


def derived_family(region: URegion, kind: str, epsilon: float = 0.0) -> list[URegion]:
    """kind='L': slice the plank along the tangential u-axis into unit-thick
    slabs; kind='P': decompose a slab (or the R^eps-dilate of one) into
    1-tubes long in the final direction."""
    box = region.box
    n = box.n
    R = box.delta ** -n
    if kind == "L":
        base = region if epsilon == 0.0 else region.dilate(R**epsilon)
        k = max(1, int(math.ceil((base.hi[0] - base.lo[0]) / box.delta)))
        step = (base.hi[0] - base.lo[0]) / k
        out = []
        for i in range(k):
            lo = base.lo.copy()
            hi = base.hi.copy()
            lo[0] = base.lo[0] + i * step
            hi[0] = base.lo[0] + (i + 1) * step
            out.append(URegion(box, lo, hi))
        return out
    if kind == "P":
        base = region if epsilon == 0.0 else region.dilate(R**epsilon)
        if n == 2:
            return [base]  # a slab is already a 1-tube in the plane
        counts = []
        for j in range(1, n - 1):  # u-axes 2..n-1 (0-based 1..n-2)
            width = base.hi[j] - base.lo[j]
            counts.append(max(1, int(math.ceil(width / box.delta ** (j + 1)))))
        out = []
        from itertools import product

        for combo in product(*[range(c) for c in counts]):
            lo = base.lo.copy()
            hi = base.hi.copy()
            for j, (i, c) in enumerate(zip(combo, counts), start=1):
                width = base.hi[j] - base.lo[j]
                lo[j] = base.lo[j] + i * width / c
                hi[j] = base.lo[j] + (i + 1) * width / c
            out.append(URegion(box, lo, hi))
        return out
    raise ValueError(f"kind must be 'L' or 'P', got {kind!r}")


def hyperplane_slab(slab: URegion) -> HyperplaneSlab:
    """1-neighbourhood of the hyperplane through the slab's centre with
    normal along the tangent at the parent box's parameter."""
    frame = slab.box.frenet()
    normal = frame.tangent
    center = slab.center_x()
    return HyperplaneSlab(normal=normal, offset=float(center @ normal), halfwidth=1.0)


def incidence_count(
    cube_center: np.ndarray, side: float, planks: list[URegion], dilate: float = 1.0
) -> int:
    """#{T : cube subset dilate*T}; exact via per-axis corner bounds."""
    return sum(1 for t in planks if t.contains_cube(cube_center, side, dilate))


# ---------------------------------------------------------------------------
# sampled geometric families for sup computations


@dataclass(frozen=True)
class GeomFamily:
    """Family descriptor for sup-of-mass queries: one direction per curvature
    box, unit offset spacing; members enumerated lazily against a point set."""

    kind: str  # 'T' | 'L' | 'P' | 'S'
    boxes: list[AnisotropicBox] = field(repr=False)
    R: float

    def __post_init__(self):
        if self.kind not in ("T", "L", "P", "S"):
            raise ValueError(f"unknown family kind {self.kind!r}")


def family(kind: str, boxes: list[AnisotropicBox], R: float) -> GeomFamily:
    return GeomFamily(kind=kind, boxes=list(boxes), R=float(R))
