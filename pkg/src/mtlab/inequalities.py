"""Left- and right-hand sides of the weighted inequalities, and the
decoupling monitors.

All implicit constants in the right-hand sides are set to 1: ratios absorb
them, and what the harness watches is boundedness of lhs/rhs across a corpus
and the slope of log-ratio against log R.  Powers of R come from the exact
exponent table; the eps-factor R^eps is applied explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boxes import AnisotropicBox, family, plank, tile_index
from .errors import ConfigError
from .exponents import ExponentTable
from .extension import CurveDensity, extend_at
from .fields import Field
from .packets import PacketSet
from .weights import Weight, sup_mass


@dataclass
class InequalityInstance:
    ineq_id: str
    n: int
    R: float
    boxes: list[AnisotropicBox]
    weight: Weight
    packets: Optional[PacketSet] = None
    density: Optional[CurveDensity] = None
    epsilon: float = 0.05
    K: int = 10
    seed: int = 0
    label: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def table(self) -> ExponentTable:
        return ExponentTable(self.n)

    @property
    def r(self) -> float:
        return float(self.table.r)

    def input_l2sq(self) -> float:
        """||f||_2^2 for packet instances (exact Gram) or ||g||^2 for
        extension instances."""
        if self.packets is not None:
            return self.packets.l2sq()
        assert self.density is not None
        return self.density.l2sq()


def weighted_energy(f, w: Weight, R: Optional[float] = None) -> float:
    """sum |f(x)|^2 w(x) over the weight's lattice points; for extension
    instances pass R to restrict to the ball B_R."""
    pts = np.asarray(w.points, dtype=float)
    vals = w.values
    if R is not None:
        keep = (pts**2).sum(axis=1) <= R**2 + 1e-9
        pts, vals = pts[keep], vals[keep]
    if len(pts) == 0:
        return 0.0
    if isinstance(f, PacketSet):
        fv = f.eval_at(pts)
    elif isinstance(f, Field):
        fv = f.at(pts)
    else:
        fv = f(pts)
    return float(np.sum(np.abs(fv) ** 2 * vals))


def lhs_weighted_energy(inst: InequalityInstance) -> float:
    if inst.packets is not None:
        return weighted_energy(inst.packets, inst.weight)
    assert inst.density is not None
    fn = lambda p: extend_at(inst.density, inst.R, p, fast=True)  # noqa: E731
    return weighted_energy(fn, inst.weight, R=inst.R)


# ---------------------------------------------------------------------------
# weight masses around tiles (with the rapidly-decaying dilate terms)


def _tile_masses(
    w: Weight, box: AnisotropicBox, tiles: np.ndarray, r: float, rhos: list[float]
) -> np.ndarray:
    """sum of w^r over the rho-dilates of the given tiles: (len(tiles),
    len(rhos)).  Chebyshev distance in u-coordinates is exact for dilates."""
    pv = w.power_values(r)
    u = box.u_coords(np.asarray(w.points, dtype=float))
    out = np.zeros((len(tiles), len(rhos)))
    chunk = max(1, (1 << 22) // max(len(w.points), 1))
    for i0 in range(0, len(tiles), chunk):
        cheb = np.max(np.abs(u[None, :, :] - tiles[i0 : i0 + chunk, None, :]), axis=-1)
        for j, rho in enumerate(rhos):
            out[i0 : i0 + chunk, j] = (cheb <= rho / 2.0) @ pv
    return out


def _candidate_tiles(w: Weight, box: AnisotropicBox, ring: int = 1) -> np.ndarray:
    idx = tile_index(box, np.asarray(w.points, dtype=float))
    seen = {tuple(m) for m in idx}
    if ring:
        offs = np.stack(np.meshgrid(*([np.arange(-ring, ring + 1)] * box.n), indexing="ij"), axis=-1).reshape(-1, box.n)
        seen = {tuple(m + o) for m in idx for o in offs}
    return np.array(sorted(seen), dtype=float)


def _binned_dilate_masses(w: Weight, box: AnisotropicBox, r: float, rho: float):
    """Exact w^r-mass of the rho-dilate of every tile that catches weight
    (rho < 4): accumulate each point into the tiles whose dilate contains it."""
    pv = w.power_values(r)
    u = box.u_coords(np.asarray(w.points, dtype=float))
    base = np.rint(u).astype(np.int64)
    h = int(math.ceil((rho - 1.0) / 2.0 + 1e-12))
    offs = np.stack(np.meshgrid(*([np.arange(-h, h + 1)] * box.n), indexing="ij"), axis=-1).reshape(-1, box.n)
    all_keys, all_vals = [], []
    for o in offs:
        m = base + o
        inside = np.all(np.abs(u - m) <= rho / 2.0 + 1e-12, axis=1)
        if inside.any():
            all_keys.append(m[inside])
            all_vals.append(pv[inside])
    if not all_keys:
        return {}
    keys = np.concatenate(all_keys)
    vals = np.concatenate(all_vals)
    # pack rows into single int64 keys (indices stay far below 2^20)
    packed = np.zeros(len(keys), dtype=np.int64)
    for j in range(box.n):
        packed = packed * (1 << 21) + (keys[:, j] + (1 << 20))
    uniq, first, inv = np.unique(packed, return_index=True, return_inverse=True)
    sums = np.bincount(inv, weights=vals, minlength=len(uniq))
    return {tuple(keys[i]): float(s) for i, s in zip(first, sums)}


def plank_sup_with_rapdec(
    w: Weight, boxes: list[AnisotropicBox], r: float, R: float, eps: float, K: int,
    rho_main: Optional[float] = None, top: int = 64,
) -> float:
    """sup over all dual tiles of w^r(rho_main T) + R^-K sup_m 2^-mK w^r(2^m T).

    The main term is exact (binning over every tile whose dilate catches
    weight).  The dilate series is evaluated exactly on the heaviest tiles;
    for the rest it is bracketed by its uniform bound R^-K 2^-K w^r(R^n),
    which is ~2^-(K+K log2 R) of the main term and cannot move the sup."""
    rho_main = R**eps if rho_main is None else rho_main
    diam = 2.0 * max(float(np.abs(w.points).max(initial=1.0)), 1.0)
    m_max = max(1, int(math.ceil(math.log2(4.0 * diam))))
    m_eval = min(m_max, 4)  # larger dilates are covered by the tail bound
    rhos = [2.0**m for m in range(1, m_eval + 1)]
    decay = np.array([2.0 ** (-m * K) for m in range(1, m_eval + 1)])
    total_pow = float(np.sum(w.power_values(r)))
    rap_tail = 2.0 ** (-(m_eval + 1) * K) * total_pow
    rap_bound = R ** (-K) * (2.0**-K * total_pow)
    best = 0.0
    for box in boxes:
        acc = _binned_dilate_masses(w, box, r, rho_main)
        if not acc:
            continue
        keys = sorted(acc, key=acc.get, reverse=True)[:top]
        tiles = np.array(keys, dtype=float)
        masses = _tile_masses(w, box, tiles, r, rhos)
        rap = np.maximum(np.max(masses * decay[None, :], axis=1), rap_tail)
        combined = np.array([acc[k] for k in keys]) + R ** (-K) * rap
        best = max(best, float(combined.max()))
        if len(acc) > top:
            rest = acc[sorted(acc, key=acc.get, reverse=True)[top]]
            best = max(best, rest + rap_bound)
    return best


def packet_tile_sum_with_rapdec(
    ps: PacketSet, w: Weight, r: float, R: float, eps: float, K: int
) -> tuple[float, float]:
    """(main, rapdec) terms of the full weighted-decoupling right-hand side:
    main = sum_T ||f_T||_2^2 w^r(2 R^eps T)/|T|,
    rapdec = sup_m 2^-mK sum_T ||f_T||_2^2 w^r(2^m T)/|2^m T|."""
    diam = 2.0 * max(float(np.abs(w.points).max(initial=1.0)), 1.0)
    m_max = max(1, int(math.ceil(math.log2(4.0 * diam))))
    rhos = [2.0 * R**eps] + [2.0**m for m in range(1, m_max + 1)]
    main = 0.0
    rap_sums = np.zeros(m_max)
    for i, box in enumerate(ps.boxes):
        if len(ps.amps[i]) == 0:
            continue
        norms = ps.packet_l2sq(i)
        masses = _tile_masses(w, box, ps.ms[i].astype(float), r, rhos)
        vol = box.tile_volume
        main += float(np.sum(norms * masses[:, 0]) / vol)
        for m in range(1, m_max + 1):
            rap_sums[m - 1] += float(np.sum(norms * masses[:, m]) / (2.0 ** (m * ps.n) * vol))
    rap = max(
        (2.0 ** (-m * K) * rap_sums[m - 1] for m in range(1, m_max + 1)), default=0.0
    )
    return main, rap


# ---------------------------------------------------------------------------
# right-hand sides


def rhs_functional(ineq_id: str, inst: InequalityInstance) -> float:
    """The inequality's right-hand side with all constants set to 1."""
    t = inst.table
    r = inst.r
    R, eps, K = inst.R, inst.epsilon, inst.K
    w = inst.weight
    reps = R**eps

    if ineq_id in ("cor33", "cor34", "cor35", "thm11", "thm16", "thm41"):
        kind = {"cor33": "L", "cor34": "P", "cor35": "S", "thm11": "S", "thm16": "P", "thm41": "S"}[ineq_id]
        fam = family(kind, inst.boxes, R)
        sup_val, _ = sup_mass(w, fam, r)  # already the (sup w^r)^(1/r)
        power = float(t.rhs_power(ineq_id))
        return reps * R**power * sup_val * inst.input_l2sq()

    if ineq_id == "cor31a":
        if inst.packets is None:
            raise ConfigError("cor31a needs a packet instance")
        sup_val = plank_sup_with_rapdec(w, inst.boxes, r, R, eps, K)
        power = float(t.rhs_power("cor31a"))
        return reps * R**power * sup_val ** (1.0 / r) * inst.input_l2sq()

    if ineq_id == "thm22":
        if inst.packets is None:
            raise ConfigError("thm22 needs a packet instance")
        main, rap = packet_tile_sum_with_rapdec(inst.packets, w, r, R, eps, K)
        l2 = inst.packets.l2sq()
        p = float(t.p)
        return (reps * main ** (1.0 / r) + R ** (-K) * rap ** (1.0 / r)) * l2 ** (2.0 / p)

    raise ConfigError(f"unknown inequality id {ineq_id!r}")


def instance_ratio(inst: InequalityInstance) -> tuple[float, float, float]:
    lhs = lhs_weighted_energy(inst)
    rhs = rhs_functional(inst.ineq_id, inst)
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    return lhs, rhs, ratio


# ---------------------------------------------------------------------------
# decoupling monitors


def _per_theta_values(ps: PacketSet, pts: np.ndarray):
    """Yields (i, values of f_theta at pts) for each occupied box."""
    for i in range(len(ps.boxes)):
        if len(ps.amps[i]) == 0:
            continue
        yield i, ps.eval_theta_at(i, pts)


def refined_decoupling_check(
    ps: PacketSet, R: float, p: float, epsilon: float = 0.05,
    count_mode: str = "containment",
) -> dict:
    """Stratify the R^(1/n)-cubes of B_R by how many R^eps-dilated packet
    tiles contain them, take the stratum with the largest L^p mass of
    f = sum f_T, and compare against R^eps M^(1/2-1/p) (sum ||f_T||_p^p)^(1/p).
    """
    n = ps.n
    box0 = ps.boxes[0]
    side = 1.0 / box0.delta
    reps = R**epsilon

    # tiles meeting B_R (exact distance)
    tiles = []
    for i, box in enumerate(ps.boxes):
        for m, a in zip(ps.ms[i], ps.amps[i]):
            t = plank(box, m)
            if t.distance_to_point(np.zeros(n)) <= R:
                tiles.append((i, tuple(int(v) for v in m), t, a))
    if not tiles:
        return {"lhs": 0.0, "rhs": 0.0, "ratio": 0.0, "M": 0}

    k = int(math.ceil(R / side))
    ax = (np.arange(-k, k) + 0.5) * side
    grids = np.meshgrid(*([ax] * n), indexing="ij")
    centers = np.stack([g.ravel() for g in grids], axis=-1)
    centers = centers[(centers**2).sum(axis=1) <= (R + side) ** 2]

    counts = np.zeros(len(centers), dtype=np.int64)
    for i, m, t, a in tiles:
        if count_mode == "containment":
            hit = _cubes_in_dilate(t, centers, side, reps)
        else:
            hit = _cubes_meeting_dilate(t, centers, side, reps)
        counts += hit
    # lattice points grouped by cube
    pts, cube_of = _ball_lattice_by_cube(n, R, side, centers)
    fv = np.abs(ps.eval_at(pts)) ** p

    sub = PacketSet([ps.boxes[i] for i, _, _, _ in tiles],
                    [np.array([m]) for _, m, _, _ in tiles],
                    [np.array([a]) for _, _, _, a in tiles])
    rhs_norm = sum(float(sub.packet_lp_p(j, p)[0]) for j in range(len(tiles)))

    best = None
    mmax = int(counts.max())
    M = 1
    while M / 2 <= mmax:
        stratum = (counts > M / 2) & (counts <= M)
        if stratum.any():
            mask = stratum[cube_of]
            lhs_p = float(fv[mask].sum())
            if best is None or lhs_p > best[0]:
                best = (lhs_p, M)
        M *= 2
    if best is None:
        best = (float(fv.sum()), 1)
    lhs = best[0] ** (1.0 / p)
    Mstar = max(best[1], 1)
    rhs = reps * Mstar ** (0.5 - 1.0 / p) * rhs_norm ** (1.0 / p)
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else 0.0, "M": Mstar,
            "tiles": len(tiles)}


def _cubes_in_dilate(t, centers, side, rho):
    u = t.box.u_coords(centers)
    l1 = 0.5 * side * np.abs(t.box.lin).sum(axis=0)
    c = t.center_u()
    h = 0.5 * rho * (t.hi - t.lo)
    return np.all((u - l1[None, :] >= c - h) & (u + l1[None, :] <= c + h), axis=1)


def _cubes_meeting_dilate(t, centers, side, rho):
    u = t.box.u_coords(centers)
    l1 = 0.5 * side * np.abs(t.box.lin).sum(axis=0)
    c = t.center_u()
    h = 0.5 * rho * (t.hi - t.lo)
    return np.all((u + l1[None, :] >= c - h) & (u - l1[None, :] <= c + h), axis=1)


def _ball_lattice_by_cube(n, R, side, centers):
    k = int(math.floor(R))
    ax = np.arange(-k, k + 1)
    grids = np.meshgrid(*([ax] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1).astype(float)
    pts = pts[(pts**2).sum(axis=1) <= R**2 + 1e-9]
    # map each lattice point to the index of its cube (cube j covers
    # [center - side/2, center + side/2))
    lo = centers.min(axis=0) - side / 2.0
    idx = np.floor((pts - lo[None, :]) / side).astype(np.int64)
    key = {}
    ic = np.floor((centers - lo[None, :]) / side).astype(np.int64)
    for j, kk in enumerate(map(tuple, ic)):
        key[kk] = j
    cube_of = np.array([key.get(tuple(kk), -1) for kk in idx])
    ok = cube_of >= 0
    return pts[ok], cube_of[ok]


def bdg_decoupling_check(ps: PacketSet, p: float, window: float) -> dict:
    """||f||_p / (sum_theta ||f_theta||_p^2)^(1/2) on a lattice window (the
    R^eps factor is omitted; this is a boundedness monitor)."""
    pts = _window_lattice(ps.n, window)
    total = np.zeros(len(pts), dtype=complex)
    denom = 0.0
    for i, vals in _per_theta_values(ps, pts):
        total += vals
        denom += float(np.sum(np.abs(vals) ** p)) ** (2.0 / p)
    lhs = float(np.sum(np.abs(total) ** p)) ** (1.0 / p)
    rhs = denom**0.5
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else 0.0}


def square_function_monitor(ps: PacketSet, p: float, window: float) -> dict:
    """||f||_p^p / (||(sum |f_theta|^2)^(1/2)||_inf^(p-2) ||f||_2^2)."""
    pts = _window_lattice(ps.n, window)
    total = np.zeros(len(pts), dtype=complex)
    sq = np.zeros(len(pts))
    for i, vals in _per_theta_values(ps, pts):
        total += vals
        sq += np.abs(vals) ** 2
    lhs = float(np.sum(np.abs(total) ** p))
    sup_sq = float(sq.max())
    l2 = ps.l2sq()
    rhs = sup_sq ** ((p - 2.0) / 2.0) * l2
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else 0.0,
            "sup_square": sup_sq}


def _window_lattice(n: int, radius: float) -> np.ndarray:
    k = int(math.floor(radius))
    ax = np.arange(-k, k + 1).astype(float)
    grids = np.meshgrid(*([ax] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)
