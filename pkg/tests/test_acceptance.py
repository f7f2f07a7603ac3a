"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Desk scales: n=2 with R in {2^5..2^9} (plus 2^10 headroom where cheap),
n=3 with R in {2^6..2^9}.  Tolerances are pinned here, not configurable.
"""

import math
import time

import numpy as np
import pytest

from mtlab.boxes import curvature_boxes
from mtlab.corpus import make_instance, random_packets
from mtlab.curves import get_curve, moment_curve, sine_curve_3d
from mtlab.exponents import ExponentTable
from mtlab.extension import agmon_hormander_ratio, ball_l2sq_mc, sample_density
from mtlab.extremal import (arc_sum_instance, axiom_check, build_multibush, bush_instance,
                            multibush_certificate, single_packet_instance)
from mtlab.fields import GridSpec
from mtlab.inequalities import instance_ratio, refined_decoupling_check
from mtlab.packets import PacketSet, decompose, parseval_check, random_band_field, reconstruct
from mtlab.sweeps import fit_slope
from mtlab.weights import spread_points


def report(name: str, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


@pytest.fixture(scope="module")
def boxes_rt():
    return curvature_boxes(moment_curve(2), 2**8)[0]


def _corpus_field(boxes, i: int):
    bf = random_band_field(boxes, seed=1000 + i, deg=2, active=[i % len(boxes)])
    grid = GridSpec(n=2, radius=64.0)
    return bf, bf.theta_field(i % len(boxes), grid), grid


def test_criterion_1_round_trip(boxes_rt):
    """Wave-packet round trip: 20 random sleeve fields, n=2, R=2^8."""
    t0 = time.time()
    worst = 0.0
    for i in range(20):
        bf, f_in, grid = _corpus_field(boxes_rt, i)
        theta = boxes_rt[i % len(boxes_rt)]
        coeffs, meta = decompose(f_in, theta, m_radius=8)
        f_out = reconstruct(coeffs, [theta], grid)
        rel = np.sqrt(np.sum(np.abs(f_out.values - f_in.values) ** 2)
                      / np.sum(np.abs(f_in.values) ** 2))
        budget = 1e-6 + np.sqrt(meta["tail_energy_rel"])
        worst = max(worst, rel - budget)
        assert rel <= budget, (i, rel, budget)
    dt = time.time() - t0
    ok = dt <= 60.0 and worst <= 0.0
    report("criterion 1 (round trip)", ok, f"20 fields, worst slack {worst:.2e}, {dt:.1f}s <= 60s")
    assert ok


def test_criterion_2_parseval(boxes_rt):
    """Parseval bookkeeping with the profile-norm factor on the same corpus."""
    t0 = time.time()
    worst = 0.0
    for i in range(20):
        bf, f_in, _ = _corpus_field(boxes_rt, i)
        theta = boxes_rt[i % len(boxes_rt)]
        lhs, rhs, ratio = parseval_check(f_in, theta, m_radius=96)
        worst = max(worst, abs(ratio - 1.0))
        assert abs(ratio - 1.0) <= 1e-4, (i, ratio)
    report("criterion 2 (parseval)", True, f"max |ratio-1| = {worst:.2e} <= 1e-4 ({time.time()-t0:.1f}s)")


def test_criterion_3_agmon_hormander_slopes():
    """Trace-inequality growth exponents: n-1 for constant densities."""
    t0 = time.time()
    c2 = moment_curve(2)
    Rs2 = [2**5, 2**6, 2**7, 2**8, 2**9]
    vals = []
    for R in Rs2:
        g = sample_density(c2, R, 1.0)
        ratio = agmon_hormander_ratio(g, R, n_samples=8000, seed=1)
        vals.append(ratio * R)  # raw growth of the ball integral over ||g||^2
    slope2, _ = fit_slope(Rs2, vals)
    c3 = sine_curve_3d()
    Rs3 = [2**6, 2**7, 2**8, 2**9]
    vals3 = []
    for R in Rs3:
        g = sample_density(c3, R, 1.0)
        vals3.append(agmon_hormander_ratio(g, R, n_samples=8000, seed=1) * R**2)
    slope3, _ = fit_slope(Rs3, vals3)
    dt = time.time() - t0
    ok = abs(slope2 - 1.0) <= 0.15 and abs(slope3 - 2.0) <= 0.2 and dt <= 600
    report("criterion 3 (trace slopes)", ok,
           f"n=2 slope {slope2:.3f} (1 +- 0.15), n=3 slope {slope3:.3f} (2 +- 0.2), {dt:.0f}s <= 600s")
    assert ok


def test_criterion_4_arc_sum_slope():
    """Arc-sum densities: ball integral over sum|a_v|^2 grows like R^(n-2)."""
    c2 = moment_curve(2)
    rng = np.random.default_rng(4)
    Rs = [2**5, 2**6, 2**7, 2**8, 2**9]
    vals = []
    for R in Rs:
        K = 8
        coeffs = np.exp(2j * np.pi * rng.uniform(size=K))
        g = arc_sum_instance(c2, R, coeffs)
        v, _ = ball_l2sq_mc(g, R, n_samples=8000, seed=2)
        vals.append(v / K)
    slope, _ = fit_slope(Rs, vals)
    ok = abs(slope - 0.0) <= 0.15
    report("criterion 4 (arc-sum slope)", ok, f"slope {slope:.3f} (0 +- 0.15)")
    assert ok


def test_criterion_5_exact_exponents():
    """Exact rational identities of the exponent table, zero tolerance."""
    from fractions import Fraction

    for n in range(2, 7):
        t = ExponentTable(n)
        assert all(t.checks().values()), (n, t.checks())
    t2, t3 = ExponentTable(2), ExponentTable(3)
    assert t2.a_mt == Fraction(1, 3)
    assert t2.a_tube == Fraction(1, 3)
    assert t2.r == Fraction(3, 2)
    assert t3.lower_slab == Fraction(-3, 2)
    assert t3.lower_tube == Fraction(-5, 6)
    assert t3.lower_hyperslab == Fraction(-5, 3)
    report("criterion 5 (exact exponents)", True, "identities exact for n=2..6")


IDS6 = ("cor31a", "cor33", "cor34", "cor35", "thm22", "thm11", "thm16")


@pytest.mark.parametrize("ineq", IDS6)
def test_criterion_6_monitors(ineq):
    """100-instance corpus per id: bounded ratios, slope of log-ratio <= 0.2."""
    Rs = [2**5, 2**6, 2**7, 2**8, 2**9]
    per_scale = 20
    means = []
    cmax = 0.0
    for R in Rs:
        vals = []
        for seed in range(per_scale):
            inst = make_instance(ineq, 2, R, seed)
            _, _, ratio = instance_ratio(inst)
            assert np.isfinite(ratio) and ratio >= 0
            vals.append(max(ratio, 1e-300))
            cmax = max(cmax, ratio)
        means.append(float(np.mean(np.log2(vals))))
    slope = float(np.polyfit(np.log2(Rs), means, 1)[0])
    ok = slope <= 0.2 and cmax < 1e3
    report(f"criterion 6 ({ineq})", ok, f"C_emp = {cmax:.4g}, slope {slope:+.3f} <= 0.2, 100 instances")
    assert ok


def test_criterion_7_hull_certificate():
    """Exhaustive mu-subset hull-volume certificate at n=2, N=20, mu=6, R=32."""
    t0 = time.time()
    cfg = spread_points(2, 20, 6, 32, seed=1, verify="exhaustive")
    dt = time.time() - t0
    c = cfg.implied_constant()
    ok = cfg.certificate == "exhaustive" and cfg.certified_volume > 0 and c > 0 and dt <= 300
    report("criterion 7 (hull certificate)", ok,
           f"min volume {cfg.certified_volume:.3f} over {cfg.subsets_checked} subsets, "
           f"c = {c:.3f} > 0, {dt:.0f}s <= 300s")
    assert ok


def test_criterion_8_multibush_witnesses():
    """Multi-bush constructions at n=3, R=2^9 for all three variants."""
    t0 = time.time()
    details = []
    ok = True
    for variant in ("S", "L", "P"):
        struct, w, plan = build_multibush(variant, 3, 2**9, seed=1)
        cert = multibush_certificate(struct, plan, w)
        rep = axiom_check(struct, n_points=2048, n_translates=40)
        logR = math.log(2**9)
        m_ok = plan.meta["m"] >= plan.meta["target"]
        v_ok = (cert["min_alignment_ratio"] >= 0.1 and cert["c_prime"] > 0
                and rep["pass"] and m_ok and cert["growth_constant"] > 0)
        ok = ok and v_ok
        details.append(
            f"{variant}: m={plan.meta['m']} c'={cert['c_prime']:.3g} "
            f"align={cert['min_alignment_ratio']:.2f} growth_c={cert['growth_constant']:.3g} "
            f"axioms={'ok' if rep['pass'] else 'FAIL'}"
        )
        if variant == "S":
            # headline certificate: ratio >= c' (log R)^-3 R^(-5/3), c' > 0
            assert cert["lower_exponent"] == pytest.approx(-5.0 / 3.0)
    dt = time.time() - t0
    ok = ok and dt <= 1800
    report("criterion 8 (multibush)", ok, "; ".join(details) + f"; {dt:.0f}s <= 1800s")
    assert ok


def test_criterion_9_refined_monitor():
    """Refined decoupling ratios: single packet below the profile constant,
    bush and random corpora below 10 across scales."""
    boxes = curvature_boxes(moment_curve(2), 2**8)[0]
    single = single_packet_instance(2, 2**8)
    rep_single = refined_decoupling_check(single.packets, 2**8, p=6.0)
    assert rep_single["M"] == 1 and rep_single["ratio"] <= 1.0

    worst = 0.0
    for R in (2**6, 2**7, 2**8):
        bx = curvature_boxes(moment_curve(2), R)[0]
        bush = bush_instance(2, R)
        rep = refined_decoupling_check(bush.packets, R, p=6.0)
        worst = max(worst, rep["ratio"])
        for seed in range(7):
            ps = random_packets(bx, R, np.random.default_rng(100 + seed))
            rep = refined_decoupling_check(ps, R, p=6.0)
            worst = max(worst, rep["ratio"])
    ok = worst <= 10.0
    report("criterion 9 (refined monitor)", ok,
           f"single {rep_single['ratio']:.3f} <= 1, corpus max {worst:.3f} <= 10")
    assert ok
