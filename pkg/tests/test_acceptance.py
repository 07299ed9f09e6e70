"""Acceptance criteria, one test and one summary line per criterion.

Lines are collected in ``conftest.ACCEPTANCE_LINES`` and printed in the
terminal summary of every pytest run.
"""
import json
import re
import subprocess
import sys
import time

import numpy as np

from twistorphase import bitwistor as bw
from twistorphase import kernel as kn
from twistorphase import phase as ph
from twistorphase import qgem
from twistorphase import twistors as tw
from twistorphase.spinors import SpacetimePoint
from twistorphase.worldline import PhysicalConstants, SpacetimeWorldline

from conftest import ACCEPTANCE_LINES, cplx

FIXTURE = 0.6328919370315393  # G m^2 T / (hbar r), CODATA 2018, m=1e-14 kg, r=2e-4 m, T=2 s


def record(label, ok, detail):
    line = f"criterion {label}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_1_reduction_identity():
    start = time.perf_counter()
    pairs = kn.random_separated_pairs(1000, seed=2024)
    rep = kn.reduction_check(pairs, kernel="det_kernel")
    elapsed = time.perf_counter() - start
    ok = (rep.sample_count == 1000 and rep.relative_spread < 1e-10
          and rep.cross_basis_deviation < 1e-10 and elapsed < 5)
    record("1", ok, f"det_kernel*interval^2 over {rep.sample_count} pairs: "
                    f"spread {rep.relative_spread:.3g}, cross-basis {rep.cross_basis_deviation:.3g}, "
                    f"{elapsed:.2f} s (limits 1e-10, 1e-10, 5 s)")
    assert ok


def test_criterion_1_normalized_kernel_supplement():
    # not a substitute for criterion 1: the same check on det C / I_AB
    start = time.perf_counter()
    pairs = kn.random_separated_pairs(1000, seed=2024)
    rep = kn.reduction_check(pairs, kernel="separation")
    elapsed = time.perf_counter() - start
    ok = (rep.sample_count == 1000 and rep.relative_spread < 1e-10
          and rep.cross_basis_deviation < 1e-10 and elapsed < 5
          and abs(rep.mean_ratio - kn.SEPARATION_KERNEL_CONSTANT) < 1e-10)
    record("1b (supplement)", ok,
           f"separation kernel*interval^2: spread {rep.relative_spread:.3g}, "
           f"cross-basis {rep.cross_basis_deviation:.3g}, mean {rep.mean_ratio.real:.15f}")
    assert ok


def test_criterion_2_conformal_invariance():
    rng = np.random.default_rng(2)
    worst = 0.0
    for seed in range(1000):
        a, b = (bw.from_pair(*(tw.Twistor(c) for c in cplx(rng, 2, 4))) for _ in range(2))
        g = tw.random_sl4(10_000 + seed)
        i0 = bw.invariant_I(a, b)
        i1 = bw.invariant_I(bw.sl4_act_bitwistor(g, a), bw.sl4_act_bitwistor(g, b))
        worst = max(worst, abs(i1 - i0) / abs(i0))
    simp = 0.0
    for _ in range(10_000):
        x = bw.from_pair(*(tw.Twistor(c) for c in cplx(rng, 2, 4)))
        simp = max(simp, bw.simplicity_check(x).residual)
    ok = worst < 1e-10 and simp < 1e-12
    record("2", ok, f"I_AB max relative change {worst:.3g} over 1000 SL(4,C) (limit 1e-10); "
                    f"simplicity max {simp:.3g} over 10^4 (limit 1e-12)")
    assert ok


def test_criterion_3_homogeneity():
    rng = np.random.default_rng(3)
    hom = 0.0
    cov = 0.0
    for seed in range(1000):
        z, w = (tw.Twistor(c) for c in cplx(rng, 2, 4))
        lam, mu = cplx(rng, 2)
        k0 = kn.scalar_kernel(z, w).value
        k1 = kn.scalar_kernel(tw.rescale(z, lam), tw.rescale(w, mu)).value
        hom = max(hom, abs(k1 * lam * mu - k0) / abs(k0))
        x = bw.from_pair(z, w)
        g = tw.random_gl2(seed)
        d = np.linalg.det(g)
        xg = bw.gl2_act(x, g)
        cov = max(cov, np.max(np.abs(xg.plucker - d * x.plucker)) / np.max(np.abs(d * x.plucker)))
    ok = hom < 1e-14 and cov < 1e-12
    record("3", ok, f"scalar_kernel degree (-1,-1) deviation {hom:.3g} (limit 1e-14); "
                    f"Plucker det(g) covariance {cov:.3g} (limit 1e-12)")
    assert ok


def test_criterion_4_gl2_probe():
    a = bw.point_to_bitwistor(SpacetimePoint(0.3, 1.0, 2.0, -1.0))
    b = bw.point_to_bitwistor(SpacetimePoint(-1.0, 0.5, -2.0, 3.0))
    inf = tw.InfinityTwistor("omega_block")
    rep = kn.gl2_scaling_probe(a, b, trials=1000, seed=4, infinity=inf)
    again = kn.gl2_scaling_probe(a, b, trials=1000, seed=4, infinity=inf)
    num = rep.numerator
    ok = (abs(num.exponent - 1.0) < 1e-10 and num.residual < 1e-6
          and np.isfinite(rep.det_kernel.exponent) and again.to_json() == rep.to_json())
    record("4", ok, f"numerator exponent {num.exponent:.12f} (fit residual {num.residual:.2g}); "
                    f"det_kernel exponent reported {rep.det_kernel.exponent:.4f} "
                    f"(fit residual {rep.det_kernel.residual:.3g}, no power law)")
    assert ok


def test_criterion_5_four_paths_to_the_newtonian_phase():
    m, r, T = 1e-14, 2e-4, 2.0
    pad = 1e-6
    wa = SpacetimeWorldline.static(m, [0, 0, 0], -pad, T + pad)
    wb = SpacetimeWorldline.static(m, [0, 0, r], -pad, T + pad)
    values = {
        "closed_form": ph.closed_form_phase(m, m, r, T),
        "quadrature": ph.newtonian_phase(wa, wb, window=(0, T)).magnitude,
        "retarded": ph.bilocal_phase(wa, wb, "retarded", window=(0, T)).magnitude,
        "twistor_detkernel": ph.bilocal_phase(wa, wb, "twistor_detkernel",
                                              window=(0, T)).magnitude,
    }
    rel = {k: abs(v - FIXTURE) / FIXTURE for k, v in values.items()}
    ok = all(x < 1e-4 for x in rel.values()) and all(
        abs(v - 0.6328) < 1e-4 for v in values.values())
    record("5", ok, ", ".join(f"{k} {v:.10f}" for k, v in values.items())
           + f"; worst relative {max(rel.values()):.2g} (limit 1e-4)")
    assert ok


def test_criterion_6_static_limit_order():
    scales = [0.2, 0.1, 0.05, 0.025]
    orders = {k: ph.static_limit_study(1.0, 20.0, scales, PhysicalConstants.natural(), k).order
              for k in ("invariant_interval", "retarded")}
    ok = all(o >= 1.8 for o in orders.values())
    record("6", ok, ", ".join(f"{k} order {o:.3f}" for k, o in orders.items())
           + " (limit >= 1.8)")
    assert ok


def test_criterion_7_protocol_entanglement():
    def phases(dphi):
        return [0.2, 0.2 + dphi / 2, 0.2 + dphi / 2, 0.2]

    zero = qgem.report_from_phases(phases(0.0))
    half = qgem.report_from_phases(phases(np.pi))
    quarter = qgem.report_from_phases(phases(np.pi / 2))
    oracle = qgem.partial_trace_oracle(qgem.joint_state(phases(np.pi / 2)))
    checks = [zero.separable and zero.concurrence < 1e-12,
              abs(half.concurrence - 1) < 1e-12,
              abs(quarter.concurrence - 0.70711) < 1e-5,
              abs(quarter.concurrence - np.sqrt(0.5)) < 1e-6,
              abs(quarter.concurrence - oracle["concurrence"]) < 1e-6]
    cfg = qgem.ProtocolConfig(1e-14, 1e-14, 2.0, separations=dict(
        LL=2e-4, LR=0.000368855361223, RL=3.11446387772e-05, RR=2e-4))
    sweeps = (qgem.sweep(cfg, "T", np.linspace(0, 2, 41))
              + qgem.sweep(cfg, "r", np.geomspace(2e-5, 1e-3, 41))
              + qgem.sweep(cfg, "m", np.geomspace(1e-15, 3e-14, 41)))
    worst = max(p.consistency for p in sweeps)
    checks.append(all(p.error is None for p in sweeps) and worst < 1e-10)
    ok = all(checks)
    record("7", ok, f"C(0)={zero.concurrence:.2g}, C(pi)={half.concurrence:.15f}, "
                    f"C(pi/2)={quarter.concurrence:.9f} vs oracle {oracle['concurrence']:.9f}; "
                    f"negativity/entropy defect {worst:.2g} over {len(sweeps)} sweep points")
    assert ok


def _strip_timestamps(text):
    return re.sub(r'\n\s*"(started|finished)": "[^"]*",?', "", text)


def test_criterion_8_determinism():
    cmd = [sys.executable, "-m", "twistorphase", "verify", "all", "--seed", "42"]
    runs = [subprocess.run(cmd + extra, capture_output=True, text=True, check=False)
            for extra in ([], [], ["--threads", "3"])]
    texts = [_strip_timestamps(r.stdout) for r in runs]
    codes = [r.returncode for r in runs]
    report = json.loads(runs[0].stdout)
    ok = texts[0] == texts[1] == texts[2] and len(texts[0]) > 1000 and codes == [0, 0, 0]
    record("8", ok, f"verify all --seed 42: 3 runs (threads 1, 1, 3) identical without "
                    f"timestamps = {texts[0] == texts[1] == texts[2]}, exit codes {codes}, "
                    f"{sum(len(v) for v in report['result']['suites'].values())} properties")
    assert ok
