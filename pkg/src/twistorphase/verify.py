"""Randomized property suites behind ``twistorphase verify``.

Every property returns a plain dict so reports serialize directly. Status
is ``pass``/``fail`` for asserted properties and ``reported`` for
measurements that carry no threshold (the literal determinant kernel,
whose GL(2,C) behaviour and interval ratio are measured, not assumed).
"""
from __future__ import annotations

import numpy as np

from . import bitwistor as bw
from . import kernel as kn
from . import twistors as tw
from .spinors import (SpacetimePoint, Spinor2, eps_bracket, minkowski_interval_sq,
                      point_to_matrix)

SUITES = ("algebra", "invariance", "reduction")


def _prop(name, value, threshold, **detail):
    value = float(value)
    status = "pass" if value < threshold else "fail"
    return {"name": name, "status": status, "value": value, "threshold": threshold,
            **({"detail": detail} if detail else {})}


def _reported(name, value, **detail):
    return {"name": name, "status": "reported", "value": float(value), "threshold": None,
            **({"detail": detail} if detail else {})}


def _cplx(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def algebra(seed: int, trials: int) -> list[dict]:
    rng = np.random.default_rng([seed, 1])
    out = []

    a, b, c = _cplx(rng, trials, 2), _cplx(rng, trials, 2), _cplx(rng, trials, 2)
    lam, mu = _cplx(rng, trials), _cplx(rng, trials)
    anti, bil = 0.0, 0.0
    for i in range(trials):
        sa, sb, sc = (Spinor2(v[i]) for v in (a, b, c))
        ab = eps_bracket(sa, sb)
        anti = max(anti, abs(ab + eps_bracket(sb, sa)) / max(abs(ab), 1e-300))
        lhs = eps_bracket(Spinor2(lam[i] * a[i] + mu[i] * c[i]), sb)
        rhs = lam[i] * ab + mu[i] * eps_bracket(sc, sb)
        scale = abs(lam[i] * ab) + abs(mu[i] * eps_bracket(sc, sb))
        bil = max(bil, abs(lhs - rhs) / scale)
    out.append(_prop("eps_bracket_antisymmetry", anti, 1e-14))
    out.append(_prop("eps_bracket_bilinearity", bil, 1e-12))

    pts = rng.uniform(-10, 10, (trials, 4))
    dets, herm = 0.0, 0.0
    for p in pts:
        x = SpacetimePoint(*p)
        m = point_to_matrix(x)
        d = np.linalg.det(m).real
        ref = -minkowski_interval_sq(x, SpacetimePoint.origin())
        dets = max(dets, abs(d - ref) / max(abs(ref), np.sum(p ** 2) * 1e-3))
        herm = max(herm, np.max(np.abs(m - m.conj().T)))
    out.append(_prop("matrix_determinant_is_minus_interval", dets, 1e-12))
    out.append(_prop("matrix_hermitian", herm, 1e-14))

    pis = _cplx(rng, trials, 2)
    inc = 0.0
    for p, pi in zip(pts, pis):
        x = SpacetimePoint(*p)
        z = tw.incident_twistor(x, Spinor2(pi, "primed"))
        inc = max(inc, tw.incidence_residual(z, x) / (1 + x.norm()))
    out.append(_prop("incidence_residual", inc, 1e-12))

    zs = [tw.Twistor(v) for v in _cplx(rng, trials, 4)]
    ws = [tw.Twistor(v) for v in _cplx(rng, trials, 4)]
    vs = [tw.Twistor(v) for v in _cplx(rng, trials, 4)]
    anti, bil, hom, khom = 0.0, 0.0, 0.0, 0.0
    for i in range(trials):
        z, w, v = zs[i], ws[i], vs[i]
        for inf in (tw.InfinityTwistor("pi_block"), tw.InfinityTwistor("omega_block")):
            zw = tw.inf_contract(z, w, inf)
            anti = max(anti, abs(zw + tw.inf_contract(w, z, inf)) / abs(zw))
            comb = tw.Twistor(lam[i] * z.components + mu[i] * v.components)
            rhs = lam[i] * zw + mu[i] * tw.inf_contract(v, w, inf)
            scale = abs(lam[i] * zw) + abs(mu[i] * tw.inf_contract(v, w, inf))
            bil = max(bil, abs(tw.inf_contract(comb, w, inf) - rhs) / scale)
            scaled = tw.inf_contract(tw.rescale(z, lam[i]), tw.rescale(w, mu[i]), inf)
            hom = max(hom, abs(scaled - lam[i] * mu[i] * zw) / abs(lam[i] * mu[i] * zw))
            k0 = kn.scalar_kernel(z, w, inf).value
            k1 = kn.scalar_kernel(tw.rescale(z, lam[i]), tw.rescale(w, mu[i]), inf).value
            khom = max(khom, abs(k1 * lam[i] * mu[i] - k0) / abs(k0))
    out.append(_prop("inf_contract_antisymmetry", anti, 1e-14))
    out.append(_prop("inf_contract_bilinearity", bil, 1e-12))
    out.append(_prop("inf_contract_homogeneity_1_1", hom, 1e-14))
    out.append(_prop("scalar_kernel_homogeneity_minus1_minus1", khom, 1e-14))

    om = tw.InfinityTwistor("omega_block")
    two = 0.0
    for i in range(trials - 1):
        a, b = bw.from_pair(zs[i], ws[i]), bw.from_pair(zs[i + 1], vs[i])
        k = kn.det_kernel(a, b, om).value
        two = max(two, abs(np.linalg.det(kn.det_kernel_matrix(a, b, om)) - k) / abs(k))
    out.append(_prop("det_kernel_two_formulas", two, 1e-13))

    simp, cov = 0.0, 0.0
    for i in range(trials):
        x = bw.from_pair(zs[i], ws[i])
        simp = max(simp, bw.simplicity_check(x).residual)
        g = tw.random_gl2(int(rng.integers(2 ** 32)))
        xg = bw.gl2_act(x, g)
        d = np.linalg.det(g)
        cov = max(cov, np.max(np.abs(xg.plucker - d * x.plucker)) / np.max(np.abs(d * x.plucker)))
    out.append(_prop("simplicity_residual", simp, 1e-12))
    out.append(_prop("plucker_gl2_covariance", cov, 1e-12))

    wl_pis = [np.array([[1, 0], [0, 1]], dtype=complex)] + [
        _cplx(rng, 2, 2) for _ in range(3)]
    trip = 0.0
    for i, p in enumerate(pts):
        basis = wl_pis[i % len(wl_pis)]
        x = bw.point_to_bitwistor(SpacetimePoint(*p), basis)
        back = bw.line_to_point(x).as_array()
        trip = max(trip, np.max(np.abs(back - p)) / (1 + np.linalg.norm(p)))
    out.append(_prop("line_to_point_round_trip", trip, 1e-10))
    return out


def invariance(seed: int, trials: int) -> list[dict]:
    rng = np.random.default_rng([seed, 2])
    out = []
    inv, four, cov, sep, tr = 0.0, 0.0, 0.0, 0.0, 0.0
    for i in range(trials):
        z = [tw.Twistor(v) for v in _cplx(rng, 4, 4)]
        a, b = bw.from_pair(z[0], z[1]), bw.from_pair(z[2], z[3])
        g = tw.random_sl4(int(rng.integers(2 ** 32)))
        i0 = bw.invariant_I(a, b)
        i1 = bw.invariant_I(bw.sl4_act_bitwistor(g, a), bw.sl4_act_bitwistor(g, b))
        inv = max(inv, abs(i1 - i0) / abs(i0))
        f0 = tw.four_bracket(*(v.components for v in z))
        f1 = tw.four_bracket(*(tw.sl4_act(g, v).components for v in z))
        four = max(four, abs(f1 - f0) / abs(f0))
        ga = tw.random_gl2(int(rng.integers(2 ** 32)))
        gb = tw.random_gl2(int(rng.integers(2 ** 32)))
        i2 = bw.invariant_I(bw.gl2_act(a, ga), bw.gl2_act(b, gb))
        w = np.linalg.det(ga) * np.linalg.det(gb)
        cov = max(cov, abs(i2 - w * i0) / abs(w * i0))

        pa, pb = rng.uniform(-5, 5, (2, 4))
        xa = bw.point_to_bitwistor(SpacetimePoint(*pa))
        xb = bw.point_to_bitwistor(SpacetimePoint(*pb))
        k0 = kn.separation_kernel(xa, xb).value
        k1 = kn.separation_kernel(bw.gl2_act(xa, ga), bw.gl2_act(xb, gb)).value
        sep = max(sep, abs(k1 - k0) / abs(k0))
        shift = tw.translation(rng.uniform(-5, 5, 4))
        k2 = kn.separation_kernel(bw.sl4_act_bitwistor(shift, xa),
                                  bw.sl4_act_bitwistor(shift, xb)).value
        tr = max(tr, abs(k2 - k0) / abs(k0))
    out.append(_prop("invariant_I_sl4_invariance", inv, 1e-10))
    out.append(_prop("four_bracket_sl4_invariance", four, 1e-10))
    out.append(_prop("invariant_I_gl2_weight", cov, 1e-10))
    out.append(_prop("separation_kernel_gl2_invariance", sep, 1e-10))
    out.append(_prop("separation_kernel_translation_invariance", tr, 1e-10))

    pa, pb = rng.uniform(-5, 5, (2, 4))
    a = bw.point_to_bitwistor(SpacetimePoint(*pa))
    b = bw.point_to_bitwistor(SpacetimePoint(*pb))
    probe = kn.gl2_scaling_probe(a, b, trials=trials, seed=int(rng.integers(2 ** 32)),
                                 infinity=tw.InfinityTwistor("omega_block"))
    num = probe.numerator
    out.append(_prop("numerator_det_exponent", abs(num.exponent - 1.0), 1e-10,
                     exponent=num.exponent, fit_residual=num.residual,
                     covariance_residual=probe.numerator_covariance_residual))
    out.append(_prop("numerator_det_fit_residual", num.residual, 1e-6))
    out.append(_prop("separation_kernel_exponent", abs(probe.separation.exponent), 1e-10,
                     exponent=probe.separation.exponent, fit_residual=probe.separation.residual))
    out.append(_reported("det_kernel_exponent", probe.det_kernel.exponent,
                         fit_residual=probe.det_kernel.residual,
                         power_law=bool(probe.det_kernel.residual < 1e-6)))
    return out


def reduction(seed: int, trials: int) -> list[dict]:
    pairs = kn.random_separated_pairs(max(trials, 2), seed=seed)
    second = tw.random_gl2(seed + 1)
    out = []
    sep = kn.reduction_check(pairs, second_basis=second, kernel="separation")
    out.append(_prop("separation_kernel_interval_spread", sep.relative_spread, 1e-10,
                     mean_ratio=[sep.mean_ratio.real, sep.mean_ratio.imag],
                     excluded=sep.excluded_count))
    out.append(_prop("separation_kernel_pi_basis_independence", sep.cross_basis_deviation, 1e-10))
    out.append(_prop("separation_kernel_frozen_constant",
                     abs(sep.mean_ratio - kn.SEPARATION_KERNEL_CONSTANT), 1e-10))
    out.append(_prop("separation_kernel_phase_spread", sep.phase_spread, 1e-10))
    lit = kn.reduction_check(pairs, second_basis=second, kernel="det_kernel")
    out.append(_reported("det_kernel_interval_spread", lit.relative_spread,
                         cross_basis_deviation=lit.cross_basis_deviation,
                         excluded=lit.excluded_count))
    return out


def run(suite: str, seed: int, trials: int) -> dict:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    names = SUITES if suite == "all" else (suite,)
    for n in names:
        if n not in SUITES:
            raise ValueError(f"unknown suite {n!r}")
    fns = {"algebra": algebra, "invariance": invariance, "reduction": reduction}
    results = {n: fns[n](seed, trials) for n in names}
    failed = [p["name"] for props in results.values() for p in props if p["status"] == "fail"]
    return {"suites": results, "passed": not failed, "failed": failed}
