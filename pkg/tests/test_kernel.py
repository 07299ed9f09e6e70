import numpy as np
import pytest

from twistorphase import bitwistor as bw
from twistorphase import kernel as kn
from twistorphase import twistors as tw
from twistorphase.spinors import SpacetimePoint, minkowski_interval_sq

from conftest import cplx

OMEGA = tw.InfinityTwistor("omega_block")


def _line(p, basis=bw.DEFAULT_PI_BASIS):
    return bw.point_to_bitwistor(SpacetimePoint(*p), basis)


def test_scalar_kernel_matches_component_oracle(rng):
    for _ in range(100):
        z, w = cplx(rng, 2, 4)
        oracle = 1.0 / (z[2] * w[3] - z[3] * w[2])
        k = kn.scalar_kernel(tw.Twistor(z), tw.Twistor(w))
        assert not k.singular
        assert k.value == pytest.approx(oracle, rel=1e-14)


def test_scalar_kernel_singular_and_homogeneity(rng):
    z = tw.Twistor(cplx(rng, 4))
    k = kn.scalar_kernel(z, z)
    assert k.singular and np.isnan(k.value)
    w = tw.Twistor(cplx(rng, 4))
    base = kn.scalar_kernel(z, w).value
    assert kn.scalar_kernel(tw.rescale(z, 2), tw.rescale(w, 2)).value == pytest.approx(
        base / 4, rel=1e-15)
    for _ in range(500):
        lam, mu = cplx(rng, 2)
        v = kn.scalar_kernel(tw.rescale(z, lam), tw.rescale(w, mu)).value
        assert abs(v * lam * mu - base) < 1e-14 * abs(base)


def test_det_kernel_two_formulas(rng):
    for _ in range(200):
        a = bw.from_pair(*(tw.Twistor(c) for c in cplx(rng, 2, 4)))
        b = bw.from_pair(*(tw.Twistor(c) for c in cplx(rng, 2, 4)))
        for inf in (tw.InfinityTwistor(), OMEGA):
            c = kn.contraction_matrix(a.z.components, a.w.components,
                                      b.z.components, b.w.components, inf)
            explicit = 1 / (c[0, 0] * c[1, 1]) - 1 / (c[0, 1] * c[1, 0])
            k = kn.det_kernel(a, b, inf)
            assert k.value == pytest.approx(explicit, rel=1e-13)
            assert np.linalg.det(kn.det_kernel_matrix(a, b, inf)) == pytest.approx(
                k.value, rel=1e-13)


def test_det_kernel_column_swap_and_self():
    a = _line([0.1, 0.2, -0.3, 0.5])
    b = _line([1.0, -2.0, 0.5, 3.0])
    swapped = bw.Bitwistor(b.w, b.z)
    assert kn.det_kernel(a, swapped, OMEGA).value == pytest.approx(
        -kn.det_kernel(a, b, OMEGA).value, rel=1e-14)
    assert kn.det_kernel(a, a, OMEGA).singular


def test_separation_kernel_static_pair_is_inverse_square():
    # equal-time points a distance r apart: kernel 1/r^2 with the frozen constant
    for r in (0.5, 2.0, 7.0):
        a = _line([3.0, 0.0, 0.0, 0.0])
        b = _line([3.0, 0.0, 0.0, r])
        k = kn.separation_kernel(a, b)
        assert k.value == pytest.approx(kn.SEPARATION_KERNEL_CONSTANT / r ** 2, rel=1e-13)


def test_separation_kernel_equals_interval_oracle(rng):
    for pa, pb in rng.uniform(-5, 5, (200, 2, 4)):
        sigma = minkowski_interval_sq(SpacetimePoint(*pa), SpacetimePoint(*pb))
        if abs(sigma) < 0.1:
            continue
        a = _line(pa, cplx(rng, 2, 2))
        b = _line(pb, cplx(rng, 2, 2))
        assert kn.separation_kernel(a, b).value == pytest.approx(1 / sigma, rel=1e-10)
        za, wa, zb, wb = a.z.components, a.w.components, b.z.components, b.w.components
        assert kn.interval_from_twistors(za, wa, zb, wb) == pytest.approx(sigma, rel=1e-10)


def test_separation_kernel_in_omega_block_is_inverted_frame(rng):
    pa, pb = rng.uniform(-5, 5, (2, 4))
    det_x = lambda p: p[0] ** 2 - np.sum(p[1:] ** 2)  # noqa: E731
    sigma = minkowski_interval_sq(SpacetimePoint(*pa), SpacetimePoint(*pb))
    k = kn.separation_kernel(_line(pa), _line(pb), OMEGA).value
    assert k == pytest.approx(det_x(pa) * det_x(pb) / sigma, rel=1e-10)


def test_reduction_check_separation_passes():
    pairs = kn.random_separated_pairs(1000, seed=3)
    rep = kn.reduction_check(pairs, kernel="separation")
    assert rep.sample_count == 1000 and rep.excluded_count == 0
    assert rep.relative_spread < 1e-10
    assert rep.cross_basis_deviation < 1e-10
    assert rep.phase_spread < 1e-10
    assert abs(rep.mean_ratio - kn.SEPARATION_KERNEL_CONSTANT) < 1e-10


def test_reduction_check_ratios_match_object_api():
    pairs = kn.random_separated_pairs(20, seed=4)
    rep = kn.reduction_check(pairs, kernel="det_kernel")
    for (pa, pb), ratio in zip(pairs, rep.ratios):
        k = kn.det_kernel(bw.point_to_bitwistor(pa), bw.point_to_bitwistor(pb), OMEGA)
        assert ratio == pytest.approx(k.value * minkowski_interval_sq(pa, pb), rel=1e-12)


def test_literal_det_kernel_measurement_is_reported():
    # the literal reciprocal determinant is measured, not assumed: its
    # product with the interval is far from constant
    pairs = kn.random_separated_pairs(200, seed=5)
    rep = kn.reduction_check(pairs, kernel="det_kernel")
    assert rep.sample_count == 200
    assert rep.relative_spread > 1.0
    assert rep.frozen_constant is None
    # with the pi block and a shared basis every diagonal contraction vanishes
    pi_rep = kn.reduction_check(pairs, kernel="det_kernel", infinity=tw.InfinityTwistor())
    assert pi_rep.sample_count == 0 and pi_rep.excluded_count == 200


def test_reduction_check_identical_and_null_pairs():
    p = (SpacetimePoint(0, 0, 0, 0), SpacetimePoint(0.5, 1, 2, -1))
    rep = kn.reduction_check([p] * 5, kernel="separation")
    assert rep.relative_spread == 0.0
    near_null = (SpacetimePoint(0, 0, 0, 0), SpacetimePoint(1, 1 + 1e-12, 0, 0))
    rep = kn.reduction_check([p, near_null], kernel="separation")
    assert rep.excluded_count == 1 and rep.sample_count == 1
    with pytest.raises(ValueError):
        kn.reduction_check([], kernel="separation")
    with pytest.raises(ValueError):
        kn.reduction_check([p], kernel="cauchy")


def test_reduction_report_json():
    rep = kn.reduction_check(kn.random_separated_pairs(10, 1), kernel="separation")
    doc = rep.to_json()
    assert doc["sample_count"] == 10 and doc["frozen_constant"] == 1.0
    assert doc["frozen_constant_deviation"] < 1e-12


def test_gl2_probe_numerator_exponent_is_one():
    a = _line([0.3, 1, 2, -1])
    b = _line([-1, 0.5, -2, 3])
    rep = kn.gl2_scaling_probe(a, b, trials=300, seed=2, infinity=OMEGA)
    assert abs(rep.numerator.exponent - 1.0) < 1e-10
    assert rep.numerator.residual < 1e-6
    assert rep.numerator_covariance_residual < 1e-10
    assert abs(rep.separation.exponent) < 1e-10
    assert np.isfinite(rep.det_kernel.exponent)
    again = kn.gl2_scaling_probe(a, b, trials=300, seed=2, infinity=OMEGA)
    assert again.to_json() == rep.to_json()


def test_gl2_probe_identity_is_degenerate_and_singular_rejected():
    a = _line([0.3, 1, 2, -1])
    b = _line([-1, 0.5, -2, 3])
    rep = kn.gl2_scaling_probe(a, b, transforms=[np.eye(2)] * 3, infinity=OMEGA)
    assert rep.numerator.degenerate and rep.det_kernel.degenerate
    with pytest.raises(ValueError):
        kn.gl2_scaling_probe(a, a, trials=3, infinity=OMEGA)
    with pytest.raises(ValueError):
        kn.gl2_scaling_probe(a, b, transforms=[np.zeros((2, 2))], infinity=OMEGA)
