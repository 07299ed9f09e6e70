"""Twistor kernels after the infinity twistor is chosen.

Three bitwistor-level quantities are built from the 2x2 matrix of
contractions ``C = [[<Z_A Z_B>, <Z_A W_B>], [<W_A Z_B>, <W_A W_B>]]``:

``det_kernel``
    determinant of the matrix of reciprocals ``1/C_ij`` (the scalar kernel
    ``K = 1/<Z Z'>`` evaluated entrywise). It is not invariant under a change
    of basis on either line, and its product with the interval is not
    constant; :func:`gl2_scaling_probe` and :func:`reduction_check` measure
    both facts.
``contraction_det``
    ``det C``. Multilinearity makes it scale by ``det g`` under a change of
    basis ``g`` on either line.
``separation_kernel``
    ``det C / I_AB``. Numerator and denominator carry the same weight, so the
    ratio is invariant under independent GL(2,C) changes of basis and
    projective rescalings. With the pi-block infinity twistor it equals
    ``SEPARATION_KERNEL_CONSTANT / (x_A - x_B)^2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .bitwistor import DEFAULT_PI_BASIS, Bitwistor, _check_pi_pair, gl2_act
from .spinors import SpacetimePoint, interval_sq
from .twistors import InfinityTwistor, Twistor, four_bracket, incidence, random_gl2

SINGULAR_TOL = 1e-10

# Measured by reduction_check(kernel="separation") with the default pi basis
# and the pi-block infinity twistor: mean ratio 1 + O(1e-16), spread < 1e-15.
# It is exactly 1 because I_AB = (x_A - x_B)^2 det(P_A) det(P_B) and
# det C = det(P_A) det(P_B) for pi bases P_A, P_B.
SEPARATION_KERNEL_CONSTANT = 1.0

KernelName = Literal["det_kernel", "separation"]


@dataclass(frozen=True)
class KernelValue:
    value: complex
    singular: bool


def scalar_kernel(z: Twistor, w: Twistor, infinity: InfinityTwistor = InfinityTwistor(),
                  tol: float = SINGULAR_TOL) -> KernelValue:
    """``K(Z, W) = 1 / <Z W>``; flagged singular when the contraction
    vanishes relative to ``|Z||W|``."""
    c = complex(infinity.contract(z.components, w.components))
    scale = np.linalg.norm(z.components) * np.linalg.norm(w.components)
    if not abs(c) > tol * scale:
        return KernelValue(complex("nan"), True)
    return KernelValue(1.0 / c, False)


def contraction_matrix(za, wa, zb, wb, infinity: InfinityTwistor = InfinityTwistor()):
    """(..., 2, 2) matrix of infinity-twistor contractions between two lines."""
    c = np.empty(np.broadcast_shapes(np.shape(za), np.shape(zb))[:-1] + (2, 2), dtype=complex)
    c[..., 0, 0] = infinity.contract(za, zb)
    c[..., 0, 1] = infinity.contract(za, wb)
    c[..., 1, 0] = infinity.contract(wa, zb)
    c[..., 1, 1] = infinity.contract(wa, wb)
    return c


def _scale(za, wa, zb, wb):
    na = np.maximum(np.linalg.norm(za, axis=-1), np.linalg.norm(wa, axis=-1))
    nb = np.maximum(np.linalg.norm(zb, axis=-1), np.linalg.norm(wb, axis=-1))
    return na * nb


def det_kernel_arrays(za, wa, zb, wb, infinity=InfinityTwistor(), tol=SINGULAR_TOL):
    """Batched literal determinant kernel; returns ``(value, singular)``."""
    c = contraction_matrix(za, wa, zb, wb, infinity)
    singular = np.any(np.abs(c) <= tol * _scale(za, wa, zb, wb)[..., None, None], axis=(-1, -2))
    with np.errstate(divide="ignore", invalid="ignore"):
        value = 1.0 / (c[..., 0, 0] * c[..., 1, 1]) - 1.0 / (c[..., 0, 1] * c[..., 1, 0])
    value = np.where(singular, np.nan, value)
    return value, singular


def separation_kernel_arrays(za, wa, zb, wb, infinity=InfinityTwistor(), tol=SINGULAR_TOL):
    """Batched ``det C / I_AB``; returns ``(value, singular)``."""
    c = contraction_matrix(za, wa, zb, wb, infinity)
    num = c[..., 0, 0] * c[..., 1, 1] - c[..., 0, 1] * c[..., 1, 0]
    inv = four_bracket(za, wa, zb, wb)
    scale = _scale(za, wa, zb, wb) ** 2
    singular = ~(np.abs(inv) > tol * scale) | ~(np.abs(num) > tol * scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.where(singular, np.nan, num / inv)
    return value, singular


def interval_from_twistors(za, wa, zb, wb, infinity=InfinityTwistor()):
    """Reciprocal of the normalized separation kernel, ``I_AB / det C``.

    Finite on the light cone, where the kernel itself blows up; this is the
    form used to locate light-cone crossings from twistor data.
    """
    c = contraction_matrix(za, wa, zb, wb, infinity)
    num = c[..., 0, 0] * c[..., 1, 1] - c[..., 0, 1] * c[..., 1, 0]
    return SEPARATION_KERNEL_CONSTANT * four_bracket(za, wa, zb, wb) / num


def det_kernel_matrix(a: Bitwistor, b: Bitwistor, infinity=InfinityTwistor()) -> np.ndarray:
    """The 2x2 matrix of scalar kernel values (reciprocal contractions)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1.0 / contraction_matrix(a.z.components, a.w.components,
                                        b.z.components, b.w.components, infinity)


def det_kernel(a: Bitwistor, b: Bitwistor, infinity=InfinityTwistor(),
               tol: float = SINGULAR_TOL) -> KernelValue:
    """``K(Z_A,Z_B) K(W_A,W_B) - K(Z_A,W_B) K(W_A,Z_B)``."""
    v, s = det_kernel_arrays(a.z.components, a.w.components,
                             b.z.components, b.w.components, infinity, tol)
    return KernelValue(complex(v), bool(s))


def contraction_det(a: Bitwistor, b: Bitwistor, infinity=InfinityTwistor()) -> complex:
    c = contraction_matrix(a.z.components, a.w.components,
                           b.z.components, b.w.components, infinity)
    return complex(c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0])


def separation_kernel(a: Bitwistor, b: Bitwistor, infinity=InfinityTwistor(),
                      tol: float = SINGULAR_TOL) -> KernelValue:
    v, s = separation_kernel_arrays(a.z.components, a.w.components,
                                    b.z.components, b.w.components, infinity, tol)
    return KernelValue(complex(v), bool(s))


_KERNELS = {"det_kernel": det_kernel_arrays, "separation": separation_kernel_arrays}


# -- reduction to the spacetime interval --------------------------------------

@dataclass(frozen=True, eq=False)
class ReductionReport:
    kernel: str
    sample_count: int
    excluded_count: int
    ratios: np.ndarray = field(repr=False)
    mean_ratio: complex
    relative_spread: float
    phase_spread: float
    cross_basis_deviation: float
    frozen_constant: float | None

    def to_json(self) -> dict:
        return {
            "kernel": self.kernel,
            "sample_count": self.sample_count,
            "excluded_count": self.excluded_count,
            "mean_ratio": [self.mean_ratio.real, self.mean_ratio.imag],
            "relative_spread": self.relative_spread,
            "phase_spread": self.phase_spread,
            "cross_basis_deviation": self.cross_basis_deviation,
            "frozen_constant": self.frozen_constant,
            "frozen_constant_deviation": (
                None if self.frozen_constant is None
                else abs(self.mean_ratio - self.frozen_constant) / abs(self.frozen_constant)),
        }


def _ratios(coords_a, coords_b, pi_basis, kernel, infinity, tol):
    za = incidence(coords_a, pi_basis[:, 0])
    wa = incidence(coords_a, pi_basis[:, 1])
    zb = incidence(coords_b, pi_basis[:, 0])
    wb = incidence(coords_b, pi_basis[:, 1])
    value, singular = _KERNELS[kernel](za, wa, zb, wb, infinity, tol)
    return value * interval_sq(coords_a, coords_b), singular


def reduction_check(pairs: Sequence[tuple[SpacetimePoint, SpacetimePoint]],
                    pi_basis=DEFAULT_PI_BASIS, second_basis=None, seed: int = 0,
                    kernel: KernelName = "det_kernel",
                    infinity: InfinityTwistor | None = None,
                    null_tol: float = 1e-8, tol: float = SINGULAR_TOL) -> ReductionReport:
    """Test ``kernel * (x_A - x_B)^2 = const`` over point pairs.

    Each pair is turned into two lines through the incidence relation. The
    ratio is computed again with a second pi basis (``random_gl2(seed)``
    unless given) to test that the choice of spinors drops out. Pairs that
    are (nearly) null separated or give singular contractions are excluded
    and counted.

    ``infinity`` defaults to the omega block for ``det_kernel`` (with the
    pi block every incident contraction depends on the spinors alone and
    the diagonal of ``C`` vanishes for a shared basis) and to the pi block
    for ``separation``.
    """
    if kernel not in _KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    if infinity is None:
        infinity = InfinityTwistor("omega_block" if kernel == "det_kernel" else "pi_block")
    pi_basis = _check_pi_pair(pi_basis)
    second_basis = _check_pi_pair(random_gl2(seed) if second_basis is None else second_basis)
    if len(pairs) == 0:
        raise ValueError("reduction check needs at least one pair")
    ca = np.array([p[0].as_array() for p in pairs])
    cb = np.array([p[1].as_array() for p in pairs])
    modes = {p[0].unit_mode for p in pairs} | {p[1].unit_mode for p in pairs}
    if len(modes) > 1:
        raise ValueError("all points must share one unit mode")

    sigma = interval_sq(ca, cb)
    size = 1.0 + np.sum(ca ** 2, axis=-1) + np.sum(cb ** 2, axis=-1)
    null = np.abs(sigma) <= null_tol * size
    r1, s1 = _ratios(ca, cb, pi_basis, kernel, infinity, tol)
    r2, s2 = _ratios(ca, cb, second_basis, kernel, infinity, tol)
    keep = ~(null | s1 | s2)
    r1, r2 = r1[keep], r2[keep]
    if r1.size == 0:
        nan = float("nan")
        return ReductionReport(kernel, 0, int(np.sum(~keep)), r1, complex(nan), nan, nan,
                               nan, None)
    mean = complex(np.mean(r1))
    spread = float(np.max(np.abs(r1 - mean)) / abs(mean))
    phase = float(np.max(np.abs(np.angle(r1 / mean))))
    cross = float(np.max(np.abs(r2 - r1)) / abs(mean))
    frozen = (SEPARATION_KERNEL_CONSTANT
              if kernel == "separation" and infinity.block_form == "pi_block" else None)
    return ReductionReport(kernel, int(r1.size), int(np.sum(~keep)), r1, mean, spread, phase,
                           cross, frozen)


def random_separated_pairs(n: int, seed: int, box: float = 5.0, min_interval: float = 0.1):
    """``n`` random real point pairs in ``[-box, box]^4`` with
    ``|(x_A - x_B)^2| > min_interval`` (natural units)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        a, b = rng.uniform(-box, box, size=(2, 4))
        if abs(interval_sq(a, b)) > min_interval:
            out.append((SpacetimePoint(*a), SpacetimePoint(*b)))
    return out


# -- GL(2,C) scaling probe ----------------------------------------------------

@dataclass(frozen=True)
class ExponentFit:
    exponent: float
    residual: float
    degenerate: bool

    def to_json(self) -> dict:
        return {"exponent": self.exponent, "residual": self.residual,
                "degenerate": self.degenerate}


@dataclass(frozen=True)
class ScalingReport:
    trials: int
    numerator: ExponentFit
    det_kernel: ExponentFit
    separation: ExponentFit
    numerator_covariance_residual: float

    def to_json(self) -> dict:
        return {"trials": self.trials,
                "numerator": self.numerator.to_json(),
                "det_kernel": self.det_kernel.to_json(),
                "separation": self.separation.to_json(),
                "numerator_covariance_residual": self.numerator_covariance_residual}


def _fit_through_origin(x: np.ndarray, y: np.ndarray) -> ExponentFit:
    sxx = float(np.dot(x, x))
    if sxx < 1e-20:
        return ExponentFit(float("nan"), float(np.sqrt(np.mean(y ** 2))), True)
    p = float(np.dot(x, y) / sxx)
    return ExponentFit(p, float(np.sqrt(np.mean((y - p * x) ** 2))), False)


def gl2_scaling_probe(a: Bitwistor, b: Bitwistor, trials: int = 1000, seed: int = 0,
                      transforms=None, infinity: InfinityTwistor = InfinityTwistor()) -> ScalingReport:
    """Fit ``log|Q(g a, b) / Q(a, b)| = p log|det g|`` for three quantities Q.

    ``g`` runs over ``transforms`` if given, otherwise over ``trials``
    deterministic samples of :func:`random_gl2`.
    """
    base_k = det_kernel(a, b, infinity)
    if base_k.singular:
        raise ValueError("det_kernel(a, b) is singular; probe needs a regular pair")
    base_n = contraction_det(a, b, infinity)
    base_s = separation_kernel(a, b, infinity).value
    if transforms is None:
        if trials < 1:
            raise ValueError("trials must be >= 1")
        seeds = np.random.default_rng(seed).integers(0, 2 ** 32, size=trials)
        transforms = [random_gl2(int(s)) for s in seeds]
    logdet, yn, yk, ys, cov = [], [], [], [], []
    for g in transforms:
        ag = gl2_act(a, g)
        d = np.linalg.det(g)
        n = contraction_det(ag, b, infinity) / base_n
        k = det_kernel(ag, b, infinity)
        if k.singular:
            raise ValueError("transformed pair became singular")
        logdet.append(np.log(abs(d)))
        yn.append(np.log(abs(n)))
        yk.append(np.log(abs(k.value / base_k.value)))
        ys.append(np.log(abs(separation_kernel(ag, b, infinity).value / base_s)))
        cov.append(abs(n / d - 1))
    x = np.array(logdet)
    return ScalingReport(len(x), _fit_through_origin(x, np.array(yn)),
                         _fit_through_origin(x, np.array(yk)),
                         _fit_through_origin(x, np.array(ys)),
                         float(max(cov)) if cov else 0.0)
