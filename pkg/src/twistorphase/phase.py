"""Bilocal interaction phase between two massive worldlines.

The scalar bilocal action couples the worldlines through a massless
mediator. With the symmetric kernel counted once per ordered pair of
bodies, the phase is::

    phi = (m_A m_B / hbar) * integral dtau dtau' G(x_A(tau), x_B(tau'))

normalized so that the instantaneous kernel ``-G_N delta(t - t') / r``
gives ``-(G_N m_A m_B / hbar) * integral dt / r(t)``.

Relativistic kernels are built from the invariant interval
``sigma = -(c dt)^2 + |dx|^2``. The massless propagator ``1/sigma`` carries
the real, phase-generating part on the light cone,
``-Im[1/(sigma + i0)] / pi = delta(sigma)``; the time-symmetric Green
function is ``c delta(sigma) / 4 pi``. Every kernel here therefore reduces
the inner integral analytically: for each outer time ``t`` the light-cone
crossings ``sigma(t, t - u) = 0`` are found in the delay ``u`` and weighted
by ``1 / |d sigma / d u|``. Working in the delay keeps full relative
precision when ``r / c`` is many orders of magnitude below ``t``.

Kernels
-------
``static``             equal-time collapse (Newtonian)
``retarded``           retarded crossing only, at full strength
``invariant_interval`` both crossings of ``1/sigma``, sigma from coordinates
``twistor_detkernel``  both crossings, sigma recovered from twistor lines
                       through the normalized determinant kernel
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .bitwistor import DEFAULT_PI_BASIS, BitwistorWorldline, _check_pi_pair
from .kernel import det_kernel_arrays, interval_from_twistors, separation_kernel_arrays
from .quadrature import adaptive_gk
from .twistors import InfinityTwistor, four_bracket, incidence
from .worldline import PhysicalConstants, SpacetimeWorldline

KernelId = Literal["static", "retarded", "invariant_interval", "twistor_detkernel"]
KERNELS = ("static", "retarded", "invariant_interval", "twistor_detkernel")


class NoOverlapError(ValueError):
    pass


class CollisionError(ValueError):
    pass


class SingularSampleError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseResult:
    phi: float
    abs_error_estimate: float
    kernel_id: str
    excluded_singular_samples: int = 0
    evaluations: int = 0

    @property
    def magnitude(self) -> float:
        return abs(self.phi)

    def to_json(self) -> dict:
        return {"phi": self.phi, "abs_phi": abs(self.phi),
                "abs_error_estimate": self.abs_error_estimate,
                "kernel_id": self.kernel_id,
                "excluded_singular_samples": self.excluded_singular_samples,
                "evaluations": self.evaluations}


def closed_form_phase(m_a: float, m_b: float, r: float, T: float,
                      consts: PhysicalConstants = PhysicalConstants(),
                      signed: bool = False) -> float:
    """``G m_a m_b T / (hbar r)``; negative when ``signed``."""
    if not r > 0:
        raise ValueError(f"separation must be positive, got {r!r}")
    if T < 0:
        raise ValueError(f"interaction time must be non-negative, got {T!r}")
    phi = consts.G * m_a * m_b * T / (consts.hbar * r)
    return -phi if signed else phi


def common_window(wa: SpacetimeWorldline, wb: SpacetimeWorldline, window=None):
    lo = max(wa.t_start, wb.t_start)
    hi = min(wa.t_end, wb.t_end)
    if window is not None:
        lo, hi = max(lo, window[0]), min(hi, window[1])
    if hi < lo:
        raise NoOverlapError("worldlines do not overlap in time")
    return lo, hi


def _breakpoints(wa, wb, lo, hi):
    return np.unique(np.concatenate([wa.times, wb.times]))


def _separation(wa, wb, r_min):
    def r_of_t(t):
        r = np.linalg.norm(wa.position(t) - wb.position(t), axis=-1)
        if np.any(r < r_min):
            raise CollisionError(
                f"separation {np.min(r):.3g} m below r_min = {r_min:.3g} m")
        return r
    return r_of_t


def newtonian_phase(wa: SpacetimeWorldline, wb: SpacetimeWorldline,
                    consts: PhysicalConstants = PhysicalConstants(), r_min: float = 1e-9,
                    rtol: float = 1e-8, window=None) -> PhaseResult:
    """``-(G m_A m_B / hbar) * integral dt / r(t)`` over the common window."""
    lo, hi = common_window(wa, wb, window)
    r_of_t = _separation(wa, wb, r_min)
    q = adaptive_gk(lambda t: 1.0 / r_of_t(t), lo, hi, _breakpoints(wa, wb, lo, hi),
                    abs_tol=1e-300, rel_tol=rtol)
    pref = consts.G * wa.mass * wb.mass / consts.hbar
    return PhaseResult(-pref * q.value, pref * q.abs_error + 1e-15 * pref * abs(q.value),
                       "newtonian_static", 0, q.evaluations)


# -- light-cone collapse ------------------------------------------------------

def _illinois(fun, lo, hi, f_lo, f_hi, iters=80):
    """Vectorized Illinois (modified regula falsi) on brackets with
    ``f_lo > 0 >= f_hi``; returns the root estimates."""
    lo, hi, f_lo, f_hi = (np.array(v, dtype=float) for v in (lo, hi, f_lo, f_hi))
    side = np.zeros(lo.shape, dtype=int)
    x = lo.copy()
    for _ in range(iters):
        active = np.abs(hi - lo) > 4e-16 * np.maximum(np.abs(lo), np.abs(hi))
        active &= f_hi != 0
        if not np.any(active):
            break
        denom = f_lo - f_hi
        x = np.where(active, (lo * (-f_hi) + hi * f_lo) / np.where(denom == 0, 1, denom), x)
        x = np.clip(x, np.minimum(lo, hi), np.maximum(lo, hi))
        fx = np.zeros_like(x)
        fx[active] = fun(x[active], active)
        pos = active & (fx > 0)
        neg = active & (fx <= 0)
        lo = np.where(pos, x, lo)
        f_lo = np.where(pos, fx, f_lo)
        hi = np.where(neg, x, hi)
        f_hi = np.where(neg, fx, f_hi)
        # Illinois: halve the stale endpoint's value after two same-side steps
        f_hi = np.where(pos & (side == 1), f_hi / 2, f_hi)
        f_lo = np.where(neg & (side == -1), f_lo / 2, f_lo)
        side = np.where(pos, 1, np.where(neg, -1, side))
    return np.where(f_hi == 0, hi, (lo * (-f_hi) + hi * f_lo) / np.where(f_lo == f_hi, 1, f_lo - f_hi))


class _LightCone:
    """Interval ``sigma(t, u) = |x_A(t) - x_B(t - u)|^2 - (c u)^2`` and its
    delay derivative, computed either from coordinates or from twistors."""

    def __init__(self, wa, wb, c, twistor: bool, pi_basis, fd_step: float):
        self.wa, self.wb, self.c = wa, wb, c
        self.twistor = twistor
        self.pi = _check_pi_pair(pi_basis)
        self.fd_step = fd_step
        self.vmax = wb._max_speed() * 1.05

    def _d(self, t, u):
        return self.wa.position(t) - self.wb.position(t - u)

    def sigma(self, t, u):
        d = self._d(t, u)
        if not self.twistor:
            return np.sum(d * d, axis=-1) - (self.c * u) ** 2
        # A sits at the local origin; B relative to it. Translations fix the
        # pi-block infinity twistor, so the kernel is unchanged by the shift.
        zero = np.zeros(np.shape(u) + (4,))
        rel = np.concatenate([(-self.c * u)[..., None], -d], axis=-1)
        p1, p2 = self.pi[:, 0], self.pi[:, 1]
        s = interval_from_twistors(incidence(zero, p1), incidence(zero, p2),
                                   incidence(rel, p1), incidence(rel, p2))
        return s.real

    def dsigma(self, t, u):
        if not self.twistor:
            d = self._d(t, u)
            return 2 * np.sum(d * self.wb.velocity(t - u), axis=-1) - 2 * self.c ** 2 * u
        h = self.fd_step * np.abs(u)
        return (self.sigma(t, u + h) - self.sigma(t, u - h)) / (2 * h)

    def crossing(self, t, r0, direction):
        """Delay of the retarded (``direction=+1``) or advanced (``-1``)
        crossing for each ``t``; NaN where the source history is too short."""
        c = self.c
        if direction > 0:
            umax = t - self.wb.t_start
        else:
            umax = self.wb.t_end - t
        lo = r0 / (c + self.vmax)
        hi = np.minimum(r0 / max(c - self.vmax, 1e-300 * c), umax)
        out = np.full(t.shape, np.nan)
        ok = umax > 0
        if not np.any(ok):
            return out
        s = direction
        f_hi = np.full(t.shape, 1.0)
        f_hi[ok] = self.sigma(t[ok], s * hi[ok])
        ok &= f_hi <= 0
        if not np.any(ok):
            return out
        lo = np.minimum(lo, hi)
        f_lo = self.sigma(t[ok], s * lo[ok])
        # the a priori bracket can fail only through interpolation overshoot
        bad = f_lo <= 0
        if np.any(bad):
            lo_ok = lo[ok]
            lo_ok[bad] = 0.0
            lo[ok] = lo_ok
            f_lo = np.where(bad, self.sigma(t[ok], s * lo[ok]), f_lo)
        tt = t[ok]
        root = _illinois(lambda x, m: self.sigma(tt[m], s * x), lo[ok], hi[ok], f_lo, f_hi[ok])
        out[ok] = root
        return out


def _collapsed_integrand(kernel, wa, wb, consts, measure, r_min, pi_basis, fd_step, stats):
    c = consts.c
    cone = _LightCone(wa, wb, c, kernel == "twistor_detkernel", pi_basis, fd_step)
    directions = (1,) if kernel == "retarded" else (1, -1)
    weight = 2.0 if kernel == "retarded" else 1.0
    proper = measure == "proper"

    def f(t):
        r0 = np.linalg.norm(wa.position(t) - wb.position(t), axis=-1)
        if np.any(r0 < r_min):
            raise CollisionError(
                f"separation {np.min(r0):.3g} below r_min = {r_min:.3g}")
        total = np.zeros(t.shape)
        for s in directions:
            u = cone.crossing(t, r0, s)
            hit = np.isfinite(u)
            if not np.any(hit):
                continue
            su = s * u[hit]
            ds = np.abs(cone.dsigma(t[hit], su))
            bad = ~(ds > 1e-12 * c * r0[hit])
            stats["nodes"] += int(hit.sum())
            stats["excluded"] += int(bad.sum())
            contrib = np.where(bad, 0.0, c / np.where(bad, 1.0, ds))
            if proper:
                contrib = contrib * wb.inverse_gamma(t[hit] - su, c)
            total[hit] += weight * contrib
        if proper:
            total *= wa.inverse_gamma(t, c)
        return total
    return f


def bilocal_phase(wa: SpacetimeWorldline, wb: SpacetimeWorldline,
                  kernel: KernelId = "invariant_interval",
                  consts: PhysicalConstants = PhysicalConstants(),
                  measure: Literal["proper", "coordinate"] = "proper",
                  window=None, rtol: float = 1e-8, r_min: float = 1e-9,
                  pi_basis=DEFAULT_PI_BASIS, fd_step: float = 1e-5,
                  max_excluded_fraction: float = 0.01) -> PhaseResult:
    """Phase generated by the chosen mediator kernel.

    The outer integral runs over the common time window (optionally
    narrowed by ``window``); the source worldline is used over its whole
    sampled range, so padding it removes edge effects of the light-cone
    delay.
    """
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}; choose from {KERNELS}")
    if measure not in ("proper", "coordinate"):
        raise ValueError(f"unknown measure {measure!r}")
    lo, hi = common_window(wa, wb, window)
    pref = consts.G * wa.mass * wb.mass / consts.hbar
    if kernel == "static":
        r_of_t = _separation(wa, wb, r_min)
        q = adaptive_gk(lambda t: 1.0 / r_of_t(t), lo, hi, _breakpoints(wa, wb, lo, hi),
                        abs_tol=1e-300, rel_tol=rtol)
        return PhaseResult(-pref * q.value, pref * q.abs_error, "static", 0, q.evaluations)
    stats = {"nodes": 0, "excluded": 0}
    f = _collapsed_integrand(kernel, wa, wb, consts, measure, r_min, pi_basis, fd_step, stats)
    q = adaptive_gk(f, lo, hi, _breakpoints(wa, wb, lo, hi), abs_tol=1e-300, rel_tol=rtol)
    if stats["nodes"] and stats["excluded"] > max_excluded_fraction * stats["nodes"]:
        raise SingularSampleError(
            f"{stats['excluded']} of {stats['nodes']} light-cone nodes are degenerate")
    return PhaseResult(-pref * q.value, pref * q.abs_error, kernel, stats["excluded"],
                       q.evaluations)


# -- general invariant functional -----------------------------------------

def general_phase_functional(wa_bt: BitwistorWorldline, wb_bt: BitwistorWorldline,
                             F: Callable[[np.ndarray, np.ndarray], np.ndarray],
                             kernel: Literal["separation", "det_kernel"] = "separation",
                             infinity: InfinityTwistor = InfinityTwistor(),
                             rtol: float = 1e-10, abs_tol: float = 1e-14) -> PhaseResult:
    """``integral dtau dtau' F(I_AB, K_AB)`` over the parameter rectangle.

    ``F`` receives equal-shape complex arrays of the conformal invariant and
    of the determinant kernel (``kernel`` selects the normalized
    ``separation`` kernel or the literal reciprocal ``det_kernel``) and must
    return real values; a non-finite value aborts with the offending
    parameters.
    """
    kfun = separation_kernel_arrays if kernel == "separation" else det_kernel_arrays
    evals = [0]

    def values(tau, taup):
        za, wa = wa_bt.interpolate(tau)
        zb, wb = wb_bt.interpolate(taup)
        inv = four_bracket(za, wa, zb, wb)
        k, _ = kfun(za, wa, zb, wb, infinity)
        out = np.asarray(F(inv, k))
        out = np.broadcast_to(out, np.shape(taup))
        if np.iscomplexobj(out):
            if np.any(np.abs(out.imag) > 1e-12 * np.maximum(1.0, np.abs(out.real))):
                raise ValueError("F must be real-valued")
            out = out.real
        bad = ~np.isfinite(out)
        if np.any(bad):
            i = np.flatnonzero(bad.ravel())[0]
            tp = np.broadcast_to(taup, out.shape).ravel()[i]
            raise ValueError(f"F is not finite at (tau, tau') = ({float(tau):.12g}, {tp:.12g})")
        return out

    def outer(taus):
        res = np.empty(taus.shape)
        for i, tau in enumerate(taus):
            q = adaptive_gk(lambda tp: values(tau, tp), wb_bt.taus[0], wb_bt.taus[-1],
                            wb_bt.taus, abs_tol=abs_tol, rel_tol=rtol)
            res[i] = q.value
            evals[0] += q.evaluations
            inner_err.append(q.abs_error)
        return res

    inner_err: list[float] = []
    q = adaptive_gk(outer, wa_bt.taus[0], wa_bt.taus[-1], wa_bt.taus,
                    abs_tol=abs_tol, rel_tol=rtol)
    span = wa_bt.taus[-1] - wa_bt.taus[0]
    inner_bound = span * (max(inner_err) if inner_err else 0.0)
    return PhaseResult(q.value, q.abs_error + inner_bound, "custom_F", 0, evals[0])


# -- static-limit convergence -------------------------------------------------

@dataclass(frozen=True)
class StaticLimitRow:
    v_over_c: float
    phi_relativistic: float
    phi_newtonian: float
    deviation: float


@dataclass(frozen=True)
class StaticLimitTable:
    rows: tuple[StaticLimitRow, ...]
    order: float
    kernel: str

    def to_json(self) -> dict:
        return {"kernel": self.kernel, "fitted_order": self.order,
                "rows": [r.__dict__ for r in self.rows]}


def oscillating_pair(r: float, T: float, v_over_c: float, consts: PhysicalConstants,
                     periods: int = 8, mass: float = 1.0, samples_per_period: int = 96):
    """Two masses a distance ``r`` apart along z, oscillating in antiphase
    along the separation with peak speed ``v`` and a whole number of
    ``periods`` inside ``[0, T]``.

    The amplitude ``v / omega`` shrinks with ``v``, so ``v -> 0`` is the
    static limit. Samples cover ``[-pad, T + pad]`` so every light-cone
    crossing seen from ``[0, T]`` lies inside the sampled history.
    """
    c = consts.c
    omega = 2 * np.pi * periods / T
    v = v_over_c * c
    a = v / omega
    if a > 0.25 * r:
        raise ValueError(f"amplitude {a:.3g} too large for separation {r:.3g}; "
                         "raise the number of periods")
    pad = 2.0 * (r + 2 * a) / c
    if v == 0:
        wa = SpacetimeWorldline.static(mass, [0, 0, 0], -pad, T + pad, c=c)
        wb = SpacetimeWorldline.static(mass, [0, 0, r], -pad, T + pad, c=c)
        return wa, wb
    n = int(samples_per_period * np.ceil(omega * (T + 2 * pad) / (2 * np.pi))) + 1

    def path(sign, z0):
        def f(t):
            out = np.zeros((np.size(t), 3))
            out[:, 2] = z0 + sign * a * np.sin(omega * t)
            return out
        return f

    wa = SpacetimeWorldline.from_function(mass, path(1.0, 0.0), -pad, T + pad, n,
                                          interpolation="cubic", c=c)
    wb = SpacetimeWorldline.from_function(mass, path(-1.0, r), -pad, T + pad, n,
                                          interpolation="cubic", c=c)
    return wa, wb


def static_limit_study(r: float, T: float, velocity_scales: Sequence[float],
                       consts: PhysicalConstants = PhysicalConstants.natural(),
                       kernel: KernelId = "invariant_interval", periods: int = 8,
                       rtol: float = 1e-11) -> StaticLimitTable:
    """Relative deviation of the relativistic phase from the Newtonian one
    for slowly oscillating masses, with the fitted power of ``v/c``."""
    rows = []
    for vc in velocity_scales:
        if not 0 <= vc < 0.5:
            raise ValueError(f"v/c must lie in [0, 0.5), got {vc!r}")
        wa, wb = oscillating_pair(r, T, vc, consts, periods)
        rel = bilocal_phase(wa, wb, kernel, consts, window=(0.0, T), rtol=rtol)
        newt = newtonian_phase(wa, wb, consts, window=(0.0, T), rtol=rtol)
        dev = abs(rel.phi - newt.phi) / abs(newt.phi)
        rows.append(StaticLimitRow(float(vc), rel.phi, newt.phi, dev))
    pts = [(np.log(row.v_over_c), np.log(row.deviation)) for row in rows
           if row.v_over_c > 0 and row.deviation > 0]
    order = float(np.polyfit(*zip(*pts), 1)[0]) if len(pts) >= 2 else float("nan")
    return StaticLimitTable(tuple(rows), order, kernel)
