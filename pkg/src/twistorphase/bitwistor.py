"""Bitwistors (lines in projective twistor space) and their invariants."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .spinors import SpacetimePoint, _frozen, matrix_to_coords
from .twistors import Sl4Transform, Twistor, incidence
from .worldline import SpacetimeWorldline


def _levi_civita4() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        inversions = sum(perm[i] > perm[j] for i in range(4) for j in range(i + 1, 4))
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


LEVI_CIVITA = _frozen(_levi_civita4())
DEFAULT_PI_BASIS = _frozen(np.eye(2, dtype=complex))


class DegeneratePair(ValueError):
    pass


class LineAtInfinity(ValueError):
    pass


class NonRealPoint(ValueError):
    pass


def wedge(z, w) -> np.ndarray:
    """Plücker array ``(z^a w^b - z^b w^a) / 2`` over trailing axes."""
    z = np.asarray(z)
    w = np.asarray(w)
    zw = z[..., :, None] * w[..., None, :]
    return (zw - np.swapaxes(zw, -1, -2)) / 2


def eps_contract(x, y):
    """``eps_{abcd} X^{ab} Y^{cd}`` for (..., 4, 4) arrays."""
    return np.einsum("abcd,...ab,...cd->...", LEVI_CIVITA, x, y)


@dataclass(frozen=True, eq=False)
class Bitwistor:
    z: Twistor
    w: Twistor
    plucker: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "plucker",
                           _frozen(wedge(self.z.components, self.w.components)))

    @property
    def pair(self) -> np.ndarray:
        """The two twistors as a (2, 4) array."""
        return np.stack([self.z.components, self.w.components])


def from_pair(z: Twistor, w: Twistor, tol: float = 1e-12) -> Bitwistor:
    nz = np.linalg.norm(z.components)
    nw = np.linalg.norm(w.components)
    area = np.linalg.norm(wedge(z.components, w.components)) * np.sqrt(2)
    if not area > tol * nz * nw:
        raise DegeneratePair("twistors are linearly dependent; no line through them")
    return Bitwistor(z, w)


class SimplicityResult(NamedTuple):
    residual: float
    degenerate: bool


def simplicity_check(x) -> SimplicityResult:
    """Normalized ``|eps_{abcd} X^{ab} X^{cd}| / ||X||^2``.

    Accepts a :class:`Bitwistor` or a raw 4x4 antisymmetric array, so that
    non-decomposable bivectors can be checked too. The zero bivector is
    reported with residual 0 and ``degenerate=True``.
    """
    p = x.plucker if isinstance(x, Bitwistor) else np.asarray(x)
    norm2 = float(np.sum(np.abs(p) ** 2))
    if norm2 == 0.0:
        return SimplicityResult(0.0, True)
    return SimplicityResult(float(abs(eps_contract(p, p)) / norm2), False)


def gl2_act(x: Bitwistor, g) -> Bitwistor:
    """Change of basis on the line: ``(z', w') = (z, w) g``."""
    g = np.asarray(g, dtype=complex)
    if abs(np.linalg.det(g)) <= 1e-10:
        raise ValueError("GL(2,C) element is singular")
    z, w = x.z.components, x.w.components
    return Bitwistor(Twistor(g[0, 0] * z + g[1, 0] * w),
                     Twistor(g[0, 1] * z + g[1, 1] * w))


def sl4_act_bitwistor(g: Sl4Transform, x: Bitwistor) -> Bitwistor:
    return Bitwistor(Twistor(g.m @ x.z.components), Twistor(g.m @ x.w.components))


def invariant_I(a: Bitwistor, b: Bitwistor) -> complex:
    """Conformal invariant ``eps_{abcd} X_A^{ab} X_B^{cd}``."""
    return complex(eps_contract(a.plucker, b.plucker))


def lines_to_coords(z, w, hermitian_tol: float = 1e-8) -> np.ndarray:
    """Recover real ``(t, x, y, z)`` from incident twistor pairs (batched).

    Solves ``omega = i x pi`` for both twistors at once:
    ``x = -i [omega_z omega_w] [pi_z pi_w]^{-1}``.
    """
    z = np.asarray(z)
    w = np.asarray(w)
    omega = np.stack([z[..., :2], w[..., :2]], axis=-1)
    pis = np.stack([z[..., 2:], w[..., 2:]], axis=-1)
    det = pis[..., 0, 0] * pis[..., 1, 1] - pis[..., 0, 1] * pis[..., 1, 0]
    scale = np.linalg.norm(z[..., 2:], axis=-1) * np.linalg.norm(w[..., 2:], axis=-1)
    if np.any(~(np.abs(det) > 1e-12 * scale)):
        raise LineAtInfinity("pi parts are dependent: the line meets infinity")
    xm = -1j * omega @ np.linalg.inv(pis)
    xh = np.conj(np.swapaxes(xm, -1, -2))
    dev = np.max(np.abs(xm - xh), axis=(-1, -2))
    size = 1.0 + np.max(np.abs(xm), axis=(-1, -2))
    if np.any(dev > hermitian_tol * size):
        raise NonRealPoint(
            f"line is not incident with a real point (Hermiticity defect {np.max(dev):.3g})")
    return matrix_to_coords((xm + xh) / 2).real


def line_to_point(x: Bitwistor) -> SpacetimePoint:
    t, x1, x2, x3 = lines_to_coords(x.z.components, x.w.components)
    return SpacetimePoint(t, x1, x2, x3, "natural")


def point_to_bitwistor(p: SpacetimePoint, pi_pair=DEFAULT_PI_BASIS) -> Bitwistor:
    """The line of all twistors incident with ``p``, spanned by the
    incident twistors of the two given (column) pi spinors."""
    pi_pair = _check_pi_pair(pi_pair)
    zw = incidence(p.as_array()[None, :], pi_pair.T)
    return from_pair(Twistor(zw[0]), Twistor(zw[1]))


def _check_pi_pair(pi_pair) -> np.ndarray:
    p = np.asarray(pi_pair, dtype=complex)
    if p.shape != (2, 2):
        raise ValueError("pi pair must be a 2x2 array with the spinors as columns")
    scale = np.linalg.norm(p[:, 0]) * np.linalg.norm(p[:, 1])
    if not abs(np.linalg.det(p)) > 1e-12 * scale:
        raise DegeneratePair("the two pi spinors are not independent")
    return p


@dataclass(frozen=True, eq=False)
class BitwistorWorldline:
    """One-parameter family of bitwistors indexed by proper time.

    ``z`` and ``w`` are (n, 4) arrays; ``bitwistors`` gives the object view.
    Between samples the twistors are interpolated linearly, which for
    incident twistors is the same as building the line of the linearly
    interpolated spacetime point.
    """

    taus: np.ndarray
    z: np.ndarray
    w: np.ndarray
    source: SpacetimeWorldline | None = None

    def __post_init__(self):
        taus = np.array(self.taus, dtype=float).reshape(-1)
        z = np.array(self.z, dtype=complex).reshape(-1, 4)
        w = np.array(self.w, dtype=complex).reshape(-1, 4)
        if taus.size < 2:
            raise ValueError("a bitwistor worldline needs at least 2 samples")
        if z.shape[0] != taus.size or w.shape[0] != taus.size:
            raise ValueError("sample count mismatch")
        if np.any(np.diff(taus) <= 0):
            raise ValueError("proper times must be strictly increasing")
        for name, v in (("taus", taus), ("z", z), ("w", w)):
            object.__setattr__(self, name, _frozen(v))

    @classmethod
    def from_bitwistors(cls, taus: Sequence[float], xs: Sequence[Bitwistor], source=None):
        return cls(taus, [x.z.components for x in xs], [x.w.components for x in xs], source)

    @property
    def bitwistors(self) -> list[Bitwistor]:
        return [Bitwistor(Twistor(a), Twistor(b)) for a, b in zip(self.z, self.w)]

    @property
    def samples(self) -> list[tuple[float, Bitwistor]]:
        return list(zip(self.taus.tolist(), self.bitwistors))

    @property
    def plucker(self) -> np.ndarray:
        return wedge(self.z, self.w)

    def interpolate(self, tau) -> tuple[np.ndarray, np.ndarray]:
        """Twistor pair at arbitrary ``tau`` (clamped to the sampled range)."""
        tau = np.clip(np.asarray(tau, dtype=float), self.taus[0], self.taus[-1])
        k = np.clip(np.searchsorted(self.taus, tau, side="right") - 1, 0, self.taus.size - 2)
        f = ((tau - self.taus[k]) / (self.taus[k + 1] - self.taus[k]))[..., None]
        z = self.z[k] * (1 - f) + self.z[k + 1] * f
        w = self.w[k] * (1 - f) + self.w[k + 1] * f
        return z, w

    def transformed(self, g: Sl4Transform) -> "BitwistorWorldline":
        return BitwistorWorldline(self.taus, self.z @ g.m.T, self.w @ g.m.T, self.source)

    def to_coords(self) -> np.ndarray:
        return lines_to_coords(self.z, self.w)


def worldline_to_bitwistors(wl: SpacetimeWorldline, pi_pair=DEFAULT_PI_BASIS) -> BitwistorWorldline:
    """Replace each sample point by its line in twistor space.

    Time enters the matrix map as the length ``c t`` (``c = wl.c``); the
    parameter is the proper time along the sampled path.
    """
    pi_pair = _check_pi_pair(pi_pair)
    coords = np.column_stack([wl.c * wl.times, wl.positions])
    z = incidence(coords, pi_pair[:, 0])
    w = incidence(coords, pi_pair[:, 1])
    return BitwistorWorldline(wl.proper_times(), z, w, wl)
