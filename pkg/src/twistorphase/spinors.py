"""Two-component spinors, the matrix form of spacetime points and the
Minkowski interval.

Conventions
-----------
A spacetime point ``(t, x, y, z)`` is mapped to the Hermitian matrix::

    x^{AA'} = [[t + z, x + i y],
               [x - i y, t - z]]

with no ``1/sqrt(2)`` factor, so ``det x^{AA'} = t^2 - x^2 - y^2 - z^2``.
The interval uses the mostly-plus signature, ``-(dt)^2 + |dx|^2``, so
spacelike separations are positive.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s, exact

IndexType = Literal["unprimed", "primed"]
UnitMode = Literal["natural", "si"]

# eps_{AB} with eps_{01} = +1; eps(a, b) = a^T EPS b
EPS = np.array([[0.0, 1.0], [-1.0, 0.0]])


class ContractViolation(ValueError):
    """Raised when operands of a contraction carry incompatible tags."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Spinor2:
    """Two-component complex spinor tagged with its index type."""

    components: np.ndarray
    index: IndexType = "unprimed"

    def __post_init__(self):
        c = np.array(self.components, dtype=complex).reshape(-1)
        if c.shape != (2,):
            raise ValueError(f"spinor needs 2 components, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("spinor components must be finite")
        if self.index not in ("unprimed", "primed"):
            raise ValueError(f"unknown index type {self.index!r}")
        object.__setattr__(self, "components", _frozen(c))

    @property
    def c0(self) -> complex:
        return complex(self.components[0])

    @property
    def c1(self) -> complex:
        return complex(self.components[1])

    def is_zero(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.components) <= atol))

    def __repr__(self):
        return f"Spinor2({self.c0!r}, {self.c1!r}, index={self.index!r})"


def eps_bracket(a: Spinor2, b: Spinor2) -> complex:
    """Antisymmetric spinor pairing ``a0*b1 - a1*b0``."""
    if a.index != b.index:
        raise ContractViolation(
            f"cannot pair a {a.index} spinor with a {b.index} spinor")
    return complex(a.components[0] * b.components[1]
                   - a.components[1] * b.components[0])


def eps_pair(a, b):
    """Array version of :func:`eps_bracket` over trailing axis of length 2."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass(frozen=True)
class SpacetimePoint:
    """An event. In ``"si"`` mode ``t`` is in seconds and lengths in meters;
    in ``"natural"`` mode all four coordinates share one unit (c = 1)."""

    t: float
    x: float
    y: float
    z: float
    unit_mode: UnitMode = "natural"

    def __post_init__(self):
        if self.unit_mode not in ("natural", "si"):
            raise ValueError(f"unknown unit mode {self.unit_mode!r}")
        for name in ("t", "x", "y", "z"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"coordinate {name} is not finite: {v!r}")
            object.__setattr__(self, name, float(v))

    @classmethod
    def origin(cls, unit_mode: UnitMode = "natural") -> "SpacetimePoint":
        return cls(0.0, 0.0, 0.0, 0.0, unit_mode)

    def time_length(self) -> float:
        """Time coordinate expressed as a length (``c t`` in SI mode)."""
        return self.t * SPEED_OF_LIGHT if self.unit_mode == "si" else self.t

    def as_array(self) -> np.ndarray:
        """``(c t, x, y, z)`` in natural form, lengths throughout."""
        return np.array([self.time_length(), self.x, self.y, self.z])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


def hermitian_matrix(coords) -> np.ndarray:
    """Map ``(..., 4)`` coordinates ``(t, x, y, z)`` to ``(..., 2, 2)`` matrices.

    Works for complex coordinates as well (complexified points); no
    conjugation is taken, so the map is holomorphic.
    """
    coords = np.asarray(coords)
    t, x, y, z = (coords[..., k] for k in range(4))
    out = np.empty(coords.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = t + z
    out[..., 0, 1] = x + 1j * y
    out[..., 1, 0] = x - 1j * y
    out[..., 1, 1] = t - z
    return out


def point_to_matrix(p: SpacetimePoint) -> np.ndarray:
    return hermitian_matrix(p.as_array())


def matrix_to_coords(m) -> np.ndarray:
    """Inverse of :func:`hermitian_matrix` (holomorphic, no reality check)."""
    m = np.asarray(m)
    t = (m[..., 0, 0] + m[..., 1, 1]) / 2
    z = (m[..., 0, 0] - m[..., 1, 1]) / 2
    x = (m[..., 0, 1] + m[..., 1, 0]) / 2
    y = (m[..., 0, 1] - m[..., 1, 0]) / 2j
    return np.stack([t, x, y, z], axis=-1)


def interval_sq(coords_a, coords_b) -> np.ndarray:
    """Mostly-plus interval between ``(..., 4)`` natural coordinate arrays."""
    d = np.asarray(coords_a) - np.asarray(coords_b)
    return -d[..., 0] ** 2 + d[..., 1] ** 2 + d[..., 2] ** 2 + d[..., 3] ** 2


def minkowski_interval_sq(xa: SpacetimePoint, xb: SpacetimePoint) -> float:
    if xa.unit_mode != xb.unit_mode:
        raise ContractViolation(
            f"unit mode mismatch: {xa.unit_mode} vs {xb.unit_mode}")
    return float(interval_sq(xa.as_array(), xb.as_array()))
