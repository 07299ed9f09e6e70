"""Twistors, incidence with spacetime points, the infinity twistor and the
symmetry actions used by the invariance checks.

A twistor is stored as a length-4 complex column ``(omega^0, omega^1, pi_0',
pi_1')``. All array helpers accept arbitrary leading batch dimensions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import expm

from .spinors import (Spinor2, SpacetimePoint, eps_pair, hermitian_matrix,
                      _frozen)

BlockForm = Literal["pi_block", "omega_block"]


@dataclass(frozen=True, eq=False)
class Twistor:
    components: np.ndarray

    def __post_init__(self):
        c = np.array(self.components, dtype=complex).reshape(-1)
        if c.shape != (4,):
            raise ValueError(f"twistor needs 4 components, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("twistor components must be finite")
        object.__setattr__(self, "components", _frozen(c))

    @classmethod
    def from_spinors(cls, omega: Spinor2, pi: Spinor2) -> "Twistor":
        if omega.index != "unprimed" or pi.index != "primed":
            raise ValueError("twistor is (unprimed omega, primed pi)")
        return cls(np.concatenate([omega.components, pi.components]))

    @property
    def omega(self) -> Spinor2:
        return Spinor2(self.components[:2], "unprimed")

    @property
    def pi(self) -> Spinor2:
        return Spinor2(self.components[2:], "primed")

    def __repr__(self):
        return f"Twistor({np.array2string(self.components, precision=6)})"


@dataclass(frozen=True)
class InfinityTwistor:
    """Flat (Lambda = 0) infinity twistor.

    ``pi_block`` contracts the primed parts, ``<Z W> = eps(pi_Z, pi_W)``;
    this is the one preserved by translations and it is the default.
    ``omega_block`` contracts the unprimed parts and is kept as a
    diagnostic: it is the infinity twistor of the inverted frame, where the
    spacetime origin plays the role of the point at infinity.
    """

    block_form: BlockForm = "pi_block"

    def __post_init__(self):
        if self.block_form not in ("pi_block", "omega_block"):
            raise ValueError(f"unknown block form {self.block_form!r}")

    @property
    def matrix(self) -> np.ndarray:
        m = np.zeros((4, 4))
        k = 2 if self.block_form == "pi_block" else 0
        m[k, k + 1] = 1.0
        m[k + 1, k] = -1.0
        return m

    def contract(self, z, w):
        """Array form of ``I_{ab} Z^a W^b`` over the trailing axis."""
        z = np.asarray(z)
        w = np.asarray(w)
        s = slice(2, 4) if self.block_form == "pi_block" else slice(0, 2)
        return eps_pair(z[..., s], w[..., s])


@dataclass(frozen=True, eq=False)
class Sl4Transform:
    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"SL(4,C) element must be 4x4, got {m.shape}")
        d = np.linalg.det(m)
        if not abs(d - 1) < 1e-10:
            raise ValueError(f"transform is not unimodular: det = {d}")
        object.__setattr__(self, "m", _frozen(m))

    def __matmul__(self, other: "Sl4Transform") -> "Sl4Transform":
        return Sl4Transform(self.m @ other.m)


def incidence(coords, pi) -> np.ndarray:
    """Twistors ``(i x^{AA'} pi_{A'}, pi)`` for ``(..., 4)`` coordinates.

    Coordinates may be complex; the matrix map is holomorphic.
    """
    pi = np.asarray(pi, dtype=complex)
    xm = hermitian_matrix(coords)
    omega = 1j * np.einsum("...ab,...b->...a", xm, pi)
    omega, pi = np.broadcast_arrays(omega, pi)
    return np.concatenate([omega, pi], axis=-1)


def incident_twistor(x: SpacetimePoint, pi: Spinor2) -> Twistor:
    if pi.is_zero():
        raise ValueError("incidence needs a nonzero pi spinor")
    return Twistor(incidence(x.as_array(), pi.components))


def incidence_residual(z: Twistor, x: SpacetimePoint) -> float:
    expected = 1j * hermitian_matrix(x.as_array()) @ z.components[2:]
    return float(np.max(np.abs(z.components[:2] - expected)))


def inf_contract(z: Twistor, w: Twistor,
                 i: InfinityTwistor = InfinityTwistor()) -> complex:
    return complex(i.contract(z.components, w.components))


def rescale(z: Twistor, lam: complex) -> Twistor:
    if lam == 0:
        raise ValueError("projective rescaling needs a nonzero factor")
    return Twistor(z.components * lam)


def sl4_act(g: Sl4Transform, z: Twistor) -> Twistor:
    return Twistor(g.m @ z.components)


def four_bracket(z1, z2, z3, z4):
    """``eps_{abcd} Z1^a Z2^b Z3^c Z4^d``, i.e. the 4x4 determinant."""
    return np.linalg.det(np.stack(np.broadcast_arrays(z1, z2, z3, z4), axis=-1))


def translation(a) -> Sl4Transform:
    """Twistor image of the spacetime translation ``x -> x + a``.

    ``omega -> omega + i a^{AA'} pi``; it fixes the pi-block infinity twistor.
    """
    m = np.eye(4, dtype=complex)
    m[:2, 2:] = 1j * hermitian_matrix(np.asarray(a, dtype=float))
    return Sl4Transform(m)


def random_sl4(seed: int, scale: float = 0.5) -> Sl4Transform:
    """Deterministic, well-conditioned SL(4,C) sample.

    Built as the exponential of a random traceless matrix, so the condition
    number stays bounded by ``exp(2 ||A||)``.
    """
    rng = np.random.default_rng(seed)
    a = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) * scale
    a -= np.trace(a) / 4 * np.eye(4)
    m = expm(a)
    m /= np.linalg.det(m) ** 0.25
    return Sl4Transform(m)


def random_gl2(seed: int) -> np.ndarray:
    """Deterministic 2x2 complex matrix with ``|det|`` log-uniform in [0.1, 10]."""
    rng = np.random.default_rng(seed)
    a = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) * 0.5
    g = expm(a)
    target = 10.0 ** rng.uniform(-1.0, 1.0)
    g *= np.sqrt(target / abs(np.linalg.det(g)))
    return g
