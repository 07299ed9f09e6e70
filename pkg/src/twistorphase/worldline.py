"""Sampled massive worldlines and physical constants."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Literal

import jsonschema
import numpy as np
from scipy.interpolate import CubicSpline

from .spinors import SPEED_OF_LIGHT, _frozen

Interpolation = Literal["linear", "cubic"]


@dataclass(frozen=True)
class PhysicalConstants:
    """SI values default to CODATA 2018."""

    G: float = 6.67430e-11
    hbar: float = 1.054571817e-34
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        for name in ("G", "hbar", "c"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"constant {name} must be positive and finite, got {v!r}")

    @classmethod
    def natural(cls) -> "PhysicalConstants":
        return cls(G=1.0, hbar=1.0, c=1.0)


class WorldlineError(ValueError):
    pass


def _load_schema(name: str) -> dict:
    text = resources.files("twistorphase").joinpath("schemas", name).read_text()
    return json.loads(text)


@dataclass(frozen=True, eq=False)
class SpacetimeWorldline:
    """Timelike trajectory sampled at strictly increasing coordinate times.

    Parameters
    ----------
    mass : float
        Rest mass in kg (or natural units).
    times : array_like, shape (n,)
    positions : array_like, shape (n, 3)
    interpolation : {"linear", "cubic"}
    c : float
        Speed of light used for the subluminal check.
    """

    mass: float
    times: np.ndarray
    positions: np.ndarray
    interpolation: Interpolation = "linear"
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        t = np.array(self.times, dtype=float).reshape(-1)
        p = np.array(self.positions, dtype=float).reshape(-1, 3)
        if not (np.isfinite(self.mass) and self.mass > 0):
            raise WorldlineError(f"mass must be positive, got {self.mass!r}")
        if t.size < 2:
            raise WorldlineError("a worldline needs at least 2 samples")
        if p.shape[0] != t.size:
            raise WorldlineError(
                f"{t.size} times but {p.shape[0]} positions")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p))):
            raise WorldlineError("samples must be finite")
        if np.any(np.diff(t) <= 0):
            raise WorldlineError("sample times must be strictly increasing")
        if self.interpolation not in ("linear", "cubic"):
            raise WorldlineError(f"unknown interpolation {self.interpolation!r}")
        object.__setattr__(self, "times", _frozen(t))
        object.__setattr__(self, "positions", _frozen(p))
        object.__setattr__(self, "mass", float(self.mass))
        if self.interpolation == "cubic":
            object.__setattr__(self, "_spline", CubicSpline(t, p, axis=0))
        speed = self._max_speed()
        if not speed < self.c:
            raise WorldlineError(
                f"worldline is not subluminal: speed {speed:.6g} >= c = {self.c:.6g}")

    # -- construction helpers ---------------------------------------------
    @classmethod
    def static(cls, mass, position, t0, t1, **kw) -> "SpacetimeWorldline":
        position = np.asarray(position, dtype=float)
        return cls(mass, [t0, t1], [position, position], **kw)

    @classmethod
    def from_function(cls, mass, func, t0, t1, n, **kw) -> "SpacetimeWorldline":
        """Sample ``func(t) -> (n, 3)`` at ``n`` equally spaced times."""
        t = np.linspace(t0, t1, n)
        return cls(mass, t, np.asarray(func(t), dtype=float).reshape(n, 3), **kw)

    @classmethod
    def from_json(cls, doc: dict, c: float = SPEED_OF_LIGHT) -> "SpacetimeWorldline":
        jsonschema.validate(doc, _load_schema("worldline.schema.json"))
        samples = doc["samples"]
        t = [s["t"] for s in samples]
        p = [[s["x"], s["y"], s["z"]] for s in samples]
        return cls(doc["mass"], t, p, doc.get("interpolation", "linear"), c=c)

    @classmethod
    def load(cls, path, c: float = SPEED_OF_LIGHT) -> "SpacetimeWorldline":
        return cls.from_json(json.loads(Path(path).read_text()), c=c)

    def to_json(self) -> dict:
        return {
            "mass": self.mass,
            "interpolation": self.interpolation,
            "samples": [
                {"t": float(t), "x": float(p[0]), "y": float(p[1]), "z": float(p[2])}
                for t, p in zip(self.times, self.positions)
            ],
        }

    def shifted(self, dt: float) -> "SpacetimeWorldline":
        return SpacetimeWorldline(self.mass, self.times + dt, self.positions,
                                  self.interpolation, self.c)

    def with_mass(self, mass: float) -> "SpacetimeWorldline":
        return SpacetimeWorldline(mass, self.times, self.positions,
                                  self.interpolation, self.c)

    # -- evaluation ---------------------------------------------------------
    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def position(self, t) -> np.ndarray:
        """Interpolated position, shape ``t.shape + (3,)``; clamped outside
        the sampled range."""
        t = np.clip(np.asarray(t, dtype=float), self.times[0], self.times[-1])
        if self.interpolation == "cubic":
            return self._spline(t)
        return np.stack([np.interp(t, self.times, self.positions[:, k])
                         for k in range(3)], axis=-1)

    def velocity(self, t) -> np.ndarray:
        t = np.clip(np.asarray(t, dtype=float), self.times[0], self.times[-1])
        if self.interpolation == "cubic":
            return self._spline(t, 1)
        seg = np.clip(np.searchsorted(self.times, t, side="right") - 1,
                      0, self.times.size - 2)
        slopes = np.diff(self.positions, axis=0) / np.diff(self.times)[:, None]
        return slopes[seg]

    def inverse_gamma(self, t, c: float | None = None) -> np.ndarray:
        """``d tau / d t = sqrt(1 - v^2/c^2)``."""
        c = self.c if c is None else c
        v2 = np.sum(self.velocity(t) ** 2, axis=-1)
        return np.sqrt(1.0 - v2 / c ** 2)

    def proper_times(self, c: float | None = None) -> np.ndarray:
        """Proper time elapsed at each sample, starting from zero."""
        c = self.c if c is None else c
        dt = np.diff(self.times)
        if self.interpolation == "linear":
            v2 = np.sum((np.diff(self.positions, axis=0) / dt[:, None]) ** 2, axis=-1)
            steps = dt * np.sqrt(1.0 - v2 / c ** 2)
        else:
            # 5-point Gauss-Legendre per segment
            xg, wg = np.polynomial.legendre.leggauss(5)
            mids = (self.times[:-1] + self.times[1:]) / 2
            nodes = mids[:, None] + dt[:, None] / 2 * xg[None, :]
            steps = dt / 2 * (self.inverse_gamma(nodes, c) @ wg)
        return np.concatenate([[0.0], np.cumsum(steps)])

    def _max_speed(self) -> float:
        v = np.linalg.norm(np.diff(self.positions, axis=0)
                           / np.diff(self.times)[:, None], axis=-1)
        top = float(np.max(v))
        if self.interpolation == "cubic":
            probe = np.concatenate([self.times,
                                    (self.times[:-1] + self.times[1:]) / 2])
            top = max(top, float(np.max(np.linalg.norm(self.velocity(probe), axis=-1))))
        return top
