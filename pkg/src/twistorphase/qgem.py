"""Two-mass gravitational entanglement protocol.

Each mass is split into left/right arms with equal amplitudes; branch
``ij`` (``i`` for mass A, ``j`` for mass B) accumulates the phase of its
separation ``r_ij``. The joint state is ``(1/2) sum_ij exp(i phi_ij) |ij>``
and its entanglement is set by the gauge-invariant combination
``dphi = phi_LR + phi_RL - phi_LL - phi_RR``: concurrence
``|sin(dphi / 2)|``.
"""
from __future__ import annotations

import csv
import dataclasses
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import jsonschema
import numpy as np

from .phase import KERNELS, bilocal_phase, closed_form_phase, newtonian_phase
from .worldline import PhysicalConstants, SpacetimeWorldline, _load_schema

BRANCHES = ("LL", "LR", "RL", "RR")
BACKENDS = ("closed_form", "newtonian_integrated") + tuple(f"bilocal:{k}" for k in KERNELS)
CSV_COLUMNS = ("axis_value", "phi_LL", "phi_LR", "phi_RL", "phi_RR", "delta_phi",
               "concurrence", "negativity", "entropy_bits", "separable")
SEPARABLE_TOL = 1e-12


class BranchError(RuntimeError):
    pass


@dataclass(frozen=True)
class ProtocolConfig:
    m_a: float
    m_b: float
    T: float
    separations: dict = None
    positions: dict = None
    phase_backend: str = "closed_form"
    consts: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if not (self.m_a > 0 and self.m_b > 0):
            raise ValueError("masses must be positive")
        if not self.T >= 0:
            raise ValueError("interaction time must be non-negative")
        if self.phase_backend not in BACKENDS:
            raise ValueError(f"unknown phase backend {self.phase_backend!r}")
        if self.positions is not None:
            pos = {k: {arm: np.asarray(v[arm], dtype=float) for arm in "LR"}
                   for k, v in self.positions.items()}
            object.__setattr__(self, "positions", pos)
            seps = {i + j: float(np.linalg.norm(pos["a"][i] - pos["b"][j]))
                    for i in "LR" for j in "LR"}
            object.__setattr__(self, "separations", seps)
        if self.separations is None:
            raise ValueError("give either separations or positions")
        seps = {k: float(self.separations[k]) for k in BRANCHES}
        if any(not v > 0 for v in seps.values()):
            raise ValueError(f"all branch separations must be positive: {seps}")
        object.__setattr__(self, "separations", seps)

    @classmethod
    def from_json(cls, doc: dict) -> "ProtocolConfig":
        jsonschema.validate(doc, _load_schema("protocol_config.schema.json"))
        consts = PhysicalConstants(**doc.get("constants", {}))
        return cls(doc["m_a"], doc["m_b"], doc["T"], doc.get("separations"),
                   doc.get("positions"), doc.get("phase_backend", "closed_form"), consts)

    def to_json(self) -> dict:
        doc = {"m_a": self.m_a, "m_b": self.m_b, "T": self.T,
               "phase_backend": self.phase_backend,
               "constants": dataclasses.asdict(self.consts)}
        if self.positions is not None:
            doc["positions"] = {k: {arm: v[arm].tolist() for arm in "LR"}
                                for k, v in self.positions.items()}
        else:
            doc["separations"] = dict(self.separations)
        return doc

    def arm_positions(self, branch: str):
        """Positions of A's and B's arm for a branch; with bare separations
        A sits at the origin and B on the z axis."""
        if self.positions is not None:
            return self.positions["a"][branch[0]], self.positions["b"][branch[1]]
        return np.zeros(3), np.array([0.0, 0.0, self.separations[branch]])

    def replace(self, **kw) -> "ProtocolConfig":
        return dataclasses.replace(self, **kw)

    def scaled(self, factor: float) -> "ProtocolConfig":
        if self.positions is not None:
            pos = {k: {arm: v[arm] * factor for arm in "LR"} for k, v in self.positions.items()}
            return dataclasses.replace(self, positions=pos, separations=None)
        return dataclasses.replace(
            self, separations={k: v * factor for k, v in self.separations.items()})


@dataclass(frozen=True)
class EntanglementReport:
    branch_phases: tuple
    effective_phase: float
    concurrence: float
    negativity: float
    entropy: float
    separable: bool

    def to_json(self) -> dict:
        return {"branch_phases": dict(zip(BRANCHES, self.branch_phases)),
                "effective_phase": self.effective_phase,
                "concurrence": self.concurrence, "negativity": self.negativity,
                "entropy_bits": self.entropy, "separable": self.separable}


def _branch_phase(cfg: ProtocolConfig, branch: str) -> float:
    r = cfg.separations[branch]
    backend = cfg.phase_backend
    if backend == "closed_form":
        return closed_form_phase(cfg.m_a, cfg.m_b, r, cfg.T, cfg.consts)
    if cfg.T == 0:
        return 0.0
    pa, pb = cfg.arm_positions(branch)
    wa = SpacetimeWorldline.static(cfg.m_a, pa, 0.0, cfg.T, c=cfg.consts.c)
    wb = SpacetimeWorldline.static(cfg.m_b, pb, 0.0, cfg.T, c=cfg.consts.c)
    if backend == "newtonian_integrated":
        return newtonian_phase(wa, wb, cfg.consts).magnitude
    return bilocal_phase(wa, wb, backend.split(":", 1)[1], cfg.consts).magnitude


def branch_phases(cfg: ProtocolConfig) -> np.ndarray:
    """Phase magnitudes for branches LL, LR, RL, RR."""
    out = []
    for b in BRANCHES:
        try:
            out.append(_branch_phase(cfg, b))
        except Exception as exc:
            raise BranchError(f"branch {b}: {exc}") from exc
    return np.array(out)


def effective_phase(phases) -> float:
    p = np.asarray(phases, dtype=float)
    return float(p[1] + p[2] - p[0] - p[3])


def joint_state(phases) -> np.ndarray:
    """Amplitudes on ``|LL>, |LR>, |RL>, |RR>``."""
    return 0.5 * np.exp(1j * np.asarray(phases, dtype=float))


def _check_state(state) -> np.ndarray:
    psi = np.asarray(state, dtype=complex).reshape(-1)
    if psi.shape != (4,):
        raise ValueError("a two-qubit pure state has 4 amplitudes")
    if abs(np.linalg.norm(psi) - 1) > 1e-10:
        raise ValueError(f"state is not normalized (norm {np.linalg.norm(psi):.12g})")
    return psi


def binary_entropy(p) -> float:
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    terms = [x * np.log2(x) for x in (p, 1 - p) if x > 0]
    return float(-sum(terms)) if terms else 0.0


def entanglement_measures(state) -> dict:
    """Concurrence, negativity and entanglement entropy of a pure state.

    Concurrence from ``2|a00 a11 - a01 a10|``, negativity from the spectrum
    of the partial transpose, entropy from the Schmidt decomposition.
    """
    psi = _check_state(state)
    a = psi.reshape(2, 2)
    conc = float(2 * abs(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]))
    rho = np.outer(psi, psi.conj()).reshape(2, 2, 2, 2)
    rho_tb = rho.transpose(0, 3, 2, 1).reshape(4, 4)
    ev = np.linalg.eigvalsh(rho_tb)
    neg = float(-np.sum(ev[ev < 0]))
    schmidt = np.linalg.svd(a, compute_uv=False) ** 2
    schmidt = schmidt / schmidt.sum()
    ent = float(-sum(w * np.log2(w) for w in schmidt if w > 0)) + 0.0
    return {"concurrence": min(conc, 1.0), "negativity": neg, "entropy": ent,
            "schmidt_weights": schmidt}


def partial_trace_oracle(state) -> dict:
    """Reference measures from the reduced density matrix of mass A."""
    psi = _check_state(state)
    rho = np.outer(psi, psi.conj()).reshape(2, 2, 2, 2)
    rho_a = np.einsum("ijkj->ik", rho)
    lam = np.clip(np.linalg.eigvalsh(rho_a), 0.0, 1.0)
    ent = float(-sum(x * np.log2(x) for x in lam if x > 0)) + 0.0
    c = float(2 * np.sqrt(lam[0] * lam[1]))
    return {"concurrence": c, "negativity": c / 2, "entropy": ent}


def report_from_phases(phases) -> EntanglementReport:
    phases = tuple(float(p) for p in phases)
    dphi = effective_phase(phases)
    m = entanglement_measures(joint_state(phases))
    return EntanglementReport(phases, dphi, m["concurrence"], m["negativity"], m["entropy"],
                              bool(abs(np.sin(dphi / 2)) < SEPARABLE_TOL))


def evaluate(cfg: ProtocolConfig) -> EntanglementReport:
    return report_from_phases(branch_phases(cfg))


def consistency_defect(report: EntanglementReport) -> float:
    """Largest disagreement between the report and the partial-trace oracle
    and between the closed-form relations among the measures."""
    ref = partial_trace_oracle(joint_state(report.branch_phases))
    c = report.concurrence
    h = binary_entropy((1 + np.sqrt(max(0.0, 1 - c * c))) / 2)
    return max(abs(c - ref["concurrence"]), abs(report.negativity - ref["negativity"]),
               abs(report.entropy - ref["entropy"]), abs(report.negativity - c / 2),
               abs(report.entropy - h), abs(c - abs(np.sin(report.effective_phase / 2))))


# -- sweeps -------------------------------------------------------------------

Axis = Literal["r", "T", "m"]


@dataclass(frozen=True)
class SweepPoint:
    axis_value: float
    report: EntanglementReport | None
    error: str | None = None
    consistency: float | None = None


def _point(cfg: ProtocolConfig, axis: str, value: float) -> ProtocolConfig:
    if axis == "T":
        if not (np.isfinite(value) and value >= 0):
            raise ValueError(f"interaction times must be non-negative, got {value!r}")
        return cfg.replace(T=float(value))
    if not (np.isfinite(value) and value > 0):
        raise ValueError(f"sweep values must be positive and finite, got {value!r}")
    if axis == "m":
        return cfg.replace(m_a=float(value), m_b=float(value))
    if axis == "r":
        # geometry scaled so the closest pair of arms sits at `value`
        return cfg.scaled(float(value) / min(cfg.separations.values()))
    raise ValueError(f"unknown sweep axis {axis!r}; choose r, T or m")


def _run_point(cfg, axis, value, consistency_tol):
    try:
        rep = evaluate(_point(cfg, axis, value))
    except Exception as exc:
        return SweepPoint(float(value), None, f"{type(exc).__name__}: {exc}")
    defect = consistency_defect(rep)
    err = None if defect <= consistency_tol else f"measure consistency defect {defect:.3g}"
    return SweepPoint(float(value), rep, err, defect)


def sweep(cfg: ProtocolConfig, axis: Axis, values: Iterable[float], threads: int = 1,
          consistency_tol: float = 1e-10) -> list[SweepPoint]:
    """One report per value, in input order. Failures are recorded on the
    point and the sweep continues."""
    if axis not in ("r", "T", "m"):
        raise ValueError(f"unknown sweep axis {axis!r}; choose r, T or m")
    values = list(values)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda v: _run_point(cfg, axis, v, consistency_tol), values))
    return [_run_point(cfg, axis, v, consistency_tol) for v in values]


def sweep_to_csv(points: Sequence[SweepPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        axis = "" if np.isnan(p.axis_value) else repr(p.axis_value)
        if p.report is None:
            w.writerow([axis] + [""] * (len(CSV_COLUMNS) - 1))
            continue
        r = p.report
        w.writerow([axis] + [repr(x) for x in r.branch_phases]
                   + [repr(r.effective_phase), repr(r.concurrence), repr(r.negativity),
                      repr(r.entropy), str(r.separable).lower()])
    return buf.getvalue()
