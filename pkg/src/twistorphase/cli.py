"""Command-line front end.

Exit codes: 0 success, 1 scientific failure (a property fails, a spread is
too large, worldlines do not overlap), 2 usage or configuration error.

Every run carries a manifest. The numerical part of the output depends only
on the subcommand, the seed and the resolved configuration, never on the
thread count or the output destination; ``started``/``finished`` are the
only fields that change between identical runs.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import kernel as kn
from . import qgem, verify
from .phase import (KERNELS, CollisionError, NoOverlapError, SingularSampleError,
                    bilocal_phase, newtonian_phase)
from .worldline import PhysicalConstants, SpacetimeWorldline, WorldlineError

REDUCE_SPREAD_LIMIT = 1e-8


class ConfigError(Exception):
    """Raised for anything that should exit with status 2."""


class ScientificFailure(Exception):
    """Raised when a computation cannot produce a valid result (exit 1)."""


# -- manifest and output ------------------------------------------------------

def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


def config_digest(config: dict) -> str:
    text = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def manifest(command: str, seed: int, config: dict, started: str) -> dict:
    return {"command": command, "seed": seed, "config_digest": config_digest(config),
            "tool_version": __version__, "started": started, "finished": _now()}


def _emit(args, text: str, man: dict):
    """Write ``text`` to ``--out`` or stdout. CSV output cannot hold the
    manifest, so it goes to a ``.manifest.json`` sidecar (or stderr)."""
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        if args.format == "csv":
            out.with_name(out.name + ".manifest.json").write_text(
                json.dumps(man, indent=2) + "\n")
    else:
        sys.stdout.write(text)
        if args.format == "csv":
            sys.stderr.write(json.dumps(man) + "\n")


def _json_doc(man: dict, result: dict) -> str:
    return json.dumps({"manifest": man, "result": result}, indent=2) + "\n"


def _rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _constants(args, base: PhysicalConstants = PhysicalConstants()) -> PhysicalConstants:
    kw = {k: v for k, v in (("G", args.G), ("hbar", args.hbar), ("c", args.c)) if v is not None}
    try:
        return dataclasses.replace(base, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _read_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from exc


def _schema_message(path: str, exc: jsonschema.ValidationError) -> str:
    where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
    return f"{path}: schema violation at {where}: {exc.message}"


# -- subcommands --------------------------------------------------------------

def cmd_verify(args) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    started = _now()
    names = verify.SUITES if args.suite == "all" else (args.suite,)
    if args.threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            parts = list(pool.map(lambda n: verify.run(n, args.seed, args.trials), names))
    else:
        parts = [verify.run(n, args.seed, args.trials) for n in names]
    suites = {n: p["suites"][n] for n, p in zip(names, parts)}
    failed = [f for p in parts for f in p["failed"]]
    result = {"suites": suites, "passed": not failed, "failed": failed}
    config = {"suite": args.suite, "trials": args.trials}
    man = manifest(f"verify {args.suite}", args.seed, config, started)
    if args.format == "csv":
        rows = [[s, p["name"], p["status"], _fmt(p["value"]), _fmt(p["threshold"])]
                for s, props in suites.items() for p in props]
        text = _rows_to_csv(["suite", "property", "status", "value", "threshold"], rows)
    else:
        text = _json_doc(man, result)
    _emit(args, text, man)
    return 0 if result["passed"] else 1


def cmd_reduce_check(args) -> int:
    samples = args.samples if args.samples is not None else args.trials
    if samples < 2:
        raise ConfigError("reduce-check needs at least 2 samples")
    started = _now()
    pairs = kn.random_separated_pairs(samples, seed=args.seed)
    report = kn.reduction_check(pairs, seed=args.seed + 1, kernel=args.kernel)
    summary = report.to_json()
    summary["spread_limit"] = REDUCE_SPREAD_LIMIT
    ok = bool(np.isfinite(report.relative_spread) and report.relative_spread < REDUCE_SPREAD_LIMIT
              and report.cross_basis_deviation < REDUCE_SPREAD_LIMIT)
    summary["passed"] = ok
    config = {"samples": samples, "kernel": args.kernel}
    man = manifest("reduce-check", args.seed, config, started)
    ratio_csv = _rows_to_csv(["index", "ratio_real", "ratio_imag"],
                             [[i, repr(float(r.real)), repr(float(r.imag))]
                              for i, r in enumerate(report.ratios)])
    if args.ratios:
        Path(args.ratios).write_text(ratio_csv)
    _emit(args, ratio_csv if args.format == "csv" else _json_doc(man, summary), man)
    return 0 if ok else 1


def cmd_phase(args) -> int:
    consts = _constants(args)
    docs = []
    wls = []
    for path in (args.worldline_a, args.worldline_b):
        doc = _read_json(path)
        try:
            wls.append(SpacetimeWorldline.from_json(doc, c=consts.c))
        except jsonschema.ValidationError as exc:
            raise ConfigError(_schema_message(path, exc)) from exc
        except WorldlineError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        docs.append(doc)
    started = _now()
    try:
        if args.kernel == "newtonian":
            res = newtonian_phase(*wls, consts)
        else:
            res = bilocal_phase(*wls, kernel=args.kernel, consts=consts, measure=args.measure)
    except (NoOverlapError, CollisionError, SingularSampleError) as exc:
        raise ScientificFailure(str(exc)) from exc
    config = {"worldlines": docs, "kernel": args.kernel,
              "measure": args.measure, "constants": dataclasses.asdict(consts)}
    man = manifest("phase", args.seed, config, started)
    out = res.to_json()
    if args.format == "csv":
        text = _rows_to_csv(list(out), [[_fmt(v) for v in out.values()]])
    else:
        text = _json_doc(man, out)
    _emit(args, text, man)
    return 0


def _parse_sweep(text: str):
    """``axis=v1,v2,...`` or ``axis=start:stop:count`` (inclusive linspace)."""
    if "=" not in text:
        raise ConfigError(f"--sweep expects axis=values, got {text!r}")
    axis, _, body = text.partition("=")
    axis = axis.strip()
    if axis not in ("r", "T", "m"):
        raise ConfigError(f"unknown sweep axis {axis!r}; choose r, T or m")
    try:
        if ":" in body:
            start, stop, count = body.split(":")
            values = np.linspace(float(start), float(stop), int(count)).tolist()
        else:
            values = [float(v) for v in body.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse sweep values {body!r}: {exc}") from exc
    if not values:
        raise ConfigError("--sweep needs at least one value")
    return axis, values


def cmd_qgem(args) -> int:
    doc = _read_json(args.config)
    try:
        cfg = qgem.ProtocolConfig.from_json(doc)
    except jsonschema.ValidationError as exc:
        raise ConfigError(_schema_message(args.config, exc)) from exc
    except ValueError as exc:
        raise ConfigError(f"{args.config}: {exc}") from exc
    cfg = cfg.replace(consts=_constants(args, cfg.consts))
    started = _now()
    config = {"protocol": cfg.to_json(), "sweep": args.sweep}
    if args.sweep is None:
        try:
            rep = qgem.evaluate(cfg)
        except qgem.BranchError as exc:
            raise ScientificFailure(str(exc)) from exc
        points = [qgem.SweepPoint(float("nan"), rep, None, qgem.consistency_defect(rep))]
    else:
        axis, values = _parse_sweep(args.sweep)
        points = qgem.sweep(cfg, axis, values, threads=args.threads)
    man = manifest("qgem", args.seed, config, started)
    failed = [p for p in points if p.error is not None]
    if args.format == "csv":
        text = qgem.sweep_to_csv(points)
    else:
        rows = [{"axis_value": None if args.sweep is None else p.axis_value,
                 "report": None if p.report is None else p.report.to_json(),
                 "consistency_defect": p.consistency, "error": p.error} for p in points]
        result = rows[0] if args.sweep is None else {"axis": args.sweep.split("=")[0],
                                                     "points": rows}
        text = _json_doc(man, result)
    _emit(args, text, man)
    for p in failed:
        print(f"error at {p.axis_value!r}: {p.error}", file=sys.stderr)
    return 1 if failed else 0


# -- parser -------------------------------------------------------------------

def _global_flags(parser: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(0), help="Seed for randomized commands.")
    parser.add_argument("--trials", type=int, default=d(1000), help="Random trials per property.")
    parser.add_argument("--out", default=d(None), help="Output file (default stdout).")
    parser.add_argument("--format", choices=("json", "csv"), default=d("json"))
    parser.add_argument("--threads", type=int, default=d(1),
                        help="Worker threads; output does not depend on it.")
    parser.add_argument("--G", type=float, default=d(None), help="Override Newton's constant.")
    parser.add_argument("--hbar", type=float, default=d(None), help="Override hbar.")
    parser.add_argument("--c", type=float, default=d(None), help="Override the speed of light.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twistorphase",
        description="Twistor kernel checks, bilocal gravitational phases and QGEM sweeps.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="Run randomized property suites.")
    p.add_argument("suite", nargs="?", default="all", choices=verify.SUITES + ("all",))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reduce-check", parents=[common],
                       help="Test kernel * interval = const over random point pairs.")
    p.add_argument("--samples", type=int, default=None, help="Point pairs (default --trials).")
    p.add_argument("--kernel", choices=("det_kernel", "separation"), default="det_kernel")
    p.add_argument("--ratios", default=None, help="Also write the ratio CSV here.")
    p.set_defaults(func=cmd_reduce_check)

    p = sub.add_parser("phase", parents=[common], help="Bilocal phase of two worldline files.")
    p.add_argument("worldline_a")
    p.add_argument("worldline_b")
    p.add_argument("--kernel", choices=("newtonian",) + KERNELS, default="static")
    p.add_argument("--measure", choices=("proper", "coordinate"), default="proper")
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("qgem", parents=[common], help="Evaluate or sweep a protocol config.")
    p.add_argument("config")
    p.add_argument("--sweep", default=None, metavar="AXIS=VALUES",
                   help="r|T|m followed by v1,v2,... or start:stop:count")
    p.set_defaults(func=cmd_qgem)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ScientificFailure as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
