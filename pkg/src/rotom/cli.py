"""``rotom`` command-line front end.

Every command writes one record (JSON by default, CSV with ``--format csv``)
to stdout or ``--out FILE``. Output depends only on the robot file and the
flags, so repeated invocations are byte-identical.

Exit codes: 0 success, 1 other failure, 2 invalid input (schema, usage,
dimensions, joint limits), 3 zero force, 4 singular mass matrix,
5 degenerate ellipsoid.

CSV layouts (1-based joint numbering in headers)::

    eval       rotom,f_x,f_y[,f_z],reaction_x,...,accel_x,...,com_x,...
    ellipsoid  axis,eigenvalue,v_x,v_y[,v_z],index     (one row per semi-axis)
               x,y[,z]                                  (with --samples)
    sweep      q<i>[,q<j>],rotom|index
    minimize   iter,q1,...,qn,objective
    zeros      q1,...,qn,residual
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import _backend
from .centroidal import centroidal_state, fictitious_force
from .chain import ChainModel, as_q
from .errors import (
    DegenerateEllipsoid,
    DimensionMismatch,
    JointLimitViolation,
    SchemaError,
    SingularMassMatrix,
    ZeroForce,
)
from .robotfile import load_model
from .search import DescentSettings, ZeroSearchSettings, find_rotom_zeros, minimize_rotom
from .transmissibility import ellipsoid, ellipsoid_from_matrix, rotom_from_matrix, sample_ellipsoid_boundary

SCHEMA_VERSION = "1.0"
ROBOTS_DIR = Path(__file__).with_name("robots")
AXES = "xyz"

EXIT_OK, EXIT_OTHER, EXIT_SCHEMA, EXIT_ZERO_FORCE, EXIT_SINGULAR, EXIT_DEGENERATE = 0, 1, 2, 3, 4, 5


class UsageError(Exception):
    pass


# -- formatting ----------------------------------------------------------------


def fmt_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _json(obj, level: int = 0) -> str:
    pad = "  " * (level + 1)
    end = "  " * level
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return fmt_number(obj)
    if isinstance(obj, np.ndarray):
        return _json(obj.tolist(), level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json(str(k))}: {_json(v, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _json(v, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_record(command: str, inputs: dict, results, diagnostics=()) -> str:
    record = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "results": results,
        "diagnostics": list(diagnostics),
    }
    return _json(record) + "\n"


def dumps_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt_number(v) for v in row) + "\n")
    return buf.getvalue()


# -- argument helpers -----------------------------------------------------------


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.replace(" ", "").split(",") if v != ""])
    except ValueError as exc:
        raise UsageError(f"cannot parse vector {text!r}") from exc


def parse_range(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"range must be lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"cannot parse range {text!r}") from exc
    if n < 1:
        raise UsageError("range needs at least one point")
    return np.linspace(lo, hi, n)


def resolve_robot(spec: str) -> ChainModel:
    """Load a robot file; ``preset:NAME`` picks a bundled description."""
    if spec.startswith("preset:"):
        path = ROBOTS_DIR / f"{spec.split(':', 1)[1]}.json"
        if not path.exists():
            raise UsageError(f"unknown preset {spec!r}")
        return load_model(path)
    path = Path(spec)
    if not path.is_file():
        raise UsageError(f"robot file not found: {spec}")
    return load_model(path)


def _angles(args, text: str) -> np.ndarray:
    v = parse_vector(text)
    return np.radians(v) if args.degrees else v


def _force_arg(model: ChainModel, text: str) -> np.ndarray:
    F = parse_vector(text)
    if F.shape != (model.task_dim,):
        raise DimensionMismatch(f"--force needs {model.task_dim} components, got {F.size}")
    return F


def _named(prefix: str, d: int) -> list[str]:
    return [f"{prefix}_{AXES[k]}" for k in range(d)]


def _threads() -> int:
    try:
        n = int(os.environ.get("ROTOM_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


# -- commands --------------------------------------------------------------------


def cmd_describe(args, model: ChainModel):
    n = model.n
    m = model.total_mass
    summary = f"{n} joint{'s' if n != 1 else ''}, total mass {m:g} kg, task_dim {model.task_dim}"
    results = {
        "name": model.name,
        "summary": summary,
        "joints": n,
        "links": len(model.links),
        "total_mass": m,
        "task_dim": model.task_dim,
        "limits": [None if j.limits is None else list(j.limits) for j in model.joints],
    }
    if args.format == "csv":
        return dumps_csv(["joints", "links", "total_mass", "task_dim"], [[n, len(model.links), m, model.task_dim]])
    return dumps_record("describe", {"robot": args.robot}, results)


def cmd_eval(args, model: ChainModel):
    q = _angles(args, args.q)
    F = _force_arg(model, args.force)
    state = centroidal_state(model, q)
    res = fictitious_force(state, F)
    d = model.task_dim
    if args.format == "csv":
        header = ["rotom"] + _named("f", d) + _named("reaction", d) + _named("accel", d) + _named("com", d)
        row = [res.rotom, *res.f, *res.reaction, *res.accel, *state.com_position]
        return dumps_csv(header, [row])
    results = {
        "rotom": res.rotom,
        "f": res.f,
        "reaction": res.reaction,
        "accel": res.accel,
        "com": state.com_position,
        "m_total": state.m_total,
    }
    return dumps_record("eval", {"robot": args.robot, "q": q, "force": F}, results)


def cmd_ellipsoid(args, model: ChainModel):
    q = _angles(args, args.q)
    state = centroidal_state(model, q)
    ell = ellipsoid(state)
    d = model.task_dim
    points = None
    if args.samples is not None:
        if args.samples < 8:
            raise UsageError("--samples must be at least 8")
        points = sample_ellipsoid_boundary(ell, args.samples)
    if args.format == "csv":
        if points is not None:
            return dumps_csv(list(AXES[:d]), points)
        rows = [[k + 1, ell.eigenvalues[k], *ell.eigenvectors[:, k], ell.index] for k in range(d)]
        return dumps_csv(["axis", "eigenvalue"] + [f"v_{a}" for a in AXES[:d]] + ["index"], rows)
    results = {
        "eigenvalues": ell.eigenvalues,
        "eigenvectors": ell.eigenvectors.T,
        "index": ell.index,
        "center": ell.center,
    }
    if points is not None:
        results["boundary"] = points
    inputs = {"robot": args.robot, "q": q, "samples": args.samples}
    return dumps_record("ellipsoid", inputs, results)


def _sweep_values(model: ChainModel, Q: np.ndarray, F: np.ndarray | None) -> np.ndarray:
    chunks = np.array_split(Q, min(_threads(), max(len(Q), 1)))
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(lambda c: _backend.mobility_batch(model.packed, c), chunks))
    Ts = np.concatenate([p[0] for p in parts])
    conds = np.concatenate([p[1] for p in parts])
    bad = np.flatnonzero(~(conds <= 1e12))
    if bad.size:
        raise SingularMassMatrix(f"mass matrix singular at q = {Q[bad[0]].tolist()}")
    if F is not None:
        return np.array([rotom_from_matrix(T, F) for T in Ts])
    return np.array([ellipsoid_from_matrix(T).index for T in Ts])


def cmd_sweep(args, model: ChainModel):
    joints = [j - 1 for j in args.joint]
    if not 1 <= len(joints) <= 2:
        raise UsageError("sweep takes one or two --joint options")
    if any(not 0 <= j < model.n for j in joints) or len(set(joints)) != len(joints):
        raise UsageError(f"--joint values must be distinct and within 1..{model.n}")
    ranges = args.range or []
    if len(ranges) == 1 and len(joints) == 2:
        ranges = ranges * 2
    if len(ranges) != len(joints):
        raise UsageError("give one --range, or one per --joint")
    grids = [parse_range(r) for r in ranges]
    if args.degrees:
        grids = [np.radians(g) for g in grids]
    base = _angles(args, args.q) if args.q is not None else np.zeros(model.n)
    base = as_q(model, base) if args.q is not None else base
    if base.shape != (model.n,):
        raise DimensionMismatch(f"--q needs {model.n} values")
    if (args.force is None) == (not args.index):
        raise UsageError("sweep needs exactly one of --force or --index")
    F = None if args.index else _force_arg(model, args.force)
    if F is not None and not np.linalg.norm(F) > 0:
        raise ZeroForce("zero force")

    mesh = np.meshgrid(*grids, indexing="ij")
    cols = [m.ravel() for m in mesh]
    Q = np.tile(base, (len(cols[0]), 1))
    for j, c in zip(joints, cols):
        Q[:, j] = c
    for row in Q:
        as_q(model, row)
    values = _sweep_values(model, Q, F)
    kind = "index" if args.index else "rotom"
    header = [f"q{j + 1}" for j in joints] + [kind]
    rows = np.column_stack(cols + [values])
    if args.format == "csv":
        return dumps_csv(header, rows)
    inputs = {"robot": args.robot, "joints": args.joint, "ranges": ranges, "q": base,
              "force": F, "index": bool(args.index)}
    return dumps_record("sweep", inputs, {"columns": header, "rows": rows})


def cmd_minimize(args, model: ChainModel):
    q0 = _angles(args, args.q0)
    F = _force_arg(model, args.force)
    settings = DescentSettings(
        gain=args.gain, fd_step=args.fd_step, step_size=args.step_size, max_iters=args.max_iters,
        grad_tol=args.grad_tol, objective_tol=args.objective_tol,
    )
    trace = minimize_rotom(model, q0, F, settings)
    if args.format == "csv":
        header = ["iter"] + [f"q{i + 1}" for i in range(model.n)] + ["objective"]
        return dumps_csv(header, [[k, *q, obj] for k, (q, obj) in enumerate(trace.iterates)])
    results = {
        "converged": trace.converged,
        "reason": trace.reason.value,
        "iterations": len(trace.iterates) - 1,
        "final_q": trace.final_q,
        "final_objective": trace.iterates[-1][1],
        "trace": [{"q": q, "objective": obj} for q, obj in trace.iterates],
    }
    inputs = {"robot": args.robot, "q0": q0, "force": F, "settings": vars(settings)}
    return dumps_record("minimize", inputs, results)


def cmd_zeros(args, model: ChainModel):
    F = _force_arg(model, args.force)
    settings = ZeroSearchSettings(
        seeds_per_joint=args.seeds_per_joint, residual_tol=args.residual_tol,
        dedupe_tol=args.dedupe_tol, max_newton_iters=args.max_newton_iters,
    )
    result = find_rotom_zeros(model, F, settings)
    diagnostics = []
    if not result.solutions:
        diagnostics.append("no zero-RoToM configuration found")
    counts: dict[str, int] = {}
    for s in result.seeds:
        counts[s.status] = counts.get(s.status, 0) + 1
    if args.format == "csv":
        header = [f"q{i + 1}" for i in range(model.n)] + ["residual"]
        return dumps_csv(header, [[*c.q, r] for c, r in zip(result.solutions, result.residuals)])
    results = {
        "kind": "representatives" if model.n > model.task_dim else "solutions",
        "solutions": [{"q": c.q, "residual": r} for c, r in zip(result.solutions, result.residuals)],
        "seed_status": dict(sorted(counts.items())),
        "seeds": [
            {"seed": s.seed, "q": s.q, "residual": s.residual, "iterations": s.iterations, "status": s.status}
            for s in result.seeds
        ] if args.seed_diagnostics else [],
    }
    inputs = {"robot": args.robot, "force": F, "settings": vars(settings)}
    return dumps_record("zeros", inputs, results, diagnostics)


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rotom", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("robot", help="robot description file, or preset:NAME")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write output to FILE instead of stdout")
        p.add_argument("--degrees", action="store_true", help="joint angles on input are in degrees")

    p = sub.add_parser("describe", help="summarise a robot file")
    common(p)
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("eval", help="RoToM, transmitted force and reaction at one configuration")
    common(p)
    p.add_argument("--q", required=True, help="joint angles, comma separated")
    p.add_argument("--force", required=True, help="force at the CoM, comma separated")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ellipsoid", help="transmissibility ellipsoid and index")
    common(p)
    p.add_argument("--q", required=True)
    p.add_argument("--samples", type=int, help="also emit N boundary points")
    p.set_defaults(func=cmd_ellipsoid)

    p = sub.add_parser("sweep", help="RoToM or index over a grid of one or two joints")
    common(p)
    p.add_argument("--joint", type=int, action="append", required=True, help="1-based joint number")
    p.add_argument("--range", action="append", help="lo:hi:n (inclusive linspace)")
    p.add_argument("--q", help="values of the joints that are not swept")
    p.add_argument("--force")
    p.add_argument("--index", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("minimize", help="gradient descent of the RoToM")
    common(p)
    p.add_argument("--q0", required=True)
    p.add_argument("--force", required=True)
    d = DescentSettings()
    p.add_argument("--gain", type=float, default=d.gain)
    p.add_argument("--step-size", type=float, default=d.step_size)
    p.add_argument("--fd-step", type=float, default=d.fd_step)
    p.add_argument("--max-iters", type=int, default=d.max_iters)
    p.add_argument("--grad-tol", type=float, default=d.grad_tol)
    p.add_argument("--objective-tol", type=float, default=d.objective_tol)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("zeros", help="configurations with zero RoToM")
    common(p)
    p.add_argument("--force", required=True)
    z = ZeroSearchSettings()
    p.add_argument("--seeds-per-joint", type=int, default=z.seeds_per_joint)
    p.add_argument("--residual-tol", type=float, default=z.residual_tol)
    p.add_argument("--dedupe-tol", type=float, default=z.dedupe_tol)
    p.add_argument("--max-newton-iters", type=int, default=z.max_newton_iters)
    p.add_argument("--seed-diagnostics", action="store_true", help="emit per-seed outcomes")
    p.set_defaults(func=cmd_zeros)
    return parser


VECTOR_OPTIONS = {"--q", "--q0", "--force", "--range"}


def _attach_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--force -1,0`` as ``--force=-1,0`` so argparse does not read a flag."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in VECTOR_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-") \
                and argv[i + 1][1:2] in set("0123456789."):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_attach_negative_values(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_SCHEMA
    try:
        model = resolve_robot(args.robot)
        text = args.func(args, model)
    except (SchemaError, DimensionMismatch, JointLimitViolation, UsageError) as exc:
        print(f"rotom: error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except ZeroForce as exc:
        print(f"rotom: zero force: {exc}", file=sys.stderr)
        return EXIT_ZERO_FORCE
    except SingularMassMatrix as exc:
        print(f"rotom: singular mass matrix: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except DegenerateEllipsoid as exc:
        print(f"rotom: degenerate ellipsoid: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except Exception as exc:  # noqa: BLE001 - stable exit-code contract
        print(f"rotom: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OTHER
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
