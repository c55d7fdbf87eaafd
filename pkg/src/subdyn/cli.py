"""Command-line front end.  Every subcommand writes one JSON report.

Exit codes: 0 success, 2 invalid input, 3 analysis failure.  Reports are
deterministic for fixed arguments apart from the ``timestamp`` field.
"""
from __future__ import annotations

import argparse
import ast
import csv
import hashlib
import json
import math
import operator
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import mpmath
import numpy as np
import scipy

from . import __version__
from . import shiftspace as sh
from .errors import InvalidInput, RatesFailed, SecondTypeSingular, SubdynError
from .geometry import Direction, LatticeWindow
from .nonauto import (
    build_step_sequence,
    search_N,
    sequence_pseudo_orbit,
    shadow_along_sequence,
    verify_rates,
)
from .shadowing import (
    boundary_decay,
    expansiveness_certificate,
    quasi_shadow,
    shadow_hyperbolic_batch,
)
from .spectrum import (
    Tag,
    angle_sweep,
    classify_direction,
    common_eigenstructure,
    gap_constants,
    load_spec,
    splitting_for,
    weyl_chambers,
)
from .suspension import Chain, shadow_chain, verify_chain
from .toral import as_sequence, perturbed_pseudo_orbits, verify_pseudo_orbit

SCHEMA_VERSION = 1

# --- number parsing -------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sqrt": math.sqrt, "log": math.log, "exp": math.exp}
_CONSTS = {"pi": math.pi, "e": math.e}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and len(node.args) == 1:
        return _FUNCS[node.func.id](_eval(node.args[0]))
    if isinstance(node, ast.Name) and node.id in _CONSTS:
        return _CONSTS[node.id]
    raise InvalidInput(f"unsupported expression: {ast.dump(node)}")


def parse_vector(text: str) -> list:
    """Comma-separated entries; each is an integer or an expression like sqrt(2)."""
    out = []
    for part in text.split(","):
        part = part.strip()
        try:
            out.append(int(part))
        except ValueError:
            try:
                out.append(float(_eval(ast.parse(part, mode="eval"))))
            except (SyntaxError, ValueError, ZeroDivisionError) as exc:
                raise InvalidInput(f"cannot parse vector entry {part!r}: {exc}") from exc
    if not out:
        raise InvalidInput("empty vector")
    return out


def parse_direction(text: str) -> Direction:
    """Integer entries give a rational line; any expression makes it irrational."""
    vals = parse_vector(text)
    if all(isinstance(v, int) for v in vals):
        return Direction.from_integers(vals)
    return Direction.irrational(vals)


# --- report plumbing ------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return obj


def _digest(args, files) -> str:
    h = hashlib.sha256()
    payload = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "csv")}
    h.update(json.dumps(_clean(payload), sort_keys=True, default=str).encode())
    for f in files:
        try:
            h.update(Path(f).read_bytes())
        except OSError:
            h.update(str(f).encode())
    return h.hexdigest()


def _versions():
    return {
        "subdyn": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "mpmath": mpmath.__version__,
    }


def threads() -> int:
    try:
        return max(1, int(os.environ.get("SUBDYN_THREADS", "1")))
    except ValueError:
        return 1


class Context:
    def __init__(self):
        self.warnings: list = []
        self.series: list = []  # rows for the optional CSV
        self.files: list = []


# --- subcommands ----------------------------------------------------------------


def _spectrum_for(path, ctx):
    ctx.files.append(path)
    spec = load_spec(path)
    return spec, common_eigenstructure(spec)


def cmd_spectrum(args, ctx):
    spec, sp = _spectrum_for(args.spec, ctx)
    return {"action": spec.to_json(), "spectrum": sp.to_json()}


def cmd_classify(args, ctx):
    spec, sp = _spectrum_for(args.spec, ctx)
    if args.sweep:
        sw = angle_sweep(sp, buckets=args.sweep)
        for b, t in enumerate(sw.bucket_tags):
            ctx.series.append({"bucket": b, "angle_rad": (b + 0.5) * math.pi / args.sweep, "tag": t.value})
        return {"sweep": sw.to_json()}
    v = parse_vector(args.v)
    cls = classify_direction(sp, v)
    out = {"vector": v, "classification": cls.to_json()}
    if cls.tag is Tag.SECOND:
        ctx.warnings.append("second-type singular: no shadowing or expansiveness guarantee")
    elif cls.tag is Tag.REGULAR:
        out["gap_constants"] = gap_constants(sp, v).to_json()
    return out


def cmd_chambers(args, ctx):
    _, sp = _spectrum_for(args.spec, ctx)
    return {"chambers": weyl_chambers(sp).to_json()}


def _line_window(direction: Direction, length: int) -> LatticeWindow:
    g = np.array(direction.integer_generator, dtype=np.int64)
    half = (length - 1) // 2
    pts = [j * g for j in range(-half, length - half)]
    return LatticeWindow.from_points(pts, direction)


def _shadow_chunk(job):
    spec_path, direction_json, length, delta, seeds, x0s = job
    spec = load_spec(spec_path)
    sp = common_eigenstructure(spec)
    direction = Direction.from_json(direction_json)
    win = _line_window(direction, length)
    split = splitting_for(sp, direction.integer_generator)
    out = []
    for s, x0 in zip(seeds, x0s):
        orb = perturbed_pseudo_orbits(spec, win, x0, delta, [s])[0]
        measured = verify_pseudo_orbit(spec, orb)
        _, mats, X = as_sequence(spec, orb)
        res = shadow_hyperbolic_batch(mats, [X], split)[0]
        out.append((s, measured, res.to_json()))
    return out


def _x0(seed, m):
    return np.random.default_rng([seed, 1]).uniform(0.0, 1.0, m)


def cmd_shadow(args, ctx, quasi=False):
    spec, sp = _spectrum_for(args.spec, ctx)
    direction = parse_direction(args.direction)
    if direction.k != spec.k:
        raise InvalidInput("direction length differs from the number of generators")
    if args.length < 2:
        raise InvalidInput("length must be at least 2")
    if not direction.rational:
        return _shadow_irrational(args, ctx, spec, sp, direction)
    cls = classify_direction(sp, direction.integer_generator)
    split = splitting_for(sp, direction.integer_generator)
    out = {"direction": direction.to_json(), "classification": cls.to_json()}
    if cls.tag is Tag.SECOND:
        raise SecondTypeSingular("second-type singular direction: no shadowing guarantee")
    if quasi or split.J3:
        if not quasi:
            ctx.warnings.append("direction is first-type singular; running the quasi-shadow solver")
        win = _line_window(direction, args.length)
        orb = perturbed_pseudo_orbits(spec, win, _x0(args.seed, spec.m), args.delta, [args.seed])[0]
        _, mats, X = as_sequence(spec, orb)
        q = quasi_shadow(mats, X, split)
        out["quasi_shadow"] = q.to_json()
        out["measured_defect"] = verify_pseudo_orbit(spec, orb)
        out["passed"] = bool(q.hyperbolic_error <= q.bound * q.defect and q.center_residual <= 1e-12)
        for p, e in enumerate(out["quasi_shadow"]["per_step_errors"]):
            ctx.series.append({"index": p, "lattice_point": list(map(int, win.points[p])), "error": e})
        return out
    seeds = [args.seed + i for i in range(args.count)]
    x0s = [_x0(s, spec.m) for s in seeds]
    nw = min(threads(), len(seeds))
    job = (str(args.spec), direction.to_json(), args.length, args.delta)
    if nw > 1:
        chunks = [(job + (seeds[i::nw], x0s[i::nw])) for i in range(nw)]
        with ProcessPoolExecutor(max_workers=nw) as pool:
            parts = [r for chunk in pool.map(_shadow_chunk, chunks) for r in chunk]
        parts.sort(key=lambda r: r[0])
    else:
        parts = _shadow_chunk(job + (seeds, x0s))
    runs = []
    for s, measured, res in parts:
        res["measured_defect"] = measured
        res["seed"] = s
        res["passed"] = bool(res["sup_error"] <= res["theoretical_L"] * measured)
        runs.append(res)
    first = runs[0]
    win = _line_window(direction, args.length)
    for p, e in enumerate(first.pop("per_step_errors")):
        ctx.series.append({"index": p, "lattice_point": list(map(int, win.points[p])), "error": e})
    for r in runs[1:]:
        r.pop("per_step_errors")
    out["runs"] = runs
    out["passed"] = all(r["passed"] for r in runs)
    if args.expansive:
        cert = expansiveness_certificate(spec, sp, direction)
        out["expansiveness"] = None if cert is None else cert.to_json()
    if args.boundary:
        orb = perturbed_pseudo_orbits(spec, win, x0s[0], args.delta, [seeds[0]])[0]
        _, mats, X = as_sequence(spec, orb)
        dist, diff = boundary_decay(mats, X, split)
        out["boundary_decay"] = {"distance_to_end": dist.tolist(), "difference": diff.tolist()}
    return out


def _shadow_irrational(args, ctx, spec, sp, direction):
    t0 = args.t0 if args.t0 is not None else math.sqrt(spec.k)
    if args.N:
        seq = build_step_sequence(direction, t0, args.N, args.length - 1)
        search = None
    else:
        search = search_N(sp, direction, t0, args.length - 1)
        if search.N is None:
            raise RatesFailed(f"no N passes the rate checks: {search.to_json()['trace']}")
        seq = search.sequence
    X = sequence_pseudo_orbit(spec, seq, _x0(args.seed, spec.m), args.delta, args.seed)
    res, rep, L2 = shadow_along_sequence(spec, sp, seq, X)
    body = res.to_json()
    errs = body.pop("per_step_errors")
    for p, e in enumerate(errs):
        ctx.series.append({"index": p, "lattice_point": list(seq.points[p]), "error": e})
    ctx.warnings.append("irrational direction: shadowing runs along a lattice step sequence in the tube")
    hyper = body.get("hyperbolic_error", body["sup_error"])
    return {
        "direction": direction.to_json(),
        "t0": t0,
        "N": seq.N,
        "search": None if search is None else search.to_json(),
        "sequence_checks": seq.check(),
        "rates": rep.to_json(),
        "tube_inflation": L2,
        "result": body,
        "passed": bool(hyper <= body["theoretical_L"] * body["defect"]),
    }


def cmd_quasi(args, ctx):
    return cmd_shadow(args, ctx, quasi=True)


def _load_config(path, ctx) -> sh.Configuration:
    ctx.files.append(path)
    try:
        d = json.loads(Path(path).read_text())
        # a `ledrappier random` report can be passed as is
        if "results" in d and "configuration" in d.get("results", {}):
            d = d["results"]["configuration"]
        return sh.Configuration.from_json(d)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InvalidInput(f"cannot read configuration {path}: {exc}") from exc


def cmd_shift_shadow(args, ctx):
    ground = _load_config(args.config, ctx)
    R, W = args.R, args.W
    need = R + W
    if ground.W < need:
        raise InvalidInput(f"ground configuration radius {ground.W} < R + W = {need}")
    g = ground.restrict(need)
    runs = []
    for i in range(args.count):
        orb = sh.random_pseudo_orbit(g.k, R, W, g.alphabet, args.flips, args.min_norm,
                                     seed=args.seed + i, ground=g.cells)
        star = sh.shadow_shift(orb)
        chk = sh.check_shadow(orb, star, args.inner, args.delta)
        d = chk.to_json()
        d["defect_within_delta"] = chk.delta_bound <= args.delta
        runs.append(d)
    return {
        "k": g.k, "R": R, "W": W, "delta": args.delta,
        "agreement_radius": sh.agreement_radius(args.delta),
        "epsilon": sh.epsilon_for(args.delta, g.k),
        "runs": runs,
        "passed": all(r["passed"] and r["defect_within_delta"] for r in runs),
    }


def cmd_ledrappier(args, ctx):
    if args.action == "validate":
        x = _load_config(args.config, ctx)
        return {"valid": sh.ledrappier_validate(x), "W": x.W}
    x = sh.ledrappier_random(args.W, seed=args.seed)
    return {"valid": sh.ledrappier_validate(x), "configuration": x.to_json()}


def cmd_sequence(args, ctx):
    spec, sp = _spectrum_for(args.spec, ctx)
    direction = parse_direction(args.direction)
    t0 = args.t0 if args.t0 is not None else math.sqrt(spec.k)
    if args.N:
        seq = build_step_sequence(direction, t0, args.N, args.P)
        rep = verify_rates(sp, seq)
        search = None
    else:
        search = search_N(sp, direction, t0, args.P)
        if search.N is None:
            raise RatesFailed(f"no N passes the rate checks: {search.to_json()['trace']}")
        seq, rep = search.sequence, search.report
    for p, n in enumerate(seq.points):
        ctx.series.append({"index": p, "lattice_point": list(n)})
    return {
        "sequence": seq.to_json(),
        "checks": seq.check(),
        "rates": rep.to_json(),
        "search": None if search is None else search.to_json(),
    }


def _infer_direction(jumps) -> Direction:
    v = np.asarray(jumps[0], dtype=float)
    j = int(np.argmax(np.abs(v)))
    r = v / v[j]
    for scale in range(1, 1001):
        w = r * scale
        if np.all(np.abs(w - np.rint(w)) < 1e-9):
            return Direction.from_integers(np.rint(w).astype(int))
    return Direction.irrational(v)


def cmd_suspend_shadow(args, ctx):
    spec, sp = _spectrum_for(args.spec, ctx)
    ctx.files.append(args.chain)
    try:
        chain = Chain.from_json(json.loads(Path(args.chain).read_text()))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InvalidInput(f"cannot read chain {args.chain}: {exc}") from exc
    if chain.k != spec.k:
        raise InvalidInput("chain dimension differs from the action")
    if args.direction:
        direction = parse_direction(args.direction)
    elif len(chain.jumps):
        direction = _infer_direction(chain.jumps)
    else:
        raise InvalidInput("cannot infer a direction from an empty chain")
    chk = verify_chain(spec, chain)
    if chk.defect >= chain.delta:
        ctx.warnings.append(f"measured chain defect {chk.defect} is not below the declared delta {chain.delta}")
    if chk.min_jump <= chain.a:
        ctx.warnings.append(f"shortest jump {chk.min_jump} is not above the declared a {chain.a}")
    res = shadow_chain(spec, sp, chain, direction)
    body = res.to_json()
    for p, e in enumerate(body.pop("per_step_errors")):
        ctx.series.append({"index": p, "lattice_point": list(map(int, res.lattice_points[p])), "error": e})
    return {"direction": direction.to_json(), "chain_check": chk.to_json(), "result": body}


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subdyn", description=__doc__.splitlines()[0])
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--csv", help="write per-step series as CSV")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", help="joint Lyapunov spectrum")
    s.add_argument("spec")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("classify", help="classify a direction or sweep all lines (k = 2)")
    s.add_argument("spec")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--v", help="direction, e.g. 1,0 or 1,sqrt(2)")
    g.add_argument("--sweep", type=int, help="number of angle buckets")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("chambers", help="Lyapunov hyperplanes and Weyl chambers")
    s.add_argument("spec")
    s.set_defaults(func=cmd_chambers)

    for name, func in (("shadow", cmd_shadow), ("quasi-shadow", cmd_quasi)):
        s = sub.add_parser(name, help=f"{name} a random pseudo-orbit along a line")
        s.add_argument("spec")
        s.add_argument("--direction", required=True)
        s.add_argument("--delta", type=float, default=1e-8)
        s.add_argument("--length", type=int, default=1001)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--count", type=int, default=1, help="independent pseudo-orbits (rational lines)")
        s.add_argument("--t0", type=float, help="tube radius for irrational lines")
        s.add_argument("--N", type=int, help="step scale for irrational lines (searched if absent)")
        s.add_argument("--expansive", action="store_true", help="add the expansiveness certificate")
        s.add_argument("--boundary", action="store_true", help="add the boundary-decay series")
        s.set_defaults(func=func)

    s = sub.add_parser("shift-shadow", help="shadow random pseudo-orbits in the full shift")
    s.add_argument("config", help="ground configuration JSON of radius >= R + W")
    s.add_argument("--delta", type=float, default=2.0**-8)
    s.add_argument("--R", type=int, default=24, help="outer lattice window radius")
    s.add_argument("--W", type=int, default=18, help="configuration radius")
    s.add_argument("--inner", type=int, default=6, help="radius of the checked lattice box")
    s.add_argument("--flips", type=int, default=2)
    s.add_argument("--min-norm", type=float, default=12.0)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_shift_shadow)

    s = sub.add_parser("ledrappier", help="three-dot subshift utilities")
    lsub = s.add_subparsers(dest="action", required=True)
    v = lsub.add_parser("validate")
    v.add_argument("config")
    v.set_defaults(func=cmd_ledrappier)
    r = lsub.add_parser("random")
    r.add_argument("--W", type=int, default=6)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_ledrappier)

    s = sub.add_parser("sequence", help="lattice step sequence along an irrational line")
    s.add_argument("spec")
    s.add_argument("--direction", required=True)
    s.add_argument("--N", type=int, help="step scale (searched if absent)")
    s.add_argument("--P", type=int, default=1000)
    s.add_argument("--t0", type=float)
    s.set_defaults(func=cmd_sequence)

    s = sub.add_parser("suspend-shadow", help="shadow a (delta, a)-chain of the suspension flow")
    s.add_argument("spec")
    s.add_argument("chain")
    s.add_argument("--direction", help="line of the jumps (inferred from the first jump if absent)")
    s.set_defaults(func=cmd_suspend_shadow)
    return p


def _write_csv(path, rows):
    keys = sorted({k for r in rows for k in r}) if rows else ["index"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v) if isinstance(v, list) else v for k, v in r.items()})


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    ctx = Context()
    code, results = 0, None
    try:
        results = args.func(args, ctx)
    except SubdynError as exc:
        code = exc.exit_code
        results = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    except (ValueError, OverflowError) as exc:
        code = 2
        results = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command if args.command != "ledrappier" else f"ledrappier {args.action}",
        "argv": list(sys.argv[1:] if argv is None else argv),
        "inputs_digest": _digest(args, ctx.files),
        "results": _clean(results),
        "warnings": ctx.warnings,
        "versions": _versions(),
        "exit_code": code,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    if args.csv and ctx.series:
        _write_csv(args.csv, ctx.series)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
