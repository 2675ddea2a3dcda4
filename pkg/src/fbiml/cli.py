"""Command line: fbiml star | probe | curves | invert."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import catalog, curves, star
from .probe import ProbeSettings, QuadratureError, invert_dump, run_probe, slice_dump
from .quadrature import Cutoff
from .solutions import (BoundaryValueSolution, BumpSolution, ExponentialSolution, GridSolution,
                        SuperpositionSolution, ZeroSolution)
from .tube import Grid, GridFunction, TubeStructure

EXIT_OK, EXIT_ERROR, EXIT_FAILURE, EXIT_QUADRATURE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# -- deterministic output ----------------------------------------------------------------

def _fmt(x: float) -> str:
    return "%.12e" % x if math.isfinite(x) else "null"


def encode(obj) -> str:
    """Canonical JSON: sorted keys, floats as %.12e, non-finite floats as null."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return "null" if obj is None else ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, complex):
        return encode([obj.real, obj.imag])
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {encode(v)}" for k, v in items) + "}"
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(encode(v) for v in obj) + "]"
    if hasattr(obj, "to_json"):
        return encode(obj.to_json())
    if hasattr(obj, "__dict__"):
        return encode(vars(obj))
    raise TypeError(f"cannot encode {type(obj).__name__}")


def write_json(doc, out: str | None) -> None:
    text = encode(doc) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def write_csv(path: Path, header: list[str], rows) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("%.12e" % float(v) for v in row) + "\n")
            n += 1
    return n


# -- inputs ------------------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def load_structure(args) -> tuple[TubeStructure, tuple[float, ...] | None, str]:
    if bool(args.spec) == bool(args.example):
        raise UsageError("give exactly one of --spec FILE or --example NAME")
    if args.example:
        try:
            ex = catalog.get(args.example)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        return ex.structure, ex.xi0, ex.name
    try:
        with open(args.spec, encoding="utf-8") as fh:
            doc = json.load(fh)
        return TubeStructure.from_json(doc), None, str(args.spec)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot load structure {args.spec}: {exc}") from None


def resolve_xi0(args, ts: TubeStructure, default) -> np.ndarray:
    if args.xi0:
        xi0 = np.array(_floats(args.xi0))
    elif default is not None:
        xi0 = np.array(default, dtype=float)
    else:
        raise UsageError("--xi0 is required with --spec")
    if xi0.shape != (ts.m,):
        raise UsageError(f"--xi0 needs {ts.m} entries")
    nrm = np.linalg.norm(xi0)
    if nrm == 0:
        raise UsageError("--xi0 must be nonzero")
    return xi0 / nrm


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]) if len(v) > 1 else 0.0)
    return complex(v)


def load_solution(text: str, ts: TubeStructure):
    """--solution: inline JSON or a path to a JSON file."""
    p = Path(text)
    raw = p.read_text(encoding="utf-8") if p.is_file() else text
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed --solution: {exc}") from None
    kind = doc.get("type")
    base = p.parent if p.is_file() else Path(".")
    if kind == "zero":
        return ZeroSolution()
    if kind == "exponential":
        re = np.asarray(doc.get("zeta_re", doc.get("zeta")), dtype=float)
        im = np.asarray(doc.get("zeta_im", np.zeros_like(re)), dtype=float)
        return ExponentialSolution(re + 1j * im)
    if kind == "boundary_value":
        return BoundaryValueSolution(_complex(doc.get("w0", 0.0)), _complex(doc.get("c", 1.0)), doc.get("side"))
    if kind == "bump":
        return BumpSolution(float(doc.get("radius", 1.0)), float(doc.get("frequency", 0.0)))
    if kind == "superposition":
        return SuperpositionSolution.from_csv(doc["direction"], base / doc["weights"])
    if kind == "grid":
        data = np.load(base / doc["file"])
        m = ts.m
        axes = [np.asarray(data[f"x{i}"], dtype=float) for i in range(m)]
        taxes = [np.asarray(data[f"t{i}"], dtype=float) for i in range(ts.n)]
        return GridSolution(GridFunction(Grid(tuple(axes), tuple(taxes)), np.asarray(data["values"]),
                                         bool(doc.get("mollified", False))))
    raise UsageError("solution type must be one of zero, exponential, boundary_value, bump, superposition, grid")


# -- commands ----------------------------------------------------------------------------

def _cone_evidence(ts: TubeStructure, xi0: np.ndarray, half_angle: float, seed: int):
    """Two-component cone criterion when phi has homogeneous components of one degree."""
    if ts.m != 2 or abs(abs(xi0[0]) - 1.0) > 1e-12:
        return None
    comps = [ts.phi.dot(e) for e in np.eye(2)]
    homs = [c.homogeneity() for c in comps]
    if not all(h.is_homogeneous for h in homs) or homs[0].degree != homs[1].degree:
        return None
    rho_p = math.tan(half_angle)
    rho = 2 * rho_p
    if not rho < 1:
        return None
    sign = 1.0 if xi0[0] > 0 else -1.0
    return star.cone_criterion(comps[0].scaled(sign), comps[1], rho, rho_p, W0=ts.W, seed=seed)


def cmd_star(args) -> int:
    ts, default, label = load_structure(args)
    xi0 = resolve_xi0(args, ts, default)
    t0 = time.perf_counter()
    result = star.certify(ts.phi, xi0, ts.W, args.half_angle, seed=args.seed)
    doc = {"command": "star", "structure": label, "xi0": xi0, "result": result.to_json()}
    cc = _cone_evidence(ts, xi0, args.half_angle, args.seed)
    doc["cone_criterion"] = None if cc is None else cc.to_json()
    if args.timing:
        doc["seconds"] = time.perf_counter() - t0
    write_json(doc, args.out)
    return EXIT_OK if isinstance(result, star.StarCertificate) else EXIT_FAILURE


def cmd_probe(args) -> int:
    ts, default, label = load_structure(args)
    xi0 = resolve_xi0(args, ts, default)
    if not args.solution:
        raise UsageError("--solution is required")
    u = load_solution(args.solution, ts)
    cfg = ProbeSettings(s=args.s, kappa=args.kappa, chi_inner=args.chi_inner, chi_outer=args.chi_outer,
                        xi_max=args.ximax, count=args.count, directions=args.directions,
                        half_angle=args.half_angle, seed=args.seed)
    t = np.array(_floats(args.t)) if args.t else None
    x = np.array(_floats(args.x)) if args.x else None
    try:
        res = run_probe(ts, u, xi0, cfg, t=t, x=x)
    except QuadratureError as exc:
        write_json({"command": "probe", "error": str(exc), "diagnostics": exc.diagnostics,
                    "verdict": "Inconclusive"}, args.out)
        return EXIT_QUADRATURE
    doc = {"command": "probe", "structure": label, "xi0": xi0, "solution": u.describe(),
           "settings": {"s": cfg.s, "kappa": res.kappa, "kappa_source": res.kappa_source,
                        "chi": [cfg.chi_inner, cfg.chi_outer], "xi_max": cfg.xi_max, "count": cfg.count,
                        "directions": cfg.directions, "half_angle": cfg.half_angle, "seed": cfg.seed},
           "point": {"t": res.point[0], "x": res.point[1]},
           "certificate": res.certificate, "fits": res.fits, "combined_fit": res.combined,
           "curves": res.curves, "verdict": res.verdict, "cardinality": res.cardinality,
           "sidecars": {}}
    if args.csv:
        path = Path(args.csv) / "probe_decay.csv"
        header = [f"t{i + 1}" for i in range(ts.n)] + [f"x{i + 1}" for i in range(ts.m)] + \
                 [f"xi{i + 1}" for i in range(ts.m)] + ["xi_abs", "abs_F"]
        lead = list(res.point[0]) + list(res.point[1])
        write_csv(path, header, ([*lead, *row] for row in res.rows))
        doc["sidecars"]["decay"] = str(path)
    if args.dump_full:
        kappa = res.kappa
        dump = slice_dump(ts, u, res.point[0], kappa, Cutoff(cfg.chi_inner, cfg.chi_outer), nodes=args.nodes or 256,
                          xi_max=args.dump_ximax)
        np.savez(args.dump_full, **dump)
        doc["sidecars"]["dump"] = str(args.dump_full)
    write_json(doc, args.out)
    return EXIT_OK


def cmd_curves(args) -> int:
    ts, default, label = load_structure(args)
    xi0 = resolve_xi0(args, ts, default)
    cert_doc = None
    if args.theta is not None and args.cl is not None:
        theta, C_L, source = float(args.theta), float(args.cl), "flags"
    elif args.certify:
        cert = star.certify(ts.phi, xi0, ts.W, args.half_angle, seed=args.seed)
        cert_doc = cert.to_json()
        if not isinstance(cert, star.StarCertificate):
            write_json({"command": "curves", "structure": label, "certificate": cert_doc,
                        "error": "no certificate"}, args.out)
            return EXIT_FAILURE
        theta, C_L, source = cert.theta, cert.C_L, "certificate"
    else:
        raise UsageError("curves needs --theta and --cl, or --certify")
    W0 = ts.W
    W1 = W0.scaled(args.w1_scale)
    dirs = star.Cone(xi0, args.half_angle).sample(args.directions, args.seed)
    starts = W1.grid_points(args.nodes or 32)
    t0 = time.perf_counter()
    report, family = curves.verify_prop_properties(ts.phi, dirs, starts, W0, W1, theta, C_L, keep_curves=True)
    doc = {"command": "curves", "structure": label, "xi0": xi0, "theta": theta, "C_L": C_L,
           "certificate_source": source, "certificate": cert_doc,
           "family": dict(report.__dict__, passed=report.passed),
           "decrease": {"curves": len(family), "all_passed": all(r.passed for _, r in family),
                        "min_slack_factor": min((r.slack_factor for _, r in family), default=math.nan),
                        "lemma_passed": all(bool(r.lemma_passed) for _, r in family),
                        "concatenated": sum(1 for c, _ in family if c.concatenations)},
           "sidecars": {}}
    if args.timing:
        doc["seconds"] = time.perf_counter() - t0
    if args.csv:
        path = Path(args.csv) / "curves.csv"
        header = ["curve", "tau"] + [f"t{i + 1}" for i in range(ts.n)] + ["phi_xi", "bound"]

        def rows():
            for k, (c, _) in enumerate(family):
                taus = np.linspace(0.0, c.delta0, args.trace_samples)
                pts = c.at(taus)
                val = ts.phi.pairing(pts, c.xi)
                bound = float(ts.phi.pairing(c.start, c.xi)) - curves.decrease_constant(theta, C_L) * \
                    taus ** (1.0 / (1.0 - theta))
                for j in range(len(taus)):
                    yield [k, taus[j], *pts[j], val[j], bound[j]]

        doc["sidecars"]["curves"] = str(path)
        doc["csv_rows"] = write_csv(path, header, rows())
    write_json(doc, args.out)
    return EXIT_OK if report.passed else EXIT_FAILURE


def cmd_invert(args) -> int:
    if not args.samples:
        raise UsageError("--samples FILE is required")
    try:
        with np.load(args.samples) as data:
            dump = {k: data[k] for k in data.files}
    except (OSError, ValueError, EOFError) as exc:
        raise UsageError(f"cannot read sample file {args.samples}: {exc}") from None
    if args.spec or args.example:
        ts, _, _ = load_structure(args)
        if ts.m != 1:
            raise UsageError("inversion is implemented for m = 1")
    try:
        rec = invert_dump(dump, args.kappa)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    doc = {"command": "invert", "kappa": float(np.asarray(dump["kappa"])), "points": int(len(rec.x)),
           "sup_error": rec.error, "tail": rec.tail, "richardson_change": rec.richardson_change,
           "sidecars": {}}
    if args.csv:
        path = Path(args.csv) / "reconstruction.csv"
        err = np.abs(rec.values - rec.reference)
        write_csv(path, ["x", "re", "im", "ref_re", "ref_im", "abs_err"],
                  zip(rec.x[:, 0], rec.values.real, rec.values.imag, rec.reference.real, rec.reference.imag, err))
        doc["sidecars"]["reconstruction"] = str(path)
    write_json(doc, args.out)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="structure JSON file")
    common.add_argument("--example", help=f"built-in structure: {', '.join(sorted(catalog.EXAMPLES))}")
    common.add_argument("--xi0", help="direction, comma-separated")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="directory for CSV sidecars")
    common.add_argument("--nodes", type=int, help="grid nodes per axis")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--half-angle", type=float, default=0.25, help="cone half-angle (radians)")
    common.add_argument("--timing", action="store_true", help="add wall-clock seconds to the report")

    p = argparse.ArgumentParser(prog="fbiml", description="Microlocal regularity experiments for tube structures.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("star", parents=[common], help="certify the descent condition at xi0")

    pr = sub.add_parser("probe", parents=[common], help="decay sweep of the transform and a verdict")
    pr.add_argument("--solution", help="solution JSON (inline or file)")
    pr.add_argument("--s", type=float, help="Gevrey index to test")
    pr.add_argument("--kappa", type=float)
    pr.add_argument("--ximax", type=float, default=200.0)
    pr.add_argument("--count", type=int, default=24, help="|xi| samples per direction")
    pr.add_argument("--directions", type=int, default=5)
    pr.add_argument("--chi-inner", type=float, default=0.5)
    pr.add_argument("--chi-outer", type=float, default=0.9)
    pr.add_argument("--t", help="base point t, comma-separated (default 0)")
    pr.add_argument("--x", help="base point x, comma-separated (default 0)")
    pr.add_argument("--dump-full", help="write the slice transform table (npz) for invert")
    pr.add_argument("--dump-ximax", type=float, default=60.0)

    cu = sub.add_parser("curves", parents=[common], help="descent-curve family and its checks")
    cu.add_argument("--theta", type=float)
    cu.add_argument("--cl", type=float)
    cu.add_argument("--certify", action="store_true", help="compute theta and C_L first")
    cu.add_argument("--directions", type=int, default=5)
    cu.add_argument("--w1-scale", type=float, default=0.5)
    cu.add_argument("--trace-samples", type=int, default=100, help="CSV samples per curve")

    iv = sub.add_parser("invert", parents=[common], help="reconstruct a slice from a dump")
    iv.add_argument("--samples", help="npz written by probe --dump-full")
    iv.add_argument("--kappa", type=float)
    return p


COMMANDS = {"star": cmd_star, "probe": cmd_probe, "curves": cmd_curves, "invert": cmd_invert}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    threads = os.environ.get("FBIML_THREADS")
    if threads:
        try:
            if int(threads) < 1:
                raise ValueError
        except ValueError:
            print("fbiml: FBIML_THREADS must be a positive integer", file=sys.stderr)
            return EXIT_ERROR
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, RuntimeError) as exc:
        print(f"fbiml {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
