"""Command-line interface: scene ingestion, JSON reports, mesh export.

Exit codes: 0 success, 2 usage or input-format error, 3 mathematical
degeneracy (with a structured diagnostic on stdout).  Reports are
deterministic: keys sorted, floats canonicalized through a 17-significant-
digit round trip, timing excluded unless requested.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import curve as curve_mod
from . import envelope as envelope_mod
from . import metricbundle as metric_mod
from . import singular as singular_mod
from . import transon as transon_mod
from .errors import GeometryError, InputError, ParseError
from .frame import darboux_frame, nondegeneracy, structure_coefficients
from .scenes import CATALOG, bundled_text, load_bundled, parse_scene_text


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _canonical(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(f"{float(obj):.17g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def render_report(report):
    return json.dumps(_canonical(report), sort_keys=True, indent=2)


def _load_scene(scene_ref):
    path = Path(scene_ref)
    if path.exists():
        text = path.read_text()
        scene = parse_scene_text(text, name=path.stem)
        digest = hashlib.sha256(text.encode()).hexdigest()
        return scene, digest
    name = scene_ref[:-6] if scene_ref.endswith(".scene") else scene_ref
    if name in CATALOG:
        text = bundled_text(name)
        return load_bundled(name), hashlib.sha256(text.encode()).hexdigest()
    raise InputError(f"scene file '{scene_ref}' not found and not a bundled name")


def _parse_point(text, n):
    values = [float(v) for v in text.split(",")] if text else [0.0] * n
    if len(values) != n:
        raise InputError(f"--t expects {n} comma-separated values")
    return values

def _parse_axis(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError("--grid/--u expect lo:hi:count")
    return float(parts[0]), float(parts[1]), int(parts[2])


def _report(command, digest, parameters, results, diagnostics, timing):
    return {
        "command": command,
        "scene": digest,
        "parameters": parameters,
        "results": results,
        "diagnostics": diagnostics,
        "timing": timing,
        "version": __version__,
    }


def _cmd_frame(args):
    scene, digest = _load_scene(args.scene)
    t = _parse_point(args.t, scene.n)
    det = nondegeneracy(scene, t)
    fp = darboux_frame(scene, t)
    coeffs = structure_coefficients(scene, t)
    results = {
        "nondegeneracy_det": det,
        "X": fp.X.tolist(),
        "xi": fp.xi.tolist(),
        "eta": fp.eta.tolist(),
        "gauge": fp.gauge,
        "S1": coeffs.S1.tolist(),
        "S2": coeffs.S2.tolist(),
        "h1": coeffs.h1.tolist(),
        "h2": coeffs.h2.tolist(),
        "Gamma": coeffs.Gamma.tolist(),
        "tau11": coeffs.tau11.tolist(),
        "tau12": coeffs.tau12.tolist(),
        "tau21": coeffs.tau21.tolist(),
        "tau22": coeffs.tau22.tolist(),
    }
    return digest, {"t": t}, results, []


def _cmd_envelope(args):
    scene, digest = _load_scene(args.scene)
    if len(args.grid or []) != scene.n:
        raise InputError(f"envelope needs {scene.n} --grid axes")
    axes = [_parse_axis(g) for g in args.grid]
    u_range = _parse_axis(args.u)
    mesh = envelope_mod.envelope_mesh(scene, axes, u_range)
    out = args.out or "envelope.obj"
    fmt = args.format or ("obj" if scene.n == 1 else "ply")
    if fmt == "obj":
        envelope_mod.write_obj(mesh, out)
    elif fmt == "ply":
        envelope_mod.write_ply(mesh, out)
    else:
        raise InputError(f"unsupported mesh format '{fmt}'")
    t_mid = [0.5 * (a[0] + a[1]) for a in axes]
    results = {
        "vertices": int(len(mesh.vertices)),
        "faces": int(len(mesh.faces)),
        "singular_vertices": int(mesh.singular.sum()),
        "regression_values_mid": envelope_mod.regression_values(scene, t_mid),
        "output": str(out),
        "format": fmt,
    }
    return digest, {"grid": args.grid, "u": args.u}, results, mesh.diagnostics


def _cmd_classify(args):
    scene, digest = _load_scene(args.scene)
    t = _parse_point(args.t, scene.n)
    report = singular_mod.classify_envelope_point(scene, t, args.u, order=args.order)
    return digest, {"t": t, "u": args.u, "order": args.order}, report, report.pop("diagnostics")


def _cmd_curve(args):
    scene, digest = _load_scene(args.scene)
    c = curve_mod.as_curve(scene)
    t = _parse_point(args.t, 1)[0]
    verdict = None
    try:
        verdict = curve_mod.curve_singularity(c, t)
    except GeometryError as err:
        verdict = f"error: {err}"
    results = {"singularity": verdict}
    diagnostics = []
    if args.interval:
        lo, hi, count = _parse_axis(args.interval)
        adapted, rows = curve_mod.invariants_table(c, (lo, hi), count)
        results["adapted_max_residual"] = float(adapted.residual.max())
        results["invariants"] = [
            {"t": r.t, "sigma": r.sigma, "mu": r.mu, "tau": r.tau} for r in rows
        ]
        if args.out:
            curve_mod.write_invariants_csv(rows, args.out)
            results["output"] = args.out
    return digest, {"t": t, "interval": args.interval}, results, diagnostics


def _cmd_metric(args):
    scene, digest = _load_scene(args.scene)
    t = _parse_point(args.t, scene.n)
    g, record = metric_mod.affine_metric(scene, t)
    xi, eta = metric_mod.affine_normal_plane(scene, t)
    apolar = metric_mod.apolarity_defect(scene, t)
    equi = metric_mod.equiaffine_defect(scene, t)
    tau = metric_mod.tau_form(scene, t)
    dtau = metric_mod.normal_curvature(scene, t)
    compat = metric_mod.blaschke_compatibility(scene, t)
    results = {
        "point": t,
        "g": g.tolist(),
        "signature": list(record["signature"]),
        "det_G": record["det_G"],
        "xi": xi.tolist(),
        "eta": eta.tolist(),
        "apolarity_defect": apolar.tolist(),
        "equiaffine_defect": equi.tolist(),
        "tau": tau.tolist(),
        "dtau": dtau.tolist(),
        "verdicts": {
            "parallel_pointwise": bool(np.abs(tau).max() < 1e-7),
            "blaschke_items": compat["items"],
        },
        "zeta": compat["zeta"],
        "cubic_xi_xi": compat["cubic_xi_xi"],
    }
    return digest, {"t": t}, results, []


def _cmd_transon(args):
    scene, digest = _load_scene(args.scene)
    t = _parse_point(args.t, scene.n)
    lams = [float(v) for v in args.lambdas.split(",")] if args.lambdas else None
    report = transon_mod.transon_report(scene, t, lams)
    results = {
        "p0": report.p0,
        "lambdas": report.lambdas,
        "normals": report.normals,
        "plane_basis": report.plane_basis,
        "residual": report.residual,
        "principal_angles": report.principal_angles,
        "verdict": report.verdict,
    }
    return digest, {"t": t, "lambdas": report.lambdas}, results, report.diagnostics


def _cmd_parallel(args):
    scene, digest = _load_scene(args.scene)
    if len(args.grid or []) != scene.n:
        raise InputError(f"parallel-test needs {scene.n} --grid axes")
    axes = [_parse_axis(g) for g in args.grid]
    report = metric_mod.parallel_field_exists(scene, axes)
    results = {
        "verdict": report.verdict,
        "max_dtau": report.max_dtau,
        "dtau_base": report.dtau_base.tolist(),
        "loop_residual": report.loop_residual,
        "tangency_residual": report.tangency_residual,
        "lambda_samples": report.lam.tolist() if report.lam is not None else None,
    }
    return digest, {"grid": args.grid}, results, report.diagnostics


def _cmd_examples(args):
    if args.list:
        for name in CATALOG:
            print(name)
        return None
    if args.show:
        print(bundled_text(args.show), end="")
        return None
    if args.write:
        target = Path(args.write)
        target.mkdir(parents=True, exist_ok=True)
        for name in CATALOG:
            (target / f"{name}.scene").write_text(bundled_text(name))
        print(f"wrote {len(CATALOG)} scene files to {target}")
        return None
    raise InputError("examples: choose one of --list, --show NAME, --write DIR")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="darboux",
        description="Affine geometry of submanifolds in hypersurfaces: "
        "Darboux frames, envelopes, singular points, normal planes.",
    )
    parser.add_argument("--timing", action="store_true", help="include wall time in reports")
    sub = parser.add_subparsers(dest="command", required=True)

    def scene_arg(p):
        p.add_argument("--scene", required=True, help="scene file path or bundled name")

    p = sub.add_parser("frame", help="Darboux frame and structure coefficients")
    scene_arg(p)
    p.add_argument("--t", default="", help="comma-separated parameter point")

    p = sub.add_parser("envelope", help="sample the envelope and export a mesh")
    scene_arg(p)
    p.add_argument("--grid", action="append", help="lo:hi:count per parameter axis")
    p.add_argument("--u", required=True, help="lo:hi:count for the ruling parameter")
    p.add_argument("--out", help="output mesh path")
    p.add_argument("--format", choices=["obj", "ply"], help="mesh format")

    p = sub.add_parser("classify", help="classify the envelope point over (t, u)")
    scene_arg(p)
    p.add_argument("--t", default="", help="comma-separated parameter point")
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--order", type=int, default=6)

    p = sub.add_parser("curve", help="curve invariants and singularity verdict")
    scene_arg(p)
    p.add_argument("--t", default="0")
    p.add_argument("--interval", help="lo:hi:count for the invariant table")
    p.add_argument("--out", help="CSV output path for the invariant table")

    p = sub.add_parser("metric", help="affine metric, normal plane, parallel data")
    scene_arg(p)
    p.add_argument("--t", default="")

    p = sub.add_parser("transon", help="section normals and the swept plane")
    scene_arg(p)
    p.add_argument("--t", default="")
    p.add_argument("--lambdas", help="comma-separated pencil parameters")

    p = sub.add_parser("parallel-test", help="parallel field existence over a region")
    scene_arg(p)
    p.add_argument("--grid", action="append", help="lo:hi:count per axis")

    p = sub.add_parser("examples", help="bundled scene catalog")
    p.add_argument("--list", action="store_true")
    p.add_argument("--show", metavar="NAME")
    p.add_argument("--write", metavar="DIR")
    return parser


_HANDLERS = {
    "frame": _cmd_frame,
    "envelope": _cmd_envelope,
    "classify": _cmd_classify,
    "curve": _cmd_curve,
    "metric": _cmd_metric,
    "transon": _cmd_transon,
    "parallel-test": _cmd_parallel,
}


def run_command(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)
    try:
        if args.command == "examples":
            _cmd_examples(args)
            return 0
        start = time.perf_counter()
        digest, parameters, results, diagnostics = _HANDLERS[args.command](args)
        timing = time.perf_counter() - start if args.timing else None
        report = _report(args.command, digest, parameters, results, diagnostics, timing)
        print(render_report(report))
        return 0
    except (InputError, ParseError) as err:
        print(json.dumps({"error": "input", "message": str(err)}, sort_keys=True))
        return 2
    except GeometryError as err:
        print(
            json.dumps(
                {"error": "degeneracy", "type": type(err).__name__, "message": str(err)},
                sort_keys=True,
            )
        )
        return 3


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
