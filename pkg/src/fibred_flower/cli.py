"""Command-line front end: ``fibred-flower {classify,petals,simulate,cascade,siegel} --spec PATH``.

Reports are deterministic JSON (sorted keys, seeded sampling); trajectories
and polylines go to CSV files under ``--out``. Exit codes: 0 success,
2 undetermined at the order limit, 1 error.
"""

import argparse
import csv
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, config
from .errors import FibredFlowerError, IllConditionedWarning, SpecError
from .dynamics import cascade_simulate, escape_check, iterate_orbit, tube_permutation, verify_petal
from .petals import (angle_gap, exterior_direction, flower_charts, petal_boundary, region_params,
                     translation_model_residual)
from .reduction import Flower, classify
from .siegel import build_sequences, h_norm_certificate, lemma5_check, verify_bounds
from .spec_io import parse_spec

EXIT_OK, EXIT_ERROR, EXIT_UNDETERMINED = 0, 1, 2
COMMANDS = ("classify", "petals", "simulate", "cascade", "siegel")


class Run:
    """Resolved spec + flags for one invocation."""

    def __init__(self, spec, args):
        self.spec = spec
        o = spec.options
        self.max_order = args.max_order or o.max_order or spec.truncation
        self.mean_tol = args.mean_tol if args.mean_tol is not None else o.mean_tol
        self.seeds = args.seeds if args.seeds is not None else o.seeds
        self.budget = args.budget if args.budget is not None else o.budget
        self.seed = args.seed if args.seed is not None else o.seed
        self.out = Path(args.out) if args.out else None
        self.files = []

    def rng(self):
        return np.random.default_rng(self.seed)

    def tolerances(self):
        o = self.spec.options
        return {"mean_tol": self.mean_tol, "converge_tol": o.converge_tol, "escape_radius": o.escape_radius,
                "max_order": self.max_order, "seeds": self.seeds, "budget": self.budget, "radius": o.radius}

    def write_csv(self, name, header, rows):
        if self.out is None:
            return
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([repr(x) if isinstance(x, float) else x for x in r])
        self.files.append(name)


def _clean(obj):
    """JSON-safe copy: complex -> [re, im], non-finite floats -> strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(float(obj.real)), _clean(float(obj.imag))]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


# -- commands ---------------------------------------------------------------
def cmd_classify(run):
    F = run.spec.jet()
    c = classify(F, run.max_order, run.mean_tol)
    return {"classification": c.to_dict()}, EXIT_UNDETERMINED if c.undetermined else EXIT_OK


def cmd_petals(run):
    F = run.spec.jet()
    c = classify(F, run.max_order, run.mean_tol)
    report = {"classification": c.to_dict()}
    v = c.verdict
    if not isinstance(v, Flower):
        return report, EXIT_UNDETERMINED if c.undetermined else EXIT_OK
    o = run.spec.options
    fl = flower_charts(v.reduced, v.petals)
    regions = [region_params(ch.G) for ch in fl.charts]
    A = max(r.A for r in regions)
    fibres = (np.arange(o.fibres) + 0.5) / o.fibres
    target = -math.atan2(fl.kappa.imag, fl.kappa.real)
    ext = [exterior_direction(fl.charts[0], t, A) for t in fibres]
    rows = []
    for ch in fl.charts:
        for side in (+1, -1):
            for t in fibres:
                poly = petal_boundary(ch, t, side, o.resolution, A, z_max=4 * o.radius)
                rows.extend((ch.sector, side, float(t), float(z.real), float(z.imag)) for z in poly)
    run.write_csv("petal_boundaries.csv", ["sector", "side", "theta", "re", "im"], rows)
    g = fl.geometry
    report["geometry"] = {
        "petals": v.petals,
        "leading_mean": complex(fl.kappa),
        "cycle_length": v.cycle_length,
        "repulsive_directions": [complex(d) for d in g.repulsive],
        "attracting_directions": [complex(d) for d in g.attracting],
        "region": {"C": max(r.C for r in regions), "A": A, "L": A + 1.0, "C2": max(r.C2 for r in regions)},
        "exterior_direction_w": {"target_arg": target, "measured": ext,
                                 "max_gap": max(angle_gap(e, target) for e in ext)},
        "translation_residual": translation_model_residual(fl.charts[0].G, A + 1.0, rng=run.rng()).__dict__,
        "escape": escape_check(fl.charts[0].G, regions[0].C2, rng=run.rng()).to_dict(),
        "boundary_fibres": fibres.tolist(),
        "boundary_resolution": o.resolution,
    }
    return report, EXIT_OK


def cmd_simulate(run):
    F = run.spec.jet()
    o = run.spec.options
    rng = run.rng()
    th = rng.random(run.seeds)
    z0 = o.radius * np.exp(2j * math.pi * rng.random(run.seeds))
    stride = max(1, run.budget // 1000)
    tr = iterate_orbit(F, th, z0, run.budget, escape_radius=o.escape_radius, converge_tol=o.converge_tol,
                       record=True, stride=stride)
    rows = [(s,) + r for s in range(run.seeds) for r in tr.rows(s)]
    run.write_csv("orbits.csv", ["seed", "step", "theta", "re", "im"], rows)
    status = {k: int(np.count_nonzero(tr.status == k)) for k in ("converged", "escaped", "budget")}
    report = {"simulation": {
        "seeds": run.seeds, "budget": run.budget, "record_stride": stride, "status": status,
        "max_displacement": float(np.max(np.abs(tr.final_z - tr.z0))),
        "median_final_abs": float(np.median(np.abs(tr.final_z))),
    }}
    try:
        c = classify(F, run.max_order, run.mean_tol)
    except FibredFlowerError as exc:
        report["classification"] = {"skipped": f"{exc.code}: {exc}"}
        return report, EXIT_OK
    report["classification"] = c.to_dict()
    v = c.verdict
    if isinstance(v, Flower):
        if v.cycle_length == 1:
            pr = verify_petal(F, v.reduced, v.petals, seeds=run.seeds, radius=o.radius, budget=run.budget,
                              converge_tol=o.converge_tol, escape_radius=o.escape_radius, rng=rng)
            report["petal_verification"] = pr.to_dict()
        else:
            report["tube_permutation"] = tube_permutation(F, v.leading_mean, v.petals, rng=rng).to_dict()
    return report, EXIT_OK


def cmd_cascade(run):
    spec = run.spec
    a = spec.coefficient(2)
    alpha = spec.rotation()
    z0 = complex(*spec.options.cascade_z0)
    theta0 = float(run.rng().random())
    rep = cascade_simulate(a, alpha, theta0, z0, run.budget)
    stride = max(1, run.budget // 1000)
    idx = np.arange(0, rep.Z.size, stride)
    run.write_csv("cascade.csv", ["step", "theta", "re_Z", "im_Z", "re_W", "im_W"],
                  [(int(j), float(rep.thetas[j]), float(rep.Z[j].real), float(rep.Z[j].imag),
                    float(rep.W[j].real), float(rep.W[j].imag)) for j in idx])
    out = rep.to_dict()
    out.update(theta0=theta0, Z0=z0, record_stride=stride)
    return {"cascade": out}, EXIT_OK


def cmd_siegel(run):
    o = run.spec.options
    F = run.spec.jet()
    K = min(run.max_order, F.N)
    cert = h_norm_certificate(F, o.delta, K=K, tau=o.tau, nu=o.nu, mean_tol=run.mean_tol)
    seqs = cert.sequences
    bounds = verify_bounds(build_sequences(seqs.nu, seqs.eps, K))
    report = {"siegel": {
        "certificate": cert.to_dict(),
        "sequences": seqs.to_dict(),
        "bounds": bounds.to_dict(),
        "lemma5": [{"s": r.s, "x": r.x, "lhs": r.lhs, "rhs": r.rhs, "holds": r.holds} for r in lemma5_check()],
    }}
    if cert.stop is not None:
        report["siegel"]["applicable"] = False
        return report, EXIT_OK
    report["siegel"]["applicable"] = True
    if not cert.passed:
        report["error"] = {"code": "siegel.certificate_failed",
                           "orders": [r.k for r in cert.rows if not r.passed]}
        return report, EXIT_ERROR
    return report, EXIT_OK


HANDLERS = {"classify": cmd_classify, "petals": cmd_petals, "simulate": cmd_simulate,
            "cascade": cmd_cascade, "siegel": cmd_siegel}


# -- driver -------------------------------------------------------------------
def build_parser():
    p = argparse.ArgumentParser(
        prog="fibred-flower",
        description="Classify a fibred parabolic map and verify the verdict.",
        epilog="Exit codes: 0 success, 1 error, 2 undetermined at the order limit.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--spec", required=True, help="map-spec JSON file")
    p.add_argument("--max-order", type=int, help="highest reduction order (default: spec truncation)")
    p.add_argument("--mean-tol", type=float, help="relative tolerance for a vanishing mean")
    p.add_argument("--seeds", type=int, help="orbit seeds per sample set")
    p.add_argument("--budget", type=int, help="iterations per orbit")
    p.add_argument("--out", help="directory for report.json and CSV side files")
    p.add_argument("--seed", type=int, help="RNG seed (recorded in the report)")
    p.add_argument("--diagnostic", action="store_true", help="accept rational alpha")
    return p


def _load(args):
    text = Path(args.spec).read_text()
    if args.diagnostic:
        data = json.loads(text)
        if isinstance(data, dict):
            data.setdefault("options", {})
            if isinstance(data["options"], dict):
                data["options"]["diagnostic"] = True
            text = json.dumps(data)
    return parse_spec(text)


def run(command, spec, args):
    """Execute one command; returns ``(report dict, exit code, Run)``."""
    r = Run(spec, args)
    report, code = HANDLERS[command](r)
    report["provenance"] = {
        "command": command,
        "spec_sha256": spec.sha256(),
        "tool": "fibred-flower",
        "version": __version__,
        "precision": config.mode(),
        "rng_seed": r.seed,
        "tolerances": r.tolerances(),
        "side_files": sorted(r.files),
    }
    report["exit_code"] = code
    return _clean(report), code, r


def render(report):
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        spec = _load(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", IllConditionedWarning)
            report, code, r = run(args.command, spec, args)
        notes = sorted({str(w.message) for w in caught if issubclass(w.category, IllConditionedWarning)})
        if notes:
            report["warnings"] = notes
    except SpecError as exc:
        sys.stderr.write(render({"error": {"code": exc.code, "violations": exc.violations}}))
        return EXIT_ERROR
    except FibredFlowerError as exc:
        err = {"code": exc.code, "message": str(exc)}
        if getattr(exc, "witness", None) is not None:
            err["witness"] = _clean(exc.witness)
        sys.stderr.write(render({"error": err}))
        return EXIT_ERROR
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(render({"error": {"code": "cli.io", "message": str(exc)}}))
        return EXIT_ERROR
    text = render(report)
    if r.out is not None:
        r.out.mkdir(parents=True, exist_ok=True)
        (r.out / "report.json").write_text(text)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
