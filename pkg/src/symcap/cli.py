"""Command line interface: ``symcap <command> ...``.

Exit codes: 0 success, 1 invariant failure, 2 input error.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bodies import contact_certificate
from .exceptions import SymcapError
from .experiments import (ConfigError, ExperimentConfig, body_to_spec,
                          gamma_svg, generate_body, run_experiment, write_atomic)
from .pipeline import grs_ratio, rogers_shephard_ratio, tmt_upper_bound, viterbo_ratio
from .symplectic import symplectic_defect, wds_decompose, williamson
from .volume import DEFAULT_SAMPLES, volume, volume_mc

EXIT_OK, EXIT_INVARIANT, EXIT_INPUT = 0, 1, 2


def _load_json(arg):
    """JSON from a file path, or the argument itself parsed as JSON."""
    if os.path.exists(arg):
        with open(arg, encoding="utf-8") as fh:
            return json.load(fh)
    try:
        return json.loads(arg)
    except json.JSONDecodeError:
        raise ConfigError(f"{arg!r} is neither a file nor valid JSON") from None


def _load_matrix(arg):
    data = _load_json(arg)
    if isinstance(data, dict):
        data = data.get("matrix")
    M = np.asarray(data, dtype=float)
    if M.ndim != 2:
        raise ConfigError("expected a matrix (row-major nested list)")
    return M


def _load_body(arg):
    return generate_body(_load_json(arg))


def _emit(args, payload):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def cmd_williamson(args):
    A = _load_matrix(args.matrix)
    wf = williamson(A)
    rec = float(np.linalg.norm(wf.reconstruct() - A) / np.linalg.norm(A))
    defect = symplectic_defect(wf.S)
    _emit(args, {"S": wf.S.tolist(), "D": wf.D.tolist(),
                 "spectrum": wf.spectrum.tolist(),
                 "near_degenerate": wf.near_degenerate,
                 "reconstruction_error": rec, "symplectic_defect": defect})
    return EXIT_OK if rec <= args.tol and defect <= args.tol else EXIT_INVARIANT


def cmd_wds(args):
    T = _load_matrix(args.matrix)
    f = wds_decompose(T)
    rec = float(np.linalg.norm(f.reconstruct() - T) / np.linalg.norm(T))
    orth = float(np.linalg.norm(f.W.T @ f.W - np.eye(T.shape[0])))
    defect = symplectic_defect(f.S)
    _emit(args, {"W": f.W.tolist(), "D": f.D.tolist(), "S": f.S.tolist(),
                 "reconstruction_error": rec, "orthogonality_defect": orth,
                 "symplectic_defect": defect})
    ok = rec <= args.tol and max(orth, defect) <= max(args.tol, 1e-8)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_volume(args):
    K = _load_body(args.body)
    if args.monte_carlo:
        v = volume_mc(K, args.samples, args.seed, workers=args.workers)
    else:
        v = volume(K, args.samples, args.seed, workers=args.workers)
    _emit(args, {"value": v.value, "method": v.method, "stderr": v.stderr,
                 "samples": v.samples, "seed": v.seed})
    return EXIT_OK


def _bound_payload(b):
    tr = b.trace
    out = {"upper": b.upper, "lower": b.lower, "method": b.method}
    if tr is not None:
        out.update(r=tr.r, r_approximate=tr.r_approximate, a2=tr.a2,
                   theta_ratios=list(tr.theta_ratios), S=tr.S.tolist())
    return out


def cmd_bound(args):
    K = _load_body(args.body)
    b = tmt_upper_bound(K, samples=args.samples, seed=args.seed)
    _emit(args, _bound_payload(b))
    return EXIT_OK if b.lower <= b.upper + args.tol else EXIT_INVARIANT


def cmd_viterbo(args):
    spec = _load_json(args.body)
    K = generate_body(spec)
    rep = viterbo_ratio(K, spec.get("id", ""), samples=args.samples, seed=args.seed)
    _emit(args, {"body_id": rep.body_id, "dimension": rep.dimension,
                 "gamma": rep.gamma, "volume_term": rep.volume_term,
                 "bound": _bound_payload(rep.bound)})
    return EXIT_OK


def cmd_rogers_shephard(args):
    K = _load_body(args.body)
    ratio = rogers_shephard_ratio(K, args.samples, args.seed)
    bound = 4.0 ** K.dim
    _emit(args, {"ratio": ratio, "bound": bound, "dimension": K.dim})
    return EXIT_OK if ratio <= bound * (1 + args.tol) else EXIT_INVARIANT


def cmd_grs(args):
    A, B = _load_body(args.body_a), _load_body(args.body_b)
    _emit(args, {"ratio": grs_ratio(A, B, args.samples, args.seed), "dimension": A.dim})
    return EXIT_OK


def cmd_run(args):
    cfg = ExperimentConfig.load(args.config)
    if args.out:
        cfg.output = args.out
    if args.samples_given:
        cfg.samples = args.samples
    if args.seed_given:
        cfg.seed = args.seed
    if not cfg.output:
        cfg.output = os.path.splitext(args.config)[0] + ".csv"
    report = run_experiment(cfg, workers=args.workers,
                            check_tol=args.tol if args.tol_given else None)
    if args.plot:
        write_atomic(os.path.splitext(cfg.output)[0] + ".svg", gamma_svg(report.rows))
    for row in report.rows:
        status = "ok" if row["checks_passed"] and not row["error"] else "FAIL"
        gamma = row.get("gamma", math.nan)
        print(f"{status:4s} {row['body_id']:<24s} d={row['dimension']} gamma={gamma:.6g}"
              + (f"  {row['error']}" if row["error"] else ""))
    return EXIT_OK if report.passed else EXIT_INVARIANT


def cmd_dump_stage(args):
    K = _load_body(args.body)
    if args.stage == "K":
        body = K
    else:
        tr = tmt_upper_bound(K, thetas=(), samples=args.samples, seed=args.seed).trace
        body = getattr(tr, args.stage)
    spec = body_to_spec(body, args.stage)
    if args.stage == "K3":
        cert = contact_certificate(body, tr.r)
        spec["contact_point"] = cert.point.tolist()
    _emit(args, spec)
    return EXIT_OK


def build_parser():
    # SUPPRESS keeps a flag given before the subcommand from being reset by
    # the subparser's copy of the same option
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="RNG seed (default 0)")
    common.add_argument("--samples", type=int,
                        help="Monte Carlo samples (default 1000000)")
    common.add_argument("--tol", type=float,
                        help="tolerance for invariant checks (default 1e-9)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--workers", type=int, help="worker threads (default 1)")

    p = argparse.ArgumentParser(prog="symcap", parents=[common],
                                description="Capacity bounds for convex bodies.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    add("williamson", cmd_williamson, "Williamson normal form of a PD matrix") \
        .add_argument("matrix", help="JSON file or inline JSON matrix")
    add("wds", cmd_wds, "T = W D S factorization") \
        .add_argument("matrix", help="JSON file or inline JSON matrix")
    sp = add("volume", cmd_volume, "volume of a body")
    sp.add_argument("body", help="body-spec JSON file or inline JSON")
    sp.add_argument("--monte-carlo", action="store_true")
    add("bound", cmd_bound, "upper bound on the linearized cylindrical capacity") \
        .add_argument("body")
    add("viterbo", cmd_viterbo, "Viterbo ratio gamma of a body").add_argument("body")
    add("rogers-shephard", cmd_rogers_shephard, "Vol(K-K)/Vol(K)").add_argument("body")
    sp = add("grs", cmd_grs, "(Vol(A+B)/Vol(A-B))^(1/d)")
    sp.add_argument("body_a")
    sp.add_argument("body_b")
    sp = add("run", cmd_run, "run an experiment config and write the CSV report")
    sp.add_argument("config")
    sp.add_argument("--plot", action="store_true", help="also write gamma-vs-dimension SVG")
    sp = add("dump-stage", cmd_dump_stage, "write a pipeline stage body as a body spec")
    sp.add_argument("body")
    sp.add_argument("--stage", choices=("K", "K1", "K2", "K3"), default="K3")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("seed", 0), ("samples", DEFAULT_SAMPLES),
                          ("tol", 1e-9), ("out", None), ("workers", 1)):
        setattr(args, f"{name}_given", hasattr(args, name))
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SymcapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
