"""Command line interface: nilfill algebra|frames|similarity|chain|fill|distortion|experiment."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .algebra import AlgebraError, describe, load_algebra
from .bch import frame
from .chains import boundary, connected_components, load_chain, mass_with_error, support_geometry
from .distortion import LatticeSpec, bfs_ball, distortion_fit, log_norm, phi
from .experiments import ExperimentConfig, run_experiment, write_outputs
from .filling import fill_cycle, fill_loop
from .grid import GridSpec
from .metrics import check_sandwich, cone_exponent, similarity_bound
from .quadrature import QuadratureSpec


def _dump(obj, path=None):
    text = json.dumps(obj, sort_keys=True, indent=2, default=str)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_algebra(args):
    try:
        a = load_algebra(args.algebra)
    except (AlgebraError, OSError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    if args.action == "validate":
        print(f"ok: {a.name} n={a.n} s={a.s} grading={list(a.grading_dims)}")
    else:
        _dump(describe(a))
    return 0


def cmd_frames(args):
    a = load_algebra(args.algebra)
    fr = frame(a)
    print("A =")
    print(fr.to_text())
    print("Ainv =")
    print(fr.to_text(inverse=True))
    for d in range(1, a.n + 1):
        print(f"R_{d}(r) = {similarity_bound(a, d).R.to_text()}")
    print(f"N_cone = {cone_exponent(a)}")
    return 0


def cmd_similarity(args):
    a = load_algebra(args.algebra)
    rng = np.random.default_rng(args.seed)
    ds = [args.d] if args.d else list(range(1, a.n + 1))
    ok = True
    for d in ds:
        res = check_sandwich(a, d, args.samples, args.radius, rng)
        bad = res["lower_violations"] + res["upper_violations"]
        ok &= bad == 0
        print(f"d={d} R_d={res['R']} samples={res['samples']} lower_violations={res['lower_violations']} "
              f"upper_violations={res['upper_violations']} {'PASS' if bad == 0 else 'FAIL'}")
    return 0 if ok else 1


def cmd_chain(args):
    c = load_chain(args.chain)
    if args.action == "boundary":
        _dump(boundary(c).to_json())
        return 0
    if args.action == "components":
        comps = connected_components(c)
        geo = support_geometry(c)
        _dump({"components": len(comps), "sizes": [len(x) for x in comps],
               "diameter": geo.diameter, "contains_origin": geo.contains_origin})
        return 0
    a = load_algebra(args.algebra)
    quad = QuadratureSpec(tolerance=args.tolerance)
    eu, _ = mass_with_error(a, c, "euclidean")
    pb, err = mass_with_error(a, c, "pulled_back", quad)
    _dump({"euclidean": eu, "pulled_back": pb, "error_estimate": err})
    return 0


def cmd_fill(args):
    a = load_algebra(args.algebra)
    c = load_chain(args.chain)
    quad = QuadratureSpec(tolerance=args.tolerance)
    P = None
    if args.kind == "loop":
        C, rep = fill_loop(a, c, quad=quad)
    else:
        C, P, rep = fill_cycle(a, c, deform=args.deform, grid=GridSpec(eps=args.eps), quad=quad)
    os.makedirs(args.out_dir, exist_ok=True)
    _dump(C.to_json(), os.path.join(args.out_dir, "filling.json"))
    _dump(rep.to_dict(), os.path.join(args.out_dir, "fill_report.json"))
    if P is not None:
        _dump(P.to_json(), os.path.join(args.out_dir, "grid_filling.json"))
    print(f"fill mass {rep.fill_mass:.6g} (input mass {rep.input_mass:.6g}), "
          f"certificates {'PASS' if rep.passed else 'FAIL'}")
    return 0 if rep.passed else 1


def cmd_distortion(args):
    a = load_algebra(args.algebra)
    spec = LatticeSpec(a)
    fit = distortion_fit(spec, args.radius, cap=args.cap)
    dist = bfs_ball(spec, args.radius, cap=args.cap)
    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "ball_counts.csv"), "w") as fh:
        fh.write("r,ball_size\n")
        for r, cnt in enumerate(fit.counts):
            fh.write(f"{r},{cnt}\n")
    with open(os.path.join(args.out_dir, "samples.csv"), "w") as fh:
        fh.write("d,log_norm,phi\n")
        for z in sorted(dist):
            fh.write(f"{dist[z]},{log_norm(z)!r},{phi(a, z)!r}\n")
    _dump(fit.to_dict(), os.path.join(args.out_dir, "distortion_fit.json"))
    print(f"|B({args.radius})| = {fit.ball_size}, growth slope {fit.growth_slope:.3f}, "
          f"N_hom = {fit.homogeneous_dimension}, central exponent {fit.central_exponent}")
    return 0 if all(fit.checks.values()) else 1


def cmd_experiment(args):
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    if args.algebra:
        data["algebra"] = args.algebra
    if args.family:
        data["family"] = args.family
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out_dir:
        data["out_dir"] = args.out_dir
    if "algebra" not in data:
        print("experiment needs an algebra (config or --algebra)", file=sys.stderr)
        return 2
    config = ExperimentConfig.from_dict(data)
    result = run_experiment(config, jobs=args.jobs)
    write_outputs(result, config.out_dir)
    for name, ok in result["checks"].items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    fit = result["fit"]
    if "slope" in fit:
        print(f"slope {fit['slope']:.4f} observed on family; N_cone = {fit['n_cone']}")
    return 0 if result["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nilfill", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("algebra", help="validate or show structure constants")
    q.add_argument("action", choices=["validate", "show"])
    q.add_argument("algebra", help="catalog name like heisenberg(3) or a JSON file")
    q.set_defaults(func=cmd_algebra)

    q = sub.add_parser("frames", help="print the polynomial frame and R_d majorants")
    q.add_argument("action", choices=["show"])
    q.add_argument("algebra")
    q.set_defaults(func=cmd_frames)

    q = sub.add_parser("similarity", help="sample the similarity inequalities")
    q.add_argument("action", choices=["check"])
    q.add_argument("algebra")
    q.add_argument("--d", type=int, default=0, help="degree (default: all)")
    q.add_argument("--samples", type=int, default=1000)
    q.add_argument("--radius", type=float, default=100.0)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_similarity)

    q = sub.add_parser("chain", help="chain utilities")
    q.add_argument("action", choices=["mass", "boundary", "components"])
    q.add_argument("chain", help="chain JSON file")
    q.add_argument("--algebra", default="abelian(2)", help="needed for mass")
    q.add_argument("--tolerance", type=float, default=1e-8)
    q.set_defaults(func=cmd_chain)

    q = sub.add_parser("fill", help="fill a loop or cycle")
    q.add_argument("kind", choices=["loop", "cycle"])
    q.add_argument("algebra")
    q.add_argument("chain")
    q.add_argument("--deform", action="store_true")
    q.add_argument("--eps", default="1")
    q.add_argument("--tolerance", type=float, default=1e-8)
    q.add_argument("--out-dir", default="out")
    q.set_defaults(func=cmd_fill)

    q = sub.add_parser("distortion", help="BFS word metric and distortion fits")
    q.add_argument("action", choices=["run"])
    q.add_argument("algebra")
    q.add_argument("--radius", type=int, default=12)
    q.add_argument("--cap", type=int, default=2_000_000)
    q.add_argument("--out-dir", default="out")
    q.set_defaults(func=cmd_distortion)

    q = sub.add_parser("experiment", help="run an experiment family")
    q.add_argument("--config")
    q.add_argument("--algebra")
    q.add_argument("--family", choices=["dehn_loops", "cycles_d", "distortion"])
    q.add_argument("--seed", type=int)
    q.add_argument("--out-dir")
    q.add_argument("--jobs", type=int, default=1)
    q.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
