"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 numerical failure (rank-deficient
pursuit, solver not converged, or a violated bound in an experiment).
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import __version__
from .dictionary import coherence, welch_lower_bound
from .errors import NotConvergedWarning, RankDeficientActiveSet, WeightedCSError
from .experiment import ExperimentConfig, parse_dict_source, run_experiment, to_csv, to_json
from .greedy import omp_recover
from .guarantees import error_bound
from .l1solver import SolverConfig, solve_p1w

EXIT_INPUT = 2
EXIT_NUMERIC = 3


class InputError(Exception):
    pass


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _dump(obj, fmt):
    if fmt == "json":
        print(json.dumps(obj))
    else:
        for k, v in obj.items():
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = f"{v:.12g}"
            print(f"{k}: {v}")


def _load_dict(args):
    if not args.dict:
        raise InputError("--dict is required")
    try:
        return parse_dict_source(args.dict)
    except (OSError, ValueError, WeightedCSError) as exc:
        raise InputError(f"cannot load dictionary {args.dict!r}: {exc}") from None


def _signal(args, n):
    if args.y is not None:
        y = np.array(args.y, dtype=float)
    elif args.y_file:
        try:
            with open(args.y_file) as fh:
                y = np.array(json.load(fh), dtype=float)
        except (OSError, ValueError, TypeError) as exc:
            raise InputError(f"cannot read signal {args.y_file!r}: {exc}") from None
    else:
        return None
    if y.shape != (n,) or not np.all(np.isfinite(y)):
        raise InputError(f"signal must be {n} finite numbers")
    return y


def _solver_config(path):
    if not path:
        return SolverConfig()
    try:
        with open(path) as fh:
            return SolverConfig.from_json(fh.read())
    except (OSError, ValueError, TypeError) as exc:
        raise InputError(f"bad solver config {path!r}: {exc}") from None


def cmd_coherence(args):
    D = _load_dict(args)
    _dump({
        "n": D.n,
        "N": D.N,
        "mu": coherence(D),
        "welch": welch_lower_bound(D.n, D.N),
        "weight_min": float(D.weights.min()),
        "weight_max": float(D.weights.max()),
    }, args.format)
    return 0


def cmd_bounds(args):
    if args.mu is None or args.s is None:
        raise InputError("bounds needs --mu and --s")
    if len(args.s) != 1:
        raise InputError("bounds takes a single --s")
    s = args.s[0]
    eta = args.eta[0] if args.eta else 0.0
    eps = args.eps[0] if args.eps else 0.0
    if s < 1 or not 0 <= args.mu <= 1 or min(eta, eps, args.e0) < 0:
        raise InputError("need s >= 1, 0 <= mu <= 1 and nonnegative eta, eps, e0")
    rep = error_bound(args.mu, s, eta, eps, args.e0)
    out = {"mu": rep.mu, "s": rep.s, "applicable": rep.applicable}
    if rep.applicable:
        out.update(C1=rep.C1, C2=rep.C2, bound=rep.bound_value, cai_C=rep.cai_C,
                   cai_bound=rep.cai_bound, ratio=rep.C1 / rep.cai_C)
    elif args.format != "json":
        print("not applicable: mu (2s - 1) >= 1")
    _dump(out, args.format)
    return 0


def cmd_omp(args):
    D = _load_dict(args)
    y = _signal(args, D.n)
    result = {}
    c_true = None
    if y is None:
        if not args.s:
            raise InputError("omp needs --y/--y-file or a synthetic --s")
        s = args.s[0]
        if not 1 <= s <= D.N:
            raise InputError(f"s must lie in [1, {D.N}]")
        rng = np.random.default_rng(args.seed)
        c_true = np.zeros(D.N)
        S = rng.choice(D.N, size=s, replace=False)
        c_true[S] = rng.choice([-1.0, 1.0], size=s)
        y = D.matrix @ c_true
    max_atoms = args.max_atoms
    if max_atoms is None and c_true is not None:
        max_atoms = args.s[0]
    try:
        trace = omp_recover(D, y, max_atoms=max_atoms, residual_tol=args.tol)
    except RankDeficientActiveSet as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    result.update(trace.to_dict())
    if c_true is not None:
        true_support = np.flatnonzero(c_true)
        result["true_support"] = [int(j) + 1 for j in true_support]
        result["recovered"] = sorted(trace.selected) == true_support.tolist()
        result["coefficient_error"] = float(np.max(np.abs(trace.coefficients - c_true)))
    print(json.dumps(result))
    return 0


def cmd_solve(args):
    D = _load_dict(args)
    y = _signal(args, D.n)
    if y is None:
        raise InputError("solve needs --y or --y-file")
    eta = args.eta[0] if args.eta else 0.0
    if eta < 0:
        raise InputError("eta must be >= 0")
    cfg = _solver_config(args.config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConvergedWarning)
        c, info = solve_p1w(D, y, eta, cfg, full_output=True)
    print(json.dumps({
        "solution": c.tolist(),
        "converged": info.converged,
        "iterations": info.iterations,
        "objective": info.objective,
        "residual_norm": info.residual_norm,
    }))
    return 0 if info.converged else EXIT_NUMERIC


def cmd_experiment(args):
    obj = {}
    if args.config:
        try:
            with open(args.config) as fh:
                obj = json.load(fh)
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read experiment config {args.config!r}: {exc}") from None
        if not isinstance(obj, dict):
            raise InputError("experiment config must be a JSON object")
    overrides = {
        "dictionary": args.dict, "trials": args.trials, "s": args.s, "eps": args.eps,
        "eta": args.eta, "seed": args.seed, "tail": args.tail,
    }
    obj.update({k: v for k, v in overrides.items() if v is not None})
    if args.rescale:
        obj["rescale"] = True
    if "dictionary" not in obj:
        raise InputError("experiment needs --dict (or a config with 'dictionary')")
    try:
        cfg = ExperimentConfig.from_dict(obj)
        D = parse_dict_source(cfg.dictionary)
        result = run_experiment(cfg, D)
    except (OSError, TypeError, ValueError, WeightedCSError) as exc:
        raise InputError(f"invalid experiment: {exc}") from None
    text = to_json(result, cfg) if args.format == "json" else to_csv(result)
    summary = json.dumps(result["summary"])
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    return EXIT_NUMERIC if result["summary"]["violations"] else 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dict", help="dictionary JSON path or gen:NAME:key=value,...")
    common.add_argument("--s", type=_ints, help="sparsity level(s), comma-separated")
    common.add_argument("--eta", type=_floats, help="constraint radius (grid for experiment)")
    common.add_argument("--eps", type=_floats, help="noise level (grid for experiment)")
    common.add_argument("--e0", type=float, default=0.0, help="tail term for bounds")
    common.add_argument("--mu", type=float, help="coherence for bounds")
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--format", choices=["csv", "json", "text"], default=None)

    parser = argparse.ArgumentParser(prog="weightedcs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coherence", parents=[common], help="coherence and Welch bound")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("bounds", parents=[common], help="evaluate recovery constants")
    p.set_defaults(func=cmd_bounds)

    for name, func, helptext in (("omp", cmd_omp, "orthogonal matching pursuit"),
                                 ("solve", cmd_solve, "weighted l1 recovery")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--y", type=_floats, help="signal, comma-separated")
        p.add_argument("--y-file", help="signal as a JSON array")
        p.set_defaults(func=func)
        if name == "omp":
            p.add_argument("--max-atoms", type=int)
            p.add_argument("--tol", type=float, help="absolute residual tolerance")
        else:
            p.add_argument("--config", help="solver config JSON")

    p = sub.add_parser("experiment", parents=[common], help="randomized bound verification")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--rescale", action="store_true", help="rescale atoms randomly per trial")
    p.add_argument("--tail", type=float, help="amplitude of the dense tail added to c")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "experiment" else "text"
    if args.command == "experiment" and args.format == "text":
        args.format = "csv"
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
