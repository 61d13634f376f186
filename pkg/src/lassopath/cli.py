"""Command-line entry point: ``lassopath <subcommand> ...``.

Exit status is 0 on success, 1 when a checked property fails, 2 on usage
errors.  Results go to standard output unless ``--out`` (or the
``LASSOPATH_OUT`` environment variable) names a directory.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .bounds import BoundViolation, instance_bound_report
from .harness import experiments as ex
from .harness.idx import load_idx_images
from .harness.records import OUT_ENV, load_instance, path_to_record, save_json
from .homotopy import solve_path
from .instances import SmoothingSpec, VarianceMode, gen_adversarial, gen_gaussian, smooth
from .precision import Precision, to_float

MNIST_ENV = "LASSOPATH_MNIST"


class UsageError(Exception):
    pass


def _int_list(text):
    return [int(t) for t in text.replace(",", " ").split()]


def _k_list(text):
    out = []
    for t in text.replace(",", " ").split():
        out.append(math.inf if t.lower() in ("inf", "infinity", "oo") else float(t))
    return out


def _flatten(values):
    return [v for group in values for v in group]


def _common(p):
    p.add_argument("--precision", choices=["standard", "extended"], default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--out", type=Path, default=None,
                   help=f"output directory (default: ${OUT_ENV} if set, else standard output)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--workers", type=int, default=1)


def _instance_args(p):
    p.add_argument("--instance", type=Path, help="instance record (JSON) to load")
    p.add_argument("--generator", choices=["adversarial", "gaussian"], default="adversarial")
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--variance-mode", choices=[m.value for m in VarianceMode], default="per-entry")


def build_parser():
    parser = argparse.ArgumentParser(prog="lassopath", description="Exact Lasso regularization paths.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("path", help="solve one instance and list its segments")
    _common(p)
    _instance_args(p)

    p = sub.add_parser("table1", help="worst-case smoothing table")
    _common(p)
    p.add_argument("--dims", type=_int_list, nargs="+", default=[[4, 5, 6, 7, 8]])
    p.add_argument("--sigmas", type=_k_list, nargs="+", default=[[0, 2, 4, 6, 8, 10, math.inf]],
                   help="values of -log10(sigma); 'inf' for the unsmoothed instance")
    p.add_argument("--renormalize-y", action="store_true", help="rescale y to unit norm after smoothing")

    p = sub.add_parser("mnist", help="MNIST patch-regression complexity")
    _common(p)
    p.add_argument("--images", type=Path, default=None, help=f"IDX image file (default: ${MNIST_ENV})")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--patch-sizes", type=_int_list, nargs="+", default=[[3, 5, 7, 9]])

    p = sub.add_parser("bounds", help="Lipschitz constants, singular values, gamma_s and bound formulas")
    _common(p)
    _instance_args(p)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--s", type=_int_list, nargs="+", default=[[2]])

    p = sub.add_parser("oracle-check", help="homotopy versus sign-pattern enumeration")
    _common(p)
    p.add_argument("--d", type=_int_list, nargs="+", default=[[2, 3, 4, 5]])
    p.add_argument("--extra-rows", type=int, default=3)
    return parser


def _out_dir(args):
    if args.out is not None:
        return args.out
    env = os.environ.get(OUT_ENV)
    return Path(env) if env else None


def _emit(args, name, csv_text, payload, plot_script=None):
    out = _out_dir(args)
    if out is None:
        sys.stdout.write(csv_text if args.format == "csv" else json.dumps(payload, indent=1, sort_keys=True) + "\n")
        return
    out.mkdir(parents=True, exist_ok=True)
    if csv_text is not None:
        (out / f"{name}.csv").write_text(csv_text)
    save_json(payload, out / f"{name}.json")
    if plot_script:
        (out / f"plot_{name}.py").write_text(plot_script)
    print(f"wrote {out / name}.*", file=sys.stderr)


def _make_instance(args, prec):
    if args.instance is not None:
        inst = load_instance(args.instance)
    elif args.generator == "adversarial":
        inst = gen_adversarial(args.d, precision=prec)
    else:
        inst = gen_gaussian(args.n or args.d, args.d, args.seed)
    inst = inst.astype(prec)
    if args.sigma:
        inst = smooth(inst, SmoothingSpec(args.sigma, VarianceMode(args.variance_mode), args.seed))
    return inst


def _cmd_path(args):
    prec = Precision.parse(args.precision or "extended")
    inst = _make_instance(args, prec)
    path = solve_path(inst, prec)
    lines = ["segment,lambda_hi,lambda_lo,signs"]
    for i, seg in enumerate(path.segments):
        signs = "".join("+" if s > 0 else "-" if s < 0 else "0" for s in seg.sign_vector)
        lines.append(f"{i},{to_float(seg.lambda_hi)!r},{to_float(seg.lambda_lo)!r},{signs}")
    _emit(args, "path", "\n".join(lines) + "\n", path_to_record(path))
    return 0 if path.diagnostics.get("kkt_passed", True) else 1


def _cmd_table1(args):
    prec = Precision.parse(args.precision or "extended")
    res = ex.run_table1(_flatten(args.dims), _flatten(args.sigmas), trials=args.trials or 100, seed=args.seed,
                        precision=prec, workers=args.workers, renormalize=args.renormalize_y)
    _emit(args, "table1", res.to_csv(), res.to_json(), ex.TABLE1_PLOT_SCRIPT)
    return 0


def _cmd_mnist(args):
    src = args.images or os.environ.get(MNIST_ENV)
    if not src:
        raise UsageError(f"mnist needs --images or ${MNIST_ENV}")
    ds = load_idx_images(src)
    prec = Precision.parse(args.precision or "standard")
    res = ex.run_mnist(ds, n=args.n, patch_sizes=_flatten(args.patch_sizes), trials=args.trials or 100,
                       seed=args.seed, precision=prec, workers=args.workers)
    _emit(args, "mnist", res.to_csv(), res.to_json(), ex.MNIST_PLOT_SCRIPT)
    return 0


def _cmd_bounds(args):
    prec = Precision.parse(args.precision or "standard")
    inst = _make_instance(args, prec)
    try:
        report = instance_bound_report(inst, delta=args.delta, s_list=_flatten(args.s), seed=args.seed)
    except BoundViolation as exc:
        print(f"deterministic bound violated: {exc}", file=sys.stderr)
        return 1
    data = report.to_dict()
    rows = ["quantity,value"] + [f"{k},{v}" for k, v in data.items() if not isinstance(v, dict)]
    rows += [f"{k}[s={s}],{v}" for k, d in data.items() if isinstance(d, dict) for s, v in d.items()]
    _emit(args, "bounds", "\n".join(rows) + "\n", data)
    return 0


def _cmd_oracle(args):
    prec = Precision.parse(args.precision or "standard")
    recs = ex.oracle_check(_flatten(args.d), trials=args.trials or 100, seed=args.seed,
                           extra_rows=args.extra_rows, precision=prec, workers=args.workers)
    lines = ["trial,d,n,match,homotopy_count,oracle_count,max_breakpoint_rel_diff"]
    for r in recs:
        lines.append(f"{r['trial']},{r['d']},{r['n']},{int(r['match'])},{r.get('homotopy_count', '')},"
                     f"{r.get('oracle_count', '')},{r.get('max_breakpoint_rel_diff', '')}")
    _emit(args, "oracle_check", "\n".join(lines) + "\n", {"experiment": "oracle-check", "trials": recs})
    failed = sum(not r["match"] for r in recs)
    print(f"oracle-check: {len(recs) - failed}/{len(recs)} identical", file=sys.stderr)
    return 0 if failed == 0 else 1


COMMANDS = {"path": _cmd_path, "table1": _cmd_table1, "mnist": _cmd_mnist, "bounds": _cmd_bounds,
            "oracle-check": _cmd_oracle}


def cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, FileNotFoundError) as exc:
        print(f"lassopath {args.command}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli())
