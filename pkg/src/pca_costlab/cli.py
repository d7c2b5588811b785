"""Command-line front end.

    pca-costlab gen   --n 500 --d-dims 20 --rank 3 --out data.mtx
    pca-costlab run   --config exp.cfg --method ssvd --out report.json
    pca-costlab sweep --config exp.cfg --axis D --values 8,16,32,64

Exit status is 0 on success, 1 when running a point fails (the message names
the sweep point) and 2 for usage or config-file errors.
"""

import argparse
import sys

from .errors import InvalidInputError, ParseError
from .harness import (SweepPointError, gen_synthetic, load_config, run_experiment,
                      run_point, write_text)
from .methods import MethodTag, PpcaMode
from .mmio import save_matrix

EXIT_OK, EXIT_METHOD, EXIT_USAGE = 0, 1, 2

_METHODS = [m.value for m in MethodTag]
_MODES = [m.value for m in PpcaMode]


def _common(p):
    p.add_argument("--config", help="key=value experiment file")
    p.add_argument("--method", choices=_METHODS)
    p.add_argument("--n", type=int, help="number of rows N")
    p.add_argument("--d-dims", type=int, dest="d_dims", help="number of columns D")
    p.add_argument("--rank", type=int, help="rank of the synthetic signal")
    p.add_argument("--noise", type=float, help="noise standard deviation")
    p.add_argument("--data", help="load A from a .mtx/.csv file instead")
    p.add_argument("--target-d", type=int, dest="target_d", help="components to keep")
    p.add_argument("--p", type=int, help="SSVD oversampling")
    p.add_argument("--j", type=int, help="SSVD power iterations")
    p.add_argument("--iters", type=int, help="PPCA max EM iterations")
    p.add_argument("--tol", type=float, help="PPCA convergence tolerance")
    p.add_argument("--mode", choices=_MODES, help="PPCA communication mode")
    p.add_argument("--workers", type=int, help="simulated workers P")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="report path (stdout summary only if omitted)")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--allow-large", action="store_true", default=None, dest="allow_large",
                   help="lift the N*D element guardrail")


def build_parser():
    parser = argparse.ArgumentParser(prog="pca-costlab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a synthetic low-rank matrix")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d-dims", type=int, dest="d_dims", required=True)
    gen.add_argument("--rank", type=int, required=True)
    gen.add_argument("--noise", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output path (.mtx or .csv)")

    run = sub.add_parser("run", help="run one configuration and write its cost report")
    _common(run)

    sweep = sub.add_parser("sweep", help="sweep one axis and fit scaling exponents")
    _common(sweep)
    sweep.add_argument("--axis", choices=["N", "D", "d", "P"], dest="sweep_axis")
    sweep.add_argument("--values", dest="sweep_values",
                       help="comma-separated, strictly increasing")
    return parser


_CONFIG_FIELDS = ("method", "n", "d_dims", "rank", "noise", "data", "target_d", "p", "j",
                  "iters", "tol", "mode", "workers", "seed", "out", "format", "allow_large",
                  "sweep_axis", "sweep_values")


def _overrides(args):
    out = {k: getattr(args, k, None) for k in _CONFIG_FIELDS}
    if out.get("sweep_values") is not None:
        try:
            out["sweep_values"] = tuple(int(v) for v in out["sweep_values"].split(","))
        except ValueError:
            raise InvalidInputError(f"bad --values {out['sweep_values']!r}") from None
    return out


def _gen(args):
    A = gen_synthetic(args.n, args.d_dims, args.rank, args.noise, args.seed)
    save_matrix(A, args.out)
    print(f"wrote {A.shape[0]}x{A.shape[1]} matrix to {args.out}")


def _run(args):
    cfg = load_config(args.config, **_overrides(args))
    if cfg.sweep_axis is not None:
        raise InvalidInputError("'run' does not take a sweep; use 'sweep'")
    try:
        result, report, err = run_point(cfg)
    except Exception as exc:
        raise SweepPointError(None, None, exc) from exc
    err_text = "skipped" if err is None else f"{err:.3e}"
    print(f"method={cfg.method} N={report.params_echo['N']} D={report.params_echo['D']} "
          f"P={cfg.workers} d={cfg.target_d}")
    print(f"flops={report.total_flops} intermediate_elements="
          f"{report.total_intermediate_elements} bytes={report.total_intermediate_bytes}")
    print(f"iterations={result.iterations_used} converged={result.converged} "
          f"subspace_err={err_text}")
    if cfg.out:
        write_text(cfg.out, report.to_json() if cfg.format == "json" else report.to_csv())


def _sweep(args):
    cfg = load_config(args.config, **_overrides(args))
    if cfg.sweep_axis is None:
        raise InvalidInputError("no sweep axis given (--axis or sweep_axis in the config)")
    report = run_experiment(cfg, stream=sys.stdout)
    if cfg.out:
        write_text(cfg.out, report.to_json() if cfg.format == "json" else report.to_csv())


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"gen": _gen, "run": _run, "sweep": _sweep}[args.command]
    try:
        handler(args)
    except SweepPointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_METHOD
    except (InvalidInputError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
