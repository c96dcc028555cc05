"""Command line interface: ``torus-translates {kernel,approx,grid,convergence}``.

Exit codes: 0 on success, 2 on a configuration error, 3 on a numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import multivariate as mv
from .experiments import (
    ConfigError,
    NumericFailure,
    build_symbol,
    emit,
    gen_g,
    load_config,
    parse_symbol_text,
    run_multivariate,
    run_univariate,
    to_csv,
    to_json,
)
from .spectral import dumps
from .symbols import make_theta
from .univariate import HLambdaFunction, assemble_Q, build_Hm, dumps_approximant

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _kernel(args) -> str:
    lam = build_symbol(parse_symbol_text(args.lam))
    beta = lam if args.beta is None else build_symbol(parse_symbol_text(args.beta))
    if args.m < 1:
        raise ConfigError("m must be positive")
    return dumps(build_Hm(lam, beta, make_theta(), args.m))


def _approx(args) -> str:
    cfg = load_config(args.config)
    m = cfg.m_list[0]
    theta = make_theta()
    g = gen_g(cfg.g_spec, cfg.d, cfg.p, cfg.m_list)
    if cfg.d == 1:
        tail_tol = float(cfg.tolerances.get("tail_tol", 1e-10))
        A = assemble_Q(HLambdaFunction(g, cfg.lam_symbol), cfg.beta_symbol, theta, m, tail_tol=tail_tol)
        return dumps_approximant(A)
    if cfg.beta is not None and cfg.beta != cfg.lam:
        raise ConfigError("the multivariate operator uses beta = lambda")
    weights = mv.translate_representation(g, cfg.lam_symbol, theta, m)
    return mv.dumps_grid(mv.smolyak_grid(cfg.d, m), weights)


def _grid(args) -> str:
    if args.d < 1 or args.m < 0:
        raise ConfigError("need d >= 1 and m >= 0")
    return mv.dumps_grid(mv.smolyak_grid(args.d, args.m))


def _convergence(args) -> str:
    cfg = load_config(args.config)
    result = run_multivariate(cfg) if args.multivariate else run_univariate(cfg)
    if cfg.output:
        emit(result, Path(cfg.output).with_suffix(".csv"), "csv")
        emit(result, Path(cfg.output).with_suffix(".json"), "json")
    return to_json(result) if args.json else to_csv(result)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="torus-translates", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    k = sub.add_parser("kernel", help="dump the coefficients of H_m")
    k.add_argument("--lambda", dest="lam", required=True, help='symbol, e.g. "korobov:r=2"')
    k.add_argument("--beta", default=None, help="symbol for beta (default: lambda)")
    k.add_argument("-m", type=int, required=True)
    k.set_defaults(func=_kernel)

    a = sub.add_parser("approx", help="run Q (d = 1) or P_m (d > 1) for the first m")
    a.add_argument("--config", required=True)
    a.set_defaults(func=_approx)

    g = sub.add_parser("grid", help="dump the Smolyak grid G^d(m)")
    g.add_argument("-d", type=int, required=True)
    g.add_argument("-m", type=int, required=True)
    g.set_defaults(func=_grid)

    c = sub.add_parser("convergence", help="error sweep over m_list with a rate fit")
    c.add_argument("--config", required=True)
    c.add_argument("--multivariate", action="store_true")
    c.add_argument("--json", action="store_true", help="print JSON instead of CSV")
    c.set_defaults(func=_convergence)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericFailure, ArithmeticError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
