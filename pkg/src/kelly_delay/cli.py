"""Command-line entry point (``kelly-delay`` / ``python -m kelly_delay``).

Exit codes: 0 on success, 1 on invalid input, 2 when the maximality check fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments as ex
from .dynamics import ConfigError, Delay, Financing, Strategy, TradeConfig, admissible_interval
from .elg import (
    elg_closed_form_bh_delay,
    elg_exact,
    elg_monte_carlo,
    evaluator_for,
)
from .optimize import curve_to_csv, maximize
from .returns import BinaryLattice, EnumerationCapError, ModelError, load_model
from .ticks import TickFormatError

EXIT_OK, EXIT_INVALID, EXIT_CHECK_FAILED = 0, 1, 2

_DELAY = {"none": Delay.NONE, "one-step": Delay.ONE_STEP}
_FINANCING = {"self": Financing.SELF_FINANCED, "leveraged": Financing.LEVERAGED}
_STRATEGY = {"hf": Strategy.HIGH_FREQUENCY, "bh": Strategy.BUY_AND_HOLD}


def _common(p: argparse.ArgumentParser, n=None, paths=None, delay="one-step"):
    p.add_argument("--model-file", help="lattice (key = value) or return,weight table")
    p.add_argument("--lattice", nargs=3, type=float, metavar=("X_MAX", "X_MIN", "P"))
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--delay", choices=list(_DELAY), default=delay)
    p.add_argument("--financing", choices=list(_FINANCING), default="self")
    p.add_argument("--paths", type=int, default=paths)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir")
    p.add_argument("--workers", type=int, default=1)


def _model(args, default=None):
    if args.model_file:
        return load_model(args.model_file)
    if args.lattice:
        return BinaryLattice(*args.lattice)
    if default is None:
        raise ModelError("a model is required: pass --model-file or --lattice")
    return default


class _Parser(argparse.ArgumentParser):
    """Usage errors are validation failures; exit status 2 is reserved for failed maximality checks."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kelly-delay", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("toy3", help="three-stage delayed example, exact")
    _common(p)

    p = sub.add_parser("lattice100", help="n=100 lattice: closed-form B&H vs Monte-Carlo HF")
    _common(p, n=100, paths=500_000)
    p.add_argument("--grid-points", type=int, default=51)

    p = sub.add_parser("sweep-p", help="margin of victory versus p")
    _common(p, n=100, paths=100_000)
    p.add_argument("--p-grid", type=float, nargs="+")
    p.add_argument("--exact", action="store_true", help="enumerate instead of Monte-Carlo")
    p.add_argument("--grid-points", type=int, default=21)

    p = sub.add_parser("verify-maximality", help="check g_m* <= g_1* without delay")
    _common(p, n=8, delay="none")
    p.add_argument("--grid-points", type=int, default=201)
    p.add_argument("--random", type=int, default=0, help="also check this many random lattices")

    p = sub.add_parser("tickdata", help="empirical-PMF comparison from a tick file")
    _common(p, n=100, paths=50_000)
    p.add_argument("file")
    p.add_argument("--delta-t", type=float, default=1.0)
    p.add_argument("--grid-points", type=int, default=21)

    p = sub.add_parser("elg", help="evaluate g(K) for one configuration")
    _common(p, n=100)
    p.add_argument("--strategy", choices=list(_STRATEGY), required=True)
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--method", choices=["auto", "exact", "closed-form", "monte-carlo"], default="auto")
    p.add_argument("--V0", type=float, default=1.0)

    p = sub.add_parser("optimize", help="maximise g(K) over the admissible interval")
    _common(p, n=100)
    p.add_argument("--strategy", choices=list(_STRATEGY), required=True)
    p.add_argument("--grid-points", type=int, default=101)
    return parser


def _emit(report: dict):
    print(ex.dumps_report(report), end="")


def _run(args) -> int:
    cmd = args.command
    if cmd == "toy3":
        _emit(ex.cmd_toy3(args.out_dir))
    elif cmd == "lattice100":
        _emit(ex.cmd_lattice100(args.paths, args.seed, args.out_dir, args.grid_points,
                                workers=args.workers, n=args.n))
    elif cmd == "sweep-p":
        m = _model(args, default=ex.LATTICE100_MODEL)
        _emit(ex.cmd_sweep_p(args.p_grid, args.n, None if args.exact else args.paths, args.seed,
                             args.out_dir, _FINANCING[args.financing], _DELAY[args.delay],
                             m.x_max, m.x_min, args.grid_points, args.workers))
    elif cmd == "verify-maximality":
        if args.delay != "none":
            raise ConfigError("verify-maximality applies to the no-delay setting only")
        model = _model(args) if (args.model_file or args.lattice) else None
        if model is None and args.random == 0:
            model = ex.LATTICE100_MODEL
        report = ex.cmd_verify_maximality(model, args.n, args.grid_points, args.random, args.seed,
                                          args.out_dir)
        _emit(report)
        return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED
    elif cmd == "tickdata":
        _emit(ex.cmd_tickdata(args.file, args.delta_t, args.n, args.paths, args.seed, args.out_dir,
                              args.grid_points, args.workers))
    elif cmd == "elg":
        model = _model(args)
        cfg = TradeConfig(_STRATEGY[args.strategy], _DELAY[args.delay], args.K, args.n, args.V0,
                          _FINANCING[args.financing])
        cfg.validate_for(model)
        seed = args.seed if args.seed is not None else 0
        if args.method == "exact":
            est = elg_exact(model, cfg)
        elif args.method == "closed-form":
            if cfg.strategy is not Strategy.BUY_AND_HOLD or cfg.delay is not Delay.ONE_STEP:
                raise ConfigError("the closed form covers delayed buy-and-hold only")
            est = elg_closed_form_bh_delay(model, cfg.n, cfg.K)
        elif args.method == "monte-carlo":
            est = elg_monte_carlo(model, cfg, args.paths or 100_000, seed, args.workers)
        else:
            est = evaluator_for(model, cfg, args.paths, seed, args.workers)(cfg.K)
        _emit({"config": {"model": str(model), "strategy": cfg.strategy.value, "delay": cfg.delay.value,
                          "financing": cfg.financing.value, "K": cfg.K, "n": cfg.n, "seed": seed},
               "value": est.value, "method": est.method, "std_error": est.std_error,
               "num_paths": est.num_paths, "ruined": est.ruined})
    elif cmd == "optimize":
        model = _model(args)
        cfg = TradeConfig(_STRATEGY[args.strategy], _DELAY[args.delay], 0.0, args.n,
                          financing=_FINANCING[args.financing])
        seed = args.seed if args.seed is not None else 0
        ev = evaluator_for(model, cfg, args.paths, seed, args.workers)
        res = maximize(ev, admissible_interval(model, cfg.delay, cfg.financing), args.grid_points)
        if args.out_dir:
            Path(args.out_dir).mkdir(parents=True, exist_ok=True)
            Path(args.out_dir, f"optimize_{args.strategy}.csv").write_text(curve_to_csv(res.curve))
        _emit({"config": {"model": str(model), "strategy": cfg.strategy.value, "delay": cfg.delay.value,
                          "financing": cfg.financing.value, "n": cfg.n, "paths": args.paths, "seed": seed},
               "k_star": res.k_star, "g_star": res.g_star, "at_boundary": res.at_boundary,
               "std_error": res.std_error})
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (ModelError, ConfigError, TickFormatError, EnumerationCapError, FileNotFoundError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
