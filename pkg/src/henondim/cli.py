"""Command-line entry point.

Usage::

    henondim <subcommand> CONFIG [flags]

Subcommands: ``orbits``, ``pressure``, ``dims``, ``maxdim``,
``oracle-selftest``, ``sweep``, ``submean``.  Data go to standard output (or
``-o FILE``), logs to standard error.  Exit status is 0 on success, 2 on a
configuration error and 3 on a numerical failure.

Flags override the matching config field; the cache directory is resolved as
``--cache-dir`` > ``$HENONDIM_CACHE_DIR`` > ``cache_dir`` in the config.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import config, dimension, oracle, pressure, sweep
from .errors import ConfigError, HenonDimError

log = logging.getLogger("henondim")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class _ArgumentParser(argparse.ArgumentParser):
    # usage errors are configuration errors, not argparse's default exit 2 + help
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write data here instead of standard output")
    common.add_argument("--n-max", type=int, help="maximal orbit period (config: n_max)")
    common.add_argument("--t-min", type=float, help="first grid point (config: t_grid[0])")
    common.add_argument("--t-max", type=float, help="last grid point (config: t_grid[1])")
    common.add_argument("--t-step", type=float, help="grid step (config: t_grid[2])")
    common.add_argument("--tol", type=float, help="root/maximizer tolerance (config: tol)")
    common.add_argument("--cache-dir", help=f"orbit cache directory (env: {config.CACHE_ENV}; config: cache_dir)")
    common.add_argument("--jobs", type=int, help="worker processes, 0 = auto (config: jobs)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")

    parser = _ArgumentParser(prog="henondim", description="Dimension estimates for complex Hénon maps.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("orbits", parents=[common], help="build or refresh the orbit cache")
    p.add_argument("config")
    p.add_argument("--refresh", action="store_true", help="rebuild even if a cache file exists")

    for name, text in (
        ("pressure", "emit the pressure curve as CSV"),
        ("dims", "emit the dimension report"),
        ("maxdim", "report maximizers and the critical-point residual"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("config")
        p.add_argument("--pipeline", action="store_true",
                       help="for a linear model, go through a synthetic orbit library instead of closed forms")

    p = sub.add_parser("oracle-selftest", parents=[common], help="run the oracle equivalence suite")
    p.add_argument("config", nargs="?", help="optional config whose linear_model is checked too")

    p = sub.add_parser("sweep", parents=[common], help="emit the atlas CSV for the config's sweep family")
    p.add_argument("config")
    p = sub.add_parser("submean", parents=[common], help="sub-mean-value check on a circle family")
    p.add_argument("config")
    return parser


def apply_flags(cfg: config.RunConfig, args) -> config.RunConfig:
    """Override config fields with any flags given on the command line."""
    if args.n_max is not None:
        cfg.n_max = args.n_max
    lo, hi, step = cfg.t_grid
    cfg.t_grid = (
        lo if args.t_min is None else args.t_min,
        hi if args.t_max is None else args.t_max,
        step if args.t_step is None else args.t_step,
    )
    if args.tol is not None:
        cfg.tol = args.tol
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if cfg.jobs < 0:
        raise ConfigError("jobs must be >= 0")
    if cfg.tol <= 0:
        raise ConfigError("tol must be > 0")
    cfg.cache_dir = config.resolve_cache_dir(args.cache_dir, cfg)
    return cfg.validate()


def _jobs(cfg):
    return cfg.jobs if cfg.jobs > 0 else (os.cpu_count() or 1)


def _library(cfg, refresh=False):
    return sweep.library_for(cfg.source, cfg.n_max, cfg.cache_dir, _jobs(cfg), refresh)


def _report(cfg, pipeline):
    if cfg.linear_model is not None and not pipeline:
        return oracle.exact_report(cfg.linear_model)
    return dimension.dimension_report(_library(cfg), cfg.n_max, cfg.tol)


def cmd_orbits(cfg, args) -> str:
    lib = _library(cfg, refresh=args.refresh)
    lines = ["period,primitive_orbits,fixed_points,expected,complete"]
    for n in range(1, lib.n_max + 1):
        lines.append(
            f"{n},{len(lib.orbits.get(n, []))},{lib.fixed_point_count(n)},"
            f"{lib.degree**n},{int(lib.is_complete(n))}"
        )
    return "\n".join(lines) + "\n"


def cmd_pressure(cfg, args) -> str:
    grid = pressure.t_grid(*cfg.t_grid)
    t_cap = max(4.0, grid[-1])
    if cfg.linear_model is not None and not args.pipeline:
        curve = pressure.build_curve(cfg.linear_model, grid, t_cap=t_cap)
    else:
        curve = pressure.build_curve(_library(cfg), grid, cfg.n_max, t_cap=t_cap)
    return curve.to_csv()


def cmd_dims(cfg, args) -> str:
    return _report(cfg, args.pipeline).to_text()


def cmd_maxdim(cfg, args) -> str:
    rep = _report(cfg, args.pipeline)
    f = pressure.format_number
    lines = ["t_star,Delta,t_s,t_u,formula_residual"]
    for t, d in rep.maximizers:
        lines.append(",".join(f(x) for x in (t, d, rep.t_s, rep.t_u, rep.formula_residual)))
    return "\n".join(lines) + "\n"


def cmd_oracle_selftest(cfg, args):
    models = dict(oracle.REFERENCE_MODELS)
    if cfg is not None and cfg.linear_model is not None:
        models["config"] = cfg.linear_model
    n_max = cfg.n_max if cfg is not None else 10
    tol = cfg.tol if cfg is not None else 1e-9
    results = oracle.selftest(models, n_max, tol)
    lines = [f"{'pass' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results]
    failed = sum(not ok for _, ok, _ in results)
    lines.append("all-oracle-checks-passed" if not failed else f"oracle-checks-failed ({failed})")
    return "\n".join(lines) + "\n", failed == 0


def _family(cfg):
    if cfg.family is None:
        raise ConfigError("this subcommand needs a 'sweep' section in the config")
    try:
        cfg.family.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg.family


def cmd_sweep(cfg, args) -> str:
    result = sweep.sweep(_family(cfg), cfg.n_max, cfg.tol, _jobs(cfg), cfg.cache_dir)
    log.info("continuity=%s", pressure.format_number(result.continuity))
    return result.to_csv()


def cmd_submean(cfg, args) -> str:
    family = _family(cfg)
    if not isinstance(family.samples, sweep.Circle) or family.samples.count < 8:
        raise ConfigError("submean needs a 'circle' sweep with count >= 8")
    return sweep.submean_check(family, cfg.n_max, cfg.tol, _jobs(cfg), cfg.cache_dir).to_text()


COMMANDS = {
    "orbits": cmd_orbits,
    "pressure": cmd_pressure,
    "dims": cmd_dims,
    "maxdim": cmd_maxdim,
    "sweep": cmd_sweep,
    "submean": cmd_submean,
}


def _emit(text, output):
    if output:
        tmp = output + ".tmp"
        with open(tmp, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, output)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"henondim: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        return _dispatch(args)
    finally:
        log.removeHandler(handler)


def _dispatch(args) -> int:
    try:
        cfg = None
        if args.config is not None:
            cfg = apply_flags(config.load_config(args.config), args)
        ok = True
        if args.command == "oracle-selftest":
            text, ok = cmd_oracle_selftest(cfg, args)
        else:
            text = COMMANDS[args.command](cfg, args)
        _emit(text, args.output)
    except ConfigError as exc:
        print(f"henondim: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"henondim: [config] {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HenonDimError as exc:
        print(f"henondim: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if not ok:
        print("henondim: [oracle] self-test failed", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
