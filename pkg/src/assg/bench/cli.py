"""assg-bench: run, validate and compare seeded solver experiments."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from ..errors import AssgError, ConfigurationError, ParseError
from .compare import compare, format_report
from .config import load_config
from .runner import assg_config, build_objective, run_experiment, schedule_for

OUT_ENV = "ASSG_BENCH_OUT"
EXIT_OK, EXIT_SCHEMA, EXIT_SOLVER = 0, 2, 3

log = logging.getLogger("assg.bench")


def _load(args):
    cfg = load_config(args.config)
    if args.desk_scale_factor is not None:
        cfg = cfg.model_copy(update={"desk_scale_factor": args.desk_scale_factor})
    return cfg


def bound_warnings(cfg):
    """Region sizes given explicitly but below what the LEB constant requires."""
    out = []
    for s in cfg.solvers:
        if s.c is None or s.name == "ssg":
            continue
        eps0 = s.eps0
        if eps0 is None:
            continue
        if s.D1 is not None:
            need = s.c * eps0 / s.eps ** (1 - s.theta)
            if s.D1 < need:
                out.append(f"{s.run_label}: D1={s.D1:g} is below the bound "
                           f"D1 >= c*eps0/eps^(1-theta) = {need:g}")
        if s.beta1 is not None:
            need = 2 * s.c**2 * eps0 / s.eps ** (2 * (1 - s.theta))
            if s.beta1 < need:
                out.append(f"{s.run_label}: beta1={s.beta1:g} is below the bound "
                           f"beta1 >= 2*c^2*eps0/eps^(2(1-theta)) = {need:g}")
    return out


def cmd_validate(args):
    cfg = _load(args)
    obj = build_objective(cfg)
    for s in cfg.solvers:
        if s.name != "ssg":
            assg_config(s, cfg, cfg.seed, None)
        sch = schedule_for(s, cfg, obj)
        keys = [k for k in ("K", "t", "t_k", "t_s", "eta1", "eta", "D1", "D1_s", "D_k",
                            "beta1", "T") if k in sch]
        print(f"{s.run_label}: " + ", ".join(f"{k}={sch[k]}" for k in keys))
    for w in bound_warnings(cfg):
        print(f"warning: {w}")
    return EXIT_OK


def cmd_run(args):
    cfg = _load(args)
    out = args.out or cfg.out or os.environ.get(OUT_ENV)
    if not out:
        raise ConfigurationError(f"no output directory: pass --out, set 'out' or ${OUT_ENV}")
    for w in bound_warnings(cfg):
        log.warning(w)
    result = run_experiment(cfg, out, workers=args.workers, log=log.error)
    print(f"wrote {sum(len(v) for v in result.runs.values())} traces to {result.out_dir}")
    if result.errors:
        for e in result.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_compare(args):
    rep = compare(args.trace_dir, args.a, args.b, other_dir=args.against,
                  n_budgets=args.budgets)
    if args.json:
        print(json.dumps(rep.to_dict(), indent=2))
    else:
        print(format_report(rep))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="assg-bench", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (("run", cmd_run, "run an experiment"),
                               ("validate", cmd_validate, "check a config and print schedules")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", required=True, help="experiment JSON file")
        sp.add_argument("--desk-scale-factor", type=float, default=None,
                        help="override the config's inner-iteration scale factor")
        if name == "run":
            sp.add_argument("--out", help=f"output directory (default: config 'out' or ${OUT_ENV})")
            sp.add_argument("--workers", type=int, default=None, help="parallel replicas")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("compare", help="paired comparison of two solvers")
    sp.add_argument("trace_dir")
    sp.add_argument("a", help="solver label A")
    sp.add_argument("b", help="solver label B")
    sp.add_argument("--against", help="second trace directory holding solver B")
    sp.add_argument("--budgets", type=int, default=10, help="number of matched budgets")
    sp.add_argument("--json", action="store_true", help="print the report as JSON")
    sp.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"{getattr(args, 'config', '')}:{e}", file=sys.stderr)
        return EXIT_SCHEMA
    except ConfigurationError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except AssgError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
