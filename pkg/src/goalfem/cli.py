"""Command line interface: run sweeps, list scenarios, verify the build."""

import argparse
import json
import os
import sys

from .errors import ConfigError, GoalFemError
from .harness import emit_report, run_scenario, scenario_from_config
from .scenarios import scenario_registry


def _cmd_list(args):
    for name, s in scenario_registry().items():
        print(
            "%-28s dim=%d base_n=%-3d functional=%-12s enrichment=%s levels=%d"
            % (name, s.dim, s.base_n, s.qoi_kind, s.enrichment, s.levels)
        )
    return 0


def _resolve_scenario(args):
    registry = scenario_registry()
    doc = {}
    if args.scenario in registry:
        doc["scenario"] = args.scenario
    elif os.path.exists(args.scenario):
        with open(args.scenario) as f:
            doc = json.load(f)
    else:
        raise ConfigError(
            "%r is neither a builtin scenario nor a config file" % args.scenario
        )
    if args.levels is not None:
        doc["levels"] = args.levels
    if args.enrichment is not None:
        doc["enrichment"] = args.enrichment
    return scenario_from_config(doc, registry)


def _cmd_run(args):
    scenario = _resolve_scenario(args)
    report = run_scenario(scenario)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "%s.%s" % (scenario.name, args.format))
    emit_report(report, args.format, path)
    for r in report.levels:
        print(
            "level %d  h=%-10.4g true_error=%-13.6g eta1=%-13.6g eta3=%-13.6g"
            % (r.level, r.h, r.estimates.true_error, r.estimates.eta1, r.estimates.eta3)
        )
    print("verdict: %s" % report.verdict)
    print("wrote %s" % path)
    return 0


def _cmd_verify(args):
    from .acceptance import run_all

    results = run_all(out_dir=args.out)
    return 0 if all(r.passed for _, r in results) else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="goalfem",
        description="Goal-oriented error estimator testbed on manufactured problems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario sweep and write a report")
    p_run.add_argument("--scenario", required=True, help="builtin name or JSON config file")
    p_run.add_argument("--levels", type=int, default=None)
    p_run.add_argument("--enrichment", choices=["h", "p"], default=None)
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--format", choices=["csv", "json"], default="csv")
    p_run.set_defaults(func=_cmd_run)

    p_list = sub.add_parser("list", help="print the builtin scenarios")
    p_list.set_defaults(func=_cmd_list)

    p_verify = sub.add_parser("verify", help="run the acceptance battery")
    p_verify.add_argument("--out", default=None, help="directory for per-scenario reports")
    p_verify.set_defaults(func=_cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GoalFemError as err:
        print("error: %s" % err, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
