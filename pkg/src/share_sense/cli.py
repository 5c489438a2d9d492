"""Command-line front end.

Subcommands: ``solve`` (optimal allocation for an instance file),
``sensitivity`` (allocation plus the change-probability interval), ``bounds``
(the full interval table as CSV), and ``simulate`` (cargo campaign into an
output directory). Errors leave a machine-readable JSON object on stderr and a
nonzero exit code.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .cargo import run_campaign
from .duality import closed_form_certificate
from .errors import ShareSenseError
from .lp_core import assemble, solve_primal
from .sensitivity import epsilon_table, sensitivity_interval
from .serialize import (
    load_cargo_config,
    load_instance,
    solution_to_dict,
    write_epsilon_csv,
    write_trials_csv,
)


def _cmd_solve(args) -> int:
    problem = load_instance(args.instance)
    lp = assemble(problem)
    solution = solve_primal(lp)
    dual = closed_form_certificate(lp, solution) if solution.clean else None
    payload = solution_to_dict(solution, dual)
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def _cmd_sensitivity(args) -> int:
    problem = load_instance(args.instance)
    lp = assemble(problem)
    solution = solve_primal(lp)
    table = epsilon_table(problem.m, args.beta)
    eps_low, eps_high, s_star = sensitivity_interval(solution, table)
    print(
        json.dumps(
            {
                "m": problem.m,
                "beta": args.beta,
                "s_star": s_star,
                "eps_low": eps_low,
                "eps_high": eps_high,
                "objective": solution.objective,
                "degenerate": solution.degenerate,
                "nonunique": solution.nonunique,
            },
            indent=2,
        )
    )
    return 0


def _cmd_bounds(args) -> int:
    table = epsilon_table(args.m, args.beta)
    if args.out:
        write_epsilon_csv(table, args.out)
    else:
        print("k,t_low,t_high,eps_low,eps_high,eps_explicit")
        for row in table.rows():
            print(",".join([str(row[0])] + [repr(v) for v in row[1:]]))
    return 0


def _cmd_simulate(args) -> int:
    config = load_cargo_config(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = epsilon_table(config.m, config.beta)
    records, summary = run_campaign(config, table)
    write_trials_csv(records, out_dir / "trials.csv")
    write_epsilon_csv(table, out_dir / "epsilon.csv")
    payload = {
        "config": {
            **{
                k: v
                for k, v in dataclasses.asdict(config).items()
                if k != "demand"
            },
            "demand": dataclasses.asdict(config.demand),
            "arrivals_resolved": config.n_arrivals,
        },
        "summary": dataclasses.asdict(summary),
        "all_covered": summary.all_covered,
    }
    (out_dir / "summary.json").write_text(json.dumps(payload, indent=2) + "\n")
    print(json.dumps(payload["summary"], indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="share-sense",
        description="Resource-sharing LPs and the probability that a new agent changes the optimum.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve an instance file")
    p_solve.add_argument("--instance", required=True)
    p_solve.add_argument("--out", help="write the solution JSON here instead of stdout")
    p_solve.set_defaults(func=_cmd_solve)

    p_sens = sub.add_parser(
        "sensitivity", help="solve and report the change-probability interval"
    )
    p_sens.add_argument("--instance", required=True)
    p_sens.add_argument("--beta", type=float, default=1e-7)
    p_sens.set_defaults(func=_cmd_sensitivity)

    p_bounds = sub.add_parser("bounds", help="emit the interval table as CSV")
    p_bounds.add_argument("--m", type=int, required=True)
    p_bounds.add_argument("--beta", type=float, required=True)
    p_bounds.add_argument("--out", help="CSV path (stdout when omitted)")
    p_bounds.set_defaults(func=_cmd_bounds)

    p_sim = sub.add_parser("simulate", help="run a cargo campaign")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out-dir", required=True)
    p_sim.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ShareSenseError as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1
    except Exception as exc:  # noqa: BLE001 - the CLI contract is JSON on stderr
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
