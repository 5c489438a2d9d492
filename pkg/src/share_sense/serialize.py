"""JSON instance/solution formats and CSV emitters.

Instance files look like

    {"p": 2, "n0": 2, "b": [20000, 30],
     "agents": [{"c": [-31.5], "d": [120.0], "A": [[1.0], [0.0002]]}, ...]}

with upper limits given as numbers or the string "inf". Solution dumps carry
the primal vector, objective, partition index sets, flags, and optionally the
dual certificate.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .cargo import CargoConfig, TrialRecord, TruncatedGaussianDemand, UniformDemand
from .duality import DualCertificate
from .lp_core import AgentProfile, PrimalSolution, SharingProblem
from .sensitivity import EpsilonTable

__all__ = [
    "load_cargo_config",
    "load_instance",
    "problem_to_dict",
    "solution_to_dict",
    "write_epsilon_csv",
    "write_trials_csv",
]


def _limit_from_json(v) -> float:
    if isinstance(v, str):
        if v.lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise ValueError(f"unrecognized upper-limit string {v!r}")
    return float(v)


def _limit_to_json(v: float):
    return "inf" if math.isinf(v) else float(v)


def load_instance(source) -> SharingProblem:
    """Read a sharing problem from a path, file object, or parsed dict."""
    if isinstance(source, dict):
        data = source
    elif hasattr(source, "read"):
        data = json.load(source)
    else:
        data = json.loads(Path(source).read_text())
    agents = []
    for i, raw in enumerate(data["agents"]):
        c = raw["c"]
        agents.append(
            AgentProfile(
                n=len(c),
                c=c,
                d=[_limit_from_json(v) for v in raw["d"]],
                A=raw["A"],
            )
        )
    return SharingProblem(p=data["p"], n0=data["n0"], b=data["b"], agents=tuple(agents))


def problem_to_dict(problem: SharingProblem) -> dict:
    return {
        "p": problem.p,
        "n0": problem.n0,
        "b": [float(v) for v in problem.b],
        "agents": [
            {
                "c": [float(v) for v in ag.c],
                "d": [_limit_to_json(v) for v in ag.d],
                "A": [[float(v) for v in row] for row in ag.A],
            }
            for ag in problem.agents
        ],
    }


def solution_to_dict(
    solution: PrimalSolution, dual: DualCertificate | None = None
) -> dict:
    out = {
        "x": [float(v) for v in solution.x],
        "objective": solution.objective,
        "basic": list(solution.partition.basic),
        "at_lower": list(solution.partition.at_lower),
        "at_upper": list(solution.partition.at_upper),
        "degenerate": solution.degenerate,
        "nonunique": solution.nonunique,
    }
    if dual is not None:
        out["dual"] = {
            "lambda": [float(v) for v in dual.lam],
            "nu": [float(v) for v in dual.nu],
            "h": [float(v) for v in dual.h],
        }
    return out


def load_cargo_config(source) -> CargoConfig:
    """Read a campaign config from a path, file object, or parsed dict."""
    if isinstance(source, dict):
        data = dict(source)
    elif hasattr(source, "read"):
        data = json.load(source)
    else:
        data = json.loads(Path(source).read_text())
    dist = data.pop("demand")
    kind = dist.get("kind", "uniform")
    if kind == "uniform":
        demand = UniformDemand(d_min=dist["d_min"], d_max=dist["d_max"])
    elif kind in ("truncated_gaussian", "gaussian"):
        demand = TruncatedGaussianDemand(mu=dist["mu"], sigma2=dist["sigma2"])
    else:
        raise ValueError(f"unknown demand kind {kind!r}")
    known = {
        "m",
        "W",
        "V",
        "trials",
        "arrivals",
        "beta",
        "p_min",
        "p_max",
        "rho_min",
        "rho_max",
        "seed",
    }
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return CargoConfig(demand=demand, **data)


def write_epsilon_csv(table: EpsilonTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "t_low", "t_high", "eps_low", "eps_high", "eps_explicit"])
        for row in table.rows():
            writer.writerow([row[0]] + [repr(v) for v in row[1:]])


def write_trials_csv(records: list[TrialRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "trial_index",
                "s_star",
                "p_hat",
                "eps_low",
                "eps_high",
                "tie_count",
                "degenerate",
                "nonunique",
            ]
        )
        for r in records:
            writer.writerow(
                [
                    r.trial_index,
                    r.s_star,
                    repr(r.p_hat),
                    repr(r.eps_low),
                    repr(r.eps_high),
                    r.tie_count,
                    int(r.degenerate),
                    int(r.nonunique),
                ]
            )
