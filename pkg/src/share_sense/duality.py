"""Dual certificates for the resource-sharing LP, recovered three ways.

* closed form from the optimal basis (unique at non-degenerate optima),
* the full dual with one multiplier per upper limit,
* the relaxation-form dual where only the budget rows are dualized and each
  agent contributes a scalar relaxation value.

Both explicit duals are transcribed to the bounded standard form and solved by
the same simplex as the primal: one pivoting code path, tested once. Equality
budget rows leave their multiplier sign-free (encoded by splitting, not by
penalties); inequality rows keep a non-negative multiplier structurally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularBasis
from .lp_core import (
    DEFAULT_TOLS,
    AssembledLP,
    BasisPartition,
    PrimalSolution,
    Tolerances,
    solve_primal,
)

__all__ = [
    "DualCertificate",
    "SlacknessReport",
    "closed_form_certificate",
    "dual_closed_form",
    "dual_objective",
    "relaxation_values",
    "solve_dual_full",
    "solve_dual_relaxation",
    "verify_complementary_slackness",
]


@dataclass(frozen=True, eq=False)
class DualCertificate:
    """Budget multipliers ``lam`` (length p), upper-limit multipliers ``nu``
    (length ell, leading n0 entries identically zero, zero wherever the limit
    is infinite) and per-agent relaxation values ``h``."""

    lam: np.ndarray
    nu: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=float))
        object.__setattr__(self, "nu", np.asarray(self.nu, dtype=float))
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float))


def dual_closed_form(lp: AssembledLP, partition: BasisPartition) -> np.ndarray:
    """Budget multipliers from the optimal basis: solve A_B^T w = c_B and
    negate. Only meaningful for the partition of a non-degenerate optimum."""
    basic = list(partition.basic)
    AB = lp.A[:, basic]
    try:
        w = np.linalg.solve(AB.T, lp.c[basic])
    except np.linalg.LinAlgError as exc:
        raise SingularBasis("basis matrix is singular") from exc
    return -w


def relaxation_values(lp: AssembledLP, nu: np.ndarray) -> np.ndarray:
    """Per-agent sums of nu_j * d_j with the convention inf * 0 = 0."""
    nu = np.asarray(nu, dtype=float)
    finite = np.isfinite(lp.d)
    contrib = np.where(finite, nu * np.where(finite, lp.d, 0.0), 0.0)
    contrib = np.where(~finite & (nu > 0.0), np.inf, contrib)
    return np.array([contrib[lp.agent_indices(i)].sum() for i in range(lp.m)])


def closed_form_certificate(
    lp: AssembledLP, solution: PrimalSolution, tol: Tolerances = DEFAULT_TOLS
) -> DualCertificate:
    """Full certificate implied by the optimal basis: lam from the closed
    form, nu as the positive part of -c - lam^T A (exactly zero on the slack
    block and wherever the upper limit is infinite)."""
    lam = dual_closed_form(lp, solution.partition)
    nu = np.maximum(0.0, -lp.c - lam @ lp.A)
    nu[: lp.n0] = 0.0
    nu[~np.isfinite(lp.d)] = 0.0
    return DualCertificate(lam=lam, nu=nu, h=relaxation_values(lp, nu))


def _transcribe_dual(lp: AssembledLP, epigraph: bool):
    """Standard bounded form of the dual.

    Variables, in column order: lam (p, the first n0 are the non-negative
    inequality multipliers, the rest the positive split halves), the negative
    split halves for equality rows (p - n0), nu for every finite-limit agent
    coordinate, one surplus per agent coordinate, and, for the epigraph
    (relaxation) form, one h and one slack per agent.
    """
    p, n0, m = lp.p, lp.n0, lp.m
    q = lp.ell - n0
    if m == 0 or q == 0:
        raise ValueError("dual transcription needs at least one agent variable")
    Ag = lp.A[:, n0:]
    cg = lp.c[n0:]
    dg = lp.d[n0:]
    fin = np.flatnonzero(np.isfinite(dg))
    nfin = fin.size

    agent_of = np.empty(q, dtype=int)
    for i, (start, stop) in enumerate(lp.agent_spans):
        agent_of[start - n0 : stop - n0] = i

    n_rows = q + (m if epigraph else 0)
    n_split = p - n0
    ncols = p + n_split + nfin + q + (2 * m if epigraph else 0)
    M = np.zeros((n_rows, ncols))
    cost = np.zeros(ncols)

    lam_pos, lam_neg = 0, p
    nu_off = p + n_split
    u_off = nu_off + nfin
    h_off = u_off + q
    w_off = h_off + m

    M[:q, lam_pos : lam_pos + p] = Ag.T
    M[:q, lam_neg : lam_neg + n_split] = -Ag[n0:, :].T
    M[fin, nu_off + np.arange(nfin)] = 1.0
    M[np.arange(q), u_off + np.arange(q)] = -1.0

    cost[lam_pos : lam_pos + p] = lp.b
    cost[lam_neg : lam_neg + n_split] = -lp.b[n0:]

    rhs = np.concatenate([-cg, np.zeros(m)]) if epigraph else -cg

    if epigraph:
        M[q + agent_of[fin], nu_off + np.arange(nfin)] = dg[fin]
        M[q + np.arange(m), h_off + np.arange(m)] = -1.0
        M[q + np.arange(m), w_off + np.arange(m)] = 1.0
        cost[h_off : h_off + m] = 1.0
    else:
        cost[nu_off : nu_off + nfin] = dg[fin]

    dual_lp = AssembledLP(
        A=M, b=rhs, c=cost, d=np.full(ncols, np.inf), n0=0, agent_spans=()
    )
    meta = dict(fin=fin, q=q, lam_neg=lam_neg, nu_off=nu_off, h_off=h_off)
    return dual_lp, meta


def _extract_lam_nu(lp: AssembledLP, x: np.ndarray, meta) -> tuple[np.ndarray, np.ndarray]:
    p, n0 = lp.p, lp.n0
    lam = x[:p].copy()
    lam[n0:] -= x[meta["lam_neg"] : meta["lam_neg"] + (p - n0)]
    nu = np.zeros(lp.ell)
    nu[n0 + meta["fin"]] = x[meta["nu_off"] : meta["nu_off"] + meta["fin"].size]
    return lam, nu


def solve_dual_full(lp: AssembledLP, tol: Tolerances = DEFAULT_TOLS) -> DualCertificate:
    """Solve the dual with explicit upper-limit multipliers.

    Coordinates with infinite upper limit have their multiplier fixed to zero
    (any positive value would drive the objective to -inf), which is encoded
    by simply not giving them a multiplier column.
    """
    dual_lp, meta = _transcribe_dual(lp, epigraph=False)
    sol = solve_primal(dual_lp, tol)
    lam, nu = _extract_lam_nu(lp, sol.x, meta)
    return DualCertificate(lam=lam, nu=nu, h=relaxation_values(lp, nu))


def solve_dual_relaxation(
    lp: AssembledLP, tol: Tolerances = DEFAULT_TOLS
) -> tuple[np.ndarray, np.ndarray]:
    """Solve the relaxation-form dual where each agent's inner maximization is
    resolved to its componentwise positive part and bounded by a scalar h.

    Returns (lam, h).
    """
    dual_lp, meta = _transcribe_dual(lp, epigraph=True)
    sol = solve_primal(dual_lp, tol)
    lam, _ = _extract_lam_nu(lp, sol.x, meta)
    h = sol.x[meta["h_off"] : meta["h_off"] + lp.m].copy()
    return lam, h


def dual_objective(lp: AssembledLP, cert: DualCertificate) -> float:
    """Value of the dual objective -lam^T b - sum_i h_i at the certificate."""
    return float(-cert.lam @ lp.b - cert.h.sum())


@dataclass(frozen=True)
class SlacknessReport:
    """Complementary-slackness products and the strict activity/multiplier
    equivalences that hold at clean optima. ``mismatches`` lists coordinates
    where an equivalence failed in either direction."""

    max_upper_product: float
    max_stationarity_product: float
    products_ok: bool
    interior_iff_zero_gradient: bool
    upper_iff_positive_nu: bool
    mismatches: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return (
            self.products_ok
            and self.interior_iff_zero_gradient
            and self.upper_iff_positive_nu
        )


def verify_complementary_slackness(
    lp: AssembledLP,
    solution: PrimalSolution,
    cert: DualCertificate,
    tol: Tolerances = DEFAULT_TOLS,
) -> SlacknessReport:
    """Check the slackness products (with inf * 0 = 0) plus both directions of
    the activity/multiplier equivalences. Pure report, never raises."""
    x = solution.x
    lam, nu = cert.lam, cert.nu
    d = lp.d
    finite = np.isfinite(d)

    gap = np.where(finite, x - np.where(finite, d, 0.0), 0.0)
    upper_products = np.abs(gap * nu)
    upper_products = np.where(~finite & (nu > tol.act), np.inf, upper_products)

    grad = -lp.c - lam @ lp.A
    stationarity_products = np.abs((grad - nu) * x)

    scale = tol.act * (1.0 + np.max(np.abs(x), initial=0.0)) * (
        1.0 + np.max(np.abs(lam), initial=0.0) + np.max(np.abs(nu), initial=0.0)
    )
    products_ok = bool(
        np.max(upper_products, initial=0.0) <= scale
        and np.max(stationarity_products, initial=0.0) <= scale
    )

    interior = (x > tol.act) & (~finite | (x < d - tol.act))
    zero_grad = np.abs(grad) <= tol.act
    at_upper = finite & (x >= d - tol.act)
    nu_pos = nu > tol.act

    mismatches = []
    for j in np.flatnonzero(interior != zero_grad):
        mismatches.append(
            f"coordinate {j}: interior={bool(interior[j])} but |grad|={abs(grad[j]):.3e}"
        )
    for j in np.flatnonzero(at_upper != nu_pos):
        mismatches.append(
            f"coordinate {j}: at_upper={bool(at_upper[j])} but nu={nu[j]:.3e}"
        )

    return SlacknessReport(
        max_upper_product=float(np.max(upper_products, initial=0.0)),
        max_stationarity_product=float(np.max(stationarity_products, initial=0.0)),
        products_ok=products_ok,
        interior_iff_zero_gradient=bool(np.all(interior == zero_grad)),
        upper_iff_positive_nu=bool(np.all(at_upper == nu_pos)),
        mismatches=tuple(mismatches),
    )
