"""Confidence bounds for the probability that a new agent changes the optimum.

For a sample of ``m`` agents and confidence parameter ``beta`` the interval
endpoints come from the two non-negative roots of a family of degree-4m
polynomials, one per possible count ``k`` of active agents. Everything here is
evaluated in log space: the coefficients reach sizes like C(4000, 500), far
beyond float range.

Numerical scheme
----------------
Each polynomial has a single positive term (degree m - k) and two groups of
negative terms. In u = log t the log-ratio of the positive term to the sum of
negative terms is concave (affine minus log-sum-exp), so the set where the
polynomial is positive is exactly one interval and its endpoints are the two
roots. We locate the maximum of the ratio by golden-section search, expand
outward for sign changes, and bisect in t. Binomial log-coefficients are built
by a cumulative recurrence in extended precision so that errors shared by the
positive term and the dominant negative terms cancel in the ratio; this keeps
the normalized residual at the reported roots below 1e-10 even at m = 1000.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .duality import DualCertificate
from .errors import BracketFailure
from .lp_core import DEFAULT_TOLS, AssembledLP, PrimalSolution, Tolerances

__all__ = [
    "EpsilonTable",
    "SignedLogValue",
    "count_active_dual",
    "count_active_primal",
    "epsilon_table",
    "explicit_upper_bound",
    "poly_value",
    "sensitivity_interval",
    "solve_roots",
]

_U_FLOOR = -60.0 * math.log(2.0)
_U_CAP = 40.0 * math.log(2.0)
_T_TOL = 1e-12  # absolute bisection width in t
_RESIDUAL_TOL = 1e-10  # on the largest-term-normalized value


@dataclass(frozen=True)
class SignedLogValue:
    """A real number carried as sign and log magnitude.

    ``normalized`` is the value divided by the largest contributing term; it
    is the scale-free residual used everywhere a root is checked.
    """

    sign: int
    log_abs: float
    normalized: float
    log_scale: float

    @property
    def value(self) -> float:
        """Plain float value; overflows to +-inf when the magnitude is huge."""
        if self.sign == 0:
            return 0.0
        if self.log_abs > 709.0:
            return math.inf if self.sign > 0 else -math.inf
        return self.sign * math.exp(self.log_abs)


class _PolyFamily:
    """Log-space coefficient rows of the confidence polynomials for a fixed
    (m, beta), restricted to the requested k values."""

    def __init__(self, m: int, beta: float, ks):
        if m < 1:
            raise ValueError("m must be >= 1")
        if not 0.0 < beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        self.m = m
        self.beta = beta
        self.ks = np.asarray(ks, dtype=int)
        if np.any(self.ks < 0) or np.any(self.ks > m):
            raise ValueError("k must lie in [0, m]")

        n_i = 4 * m + 1
        I = np.arange(n_i, dtype=float)
        K = self.ks[:, None].astype(float)
        diff = I[None, :] - K  # exponent of t for column i, row k
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(diff >= 1.0, K / np.maximum(diff, 1.0), 0.0)
        inc = np.log1p(ratio)
        # cumulative recurrence log C(i,k) = sum_{j<=i} log(j/(j-k)); extended
        # precision keeps the partial-sum rounding below the residual budget
        lnC = np.cumsum(inc.astype(np.longdouble), axis=1).astype(float)

        pref = np.where(
            I[None, :] < m,
            math.log(beta / (2.0 * m)),
            np.where(I[None, :] == m, 0.0, math.log(beta / (6.0 * m))),
        )
        logcoef = lnC + pref
        logcoef[diff < 0.0] = -np.inf
        self.logcoef = logcoef
        self.expo = diff

    def eval_rows(self, rows: np.ndarray, t: np.ndarray):
        """Normalized value and positive/negative log-ratio at t[r] per row.

        t entries must be strictly positive. The ratio is formed fully in log
        space so it stays finite (and concave in log t) even where one side
        would underflow; this is what makes the bracketing search reliable.
        """
        lt = np.log(t)
        LT = self.logcoef[rows] + self.expo[rows] * lt[:, None]
        pos_log = LT[:, self.m].copy()
        LT[:, self.m] = -np.inf
        negmax = LT.max(axis=1)
        negsum = np.exp(LT - negmax[:, None]).sum(axis=1)
        logneg = negmax + np.log(negsum)
        g = pos_log - logneg
        rowmax = np.maximum(pos_log, negmax)
        val = np.exp(pos_log - rowmax) - np.exp(logneg - rowmax)
        return val, g, rowmax

    def value_at_zero(self, k: int) -> float:
        """Exact limit at t = 0: only the degree-zero term survives."""
        if k == self.m:
            return 1.0
        return -self.beta / (2.0 * self.m)


def poly_value(m: int, k: int, beta: float, t: float) -> SignedLogValue:
    """Stable evaluation of the k-th confidence polynomial at t >= 0.

    Every term is handled as a log magnitude; the two sign classes are summed
    after rescaling by the largest term, so overflow cannot occur.
    """
    if t < 0.0:
        raise ValueError("t must be >= 0")
    fam = _PolyFamily(m, beta, [k])
    if t == 0.0:
        v = fam.value_at_zero(k)
        return SignedLogValue(
            sign=int(np.sign(v)),
            log_abs=math.log(abs(v)),
            normalized=math.copysign(1.0, v),
            log_scale=math.log(abs(v)),
        )
    val, _, log_scale = fam.eval_rows(np.array([0]), np.array([t], dtype=float))
    v = float(val[0])
    scale = float(log_scale[0])
    sign = int(np.sign(v))
    log_abs = math.log(abs(v)) + scale if v != 0.0 else -np.inf
    return SignedLogValue(sign=sign, log_abs=log_abs, normalized=v, log_scale=scale)


def _golden_max(fam: _PolyFamily, rows: np.ndarray, iters: int = 48):
    """Vectorized golden-section maximization of the concave log-ratio over
    u = log t. Returns (u_star, g_star) per row."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    n = rows.size
    a = np.full(n, _U_FLOOR)
    b = np.full(n, _U_CAP)
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    _, gc, _ = fam.eval_rows(rows, np.exp(c))
    _, gd, _ = fam.eval_rows(rows, np.exp(d))
    for _ in range(iters):
        keep_left = gc >= gd
        surviving = np.where(keep_left, gc, gd)
        a = np.where(keep_left, a, c)
        b = np.where(keep_left, d, b)
        c = b - inv_phi * (b - a)
        d = a + inv_phi * (b - a)
        # the surviving interior point coincides with one recomputed slot:
        # old c becomes the new d when keeping the left part, and vice versa
        probe = np.where(keep_left, c, d)
        _, gp, _ = fam.eval_rows(rows, np.exp(probe))
        gc = np.where(keep_left, gp, surviving)
        gd = np.where(keep_left, surviving, gp)
    u_star = 0.5 * (a + b)
    _, g_star, _ = fam.eval_rows(rows, np.exp(u_star))
    return u_star, g_star


def _expand_brackets(fam, rows, u_star, direction: int):
    """March away from the maximum in +-u until the ratio turns negative.

    Returns (t_inner, t_outer) with the polynomial positive at t_inner and
    negative at t_outer. Going left, hitting the floor with a positive value
    yields t_outer = 0 (the polynomial is negative at 0 for k < m). Going
    right past the cap raises BracketFailure.
    """
    n = rows.size
    inner = np.exp(u_star)
    outer = np.full(n, np.nan)
    active = np.ones(n, dtype=bool)
    step = np.ones(n)
    u_cur = u_star.copy()
    for _ in range(64):
        if not active.any():
            break
        u_next = u_cur + direction * step
        clipped = (
            np.maximum(u_next, _U_FLOOR) if direction < 0 else np.minimum(u_next, _U_CAP)
        )
        idx = np.flatnonzero(active)
        _, g, _ = fam.eval_rows(rows[idx], np.exp(clipped[idx]))
        negative = g < 0.0
        done = idx[negative]
        outer[done] = np.exp(clipped[done])
        active[done] = False

        still = idx[~negative]
        at_edge = (
            clipped[still] <= _U_FLOOR if direction < 0 else clipped[still] >= _U_CAP
        )
        edge = still[at_edge]
        if direction < 0:
            inner[edge] = np.exp(clipped[edge])
            outer[edge] = 0.0
            active[edge] = False
        elif edge.size:
            bad = fam.ks[rows[edge]]
            raise BracketFailure(
                f"no sign change up to t = 2^40 for k in {sorted(set(int(v) for v in bad))}"
            )
        moving = still[~at_edge]
        inner[moving] = np.exp(clipped[moving])
        u_cur[active] = clipped[active]
        step[active] *= 2.0
    if active.any():
        raise BracketFailure("bracket expansion failed to find a sign change")
    return inner, outer


def _bisect(fam, rows, t_neg, t_pos, t_tol=_T_TOL, residual_tol=_RESIDUAL_TOL):
    """Bisection on sign between a negative-value and a positive-value point.

    Width is driven below ``t_tol`` first, and then further until the
    normalized residual at the midpoint drops below half the residual budget
    (or the bracket reaches float resolution).
    """
    neg_end = t_neg.copy()
    pos_end = t_pos.copy()
    n = rows.size
    root = 0.5 * (neg_end + pos_end)
    resid = np.full(n, np.inf)
    active = np.ones(n, dtype=bool)
    for _ in range(220):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        mid = 0.5 * (neg_end[idx] + pos_end[idx])
        val, _, _ = fam.eval_rows(rows[idx], mid)
        positive = val > 0.0
        pos_end[idx[positive]] = mid[positive]
        neg_end[idx[~positive]] = mid[~positive]
        root[idx] = mid
        resid[idx] = np.abs(val)

        width = np.abs(pos_end[idx] - neg_end[idx])
        floor = 4.0 * np.finfo(float).eps * np.maximum(np.abs(pos_end[idx]), 1e-300)
        converged = (width <= t_tol) & (
            (resid[idx] <= 0.5 * residual_tol) | (width <= floor)
        )
        active[idx[converged]] = False
    return root, resid


def _solve_family(fam: _PolyFamily):
    """All roots for the family rows: (t_low, t_high, resid_low, resid_high).

    Rows with k = m get t_low = 0 by definition (their value at 0 is +1 and
    the positive window extends to the origin)."""
    m = fam.m
    rows = np.arange(fam.ks.size)
    u_star, g_star = _golden_max(fam, rows)
    if np.any(g_star <= 0.0):
        bad = fam.ks[rows[g_star <= 0.0]]
        raise BracketFailure(
            f"polynomial never positive for k in {sorted(set(int(v) for v in bad))}"
        )

    t_low = np.zeros(rows.size)
    resid_low = np.full(rows.size, np.nan)
    left_rows = rows[fam.ks != m]
    if left_rows.size:
        inner, outer = _expand_brackets(fam, left_rows, u_star[left_rows], direction=-1)
        roots, resid = _bisect(fam, left_rows, outer, inner)
        t_low[left_rows] = roots
        resid_low[left_rows] = resid

    inner, outer = _expand_brackets(fam, rows, u_star, direction=+1)
    t_high, resid_high = _bisect(fam, rows, outer, inner)
    return t_low, t_high, resid_low, resid_high


def solve_roots(m: int, k: int, beta: float) -> tuple[float, float]:
    """The two non-negative roots of the k-th confidence polynomial.

    For k = m the lower root is 0 by definition and only the unique root of
    the degree-3m tail equation is computed.
    """
    fam = _PolyFamily(m, beta, [k])
    t_low, t_high, _, _ = _solve_family(fam)
    return float(t_low[0]), float(t_high[0])


def explicit_upper_bound(m: int, k: int, beta: float) -> float:
    """Closed-form loose upper bound 1 - (beta / (m C(m,k)))^(1/(m-k)).

    Classically stated for 1 <= k <= m-1 with value 1 at k = m; we also apply
    the (well-defined) formula at k = 0.
    """
    if not 0 <= k <= m:
        raise ValueError("k must lie in [0, m]")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    if k == m:
        return 1.0
    lnC = math.lgamma(m + 1) - math.lgamma(k + 1) - math.lgamma(m - k + 1)
    exponent = (math.log(beta) - math.log(m) - lnC) / (m - k)
    return float(min(1.0, -math.expm1(exponent)))


@dataclass(frozen=True, eq=False)
class EpsilonTable:
    """Interval endpoints for every possible active-agent count k = 0..m.

    ``residual_low``/``residual_high`` hold the normalized polynomial values
    at the reported roots (NaN where the root is 0 by definition).
    """

    m: int
    beta: float
    t_low: np.ndarray
    t_high: np.ndarray
    eps_low: np.ndarray
    eps_high: np.ndarray
    eps_explicit: np.ndarray
    residual_low: np.ndarray
    residual_high: np.ndarray

    def __post_init__(self):
        m = self.m
        if self.t_low.shape != (m + 1,):
            raise ValueError("table arrays must have length m + 1")
        if self.t_low[m] != 0.0:
            raise ArithmeticError("t_low at k = m must be exactly 0")
        if np.any(self.t_low < 0.0) or np.any(self.t_low > self.t_high):
            raise ArithmeticError("root ordering violated: need 0 <= t_low <= t_high")
        if np.any(self.eps_low < 0.0) or np.any(self.eps_low > self.eps_high):
            raise ArithmeticError("bound ordering violated")
        if np.any(self.eps_high > 1.0) or self.eps_high[m] != 1.0:
            raise ArithmeticError("upper bounds must lie in [0, 1] with value 1 at k = m")
        resid = np.concatenate([self.residual_low[:m], self.residual_high])
        if np.any(np.abs(resid) >= _RESIDUAL_TOL):
            worst = float(np.nanmax(np.abs(resid)))
            raise ArithmeticError(f"root residual {worst:.3e} exceeds {_RESIDUAL_TOL}")

    def interval(self, k: int) -> tuple[float, float]:
        if not 0 <= k <= self.m:
            raise ValueError(f"k must lie in [0, m]={self.m}, got {k}")
        return float(self.eps_low[k]), float(self.eps_high[k])

    def rows(self):
        """Iterate (k, t_low, t_high, eps_low, eps_high, eps_explicit)."""
        for k in range(self.m + 1):
            yield (
                k,
                float(self.t_low[k]),
                float(self.t_high[k]),
                float(self.eps_low[k]),
                float(self.eps_high[k]),
                float(self.eps_explicit[k]),
            )


def epsilon_table(m: int, beta: float) -> EpsilonTable:
    """Roots and interval endpoints for all k = 0..m at confidence 1 - beta."""
    fam = _PolyFamily(m, beta, np.arange(m + 1))
    t_low, t_high, resid_low, resid_high = _solve_family(fam)
    eps_low = np.maximum(0.0, 1.0 - t_high)
    eps_high = np.maximum(0.0, 1.0 - t_low)
    explicit = np.array([explicit_upper_bound(m, k, beta) for k in range(m + 1)])
    return EpsilonTable(
        m=m,
        beta=beta,
        t_low=t_low,
        t_high=t_high,
        eps_low=eps_low,
        eps_high=eps_high,
        eps_explicit=explicit,
        residual_low=resid_low,
        residual_high=resid_high,
    )


def count_active_primal(solution: PrimalSolution, tol: Tolerances = DEFAULT_TOLS) -> int:
    """Number of agents with at least one decision component away from zero.
    The slack block is excluded by construction of the agent index map."""
    x = solution.x
    return sum(
        1 for idx in solution.agent_index_map if np.any(np.abs(x[idx]) > tol.act)
    )


def count_active_dual(
    lp: AssembledLP, cert: DualCertificate, tol: Tolerances = DEFAULT_TOLS
) -> int:
    """Active-agent count read off the dual certificate: agents with a
    positive relaxation value plus agents whose constraint is tight at the
    multiplier (some coordinate gradient vanishing). The two sets are disjoint
    because the boundary test requires the relaxation value to be zero."""
    grad = -lp.c - cert.lam @ lp.A
    count = 0
    for i in range(lp.m):
        if cert.h[i] > tol.act:
            count += 1
        elif np.any(np.abs(grad[lp.agent_indices(i)]) <= tol.act):
            count += 1
    return count


def sensitivity_interval(
    solution: PrimalSolution, table: EpsilonTable, tol: Tolerances = DEFAULT_TOLS
) -> tuple[float, float, int]:
    """Interval for the probability that a random new agent changes the
    optimum: the table row selected by the observed active-agent count."""
    m = len(solution.agent_index_map)
    if m != table.m:
        raise ValueError(f"table was built for m={table.m}, solution has m={m} agents")
    s_star = count_active_primal(solution, tol)
    lo, hi = table.interval(s_star)
    return lo, hi, s_star
