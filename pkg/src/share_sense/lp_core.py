"""Core LP machinery for multi-agent resource sharing with upper limits.

Assembled problems have the form

    min  c^T x   subject to   A x = b,   0 <= x_j <= d_j,

where the leading ``n0`` columns are slack variables absorbing the inequality
budget rows (cost 0, no upper limit) and the remaining column blocks belong to
the agents, in input order. Upper limits may be ``+inf``; infinities are kept
as genuine extended reals, never as large sentinel numbers.

The solver is a dense bounded-variable revised simplex with a phase-1
feasibility stage (artificial variables on rows not covered by a slack/crash
column). It targets desk-scale problems: hundreds of variables, a handful of
budget rows. Rows of ``A`` and ``b`` are rescaled to unit max-norm before
pivoting because realistic instances mix magnitudes like 1 and 1/7000.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InfeasibleProblem,
    RankDeficient,
    SingularBasis,
    UnboundedProblem,
)

__all__ = [
    "AgentProfile",
    "AssembledLP",
    "AuditReport",
    "BasicSolutionCheck",
    "BasisPartition",
    "PrimalSolution",
    "SharingProblem",
    "Tolerances",
    "DEFAULT_TOLS",
    "assemble",
    "audit_assumptions",
    "check_basic_solution",
    "reduced_costs",
    "solve_primal",
]


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds used consistently across the package.

    ``feas`` is absolute on row-scaled data; ``act`` classifies variables as
    sitting at a bound; ``rc`` is one order below ``act`` so sign tests on
    reduced costs cannot flip an activity classification.
    """

    feas: float = 1e-8
    act: float = 1e-7
    rc: float = 1e-9


DEFAULT_TOLS = Tolerances()


def _as_float_vector(v, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class AgentProfile:
    """One agent: decision length ``n``, unit costs ``c``, upper limits ``d``
    (entries > 0 or +inf) and resource usage matrix ``A`` with one row per
    shared resource."""

    n: int
    c: np.ndarray
    d: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValueError("agent dimension n must be >= 1")
        c = _as_float_vector(self.c, "c")
        d = _as_float_vector(self.d, "d")
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2:
            raise ValueError(f"A must be a matrix, got shape {A.shape}")
        if c.shape != (n,) or d.shape != (n,) or A.shape[1] != n:
            raise ValueError(
                f"inconsistent agent dimensions: n={n}, c{c.shape}, d{d.shape}, A{A.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("agent costs must be finite")
        if not np.all(np.isfinite(A)):
            raise ValueError("agent usage matrix must be finite")
        if np.any(np.isnan(d)) or np.any(d == -np.inf):
            raise ValueError("upper limits must be > 0 or +inf")
        finite = np.isfinite(d)
        if np.any(d[finite] <= 0.0):
            raise ValueError("every finite upper limit must be strictly positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "A", A)

    @property
    def p(self) -> int:
        """Number of resource rows this profile was built for."""
        return self.A.shape[0]


@dataclass(frozen=True, eq=False)
class SharingProblem:
    """A resource-sharing LP: ``p`` resources with totals ``b`` (first ``n0``
    rows are inequalities, the rest equalities) shared by ``agents``."""

    p: int
    n0: int
    b: np.ndarray
    agents: tuple[AgentProfile, ...]

    def __post_init__(self):
        p = int(self.p)
        n0 = int(self.n0)
        if p < 1:
            raise ValueError("resource count p must be >= 1")
        if not 0 <= n0 <= p:
            raise ValueError(f"n0 must lie in [0, p]={p}, got {n0}")
        b = _as_float_vector(self.b, "b")
        if b.shape != (p,):
            raise ValueError(f"b must have length p={p}, got {b.shape}")
        if not np.all(np.isfinite(b)) or np.any(b < 0.0):
            raise ValueError("resource totals b must be finite and >= 0")
        agents = tuple(self.agents)
        for i, ag in enumerate(agents):
            if ag.p != p:
                raise ValueError(
                    f"agent {i} usage matrix has {ag.p} rows, expected p={p}"
                )
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n0", n0)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "agents", agents)

    @property
    def m(self) -> int:
        return len(self.agents)

    @property
    def ell(self) -> int:
        """Total variable count: slack block plus all agent blocks."""
        return self.n0 + sum(ag.n for ag in self.agents)


@dataclass(frozen=True, eq=False)
class AssembledLP:
    """Dense stacked form of a sharing problem (or any bounded LP).

    Column order is the slack block first, then agents in input order;
    ``agent_spans`` holds the half-open column range of each agent.
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    n0: int
    agent_spans: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = _as_float_vector(self.b, "b")
        c = _as_float_vector(self.c, "c")
        d = _as_float_vector(self.d, "d")
        if A.ndim != 2 or A.shape != (b.size, c.size) or d.shape != c.shape:
            raise ValueError(
                f"inconsistent LP dimensions: A{A.shape}, b{b.shape}, c{c.shape}, d{d.shape}"
            )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "n0", int(self.n0))
        object.__setattr__(self, "agent_spans", tuple(map(tuple, self.agent_spans)))

    @property
    def p(self) -> int:
        return self.A.shape[0]

    @property
    def ell(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return len(self.agent_spans)

    def agent_indices(self, i: int) -> np.ndarray:
        start, stop = self.agent_spans[i]
        return np.arange(start, stop)


@dataclass(frozen=True, eq=False)
class BasisPartition:
    """Index partition of an extended basic solution: ``basic`` (one per
    budget row, in row order), ``at_lower`` (value 0) and ``at_upper``
    (value d, necessarily finite)."""

    basic: tuple[int, ...]
    at_lower: tuple[int, ...]
    at_upper: tuple[int, ...]

    def as_sets(self):
        return set(self.basic), set(self.at_lower), set(self.at_upper)


@dataclass(frozen=True, eq=False)
class PrimalSolution:
    """Optimal basic feasible solution with its partition and agent map.

    ``degenerate`` is set when a basic variable sits at a bound (more active
    constraints than variables); ``nonunique`` when some non-basic reduced
    cost vanishes. Both flags mean the almost-sure assumptions behind the
    sensitivity theory failed for this instance; the solution itself is still
    valid.
    """

    x: np.ndarray
    objective: float
    partition: BasisPartition
    agent_index_map: tuple[np.ndarray, ...]
    degenerate: bool = False
    nonunique: bool = False

    @property
    def clean(self) -> bool:
        return not (self.degenerate or self.nonunique)


def assemble(problem: SharingProblem) -> AssembledLP:
    """Stack the slack block and all agent blocks into one dense LP."""
    p, n0 = problem.p, problem.n0
    slack = np.zeros((p, n0))
    slack[:n0, :n0] = np.eye(n0)
    blocks_A = [slack]
    blocks_c = [np.zeros(n0)]
    blocks_d = [np.full(n0, np.inf)]
    spans = []
    offset = n0
    for ag in problem.agents:
        blocks_A.append(ag.A)
        blocks_c.append(ag.c)
        blocks_d.append(ag.d)
        spans.append((offset, offset + ag.n))
        offset += ag.n
    return AssembledLP(
        A=np.hstack(blocks_A) if blocks_A else np.zeros((p, 0)),
        b=problem.b.copy(),
        c=np.concatenate(blocks_c),
        d=np.concatenate(blocks_d),
        n0=n0,
        agent_spans=tuple(spans),
    )


# --- bounded-variable revised simplex ---------------------------------------

_AT_LOWER, _AT_UPPER, _BASIC = 0, 1, 2
_BLAND_TRIGGER = 50  # consecutive degenerate pivots before least-index rule
_PIV_TOL = 1e-10  # direction entries smaller than this cannot block/pivot
_DEGEN_STEP = 1e-11


def _nonbasic_values(vstat: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Full-length x with non-basic entries at their bounds, basics at 0."""
    x = np.zeros_like(d)
    up = vstat == _AT_UPPER
    x[up] = d[up]
    return x


def _invert_basis(B: np.ndarray) -> np.ndarray:
    """Inverse of the (small) basis matrix; hand-coded for p <= 3 because the
    pivot loop is dominated by call overhead at cargo scale."""
    p = B.shape[0]
    if p == 1:
        det = B[0, 0]
        if abs(det) < 1e-300:
            raise SingularBasis("1x1 basis is singular")
        return np.array([[1.0 / det]])
    if p == 2:
        a, bb, cc, dd = B[0, 0], B[0, 1], B[1, 0], B[1, 1]
        det = a * dd - bb * cc
        if abs(det) < 1e-300:
            raise SingularBasis("2x2 basis is singular")
        return np.array([[dd, -bb], [-cc, a]]) / det
    try:
        return np.linalg.inv(B)
    except np.linalg.LinAlgError as exc:
        raise SingularBasis("basis matrix is singular") from exc


def _bounded_simplex(A, b, c, d, basis, vstat, tol: Tolerances, max_iter: int):
    """Pivot until optimal, refactorizing the basis each iteration.

    ``basis`` (row -> column) and ``vstat`` are updated in place. Returns the
    final (x, y, r): full primal vector, row multipliers, reduced costs.
    """
    bland = False
    degen_run = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(max_iter):
            Binv = _invert_basis(A[:, basis])
            xN = _nonbasic_values(vstat, d)
            xB = Binv @ (b - A @ xN)
            y = c[basis] @ Binv
            r = c - y @ A

            viol = np.where(
                vstat == _AT_LOWER, -r, np.where(vstat == _AT_UPPER, r, -np.inf)
            )
            if bland:
                candidates = np.flatnonzero(viol > tol.rc)
                if candidates.size == 0:
                    break
                j = int(candidates[0])
            else:
                j = int(np.argmax(viol))
                if viol[j] <= tol.rc:
                    break

            sigma = 1.0 if vstat[j] == _AT_LOWER else -1.0
            # change of x_B per unit step of the entering variable
            delta = (-sigma) * (Binv @ A[:, j])

            dB = d[basis]
            shrink = delta < -_PIV_TOL
            grow = (delta > _PIV_TOL) & np.isfinite(dB)
            t_zero = np.where(shrink, xB / np.where(shrink, -delta, 1.0), np.inf)
            t_upper = np.where(
                grow, (dB - xB) / np.where(grow, delta, 1.0), np.inf
            )
            t_rows = np.maximum(np.minimum(t_zero, t_upper), 0.0)
            t_row_min = float(t_rows.min()) if t_rows.size else np.inf
            t_own = float(d[j]) if np.isfinite(d[j]) else np.inf
            t_step = min(t_row_min, t_own)

            if not np.isfinite(t_step):
                raise UnboundedProblem(
                    f"entering variable {j} can improve the objective without bound"
                )

            if t_own <= t_row_min:
                # bound flip: the entering variable traverses its whole range
                vstat[j] = _AT_UPPER if vstat[j] == _AT_LOWER else _AT_LOWER
            else:
                near = np.flatnonzero(t_rows <= t_step + 1e-12 * (1.0 + t_step))
                if bland:
                    row = int(near[np.argmin(basis[near])])
                else:
                    row = int(near[np.argmax(np.abs(delta[near]))])
                leaving = int(basis[row])
                hits_zero = t_zero[row] <= t_upper[row]
                vstat[leaving] = _AT_LOWER if hits_zero else _AT_UPPER
                basis[row] = j
                vstat[j] = _BASIC

            if t_step <= _DEGEN_STEP:
                degen_run += 1
                if degen_run >= _BLAND_TRIGGER:
                    bland = True
            else:
                degen_run = 0
        else:
            raise ArithmeticError("simplex failed to terminate within the pivot limit")

    x = _nonbasic_values(vstat, d)
    x[basis] = xB
    return x, y, r


def _crash_basis(A, b, d, tol: Tolerances):
    """Seed the basis with structural singleton columns (slack-like) whose
    implied value is within bounds; remaining rows get artificial variables."""
    p, ell = A.shape
    basis = np.full(p, -1, dtype=int)
    vstat = np.full(ell, _AT_LOWER, dtype=int)
    nnz_per_col = np.count_nonzero(A, axis=0)
    for j in range(ell):
        if nnz_per_col[j] != 1:
            continue
        i = int(np.argmax(np.abs(A[:, j])))
        if basis[i] >= 0 or A[i, j] == 0.0:
            continue
        v = b[i] / A[i, j]
        if -tol.feas <= v <= d[j] + tol.feas:
            basis[i] = j
            vstat[j] = _BASIC
    return basis, vstat


def _phase1(A, b, d, tol: Tolerances, max_iter: int):
    """Find a basic feasible starting point; raise InfeasibleProblem if none."""
    p, ell = A.shape
    basis, vstat = _crash_basis(A, b, d, tol)
    free_rows = np.flatnonzero(basis < 0)
    if free_rows.size == 0:
        return basis, vstat

    n_art = free_rows.size
    resid = b - A @ _nonbasic_values(vstat, d)
    # crash picks exactly zero their rows; the solve below re-derives values
    signs = np.where(resid[free_rows] >= 0.0, 1.0, -1.0)
    A_art = np.zeros((p, n_art))
    A_art[free_rows, np.arange(n_art)] = signs
    A1 = np.hstack([A, A_art])
    d1 = np.concatenate([d, np.full(n_art, np.inf)])
    c1 = np.concatenate([np.zeros(ell), np.ones(n_art)])
    basis1 = basis.copy()
    basis1[free_rows] = ell + np.arange(n_art)
    vstat1 = np.concatenate([vstat, np.full(n_art, _BASIC, dtype=int)])

    x1, _, _ = _bounded_simplex(A1, b, c1, d1, basis1, vstat1, tol, max_iter)
    art_sum = float(x1[ell:].sum())
    if art_sum > tol.feas:
        raise InfeasibleProblem(
            f"phase-1 optimum {art_sum:.3e} exceeds the feasibility tolerance"
        )

    # pivot zero-level artificials out of the basis
    for row in np.flatnonzero(basis1 >= ell):
        B = A1[:, basis1]
        e = np.zeros(p)
        e[row] = 1.0
        try:
            yrow = np.linalg.solve(B.T, e)
        except np.linalg.LinAlgError as exc:
            raise SingularBasis("phase-1 basis singular during cleanup") from exc
        pivots = yrow @ A
        pivots[basis1[basis1 < ell]] = 0.0
        j = int(np.argmax(np.abs(pivots)))
        if abs(pivots[j]) <= 1e-9:
            raise RankDeficient(
                "budget rows are linearly dependent; cannot complete a structural basis"
            )
        vstat1[j] = _BASIC
        basis1[row] = j

    basis = basis1
    vstat = vstat1[:ell]
    return basis, vstat


def solve_primal(lp: AssembledLP, tol: Tolerances = DEFAULT_TOLS) -> PrimalSolution:
    """Solve the assembled LP to an optimal basic feasible solution.

    Degeneracy and non-uniqueness do not abort: they set flags on the returned
    solution so callers can discard the instance. Infeasibility and
    unboundedness raise.
    """
    p, ell = lp.p, lp.ell
    if ell < p:
        raise ValueError(f"need at least as many variables as rows: ell={ell} < p={p}")

    scale = np.maximum(np.max(np.abs(lp.A), axis=1, initial=0.0), np.abs(lp.b))
    scale = np.where(scale > 0.0, scale, 1.0)
    As = lp.A / scale[:, None]
    bs = lp.b / scale

    max_iter = 2000 + 60 * (ell + p)
    basis, vstat = _phase1(As, bs, lp.d, tol, max_iter)
    x, _, r = _bounded_simplex(As, bs, lp.c, lp.d, basis, vstat, tol, max_iter)

    residual = float(np.max(np.abs(As @ x - bs), initial=0.0))
    if residual > 10.0 * tol.feas:
        raise ArithmeticError(
            f"solution failed the feasibility check: scaled residual {residual:.3e}"
        )

    xb = x[basis]
    db = lp.d[basis]
    at_low = xb <= tol.act
    at_up = np.isfinite(db) & (xb >= db - tol.act)
    degenerate = bool(np.any(at_low | at_up))

    nonbasic = vstat != _BASIC
    nonunique = bool(np.any(np.abs(r[nonbasic]) <= tol.rc))

    partition = BasisPartition(
        basic=tuple(int(j) for j in basis),
        at_lower=tuple(int(j) for j in np.flatnonzero(vstat == _AT_LOWER)),
        at_upper=tuple(int(j) for j in np.flatnonzero(vstat == _AT_UPPER)),
    )
    agent_map = tuple(lp.agent_indices(i) for i in range(lp.m))
    return PrimalSolution(
        x=x,
        objective=float(lp.c @ x),
        partition=partition,
        agent_index_map=agent_map,
        degenerate=degenerate,
        nonunique=nonunique,
    )


# --- structural checks -------------------------------------------------------


@dataclass(frozen=True)
class BasicSolutionCheck:
    """Outcome of the extended-basic-solution test; ``failures`` names every
    violated condition, first entry being the decisive one."""

    ok: bool
    failures: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok


def check_basic_solution(
    lp: AssembledLP,
    x: np.ndarray,
    partition: BasisPartition,
    tol: Tolerances = DEFAULT_TOLS,
) -> BasicSolutionCheck:
    """Test the four extended-basic-solution conditions: budget equations hold,
    the basic set has size p, its columns are independent, and every non-basic
    variable sits at one of its bounds."""
    x = np.asarray(x, dtype=float)
    failures = []

    scale = np.maximum(np.max(np.abs(lp.A), axis=1, initial=0.0), np.abs(lp.b))
    scale = np.where(scale > 0.0, scale, 1.0)
    resid = float(np.max(np.abs((lp.A @ x - lp.b) / scale), initial=0.0))
    if resid > 10.0 * tol.feas:
        failures.append(f"budget residual {resid:.3e}")

    basic, low, up = partition.as_sets()
    if len(partition.basic) != lp.p or len(basic) != lp.p:
        failures.append(f"basic set has size {len(basic)}, expected p={lp.p}")
    union = basic | low | up
    overlap = (basic & low) | (basic & up) | (low & up)
    if union != set(range(lp.ell)) or overlap:
        failures.append("index sets do not partition the variables")

    if len(basic) == lp.p:
        AB = lp.A[:, list(partition.basic)]
        if np.linalg.matrix_rank(AB) < lp.p:
            failures.append("basic columns are linearly dependent")

    for j in sorted(low | up):
        dj = lp.d[j]
        at_zero = abs(x[j]) <= tol.act
        at_limit = np.isfinite(dj) and abs(x[j] - dj) <= tol.act
        if not (at_zero or at_limit):
            failures.append(f"nonbasic index {j} strictly interior (x={x[j]:.6g})")
            break

    return BasicSolutionCheck(ok=not failures, failures=tuple(failures))


def reduced_costs(
    lp: AssembledLP, partition: BasisPartition, tol: Tolerances = DEFAULT_TOLS
):
    """Reduced-cost vectors over the at-lower and at-upper index sets.

    At an optimal basic feasible solution the first is >= 0 and the second
    <= 0 (up to ``tol.rc``).
    """
    basic = list(partition.basic)
    AB = lp.A[:, basic]
    try:
        y = np.linalg.solve(AB.T, lp.c[basic])
    except np.linalg.LinAlgError as exc:
        raise SingularBasis("basis matrix is singular") from exc
    r = lp.c - y @ lp.A
    r_low = r[list(partition.at_lower)]
    r_up = r[list(partition.at_upper)]
    return r_low, r_up


@dataclass(frozen=True)
class AuditReport:
    """Checkable parts of the almost-sure regularity assumptions for one
    solved instance. The distributional non-accumulation condition cannot be
    checked from a single sample and is reported as a fixed note."""

    rank_A: int
    full_row_rank: bool
    active_constraints: int
    exactly_ell_active: bool
    upper_limits_positive: bool
    unique_optimum: bool
    nondegenerate: bool
    note: str = "boundary non-accumulation is a property of the sampling distribution: not checkable from one sample"

    @property
    def ok(self) -> bool:
        return (
            self.full_row_rank
            and self.exactly_ell_active
            and self.upper_limits_positive
            and self.unique_optimum
            and self.nondegenerate
        )


def audit_assumptions(
    lp: AssembledLP, solution: PrimalSolution, tol: Tolerances = DEFAULT_TOLS
) -> AuditReport:
    """Report which regularity conditions hold at the solved instance."""
    rank_A = int(np.linalg.matrix_rank(lp.A))
    x = solution.x
    finite = np.isfinite(lp.d)
    n_active = lp.p
    n_active += int(np.count_nonzero(np.abs(x) <= tol.act))
    n_active += int(np.count_nonzero(finite & (np.abs(x - lp.d) <= tol.act)))
    finite_d_ok = bool(np.all(lp.d[finite] > 0.0))
    return AuditReport(
        rank_A=rank_A,
        full_row_rank=rank_A == lp.p,
        active_constraints=n_active,
        exactly_ell_active=n_active == lp.ell,
        upper_limits_positive=finite_d_ok,
        unique_optimum=not solution.nonunique,
        nondegenerate=not solution.degenerate,
    )
