"""Finite polyhedral cone programs and a reference revised-simplex backend.

Every program that arises after discretization is polyhedral, so the solver
only has to handle linear programs in standard form::

    minimize    cost @ z
    subject to  matrix @ z == rhs
                z[j] >= 0   for every variable tagged NONNEG

The reference backend is a dense revised simplex with Bland's rule.  It
returns basic solutions, so primal and dual points come straight out of the
final basis and the duality certificate is exact up to floating point.
"""
from __future__ import annotations

import enum
import io
import logging
from dataclasses import dataclass, field
from typing import Protocol as TypingProtocol

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)

SOLVE_TOL = 1e-9
CERT_TOL = 1e-7
_PIVOT_TOL = 1e-11


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NUMERICAL_FAILURE = "NumericalFailure"


class VarTag(str, enum.Enum):
    FREE = "F"
    NONNEG = "N"


class SolverError(RuntimeError):
    pass


@dataclass(eq=False)
class ConeProgram:
    """A linear program over a polyhedral cone.

    Rows are ``halfspace_normals @ x <= halfspace_offsets``,
    ``cone_normals @ x >= 0`` and ``eq_matrix @ x == eq_rhs``.
    ``nonneg`` marks sign-constrained variables; the rest are free.
    """

    objective: np.ndarray
    halfspace_normals: np.ndarray
    halfspace_offsets: np.ndarray
    cone_normals: np.ndarray
    eq_matrix: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    nonneg: np.ndarray | None = None
    sense: str = "max"
    strictly_feasible_point: np.ndarray | None = None
    cone_exact: bool = True
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        n = self.objective.shape[0]
        self.halfspace_normals = np.asarray(self.halfspace_normals, dtype=float).reshape(-1, n)
        self.halfspace_offsets = np.asarray(self.halfspace_offsets, dtype=float).reshape(-1)
        self.cone_normals = np.asarray(self.cone_normals, dtype=float).reshape(-1, n)
        if self.eq_matrix is None:
            self.eq_matrix = np.zeros((0, n))
            self.eq_rhs = np.zeros(0)
        self.eq_matrix = np.asarray(self.eq_matrix, dtype=float).reshape(-1, n)
        self.eq_rhs = np.asarray(self.eq_rhs, dtype=float).reshape(-1)
        if self.nonneg is None:
            self.nonneg = np.zeros(n, dtype=bool)
        self.nonneg = np.asarray(self.nonneg, dtype=bool)
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        if self.halfspace_normals.shape[0] != self.halfspace_offsets.shape[0]:
            raise ValueError("halfspace normals and offsets disagree in length")
        if self.eq_matrix.shape[0] != self.eq_rhs.shape[0]:
            raise ValueError("equality matrix and rhs disagree in length")
        if self.nonneg.shape != (n,):
            raise ValueError("nonneg mask must have one entry per variable")

    @property
    def dim(self) -> int:
        return self.objective.shape[0]

    def row_residuals(self, x: np.ndarray) -> dict[str, float]:
        """Worst violation of each constraint family at ``x`` (0 when satisfied)."""
        x = np.asarray(x, dtype=float)
        out = {"halfspace": 0.0, "cone": 0.0, "equality": 0.0, "sign": 0.0}
        if len(self.halfspace_offsets):
            out["halfspace"] = float(max(0.0, np.max(self.halfspace_normals @ x - self.halfspace_offsets)))
        if len(self.cone_normals):
            out["cone"] = float(max(0.0, -np.min(self.cone_normals @ x)))
        if len(self.eq_rhs):
            out["equality"] = float(np.max(np.abs(self.eq_matrix @ x - self.eq_rhs)))
        if self.nonneg.any():
            out["sign"] = float(max(0.0, -np.min(x[self.nonneg])))
        return out


@dataclass(eq=False)
class ProgramSolution:
    """Primal-dual pair returned by a solve.

    For a ConeProgram solve, ``dual_weights`` holds one nonnegative
    multiplier per halfspace row (the mesh weights), ``cone_weights`` one per
    cone row and ``eq_weights`` one free multiplier per equality row.  For a
    raw StandardForm solve, ``dual_weights`` holds the row prices.
    """

    status: Status
    primal_point: np.ndarray | None = None
    primal_value: float = float("nan")
    dual_weights: np.ndarray | None = None
    dual_value: float = float("nan")
    cone_weights: np.ndarray | None = None
    eq_weights: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    residuals: dict[str, float] = field(default_factory=dict)
    farkas: np.ndarray | None = None
    iterations: int = 0

    @property
    def gap(self) -> float:
        return abs(self.primal_value - self.dual_value)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def summary(self) -> tuple:
        """Hashable digest used for determinism checks."""
        def b(a):
            return None if a is None else np.asarray(a).tobytes()
        return (self.status.value, b(self.primal_point), self.primal_value,
                b(self.dual_weights), self.dual_value, b(self.cone_weights))


@dataclass(eq=False)
class StandardForm:
    cost: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray
    var_tags: list[VarTag]
    # pull-back bookkeeping, filled by to_standard_form
    n_original: int = 0
    sign: float = 1.0
    row_kinds: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=float)
        self.constraint_matrix = np.asarray(self.constraint_matrix, dtype=float).reshape(-1, self.cost.shape[0])
        self.rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        self.var_tags = [VarTag(t) for t in self.var_tags]
        m, n = self.constraint_matrix.shape
        if self.rhs.shape[0] != m or len(self.var_tags) != n:
            raise ValueError("inconsistent standard-form dimensions")
        for arr in (self.cost, self.constraint_matrix, self.rhs):
            if not np.all(np.isfinite(arr)):
                raise ValueError("standard form contains non-finite entries")
        if not self.n_original:
            self.n_original = n

    @property
    def shape(self) -> tuple[int, int]:
        return self.constraint_matrix.shape

    def dump(self) -> str:
        """Plain-text interchange format.

        Grammar::

            STANDARDFORM <rows> <cols>
            COST <c_1> ... <c_cols>
            TAGS <F|N> ... <F|N>
            ROW <a_i1> ... <a_icols> = <b_i>        (one line per row)
        """
        buf = io.StringIO()
        m, n = self.shape
        buf.write(f"STANDARDFORM {m} {n}\n")
        buf.write("COST " + " ".join(repr(float(v)) for v in self.cost) + "\n")
        buf.write("TAGS " + " ".join(t.value for t in self.var_tags) + "\n")
        for row, b in zip(self.constraint_matrix, self.rhs):
            buf.write("ROW " + " ".join(repr(float(v)) for v in row) + f" = {float(b)!r}\n")
        return buf.getvalue()

    @classmethod
    def load(cls, text: str) -> "StandardForm":
        lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0][0] != "STANDARDFORM":
            raise ValueError("missing STANDARDFORM header")
        m, n = int(lines[0][1]), int(lines[0][2])
        if lines[1][0] != "COST" or lines[2][0] != "TAGS":
            raise ValueError("expected COST and TAGS lines")
        cost = [float(v) for v in lines[1][1:]]
        tags = lines[2][1:]
        rows, rhs = [], []
        for ln in lines[3:]:
            if ln[0] != "ROW" or ln[-2] != "=":
                raise ValueError(f"malformed row line: {' '.join(ln)}")
            rows.append([float(v) for v in ln[1:-2]])
            rhs.append(float(ln[-1]))
        if len(cost) != n or len(tags) != n or len(rows) != m:
            raise ValueError("dimension line disagrees with body")
        return cls(cost, np.array(rows).reshape(m, n), rhs, tags)


def to_standard_form(p: ConeProgram) -> StandardForm:
    """Add one slack per inequality row; free variables stay free.

    Variables are ordered ``[x, halfspace slacks, cone slacks]``; rows are
    ordered ``[halfspace, cone, equality]``.  A maximization is negated.
    """
    n = p.dim
    k = len(p.halfspace_offsets)
    c = len(p.cone_normals)
    e = len(p.eq_rhs)
    total = n + k + c
    mat = np.zeros((k + c + e, total))
    mat[:k, :n] = p.halfspace_normals
    mat[:k, n:n + k] = np.eye(k)
    mat[k:k + c, :n] = -p.cone_normals
    mat[k:k + c, n + k:] = np.eye(c)
    mat[k + c:, :n] = p.eq_matrix
    rhs = np.concatenate([p.halfspace_offsets, np.zeros(c), p.eq_rhs])
    sign = -1.0 if p.sense == "max" else 1.0
    cost = np.concatenate([sign * p.objective, np.zeros(k + c)])
    tags = [VarTag.NONNEG if nn else VarTag.FREE for nn in p.nonneg] + [VarTag.NONNEG] * (k + c)
    kinds = ["halfspace"] * k + ["cone"] * c + ["equality"] * e
    return StandardForm(cost, mat, rhs, tags, n_original=n, sign=sign, row_kinds=kinds)


class LPBackend(TypingProtocol):
    def solve(self, sf: StandardForm) -> ProgramSolution: ...


class ReferenceSimplex:
    """Dense two-phase revised simplex with Bland's anti-cycling rule."""

    def __init__(self, tol: float = SOLVE_TOL, max_iter: int = 50_000):
        self.tol = tol
        self.max_iter = max_iter

    def solve(self, sf: StandardForm) -> ProgramSolution:
        A0 = sf.constraint_matrix
        m, n = A0.shape
        free = [j for j, t in enumerate(sf.var_tags) if t is VarTag.FREE]
        # split free variables: z_j = z_j+ - z_j-, negative parts appended
        A = np.hstack([A0, -A0[:, free]]) if free else A0.copy()
        cost = np.concatenate([sf.cost, -sf.cost[free]]) if free else sf.cost.copy()
        b = sf.rhs.copy()
        flip = b < 0
        A[flip] *= -1.0
        b[flip] *= -1.0
        N = A.shape[1]

        # crash basis from identity columns already present (slacks)
        basis = [-1] * m
        for j in range(N):
            col = A[:, j]
            nz = np.flatnonzero(col)
            if len(nz) == 1 and col[nz[0]] == 1.0 and basis[nz[0]] < 0:
                basis[nz[0]] = j
        art_rows = [i for i in range(m) if basis[i] < 0]
        iters = 0
        active_rows = np.arange(m)
        if art_rows:
            art = np.zeros((m, len(art_rows)))
            for a, i in enumerate(art_rows):
                art[i, a] = 1.0
                basis[i] = N + a
            A1 = np.hstack([A, art])
            c1 = np.concatenate([np.zeros(N), np.ones(len(art_rows))])
            status, basis, it, pi1 = self._iterate(A1, b, c1, basis)
            iters += it
            if status is not Status.OPTIMAL:
                return ProgramSolution(Status.NUMERICAL_FAILURE, iterations=iters)
            xb = self._basic_values(A1, b, basis)
            infeas = float(sum(xb[i] for i, j in enumerate(basis) if j >= N))
            if infeas > self.tol * max(1.0, float(np.abs(b).max(initial=0.0))):
                y = pi1.copy()
                y[flip] *= -1.0
                return ProgramSolution(Status.INFEASIBLE, farkas=y, iterations=iters,
                                       residuals={"phase1_infeasibility": infeas})
            basis, keep = self._drive_out_artificials(A1, basis, N)
            active_rows = np.asarray(keep)
            A = A[keep]
            b = b[keep]
        status, basis, it, pi = self._iterate(A, b, cost, basis)
        iters += it
        if status is not Status.OPTIMAL:
            return ProgramSolution(status, iterations=iters)

        xb = self._basic_values(A, b, basis)
        zsplit = np.zeros(N)
        zsplit[basis] = xb
        z = zsplit[:n].copy()
        if free:
            z[free] -= zsplit[n:]
        prices = np.zeros(m)
        prices[active_rows] = pi
        prices[flip] *= -1.0
        return self._certify(sf, z, prices, iters)

    def _certify(self, sf: StandardForm, z, prices, iters) -> ProgramSolution:
        A, b, c = sf.constraint_matrix, sf.rhs, sf.cost
        nonneg = np.array([t is VarTag.NONNEG for t in sf.var_tags])
        d = c - A.T @ prices
        primal = float(c @ z)
        dual = float(b @ prices)
        res = {
            "primal_feasibility": float(np.max(np.abs(A @ z - b), initial=0.0)),
            "sign": float(max(0.0, -np.min(z[nonneg], initial=0.0))),
            "dual_feasibility": max(float(max(0.0, -np.min(d[nonneg], initial=0.0))),
                                    float(np.max(np.abs(d[~nonneg]), initial=0.0))),
            "complementary_slackness": float(np.abs(z[nonneg] @ d[nonneg])) if nonneg.any() else 0.0,
        }
        scale = max(1.0, float(np.abs(b).max(initial=0.0)), float(np.abs(c).max(initial=0.0)))
        bad = max(res.values()) > CERT_TOL * scale or abs(primal - dual) > CERT_TOL * scale
        status = Status.NUMERICAL_FAILURE if bad else Status.OPTIMAL
        return ProgramSolution(status, primal_point=z, primal_value=primal, dual_weights=prices,
                               dual_value=dual, reduced_costs=d, residuals=res, iterations=iters)

    @staticmethod
    def _basic_values(A, b, basis):
        return np.linalg.solve(A[:, basis], b)

    def _iterate(self, A, b, c, basis):
        basis = list(basis)
        m = A.shape[0]
        in_basis = np.zeros(A.shape[1], dtype=bool)
        in_basis[basis] = True
        pi = np.zeros(m)
        for it in range(self.max_iter):
            try:
                lu = scipy.linalg.lu_factor(A[:, basis], check_finite=False)
            except (ValueError, np.linalg.LinAlgError):
                return Status.NUMERICAL_FAILURE, basis, it, pi
            xb = scipy.linalg.lu_solve(lu, b)
            pi = scipy.linalg.lu_solve(lu, c[basis], trans=1)
            d = c - A.T @ pi
            cand = np.flatnonzero((d < -self.tol) & ~in_basis)
            if len(cand) == 0:
                return Status.OPTIMAL, basis, it, pi
            j = int(cand[0])  # Bland: lowest index enters
            u = scipy.linalg.lu_solve(lu, A[:, j])
            pos = np.flatnonzero(u > _PIVOT_TOL)
            if len(pos) == 0:
                return Status.UNBOUNDED, basis, it, pi
            ratios = np.maximum(xb[pos], 0.0) / u[pos]
            best = ratios.min()
            ties = pos[ratios <= best + self.tol * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: basis[i]))  # Bland: lowest leaving index
            in_basis[basis[r]] = False
            basis[r] = j
            in_basis[j] = True
        logger.warning("simplex hit iteration limit %d", self.max_iter)
        return Status.NUMERICAL_FAILURE, basis, self.max_iter, pi

    def _drive_out_artificials(self, A1, basis, N):
        basis = list(basis)
        m = A1.shape[0]
        redundant = []
        for r in range(m):
            if basis[r] < N:
                continue
            binv_row = np.linalg.solve(A1[:, basis].T, np.eye(m)[r])
            alpha = binv_row @ A1[:, :N]
            alpha[[j for j in basis if j < N]] = 0.0
            cand = np.flatnonzero(np.abs(alpha) > 1e-9)
            if len(cand):
                basis[r] = int(cand[0])
            else:
                redundant.append(r)
        keep = [r for r in range(m) if r not in redundant]
        return [basis[r] for r in keep], keep


class ScipyHighs:
    """Alternative backend on scipy's HiGHS; handy for cross-checking."""

    def solve(self, sf: StandardForm) -> ProgramSolution:
        from scipy.optimize import linprog

        bounds = [(0, None) if t is VarTag.NONNEG else (None, None) for t in sf.var_tags]
        res = linprog(sf.cost, A_eq=sf.constraint_matrix, b_eq=sf.rhs, bounds=bounds, method="highs")
        if res.status == 2:
            return ProgramSolution(Status.INFEASIBLE)
        if res.status == 3:
            return ProgramSolution(Status.UNBOUNDED)
        if not res.success:
            return ProgramSolution(Status.NUMERICAL_FAILURE)
        prices = np.asarray(res.eqlin.marginals, dtype=float)
        return ReferenceSimplex()._certify(sf, np.asarray(res.x, dtype=float), prices, int(res.nit))


DEFAULT_BACKEND: LPBackend = ReferenceSimplex()


def solve_lp(sf: StandardForm, backend: LPBackend | None = None) -> ProgramSolution:
    return (backend or DEFAULT_BACKEND).solve(sf)


def solve_program(p: ConeProgram, backend: LPBackend | None = None) -> ProgramSolution:
    """Solve a ConeProgram and pull the solution back to its own variables.

    Multipliers are reported in the sign convention of the original
    program: inequality weights are nonnegative, and for a maximization the
    dual value is ``offsets @ dual_weights + eq_rhs @ eq_weights``.
    """
    sf = to_standard_form(p)
    raw = solve_lp(sf, backend)
    if not raw.optimal:
        return ProgramSolution(raw.status, residuals=raw.residuals, farkas=raw.farkas, iterations=raw.iterations)
    n, k, c = p.dim, len(p.halfspace_offsets), len(p.cone_normals)
    x = raw.primal_point[:n]
    slack = raw.primal_point[n:]
    # slack reduced costs force pi <= 0 on inequality rows; the standard
    # form value is sign * (original value)
    pi = raw.dual_weights.copy()
    # prices of basic slacks are zero up to round-off
    pi[np.abs(pi) <= 1e-13 * (1.0 + np.max(np.abs(pi), initial=0.0))] = 0.0
    s = sf.sign
    y = -pi[:k] + 0.0
    z = -pi[k:k + c] + 0.0
    w = s * pi[k + c:]
    primal = float(p.objective @ x)
    dual = float(s * (sf.rhs @ pi))
    res = dict(raw.residuals)
    comp = 0.0
    if k:
        comp += float(np.abs(y @ slack[:k]))
    if c:
        comp += float(np.abs(z @ slack[k:k + c]))
    res["complementary_slackness"] = comp
    res["weight_sign"] = float(max(0.0, -np.min(np.concatenate([y, z]), initial=0.0)))
    res.update({f"row_{kk}": v for kk, v in p.row_residuals(x).items()})
    return ProgramSolution(Status.OPTIMAL, primal_point=x, primal_value=primal, dual_weights=y,
                           dual_value=dual, cone_weights=z, eq_weights=w,
                           reduced_costs=raw.reduced_costs, residuals=res, iterations=raw.iterations)
