"""Bob's cheating problem as a semi-infinite program and its discretization.

Bob maximizes ``<A_b, B>`` over ``B`` in the dual cone of Alice's set subject
to ``<B, A> <= 1`` for every ``A`` in her (infinite) set.  Replacing her set
by a finite mesh gives a linear program whose value ``p_delta`` is an upper
bound on the true value.  Feasible points of the discretized program have
Euclidean norm at most ``tau``, which turns the mesh fineness into the
enclosure ``p_delta / (1 + tau * r) <= P* <= p_delta`` (``r`` the certified
covering radius).

When Alice's set is smooth its dual cone is not polyhedral; the cone rows
are then taken from the mesh as well.  That is still a relaxation, and
shifting a feasible point by ``tau * r`` times the unit effect restores
feasibility for the full problem, so the lower end becomes
``p_delta / (1 + 2 tau r)``.
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .conesolver import ConeProgram, LPBackend, ProgramSolution, Status, solve_program
from .geometry import Cone, ConvexBody
from .mesh import Mesh, build_mesh
from .protocol import Protocol

logger = logging.getLogger(__name__)

SWEEP_HEADER = ["delta", "p_delta", "lower", "upper", "gap", "status"]


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class SandwichEnclosure:
    p_delta: float
    lower: float
    upper: float
    tau: float
    delta: float
    covering_radius: float
    cone_exact: bool

    @classmethod
    def from_value(cls, p_delta: float, tau: float, delta: float, radius: float,
                   cone_exact: bool) -> "SandwichEnclosure":
        slack = tau * radius if cone_exact else 2.0 * tau * radius
        return cls(p_delta, p_delta / (1.0 + slack), p_delta, tau, delta, radius, cone_exact)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol


def _strict_point(normals: np.ndarray, offsets: np.ndarray, body: ConvexBody | None,
                  cone_normals: np.ndarray) -> np.ndarray | None:
    """Half the Chebyshev center of Bob's region: strictly feasible."""
    try:
        if body is not None and body.is_polytope:
            center = geo.interior_point(geo.gnrh_closure(body))
        else:
            rows = np.vstack([normals, -cone_normals])
            rhs = np.r_[offsets, np.zeros(len(cone_normals))]
            center, radius = geo.chebyshev_center(rows, rhs)
            if radius <= 1e-12:
                return None
    except geo.GeometryError:
        return None
    x = 0.5 * center
    live = np.linalg.norm(cone_normals, axis=1) > 0
    if np.all(normals @ x < offsets) and np.all(cone_normals[live] @ x > 0):
        return x
    return None


def build_discretized_primal(a0, m: Mesh, a_star: Cone | None, body: ConvexBody | None = None) -> ConeProgram:
    """max <a0, B>  s.t.  <B, X> <= 1 for mesh points X,  B in a_star.

    One halfspace row per mesh point, in mesh order, so halfspace weights are
    indexed like the mesh.  ``a_star=None`` takes the cone rows from the mesh.
    """
    a0 = geo.as_vec(a0)
    if a0.shape[0] != m.dim:
        raise geo.GeometryError(f"objective has dimension {a0.shape[0]}, mesh {m.dim}")
    if a_star is None:
        cone_rows = m.points[np.linalg.norm(m.points, axis=1) > 0]
        exact = False
    else:
        if a_star.dim != m.dim:
            raise geo.GeometryError("cone and mesh dimensions differ")
        cone_rows = a_star.to_normals()
        exact = True
    offsets = np.ones(len(m.points))
    strict = _strict_point(m.points, offsets, body, cone_rows)
    return ConeProgram(a0, m.points, offsets, cone_rows, sense="max",
                       strictly_feasible_point=strict, cone_exact=exact)


def build_dual(p: ConeProgram, a0, m: Mesh) -> ConeProgram:
    """min sum(y)  s.t.  sum_X y_X X - a0 in (A*)*,  y >= 0.

    The primal's cone is A* = {B : <n, B> >= 0 for its cone rows n}; its dual
    is generated by those rows.  The membership is written with explicit
    generator weights ``z >= 0``, giving variables ``[y (one per mesh point),
    z (one per generator)]``.
    """
    a0 = geo.as_vec(a0)
    gens = geo.dual_cone(Cone.from_normals(p.cone_normals, p.dim)).to_rays()
    nY, nZ = len(m.points), len(gens)
    obj = np.r_[np.ones(nY), np.zeros(nZ)]
    eq = np.hstack([m.points.T, -gens.T])
    return ConeProgram(obj, np.zeros((0, nY + nZ)), [], np.zeros((0, nY + nZ)),
                       eq_matrix=eq, eq_rhs=a0, nonneg=np.ones(nY + nZ, dtype=bool), sense="min",
                       labels={"num_mesh": nY, "num_generators": nZ})


def alice_cone(a: ConvexBody) -> Cone | None:
    """Exact dual cone for polytopal sets, None (mesh relaxation) otherwise."""
    return geo.dual_cone(a) if a.is_polytope else None


def solve_cheating_bob(protocol: Protocol, b: int, m: Mesh,
                       backend: LPBackend | None = None) -> tuple[ProgramSolution, SandwichEnclosure | None]:
    """Discretized value of Bob forcing outcome ``b`` and its enclosure of P*."""
    a = protocol.alice_set
    prog = build_discretized_primal(protocol.alice(b), m, alice_cone(a), a)
    sol = solve_program(prog, backend)
    if not sol.optimal:
        logger.warning("Bob LP for outcome %d failed: %s", b, sol.status.value)
        return sol, None
    if sol.gap > 1e-7:
        sol.status = Status.NUMERICAL_FAILURE
        return sol, None
    enc = SandwichEnclosure.from_value(sol.primal_value, m.tau, m.fineness, m.covering_radius,
                                       prog.cone_exact)
    return sol, enc


@dataclass(frozen=True)
class SweepRow:
    delta: float
    p_delta: float
    lower: float
    upper: float
    gap: float
    status: str
    tau: float = float("nan")
    covering_radius: float = float("nan")

    @property
    def width(self) -> float:
        return self.upper - self.lower


def delta_sweep(protocol: Protocol, b: int, deltas, mode: str = "extreme",
                backend: LPBackend | None = None, samples: int = 10_000, seed: int = 0) -> list[SweepRow]:
    """Solve at each fineness; meshes are nested so p_delta cannot increase.

    A failed solve stops the sweep; the failing row is kept with its status.
    """
    deltas = [float(d) for d in deltas]
    if not deltas:
        raise SweepError("no deltas given")
    if any(d <= 0 for d in deltas):
        raise SweepError("delta must be positive")
    if any(d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])):
        raise SweepError("deltas must be strictly decreasing")
    rows: list[SweepRow] = []
    for d in deltas:
        m = build_mesh(protocol.alice_set, d, mode=mode, samples=samples, seed=seed)
        sol, enc = solve_cheating_bob(protocol, b, m, backend)
        if enc is None:
            rows.append(SweepRow(d, float("nan"), float("nan"), float("nan"), float("nan"),
                                 sol.status.value, m.tau, m.covering_radius))
            break
        rows.append(SweepRow(d, enc.p_delta, enc.lower, enc.upper, sol.gap, sol.status.value,
                             m.tau, m.covering_radius))
    return rows


def sweep_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([repr(r.delta), repr(r.p_delta), repr(r.lower), repr(r.upper), repr(r.gap), r.status])
    return buf.getvalue()
