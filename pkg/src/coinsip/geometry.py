"""Finite-dimensional convex bodies and cones.

Strategy sets live in R^n with the standard dot product as the pairing.
Four body representations are supported:

* ``VertexHull``             conv(points)
* ``HalfspaceIntersection``  {x : normals @ x <= offsets}
* ``Ball``                   {x : |x - center| <= radius}
* ``Lifted``                 conv({0} U {(1, s) : s in base}), the cone slice
                             of sub-normalized strategies over a state space

Polytopal computations are exact in the sense that polars and dual cones of
vertex hulls are written down row by row; facet/vertex enumeration is only
used at desk-scale dimensions.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.optimize
import scipy.spatial

from .conesolver import ConeProgram, solve_program

DEDUP_TOL = 1e-8
FACET_ENUM_MAX_DIM = 4
_MEMBER_TOL = 1e-9


class GeometryError(ValueError):
    pass


class NonPolyhedralError(GeometryError):
    """Raised when a polyhedral-only operation meets a smooth body."""


def as_vec(x) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.size == 0:
        raise GeometryError("vectors must have dimension >= 1")
    if not np.all(np.isfinite(v)):
        raise GeometryError("vector has non-finite coordinates")
    return v


def as_rows(x, dim: int | None = None) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size else a.reshape(0, dim or 0)
    if dim is not None and a.shape[1] != dim:
        raise GeometryError(f"expected rows of length {dim}, got {a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise GeometryError("array has non-finite entries")
    return a


def inner(a, b) -> float:
    a, b = as_vec(a), as_vec(b)
    if a.shape != b.shape:
        raise GeometryError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(a @ b)


def dedupe(points: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    """Drop points within ``tol`` of an earlier point, keeping first occurrences."""
    kept: list[np.ndarray] = []
    for p in np.asarray(points, dtype=float):
        if all(np.linalg.norm(p - q) > tol for q in kept):
            kept.append(p)
    if not kept:
        return np.zeros((0, np.asarray(points).shape[-1]))
    return np.array(kept)


def canonical_order(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return pts
    pts = np.where(np.abs(pts) < 1e-14, 0.0, pts) + 0.0
    keys = np.round(pts, 9)
    order = np.lexsort(keys.T[::-1])
    return pts[order]


def min_norm_point(points: np.ndarray, tol: float = 1e-12, max_iter: int = 1000) -> np.ndarray:
    """Point of smallest Euclidean norm in conv(points), by Wolfe's algorithm."""
    P = np.asarray(points, dtype=float)
    scale = max(1.0, float(np.max(np.sum(P * P, axis=1))))
    S = [int(np.argmin(np.sum(P * P, axis=1)))]
    lam = np.array([1.0])
    x = P[S[0]].copy()
    for _ in range(max_iter):
        j = int(np.argmin(P @ x))
        if x @ x - P[j] @ x <= tol * scale or j in S:
            return x
        S.append(j)
        lam = np.append(lam, 0.0)
        while True:
            Q = P[S]
            k = len(S)
            kkt = np.zeros((k + 1, k + 1))
            kkt[:k, :k] = Q @ Q.T
            kkt[:k, k] = 1.0
            kkt[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            alpha = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:k]
            if np.all(alpha > tol):
                lam = alpha
                x = lam @ Q
                break
            neg = alpha <= tol
            denom = lam[neg] - alpha[neg]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(denom > 0, lam[neg] / denom, np.inf)
            theta = min(1.0, float(np.min(ratios)))
            lam = theta * alpha + (1 - theta) * lam
            keep = lam > tol
            if not keep.any():
                keep[int(np.argmax(lam))] = True
            S = [s for s, kp in zip(S, keep) if kp]
            lam = lam[keep]
            lam = lam / lam.sum()
            x = lam @ P[S]
    return x


def chebyshev_center(normals: np.ndarray, offsets: np.ndarray) -> tuple[np.ndarray, float]:
    """Center and radius of the largest ball inside {x : normals @ x <= offsets}."""
    A = as_rows(normals)
    b = np.asarray(offsets, dtype=float)
    norms = np.linalg.norm(A, axis=1)
    live = norms > 0
    if np.any(b[~live] < -_MEMBER_TOL):
        raise GeometryError("infeasible zero row in halfspace description")
    A, b, norms = A[live], b[live], norms[live]
    n = A.shape[1]
    obj = np.zeros(n + 1)
    obj[-1] = 1.0
    prog = ConeProgram(obj, np.hstack([A, norms[:, None]]), b, np.zeros((0, n + 1)),
                       nonneg=np.r_[np.zeros(n, dtype=bool), True])
    sol = solve_program(prog)
    if not sol.optimal:
        raise GeometryError(f"Chebyshev center LP failed: {sol.status.value}")
    return sol.primal_point[:n], float(sol.primal_point[n])


class ConvexBody:
    """Base class; subclasses are immutable after construction."""

    ambient_dim: int

    @property
    def is_polytope(self) -> bool:
        return True

    def support(self, direction) -> float:
        """max over the body of <direction, x>."""
        raise NotImplementedError

    def distance(self, x) -> float:
        raise NotImplementedError

    def contains(self, x, tol: float = _MEMBER_TOL) -> bool:
        return self.distance(x) <= tol

    def contains_many(self, X: np.ndarray, tol: float = _MEMBER_TOL) -> np.ndarray:
        return np.array([self.contains(x, tol) for x in X], dtype=bool)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def as_polytope(self) -> "VertexHull | HalfspaceIntersection":
        raise NonPolyhedralError(f"{type(self).__name__} is not polyhedral")

    def vertex_hull(self) -> "VertexHull":
        p = self.as_polytope()
        return p if isinstance(p, VertexHull) else VertexHull(extreme_points(p))

    def extreme_set_sample(self, k: int, rng: np.random.Generator) -> np.ndarray:
        """Points drawn from the set of extreme points."""
        return self.vertex_hull().points


@dataclass(frozen=True, eq=False)
class VertexHull(ConvexBody):
    points: np.ndarray

    def __post_init__(self):
        pts = as_rows(self.points)
        if len(pts) == 0:
            raise GeometryError("VertexHull needs at least one point")
        object.__setattr__(self, "points", pts)

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def as_polytope(self):
        return self

    @cached_property
    def full_dimensional(self) -> bool:
        d = self.points - self.points[0]
        return np.linalg.matrix_rank(d, tol=1e-10) == self.ambient_dim

    @cached_property
    def facets(self) -> tuple[np.ndarray, np.ndarray]:
        """Halfspace rows (unit normals, offsets) of a full-dimensional hull."""
        n = self.ambient_dim
        if not self.full_dimensional:
            raise GeometryError("hull is not full-dimensional")
        if n == 1:
            lo, hi = self.points.min(), self.points.max()
            return np.array([[1.0], [-1.0]]), np.array([hi, -lo])
        hull = scipy.spatial.ConvexHull(self.points)
        eq = hull.equations
        rows = dedupe(np.round(eq, 12), 1e-10)
        return rows[:, :-1], -rows[:, -1]

    def support(self, direction) -> float:
        return float(np.max(self.points @ as_vec(direction)))

    def distance(self, x) -> float:
        x = as_vec(x)
        if x.shape[0] != self.ambient_dim:
            raise GeometryError("dimension mismatch")
        return float(np.linalg.norm(min_norm_point(self.points - x)))

    def contains_many(self, X, tol=_MEMBER_TOL):
        if self.full_dimensional:
            A, b = self.facets
            return np.all(X @ A.T - b <= tol, axis=1)
        return super().contains_many(X, tol)

    def bounding_box(self):
        return self.points.min(axis=0), self.points.max(axis=0)


@dataclass(frozen=True, eq=False)
class HalfspaceIntersection(ConvexBody):
    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        A = as_rows(self.normals)
        b = np.asarray(self.offsets, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise GeometryError("normals and offsets differ in length")
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", b)

    @property
    def ambient_dim(self) -> int:
        return self.normals.shape[1]

    def as_polytope(self):
        return self

    def row_violation(self, x) -> float:
        x = as_vec(x)
        norms = np.linalg.norm(self.normals, axis=1)
        live = norms > 0
        viol = (self.normals[live] @ x - self.offsets[live]) / norms[live]
        dead = self.offsets[~live]
        worst = float(np.max(viol, initial=-np.inf))
        if np.any(dead < 0):
            worst = max(worst, float(-dead.min()))
        return worst

    def distance(self, x) -> float:
        return max(0.0, self.row_violation(x))

    def contains_many(self, X, tol=_MEMBER_TOL):
        norms = np.linalg.norm(self.normals, axis=1)
        norms[norms == 0] = 1.0
        return np.all((X @ self.normals.T - self.offsets) / norms <= tol, axis=1)

    @cached_property
    def is_bounded(self) -> bool:
        n = self.ambient_dim
        for j, sgn in itertools.product(range(n), (1.0, -1.0)):
            obj = np.zeros(n)
            obj[j] = sgn
            box = np.vstack([np.eye(n), -np.eye(n)])
            prog = ConeProgram(obj, np.vstack([self.normals, box]),
                               np.r_[np.zeros(len(self.offsets)), np.ones(2 * n)], np.zeros((0, n)))
            sol = solve_program(prog)
            if not sol.optimal or sol.primal_value > 1e-9:
                return False
        return True

    @cached_property
    def chebyshev(self) -> tuple[np.ndarray, float]:
        if not self.is_bounded:
            raise GeometryError("halfspace intersection is unbounded")
        return chebyshev_center(self.normals, self.offsets)

    def support(self, direction) -> float:
        d = as_vec(direction)
        prog = ConeProgram(d, self.normals, self.offsets, np.zeros((0, self.ambient_dim)))
        sol = solve_program(prog)
        if not sol.optimal:
            raise GeometryError(f"support LP failed: {sol.status.value}")
        return sol.primal_value

    def bounding_box(self):
        v = extreme_points(self)
        return v.min(axis=0), v.max(axis=0)


@dataclass(frozen=True, eq=False)
class Ball(ConvexBody):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec(self.center))
        r = float(self.radius)
        if not (r >= 0 and math.isfinite(r)):
            raise GeometryError("radius must be finite and >= 0")
        object.__setattr__(self, "radius", r)

    @property
    def ambient_dim(self) -> int:
        return self.center.shape[0]

    @property
    def is_polytope(self) -> bool:
        return False

    def support(self, direction) -> float:
        d = as_vec(direction)
        return float(d @ self.center + self.radius * np.linalg.norm(d))

    def distance(self, x) -> float:
        return max(0.0, float(np.linalg.norm(as_vec(x) - self.center)) - self.radius)

    def contains_many(self, X, tol=_MEMBER_TOL):
        return np.linalg.norm(X - self.center, axis=1) <= self.radius + tol

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def extreme_set_sample(self, k, rng):
        u = rng.standard_normal((k, self.ambient_dim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        return self.center + self.radius * u


@dataclass(frozen=True, eq=False)
class Lifted(ConvexBody):
    """conv({0} U {(1, s) : s in base}) in dimension base.ambient_dim + 1."""

    base: ConvexBody

    @property
    def ambient_dim(self) -> int:
        return self.base.ambient_dim + 1

    @property
    def is_polytope(self) -> bool:
        return self.base.is_polytope

    @cached_property
    def _hull(self) -> VertexHull:
        verts = self.base.vertex_hull().points
        lifted = np.hstack([np.ones((len(verts), 1)), verts])
        return VertexHull(np.vstack([np.zeros(self.ambient_dim), lifted]))

    def as_polytope(self):
        if not self.base.is_polytope:
            raise NonPolyhedralError("lift of a smooth body is not polyhedral")
        return self._hull

    def support(self, direction) -> float:
        d = as_vec(direction)
        return max(0.0, float(d[0]) + self.base.support(d[1:]))

    def distance(self, x) -> float:
        if self.base.is_polytope:
            return self._hull.distance(x)
        x = as_vec(x)
        t0, y0 = float(x[0]), x[1:]
        if 0.0 <= t0 <= 1.0 and self._slice_gap(t0, y0) <= 0.0:
            return 0.0

        def h(t):
            return (t - t0) ** 2 + self._slice_gap(t, y0) ** 2

        res = scipy.optimize.minimize_scalar(h, bounds=(0.0, 1.0), method="bounded",
                                             options={"xatol": 1e-12})
        best = min(h(0.0), h(1.0), float(res.fun))
        return math.sqrt(max(best, 0.0))

    def _slice_gap(self, t: float, y: np.ndarray) -> float:
        """Distance from y to the slice t * base (Ball bases only)."""
        b = self.base
        if not isinstance(b, Ball):
            raise NonPolyhedralError("smooth lifts are supported over balls only")
        return max(0.0, float(np.linalg.norm(y - t * b.center)) - t * b.radius)

    def contains_many(self, X, tol=_MEMBER_TOL):
        if self.base.is_polytope:
            return self._hull.contains_many(X, tol)
        b = self.base
        t = X[:, 0]
        gap = np.linalg.norm(X[:, 1:] - t[:, None] * b.center, axis=1) - t * b.radius
        return (t >= -tol) & (t <= 1 + tol) & (gap <= tol)

    def bounding_box(self):
        lo, hi = self.base.bounding_box()
        return np.r_[0.0, np.minimum(lo, 0.0)], np.r_[1.0, np.maximum(hi, 0.0)]

    def extreme_set_sample(self, k, rng):
        if self.base.is_polytope:
            return self._hull.points
        s = self.base.extreme_set_sample(k, rng)
        return np.hstack([np.ones((len(s), 1)), s])


@dataclass(frozen=True, eq=False)
class Cone:
    """Closed convex cone, by generating rays or by inward normals."""

    rays: np.ndarray | None = None
    normals: np.ndarray | None = None
    dim: int | None = None

    def __post_init__(self):
        if (self.rays is None) == (self.normals is None):
            raise GeometryError("give exactly one of rays or normals")
        vecs = self.rays if self.rays is not None else self.normals
        dim = self.dim if self.dim is not None else as_rows(vecs).shape[1]
        arr = as_rows(vecs, dim)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "rays" if self.rays is not None else "normals", arr)

    @classmethod
    def from_rays(cls, rays, dim=None) -> "Cone":
        return cls(rays=rays, dim=dim)

    @classmethod
    def from_normals(cls, normals, dim=None) -> "Cone":
        return cls(normals=normals, dim=dim)

    def contains(self, x, tol: float = _MEMBER_TOL) -> bool:
        x = as_vec(x)
        if self.normals is not None:
            if len(self.normals) == 0:
                return True
            norms = np.linalg.norm(self.normals, axis=1)
            norms[norms == 0] = 1.0
            return bool(np.min(self.normals @ x / norms) >= -tol)
        if len(self.rays) == 0:
            return bool(np.linalg.norm(x) <= tol)
        _, resid = scipy.optimize.nnls(self.rays.T, x)
        return bool(resid <= tol * max(1.0, float(np.linalg.norm(x))))

    def to_normals(self) -> np.ndarray:
        if self.normals is not None:
            return self.normals
        # facets of cone(R) are the extreme rays of its dual {f : R f >= 0}
        return _extreme_rays(self.rays, self.dim)

    def to_rays(self) -> np.ndarray:
        if self.rays is not None:
            return self.rays
        return _extreme_rays(self.normals, self.dim)


def _null_space(M: np.ndarray, n: int, tol: float = 1e-10) -> np.ndarray:
    if M.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return vt[rank:].T


def _extreme_rays(M: np.ndarray, n: int, max_subsets: int = 200_000) -> np.ndarray:
    """Generators of {x : M x >= 0}: lineality basis (both signs) plus extreme rays."""
    M = as_rows(M, n)
    M = M[np.linalg.norm(M, axis=1) > 0]
    L = _null_space(M, n)
    gens: list[np.ndarray] = []
    for v in L.T:
        gens.extend([v, -v])
    Q = _null_space(L.T, n) if L.shape[1] else np.eye(n)
    k = Q.shape[1]
    if k == 0:
        return canonical_order(dedupe(np.array(gens))) if gens else np.zeros((0, n))
    Mr = M @ Q
    if math.comb(len(Mr), k - 1) > max_subsets:
        raise GeometryError("too many normals for ray enumeration")
    scale = max(1.0, float(np.max(np.abs(Mr), initial=0.0)))
    for subset in itertools.combinations(range(len(Mr)), k - 1):
        N = _null_space(Mr[list(subset)], k)
        if N.shape[1] != 1:
            continue
        r = N[:, 0]
        for cand in (r, -r):
            if np.min(Mr @ cand, initial=0.0) >= -1e-10 * scale:
                v = Q @ cand
                gens.append(v / np.linalg.norm(v))
    if not gens:
        return np.zeros((0, n))
    return canonical_order(dedupe(np.array(gens)))


def membership(c: ConvexBody, x, tol: float = _MEMBER_TOL) -> bool:
    """True iff x lies within ``tol`` of c.

    Halfspace intersections are checked row by row (distance to each
    halfspace); vertex hulls by an exact projection onto the hull.
    """
    if tol <= 0:
        raise GeometryError("tol must be positive")
    x = as_vec(x)
    if x.shape[0] != c.ambient_dim:
        raise GeometryError("dimension mismatch")
    return c.contains(x, tol)


def polar(c: ConvexBody) -> ConvexBody:
    """{W : <W, Z> <= 1 for all Z in c}."""
    if not membership(c, np.zeros(c.ambient_dim), _MEMBER_TOL):
        raise GeometryError("polar requires the origin to lie in the body")
    if isinstance(c, Ball):
        if np.linalg.norm(c.center) > 0:
            raise NonPolyhedralError("polar of an off-center ball is not supported")
        if c.radius == 0:
            raise GeometryError("polar of a point is unbounded")
        return Ball(np.zeros(c.ambient_dim), 1.0 / c.radius)
    if isinstance(c, Lifted):
        return polar(c.as_polytope())
    if isinstance(c, VertexHull):
        V = c.points[np.linalg.norm(c.points, axis=1) > 0]
        return HalfspaceIntersection(V, np.ones(len(V)))
    if isinstance(c, HalfspaceIntersection):
        live = np.linalg.norm(c.normals, axis=1) > 0
        A, b = c.normals[live], c.offsets[live]
        if np.any(b <= _MEMBER_TOL):
            raise GeometryError("origin on the boundary: polar is unbounded")
        return VertexHull(np.vstack([np.zeros(c.ambient_dim), A / b[:, None]]))
    raise GeometryError(f"unsupported body {type(c).__name__}")


def dual_cone(c: ConvexBody | Cone) -> Cone:
    """{W : <W, Z> >= 0 for all Z in c}."""
    if isinstance(c, Cone):
        if c.rays is not None:
            return Cone.from_normals(c.rays, c.dim)
        return Cone.from_rays(c.normals, c.dim)
    V = c.vertex_hull().points
    V = V[np.linalg.norm(V, axis=1) > 0]
    return Cone.from_normals(V, c.ambient_dim)


def gnrh_closure(a: ConvexBody) -> HalfspaceIntersection:
    """Largest set of partner strategies that pairs with ``a`` into [0, 1].

    Returns dual_cone(a) intersected with polar(a), as one ``>= 0`` row and
    one ``<= 1`` row per nonzero vertex.
    """
    V = a.vertex_hull().points
    if not membership(a, np.zeros(a.ambient_dim)):
        raise GeometryError("strategy set must contain the zero strategy")
    V = V[np.linalg.norm(V, axis=1) > 0]
    n = a.ambient_dim
    if len(V) == 0 or np.linalg.matrix_rank(V, tol=1e-10) < n:
        raise GeometryError("closure is unbounded: vertices do not span the space")
    body = HalfspaceIntersection(np.vstack([-V, V]), np.r_[np.zeros(len(V)), np.ones(len(V))])
    _, r = body.chebyshev
    if r <= 1e-9:
        raise GeometryError("closure has empty interior")
    return body


def closure_contains(a: ConvexBody, w, tol: float = _MEMBER_TOL) -> bool:
    """Membership in the closure of ``a`` via support functions; works for smooth bodies."""
    w = as_vec(w)
    return a.support(w) <= 1.0 + tol and a.support(-w) <= tol


def interior_point(c: ConvexBody) -> np.ndarray:
    """Chebyshev center: center of the largest inscribed ball."""
    center, radius = _chebyshev(c)
    if radius <= 1e-9:
        raise GeometryError("body has empty interior")
    return center


def chebyshev_radius(c: ConvexBody) -> float:
    return _chebyshev(c)[1]


def _chebyshev(c: ConvexBody) -> tuple[np.ndarray, float]:
    if isinstance(c, Ball):
        return c.center.copy(), c.radius
    if isinstance(c, HalfspaceIntersection):
        return c.chebyshev
    if isinstance(c, VertexHull):
        if not c.full_dimensional:
            return c.points.mean(axis=0), 0.0
        A, b = c.facets
        return chebyshev_center(A, b)
    if isinstance(c, Lifted):
        if c.base.is_polytope:
            return _chebyshev(c.as_polytope())
        b = c.base
        if not isinstance(b, Ball) or np.linalg.norm(b.center) > 0:
            raise NonPolyhedralError("Chebyshev center of a lift needs a centered ball base")
        # cone of half-angle atan(r) capped at t = 1: radius min(t sin a, 1 - t)
        sin_a = b.radius / math.hypot(1.0, b.radius)
        t = 1.0 / (1.0 + sin_a)
        return np.r_[t, np.zeros(b.ambient_dim)], 1.0 - t
    raise GeometryError(f"unsupported body {type(c).__name__}")


def extreme_points(c: ConvexBody) -> np.ndarray:
    """Minimal vertex list, deduplicated to DEDUP_TOL, in canonical order."""
    if isinstance(c, Lifted):
        c = c.as_polytope()
    if isinstance(c, Ball):
        raise NonPolyhedralError("a ball has no finite vertex set")
    if isinstance(c, VertexHull):
        pts = dedupe(c.points)
        if len(pts) == 1:
            return pts
        if VertexHull(pts).full_dimensional and c.ambient_dim > 1:
            hull = scipy.spatial.ConvexHull(pts)
            cand = set(int(i) for i in hull.vertices)
        else:
            cand = set(range(len(pts)))
        keep = []
        for i in sorted(cand):
            others = np.delete(pts, i, axis=0)
            if np.linalg.norm(min_norm_point(others - pts[i])) > DEDUP_TOL:
                keep.append(i)
        return canonical_order(pts[keep])
    if isinstance(c, HalfspaceIntersection):
        n = c.ambient_dim
        if n > FACET_ENUM_MAX_DIM:
            raise GeometryError(f"vertex enumeration limited to dimension <= {FACET_ENUM_MAX_DIM}")
        center, radius = c.chebyshev
        if radius <= 1e-10:
            raise GeometryError("vertex enumeration needs a full-dimensional body")
        if n == 1:
            lo = max((b / a for a, b in zip(c.normals[:, 0], c.offsets) if a < 0), default=-np.inf)
            hi = min((b / a for a, b in zip(c.normals[:, 0], c.offsets) if a > 0), default=np.inf)
            return np.array([[lo], [hi]])
        live = np.linalg.norm(c.normals, axis=1) > 0
        hs = np.hstack([c.normals[live], -c.offsets[live, None]])
        inter = scipy.spatial.HalfspaceIntersection(hs, center)
        pts = dedupe(inter.intersections)
        return canonical_order(pts)
    raise GeometryError(f"unsupported body {type(c).__name__}")


def sample_points(c: ConvexBody, k: int, rng: np.random.Generator, batch: int = 4096) -> np.ndarray:
    """Uniform samples by rejection from the bounding box."""
    lo, hi = c.bounding_box()
    out: list[np.ndarray] = []
    got = 0
    while got < k:
        X = lo + (hi - lo) * rng.random((batch, len(lo)))
        X = X[c.contains_many(X, 0.0)]
        out.append(X)
        got += len(X)
        if len(out) > 10_000 and got == 0:
            raise GeometryError("rejection sampling found no interior points")
    return np.vstack(out)[:k]


def sample_convex_combinations(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    w = rng.dirichlet(np.ones(len(points)), size=k)
    return w @ points


def set_equal(c1: ConvexBody, c2: ConvexBody, tol: float = DEDUP_TOL) -> bool:
    """Polytope equality by mutual membership of extreme points."""
    v1, v2 = extreme_points(c1), extreme_points(c2)
    return all(c2.contains(v, tol) for v in v1) and all(c1.contains(v, tol) for v in v2)
