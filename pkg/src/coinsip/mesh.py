"""Finite meshes of strategy sets.

A mesh of fineness ``delta`` is a finite subset of the body that contains a
basis of the ambient space and comes within ``delta`` of the part of the body
it is meant to cover.  Two coverage modes exist:

``extreme``  cover only the extreme points.  Linear constraints over a convex
             body are decided by its extreme points, so this is all the
             discretized program needs, and it keeps polytopes exact.
``full``     cover every point of the body.

Meshes are built on dyadic refinement levels, so halving ``delta`` only ever
adds points and the coarser mesh is a prefix of the finer one.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy.spatial

from . import geometry as geo
from .geometry import Ball, ConvexBody, GeometryError, Lifted

DEFAULT_SAMPLES = 100_000
MAX_MESH_POINTS = 200_000
_BASIS_SV_MIN = 1e-10


class MeshError(GeometryError):
    pass


@dataclass(frozen=True)
class CoveringCertificate:
    kind: str  # "Exact" or "Sampled"
    bound: float  # analytic covering radius of the covered region
    num_samples: int = 0
    worst_gap: float = 0.0

    def as_dict(self) -> dict:
        return {"kind": self.kind, "bound": self.bound,
                "num_samples": self.num_samples, "worst_gap": self.worst_gap}


@dataclass(eq=False)
class Mesh:
    points: np.ndarray
    fineness: float
    basis_indices: list[int]
    tau: float
    certificate: CoveringCertificate
    mode: str = "extreme"
    level: int = 0
    seed_count: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def covering_radius(self) -> float:
        """Certified distance bound used by enclosures (never above ``fineness``)."""
        return self.certificate.bound

    def __len__(self) -> int:
        return len(self.points)

    def without(self, index: int) -> "Mesh":
        """Copy with one point removed; basis indices are re-pointed."""
        pts = np.delete(self.points, index, axis=0)
        basis = [i - (i > index) for i in self.basis_indices if i != index]
        if len(basis) < self.dim:
            basis = _choose_basis(pts, len(pts))
        cert = CoveringCertificate("Sampled", float("nan"))
        return Mesh(pts, self.fineness, basis, compute_tau_from(pts, basis), cert,
                    self.mode, self.level, min(self.seed_count, len(pts)), dict(self.meta))

    def export(self, path: str | Path) -> tuple[Path, Path]:
        """Write the points as CSV plus a JSON sidecar next to it."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i}" for i in range(self.dim)])
            for p in self.points:
                w.writerow([repr(float(v)) for v in p])
        side = path.with_suffix(".json")
        side.write_text(json.dumps({
            "delta": self.fineness,
            "tau": self.tau,
            "certificate": self.certificate.as_dict(),
            "mode": self.mode,
            "level": self.level,
            "num_points": len(self.points),
            "basis_indices": list(self.basis_indices),
        }, indent=2) + "\n")
        return path, side


def mesh_norm(m: Mesh, y) -> float:
    """max over mesh points X of |<X, y>|; a norm because the points span."""
    y = geo.as_vec(y)
    if y.shape[0] != m.dim:
        raise MeshError("dimension mismatch")
    return float(np.max(np.abs(m.points @ y)))


def compute_tau_from(points: np.ndarray, basis: list[int]) -> float:
    M = points[list(basis)]
    smin = float(np.linalg.svd(M, compute_uv=False).min())
    if smin <= _BASIS_SV_MIN:
        raise MeshError("basis points are (numerically) singular")
    return math.sqrt(M.shape[1]) / smin


def compute_tau(m: Mesh) -> float:
    """sqrt(n) / sigma_min of the basis rows.

    f(B) <= 1 bounds every basis pairing by 1, so |M B|_2 <= sqrt(n), and
    |M B|_2 >= sigma_min |B|_2 gives |B|_2 <= tau.
    """
    return compute_tau_from(m.points, m.basis_indices)


def _choose_basis(points: np.ndarray, prefix: int, max_combos: int = 5000) -> list[int]:
    """Best-conditioned basis, drawn from the coarse prefix when it spans."""
    n = points.shape[1]
    for pool_size in (prefix, len(points)):
        pool = [i for i in range(pool_size) if np.linalg.norm(points[i]) > 0]
        if len(pool) < n or np.linalg.matrix_rank(points[pool], tol=1e-10) < n:
            continue
        if math.comb(len(pool), n) <= max_combos:
            best, best_s = None, -1.0
            for combo in itertools.combinations(pool, n):
                s = np.linalg.svd(points[list(combo)], compute_uv=False).min()
                if s > best_s + 1e-12:
                    best, best_s = list(combo), s
            return best
        # greedy: repeatedly take the point with largest residual off the span
        chosen: list[int] = []
        Q = np.zeros((n, 0))
        for _ in range(n):
            R = points[pool] - (points[pool] @ Q) @ Q.T
            k = int(np.argmax(np.linalg.norm(R, axis=1)))
            chosen.append(pool[k])
            v = R[k] / np.linalg.norm(R[k])
            Q = np.hstack([Q, v[:, None]])
        return chosen
    raise MeshError("mesh points do not contain a basis")


def _dyadic_level(fr: Fraction) -> int:
    return max(0, fr.denominator.bit_length() - 1)


def _polytope_points(a: ConvexBody, delta: float, mode: str):
    V = geo.extreme_points(a)
    n = V.shape[1]
    if mode == "extreme":
        return V, len(V), 0, 0.0, {}
    if np.linalg.matrix_rank(V - V[0], tol=1e-10) < n:
        raise MeshError("full-mode mesh needs a full-dimensional polytope")
    if n == 1:
        simplices = np.array([[int(np.argmin(V[:, 0])), int(np.argmax(V[:, 0]))]])
    else:
        simplices = scipy.spatial.Delaunay(V).simplices
    diam = max(max(np.linalg.norm(V[i] - V[j]) for i, j in itertools.combinations(s, 2))
               for s in simplices)
    # rounding barycentric coordinates to denominator m moves a point by at
    # most diam * floor((n+1)/2) / m, and never more than diam
    factor = (n + 1) // 2

    def bound_at(L):
        return diam * min(1.0, factor / 2 ** L)

    L = 0
    while bound_at(L) > delta:
        L += 1
    m = 2 ** L
    keyed: dict[tuple, tuple[int, np.ndarray]] = {}
    for p in V:
        keyed[tuple(np.round(p, 12))] = (0, p)
    for s in simplices:
        for comp in _compositions(m, len(s)):
            fr = [Fraction(c, m) for c in comp]
            p = np.array([float(f) for f in fr]) @ V[s]
            key = tuple(np.round(p, 12))
            if key not in keyed:
                keyed[key] = (max(_dyadic_level(f) for f in fr), p)
            if len(keyed) > MAX_MESH_POINTS:
                raise MeshError("mesh too large; raise delta or use extreme mode")
    items = sorted(keyed.items(), key=lambda kv: (kv[1][0], kv[0]))
    head = [it for it in items if it[1][0] == 0 and any(np.allclose(it[1][1], v) for v in V)]
    # vertices first, in canonical order, then the refinement by level
    rest = [it for it in items if it not in head]
    pts = np.vstack([V] + [it[1][1][None] for it in rest]) if rest else V
    return pts, len(V), L, bound_at(L), {"simplex_diameter": diam, "denominator": m,
                                         "num_simplices": int(len(simplices))}


def _compositions(total: int, parts: int):
    for cuts in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 2 - prev)
        yield out


def _circle_extreme(ball: Ball, delta: float):
    """Dyadic angle grid on a circle: N = 2^k points, chord bound 2 r sin(pi / 2N)."""
    r = ball.radius
    k = 2
    while 2 * r * math.sin(math.pi / 2 ** (k + 1)) > delta:
        k += 1
    N = 2 ** k
    idx = sorted(range(N), key=lambda i: (_dyadic_level(Fraction(i, N)), i))
    ang = np.array([2 * math.pi * (i / N) for i in idx])
    circle = ball.center + r * np.column_stack([np.cos(ang), np.sin(ang)])
    levels = [max(0, _dyadic_level(Fraction(i, N)) - 2) for i in idx]
    return circle, levels, k - 2, 2 * r * math.sin(math.pi / (2 * N))


def _smooth_points(a: ConvexBody, delta: float, mode: str):
    lifted = isinstance(a, Lifted)
    ball = a.base if lifted else a
    if not isinstance(ball, Ball) or ball.ambient_dim != 2:
        raise MeshError("smooth meshes are implemented for discs and lifted discs")
    if mode == "extreme":
        circle, levels, L, bound = _circle_extreme(ball, delta)
        if lifted:
            pts = np.vstack([np.zeros(3), np.hstack([np.ones((len(circle), 1)), circle])])
            levels = [0] + levels
        else:
            pts = circle
        seed = sum(1 for lv in levels if lv == 0)
        return pts, seed, L, bound, {}
    # full mode: polar grid t = j/2^k, rho = i/2^k, theta = 2 pi l / 2^(k+2)
    c, r = ball.center, ball.radius
    lift_norm = math.sqrt(1.0 + (np.linalg.norm(c) + r) ** 2) if lifted else 0.0

    def bound_at(k):
        h = 2.0 ** (-k - 1)
        return h * lift_norm + r * (h + math.pi * 2.0 ** (-k - 2))

    k = 0
    while bound_at(k) > delta:
        k += 1
    K, A = 2 ** k, 2 ** (k + 2)
    keyed: dict[tuple, tuple[int, np.ndarray]] = {}
    ts = [Fraction(j, K) for j in range(K + 1)] if lifted else [Fraction(1)]
    for t in ts:
        for i in range(K + 1):
            rho = Fraction(i, K)
            for l in range(A if i else 1):
                th = Fraction(l, A)
                s = c + r * float(rho) * np.array([math.cos(2 * math.pi * float(th)),
                                                    math.sin(2 * math.pi * float(th))])
                p = np.r_[float(t), float(t) * s] if lifted else s
                key = tuple(np.round(p, 12))
                lev = max(_dyadic_level(t), _dyadic_level(rho), max(0, _dyadic_level(th) - 2))
                if key not in keyed or keyed[key][0] > lev:
                    keyed[key] = (lev, p)
                if len(keyed) > MAX_MESH_POINTS:
                    raise MeshError("mesh too large; raise delta or use extreme mode")
    items = sorted(keyed.items(), key=lambda kv: (kv[1][0], kv[0]))
    pts = np.vstack([it[1][1] for it in items])
    seed = sum(1 for it in items if it[1][0] == 0)
    return pts, seed, k, bound_at(k), {}


def build_mesh(a: ConvexBody, delta: float, mode: str = "extreme", samples: int = DEFAULT_SAMPLES,
               seed: int = 0) -> Mesh:
    """Build a nested, certified delta-mesh of ``a``.

    Polytopes get an Exact certificate (vertex lists in extreme mode; a dyadic
    barycentric refinement of a Delaunay triangulation in full mode).  Smooth
    bodies get an analytic covering bound that is cross-checked by sampling,
    recorded as a Sampled certificate.
    """
    if not (delta > 0 and math.isfinite(delta)):
        raise MeshError("delta must be positive")
    if mode not in ("extreme", "full"):
        raise MeshError(f"unknown mesh mode {mode!r}")
    lo, hi = a.bounding_box()
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise MeshError("cannot mesh an unbounded body")
    if a.is_polytope:
        pts, seed_count, level, bound, meta = _polytope_points(a, delta, mode)
        cert = CoveringCertificate("Exact", float(bound))
    else:
        pts, seed_count, level, bound, meta = _smooth_points(a, delta, mode)
        cert = CoveringCertificate("Sampled", float(bound))
    pts = np.where(np.abs(pts) < 1e-15, 0.0, pts) + 0.0
    basis = _choose_basis(pts, seed_count)
    tau = compute_tau_from(pts, basis)
    m = Mesh(pts, float(delta), basis, tau, cert, mode, level, seed_count, meta)
    if cert.kind == "Sampled" and samples > 0:
        gap = covering_radius_check(m, a, samples, seed=seed)
        if gap > bound + 1e-12:
            raise MeshError(f"sampled covering gap {gap} exceeds analytic bound {bound}")
        m.certificate = CoveringCertificate("Sampled", float(bound), samples, float(gap))
    return m


def nearest_point(m: Mesh, x) -> tuple[int, float]:
    """Index of the closest mesh point (lowest index on ties) and its distance."""
    d = np.linalg.norm(m.points - geo.as_vec(x), axis=1)
    i = int(np.argmin(d))
    return i, float(d[i])


def covering_radius_check(m: Mesh, a: ConvexBody, samples: int, seed: int = 0) -> float:
    """Largest sampled distance from the covered region of ``a`` to the mesh.

    The covered region is the extreme set in extreme mode and the whole body
    in full mode.  Exact certificates are re-derived as well and a
    ``MeshError`` is raised if the re-derived bound exceeds the fineness.
    """
    if samples < 1:
        raise MeshError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    if m.mode == "extreme":
        S = a.extreme_set_sample(samples, rng)
    else:
        S = geo.sample_points(a, samples, rng)
        if a.is_polytope:
            S = np.vstack([geo.extreme_points(a), S])
    tree = scipy.spatial.cKDTree(m.points)
    dist, _ = tree.query(S)
    gap = float(np.max(dist))
    if m.certificate.kind == "Exact":
        V = geo.extreme_points(a)
        vgap = float(np.max(tree.query(V)[0]))
        rederived = max(vgap, m.certificate.bound if m.mode == "full" else vgap)
        if vgap > geo.DEDUP_TOL or rederived > m.fineness + 1e-12:
            raise MeshError(f"exact covering certificate fails: re-derived bound {rederived}")
    return gap
