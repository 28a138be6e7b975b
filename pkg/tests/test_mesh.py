import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coinsip import geometry as geo
from coinsip.geometry import Ball, Lifted, VertexHull
from coinsip.mesh import (CoveringCertificate, Mesh, MeshError, build_mesh, compute_tau,
                          compute_tau_from, covering_radius_check, mesh_norm, nearest_point)
from coinsip.sip import build_discretized_primal
from coinsip.theories import box_world, disk
from oracles import lifted

SQUARE = Lifted(VertexHull([[0, 0], [1, 0], [1, 1], [0, 1]]))
DISK = Lifted(Ball([0, 0], 1.0))


def plain_mesh(points, basis):
    pts = np.asarray(points, float)
    return Mesh(pts, 1.0, basis, compute_tau_from(pts, basis), CoveringCertificate("Exact", 0.0))


def test_coarse_square_mesh_is_lifted_vertices_plus_origin():
    m = build_mesh(SQUARE, 10.0)
    expect = np.array(lifted([(0, 0), (1, 0), (1, 1), (0, 1)]))
    assert len(m) == 5
    for p in expect:
        assert np.min(np.linalg.norm(m.points - p, axis=1)) == 0
    assert m.certificate.kind == "Exact"


def test_disk_mesh_sampled_covering_at_half():
    m = build_mesh(DISK, 0.5, samples=100_000, seed=0)
    assert m.certificate.kind == "Sampled"
    assert m.certificate.num_samples == 100_000
    assert covering_radius_check(m, DISK, 100_000, seed=11) <= 0.5


@pytest.mark.parametrize("body,delta,mode", [(SQUARE, 0.3, "extreme"), (SQUARE, 0.5, "full"),
                                             (DISK, 0.1, "extreme"), (DISK, 0.5, "full")])
def test_mesh_invariants(body, delta, mode):
    m = build_mesh(body, delta, mode=mode, samples=2000)
    assert np.linalg.svd(m.points[m.basis_indices], compute_uv=False).min() > 1e-10
    assert len(m.basis_indices) == body.ambient_dim
    assert np.all(body.contains_many(m.points, 1e-9))
    assert m.covering_radius <= delta
    assert compute_tau(m) == m.tau


def test_delta_must_be_positive():
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(MeshError):
            build_mesh(SQUARE, bad)


def test_mesh_norm_examples():
    m = plain_mesh([[1, 0], [0, 1], [1, 1]], [0, 1])
    assert mesh_norm(m, [0, 0]) == 0
    assert mesh_norm(m, [3, -4]) >= 4
    rng = np.random.default_rng(0)
    for y in rng.normal(size=(20, 2)):
        assert abs(mesh_norm(m, 2 * y) - 2 * mesh_norm(m, y)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_mesh_norm_axioms(seed):
    m = build_mesh(DISK, 0.25, samples=0)
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, 3))
    c = rng.normal()
    assert mesh_norm(m, x + y) <= mesh_norm(m, x) + mesh_norm(m, y) + 1e-12
    assert abs(mesh_norm(m, c * x) - abs(c) * mesh_norm(m, x)) <= 1e-12 * (1 + abs(c))
    assert mesh_norm(m, x) > 0


def test_tau_of_identity_basis():
    m = plain_mesh(np.eye(2), [0, 1])
    assert m.tau == pytest.approx(math.sqrt(2), abs=1e-15)
    # exhaustive grid: every B with f(B) <= 1 is the box [-1, 1]^2, max norm sqrt 2
    g = np.linspace(-1.2, 1.2, 241)
    B = np.array(np.meshgrid(g, g)).reshape(2, -1).T
    feas = B[np.array([mesh_norm(m, b) for b in B]) <= 1 + 1e-12]
    assert np.max(np.linalg.norm(feas, axis=1)) <= m.tau + 1e-12
    assert np.max(np.linalg.norm(feas, axis=1)) == pytest.approx(m.tau, abs=1e-12)


def test_tau_doubles_when_basis_halves():
    assert plain_mesh(0.5 * np.eye(2), [0, 1]).tau == pytest.approx(2 * math.sqrt(2), abs=1e-14)


def test_singular_basis_is_rejected():
    with pytest.raises(MeshError):
        compute_tau_from(np.array([[1.0, 1.0], [2.0, 2.0]]), [0, 1])


@pytest.mark.parametrize("body,delta", [(SQUARE, 0.25), (DISK, 0.1), (DISK, 0.5)])
def test_tau_soundness(body, delta):
    m = build_mesh(body, delta, samples=0)
    rng = np.random.default_rng(5)
    Y = rng.normal(size=(10_000, body.ambient_dim))
    f = np.max(np.abs(Y @ m.points.T), axis=1)
    Y /= f[:, None]
    assert np.max(np.linalg.norm(Y, axis=1)) <= m.tau + 1e-9


@pytest.mark.parametrize("spec", [box_world(), disk()])
def test_feasible_points_of_discretized_program_obey_tau(spec):
    m = build_mesh(spec.strategy_set, 0.1, samples=0)
    prog = build_discretized_primal(spec.protocol.alice(0), m, None)
    region = geo.HalfspaceIntersection(np.vstack([prog.halfspace_normals, -prog.cone_normals]),
                                       np.r_[prog.halfspace_offsets, np.zeros(len(prog.cone_normals))])
    lo, hi = region.bounding_box()
    # the region is a polytope, so its vertices bound every feasible norm
    assert np.max(np.linalg.norm(geo.extreme_points(region), axis=1)) <= m.tau + 1e-9
    rng = np.random.default_rng(6)
    X = rng.uniform(lo, hi, size=(20_000, m.dim))
    ok = region.contains_many(X, 0.0)
    assert ok.sum() > 1000
    assert np.max(np.linalg.norm(X[ok], axis=1)) <= m.tau


def test_covering_of_full_simplex_vertex_set():
    tri = VertexHull([[0, 0], [1, 0], [0, 1]])
    m = build_mesh(tri, 0.5)
    V = geo.extreme_points(tri)
    assert max(nearest_point(m, v)[1] for v in V) == 0


@pytest.mark.parametrize("delta", [0.5, 0.25, 0.1])
def test_valid_mesh_covers_within_delta(delta):
    for body, mode in ((SQUARE, "full"), (DISK, "extreme"), (DISK, "full")):
        if mode == "full" and delta < 0.25:
            continue
        m = build_mesh(body, delta, mode=mode, samples=0)
        assert covering_radius_check(m, body, 20_000, seed=1) <= delta


def test_deleting_a_point_breaks_the_covering():
    delta = 0.05
    m = build_mesh(DISK, delta, samples=0)
    # drop a rim point: its neighbourhood on the circle is now uncovered
    idx = next(i for i, p in enumerate(m.points) if p[0] == 1.0 and p[1] < 0 and i not in m.basis_indices)
    broken = m.without(idx)
    assert covering_radius_check(broken, DISK, 100_000, seed=2) > delta


def test_nested_refinement():
    for body, mode, deltas in ((DISK, "extreme", (0.5, 0.25, 0.1, 0.05)),
                               (DISK, "full", (0.5, 0.25)),
                               (SQUARE, "full", (0.5, 0.25))):
        prev = None
        for d in deltas:
            m = build_mesh(body, d, mode=mode, samples=0)
            if prev is not None:
                assert np.array_equal(m.points[: len(prev)], prev.points)
                assert m.tau == prev.tau
            prev = m


def test_nearest_point_breaks_ties_by_index():
    m = plain_mesh([[1, 0], [0, 1], [1, 0]], [0, 1])
    assert nearest_point(m, [0.5, 0.5])[0] == 0
    assert nearest_point(m, [1.0, 0.1])[0] == 0


def test_export_writes_csv_and_sidecar(tmp_path):
    m = build_mesh(DISK, 0.25, samples=500)
    csv_path, side = m.export(tmp_path / "mesh.csv")
    rows = csv_path.read_text().strip().splitlines()
    assert len(rows) == len(m) + 1
    back = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
    assert np.array_equal(back, m.points)
    meta = json.loads(side.read_text())
    assert meta["delta"] == 0.25 and meta["tau"] == m.tau
    assert meta["certificate"]["kind"] == "Sampled"
