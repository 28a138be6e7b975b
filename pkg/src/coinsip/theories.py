"""A small zoo of strategy sets with machine-checked reference protocols.

Lifted theories take a state space S in R^d and use the sub-normalized
strategy set conv({0} U {(1, s) : s in S}) in R^(d+1); the first coordinate
is the normalization and ``(1, 0, ..., 0)`` is the unit effect on Bob's side.

Reference protocols follow one recipe: Alice prepares one of two states at
weight 1/2 and Bob holds an accepting effect and its complement.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .coinflip import validate_protocol
from .geometry import Ball, ConvexBody, Lifted, VertexHull
from .protocol import Protocol

# off every coarse disc mesh, and a vertex of polygon(256)
DISK_STATE_ANGLE = 2 * math.pi / 256


@dataclass(eq=False)
class TheorySpec:
    name: str
    state_space: ConvexBody
    strategy_set: ConvexBody
    reference_protocols: list[Protocol]
    unit_effect: np.ndarray
    notes: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def protocol(self) -> Protocol:
        return self.reference_protocols[0]

    @property
    def is_polytope(self) -> bool:
        return self.strategy_set.is_polytope


def _checked(p: Protocol) -> Protocol:
    bad = validate_protocol(p)
    if bad:
        raise AssertionError(f"reference protocol {p.name} is invalid: {[str(v) for v in bad]}")
    return p


def _lifted_protocol(name: str, A: ConvexBody, s0, s1, effect0) -> Protocol:
    """Alice sends s0 or s1 at weight 1/2; Bob accepts with effect0 / its complement."""
    n = A.ambient_dim
    unit = np.zeros(n)
    unit[0] = 1.0
    A0 = 0.5 * np.r_[1.0, s0]
    A1 = 0.5 * np.r_[1.0, s1]
    B0 = np.asarray(effect0, dtype=float)
    B1 = unit - B0
    return _checked(Protocol(A, [A0, A1, np.zeros(n)], [B0, B1, np.zeros(n)], name=name))


def lifted_polytope_theory(name: str, vertices, s0_index: int = 0, direction=None) -> TheorySpec:
    """Lift of conv(vertices), with a protocol built from an exposing functional.

    ``direction`` must be uniquely maximized over the state space at vertex
    ``s0_index`` (default: vertex minus centroid); the honest second state is
    the first vertex minimizing it.
    """
    V = geo.as_rows(vertices)
    S = VertexHull(V)
    A = Lifted(S)
    s0 = V[s0_index]
    d = s0 - V.mean(axis=0) if direction is None else geo.as_vec(direction)
    vals = V @ d
    hi, lo = vals.max(), vals.min()
    if not math.isclose(vals[s0_index], hi, abs_tol=1e-12) or hi - lo <= 0:
        raise ValueError("direction must be maximized at the chosen vertex")
    s1 = V[int(np.argmin(vals))]
    effect = np.r_[-lo, d] / (hi - lo)
    p = _lifted_protocol(f"{name}:prepare", A, s0, s1, effect)
    unit = np.zeros(A.ambient_dim)
    unit[0] = 1.0
    return TheorySpec(name, S, A, [p], unit)


def classical_bit() -> TheorySpec:
    """Sub-normalized probability vectors on one bit; Alice announces a coin."""
    e0, e1 = np.eye(2)
    S = VertexHull([e0, e1])
    A = VertexHull([np.zeros(2), e0, e1])
    p = _checked(Protocol(A, [0.5 * e0, 0.5 * e1, np.zeros(2)], [e0, e1, np.zeros(2)],
                          name="classical_bit:announce"))
    return TheorySpec("classical_bit", S, A, [p], np.ones(2),
                      notes="strategy set is already homogeneous; normalization is x + y")


def classical_bit_receiver() -> TheorySpec:
    """The same bit with the roles reversed: Bob announces, Alice only tests."""
    e0, e1 = np.eye(2)
    A = VertexHull([[0, 0], [1, 0], [0, 1], [1, 1]])
    p = _checked(Protocol(A, [e0, e1, np.zeros(2)], [0.5 * e0, 0.5 * e1, np.zeros(2)],
                          name="classical_bit_receiver:announce"))
    return TheorySpec("classical_bit_receiver", VertexHull([[0, 0], [1, 1]]), A, [p], np.ones(2),
                      notes="Alice's set is the unit box of tests")


def box_world() -> TheorySpec:
    return lifted_polytope_theory("box_world", [[0, 0], [1, 0], [1, 1], [0, 1]])


def regular_polygon_vertices(n: int) -> np.ndarray:
    ang = [2 * math.pi * (k / n) for k in range(n)]
    return np.column_stack([np.cos(ang), np.sin(ang)])


def polygon(n: int) -> TheorySpec:
    """Regular n-gon inscribed in the unit circle, first vertex at angle 0."""
    if int(n) != n or n < 3:
        raise ValueError("polygon theories need n >= 3")
    n = int(n)
    V = regular_polygon_vertices(n)
    return lifted_polytope_theory(f"polygon_{n}", V, 0, direction=V[0])


def disk() -> TheorySpec:
    """Unit-disc state space; honest states are antipodal pure states."""
    ball = Ball(np.zeros(2), 1.0)
    A = Lifted(ball)
    s0 = np.array([math.cos(DISK_STATE_ANGLE), math.sin(DISK_STATE_ANGLE)])
    effect = 0.5 * np.r_[1.0, s0]
    p = _lifted_protocol("disk:prepare", A, s0, -s0, effect)
    return TheorySpec("disk", ball, A, [p], np.r_[1.0, 0.0, 0.0],
                      notes="smooth body: meshes carry sampled covering certificates")


def gnrh_asymmetry_pair() -> tuple[VertexHull, VertexHull]:
    """Two different Alice sets with the same closure for Bob.

    The unit box and the kite conv{0, (1/2, 0), (0, 1/2), (1, 1)} both close
    to the triangle conv{0, e0, e1}: the kite's short axis points only add
    the rows 2x <= 1 and 2y <= 1, which x + y <= 1 and x, y >= 0 already imply.
    """
    box = VertexHull([[0, 0], [1, 0], [0, 1], [1, 1]])
    kite = VertexHull([[0, 0], [0.5, 0], [0, 0.5], [1, 1]])
    return box, kite


def transform_protocol(p: Protocol, L) -> Protocol:
    """Push Alice's side through L and Bob's through inverse(L).T; pairings are unchanged."""
    L = np.asarray(L, dtype=float)
    Linv_t = np.linalg.inv(L).T
    pts = p.alice_set.vertex_hull().points @ L.T
    bob = None if p.bob_set is None else VertexHull(p.bob_set.vertex_hull().points @ Linv_t.T)
    return Protocol(VertexHull(pts), p.alice_triple @ L.T, p.bob_triple @ Linv_t.T, bob,
                    name=f"{p.name}:transformed", metadata=dict(p.metadata))


ZOO_NAMES = ("classical_bit", "classical_bit_receiver", "box_world", "polygon_n", "disk")


def get_theory(name: str) -> TheorySpec:
    """Look a theory up by name; ``polygon_<n>`` selects the regular n-gon."""
    fixed = {"classical_bit": classical_bit, "classical_bit_receiver": classical_bit_receiver,
             "box_world": box_world, "disk": disk}
    if name in fixed:
        return fixed[name]()
    m = re.fullmatch(r"polygon_(\d+)", name)
    if m:
        return polygon(int(m.group(1)))
    raise KeyError(f"unknown theory {name!r}")


def zoo(polygon_range=range(3, 9)) -> list[TheorySpec]:
    """The shipped theories, in a fixed order."""
    out = [classical_bit(), classical_bit_receiver(), box_world()]
    out += [polygon(n) for n in polygon_range]
    out.append(disk())
    return out
