"""Cheating probabilities, product bounds and security reports."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .conesolver import LPBackend, ProgramSolution
from .mesh import Mesh, build_mesh
from .protocol import OUTCOMES, Protocol
from .sip import SandwichEnclosure, solve_cheating_bob

HONEST_VALUE = 0.5
THEOREM4_THRESHOLD = 1.0 / math.sqrt(2.0)
THEOREM4_TOL = 1e-6
PRODUCT_TOL = 1e-7
EXTRACTION_MEMBER_TOL = 1e-8
EXTRACTION_VALUE_TOL = 1e-7


class ExtractionError(RuntimeError):
    pass


class RestrictedBobWarning(UserWarning):
    """Bob's set was supplied explicitly instead of being the full closure."""


@dataclass(frozen=True)
class Violation:
    name: str
    residual: float
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.name}: {self.detail} (residual {self.residual:.3g})"


def _closure_residual(a: geo.ConvexBody, w: np.ndarray) -> float:
    return max(0.0, a.support(w) - 1.0, a.support(-w))


def validate_protocol(p: Protocol, tol: float = 1e-9) -> list[Violation]:
    """Every failed protocol invariant, with its residual; empty when valid."""
    out: list[Violation] = []
    labels = ("0", "1", "abort")
    for i, lab in enumerate(labels):
        d = p.alice_set.distance(p.alice_triple[i])
        if d > tol:
            out.append(Violation(f"alice_member_{lab}", d, f"A_{lab} lies outside Alice's set"))
    d = p.alice_set.distance(p.alice_triple.sum(axis=0))
    if d > tol:
        out.append(Violation("alice_completion", d, "A_0 + A_1 + A_abort lies outside Alice's set"))

    def bob_resid(w):
        if p.bob_set is not None:
            return p.bob_set.distance(w)
        return _closure_residual(p.alice_set, w)

    for i, lab in enumerate(labels):
        r = bob_resid(p.bob_triple[i])
        if r > tol:
            out.append(Violation(f"bob_member_{lab}", r, f"B_{lab} lies outside Bob's set"))
    r = bob_resid(p.bob_triple.sum(axis=0))
    if r > tol:
        out.append(Violation("bob_completion", r, "B_0 + B_1 + B_abort lies outside Bob's set"))
    if p.bob_set is not None and p.bob_set.is_polytope:
        worst = max(_closure_residual(p.alice_set, v) for v in p.bob_set.vertex_hull().points)
        if worst > tol:
            out.append(Violation("bob_set_in_closure", worst,
                                 "Bob's set is not contained in the closure of Alice's set"))
    for b in OUTCOMES:
        val = geo.inner(p.alice(b), p.bob(b))
        if abs(val - HONEST_VALUE) > tol:
            out.append(Violation(f"⟨A_{b},B_{b}⟩ ≠ 1/2", val - HONEST_VALUE,
                                 f"honest pairing is {val!r}"))
    return out


def cheat_alice(p: Protocol, b: int) -> float:
    """max over Alice's set of <A, B_b>: vertex enumeration or support function."""
    a = p.alice_set
    if a.is_polytope:
        V = a.vertex_hull().points
        return float(np.max(V @ p.bob(b)))
    return a.support(p.bob(b))


def cheat_bob_exact(p: Protocol, b: int) -> float:
    """max over Bob's (polytopal) set of <A_b, B>, by vertex enumeration."""
    body = p.bob_body()
    return float(np.max(geo.extreme_points(body) @ p.alice(b)))


def cheat_bob(p: Protocol, b: int, m: Mesh, backend: LPBackend | None = None
              ) -> tuple[ProgramSolution, SandwichEnclosure | None]:
    return solve_cheating_bob(p, b, m, backend)


def extract_alice_strategy(sol: ProgramSolution, m: Mesh, p_delta: float,
                           alice_set: geo.ConvexBody | None = None, honest_bob=None,
                           tol: float = 1e-9) -> np.ndarray:
    """Alice's strategy from Bob's optimal mesh weights.

    A = sum_X y_X X / p_delta is a convex combination of mesh points, so it
    lies in Alice's set; when ``alice_set`` and ``honest_bob`` are given the
    membership and the pairing bound ``<A, B_b> >= 1 / (2 p_delta)`` are
    checked and an ``ExtractionError`` is raised on failure.
    """
    if not sol.optimal:
        raise ExtractionError("extraction needs an optimal solution")
    if p_delta <= tol:
        raise ExtractionError("degenerate dual: p_delta is not positive")
    y = np.asarray(sol.dual_weights, dtype=float)
    y = np.where(y > 0, y, 0.0)
    total = y.sum()
    if total <= tol:
        raise ExtractionError("mesh weights vanish")
    # normalize by the weight total; equals p_delta up to the duality gap
    A = (y / total) @ m.points
    if alice_set is not None:
        d = alice_set.distance(A)
        if d > EXTRACTION_MEMBER_TOL:
            raise ExtractionError(f"extracted strategy is {d:.3g} outside Alice's set")
    if honest_bob is not None:
        achieved = geo.inner(A, honest_bob)
        need = 1.0 / (2.0 * p_delta)
        if achieved < need - EXTRACTION_VALUE_TOL:
            raise ExtractionError(f"extracted strategy achieves {achieved!r} < {need!r}")
    return A


def product_bound_check(p: Protocol, b: int, m: Mesh, backend: LPBackend | None = None
                        ) -> tuple[float, bool]:
    """P*_Alice,b times the discretized Bob value; passes iff >= 1/2 - 1e-7."""
    sol, enc = cheat_bob(p, b, m, backend)
    if enc is None:
        return float("nan"), False
    prod = cheat_alice(p, b) * enc.p_delta
    return prod, prod >= HONEST_VALUE - PRODUCT_TOL


@dataclass
class ProductCheck:
    ordering: str
    b: int
    delta: float
    product: float | None
    passed: bool | None
    applicable: bool = True

    def as_dict(self) -> dict:
        return {"ordering": self.ordering, "b": self.b, "delta": self.delta,
                "product": self.product, "pass": self.passed, "applicable": self.applicable}


@dataclass
class SecurityReport:
    protocol: str
    deltas: list[float]
    mode: str
    p_alice: dict[int, tuple[float, float]]
    p_bob: dict[int, SandwichEnclosure | None]
    bob_gap: dict[int, float]
    bias_lower: float | None
    max_certified: float | None
    product_checks: list[ProductCheck]
    extraction: list[dict]
    theorem4_pass: bool | None
    failures: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def lower_bounds(self) -> list[float]:
        vals = [self.p_alice[b][0] for b in OUTCOMES]
        vals += [self.p_bob[b].lower for b in OUTCOMES if self.p_bob[b] is not None]
        return vals

    def to_dict(self) -> dict:
        def enc(e: SandwichEnclosure | None, gap: float | None):
            if e is None:
                return None
            return {"lower": e.lower, "upper": e.upper, "p_delta": e.p_delta, "tau": e.tau,
                    "delta": e.delta, "covering_radius": e.covering_radius,
                    "cone_exact": e.cone_exact, "gap": gap}

        d = {
            "protocol": self.protocol,
            "mode": self.mode,
            "deltas": list(self.deltas),
            "p_alice": {str(b): {"lower": self.p_alice[b][0], "upper": self.p_alice[b][1]}
                        for b in OUTCOMES},
            "p_bob": {str(b): enc(self.p_bob[b], self.bob_gap.get(b)) for b in OUTCOMES},
            "max_certified": self.max_certified,
            "bias_lower": self.bias_lower,
            "theorem4_threshold": THEOREM4_THRESHOLD,
            "product_checks": [c.as_dict() for c in self.product_checks],
            "extraction": self.extraction,
            "failures": list(self.failures),
            "warnings": list(self.warnings),
        }
        if self.theorem4_pass is not None:
            d["theorem4_pass"] = self.theorem4_pass
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    def summary_table(self) -> str:
        lines = [f"protocol: {self.protocol}   mode: {self.mode}   deltas: {self.deltas}",
                 f"{'quantity':<16}{'lower':>14}{'upper':>14}"]
        for b in OUTCOMES:
            lo, hi = self.p_alice[b]
            lines.append(f"{'P*_Alice,' + str(b):<16}{lo:>14.9f}{hi:>14.9f}")
        for b in OUTCOMES:
            e = self.p_bob[b]
            if e is None:
                lines.append(f"{'P*_Bob,' + str(b):<16}{'failed':>14}{'failed':>14}")
            else:
                lines.append(f"{'P*_Bob,' + str(b):<16}{e.lower:>14.9f}{e.upper:>14.9f}")
        for c in self.product_checks:
            if c.applicable:
                lines.append(f"product[{c.ordering}, b={c.b}, delta={c.delta}] = {c.product:.9f}"
                             f"  {'pass' if c.passed else 'FAIL'}")
        if self.bias_lower is not None:
            lines.append(f"bias >= {self.bias_lower:.9f}   (threshold {THEOREM4_THRESHOLD - 0.5:.9f})")
        if self.theorem4_pass is not None:
            lines.append(f"1/sqrt(2) certificate: {'PASS' if self.theorem4_pass else 'FAIL'}")
        for f in self.failures:
            lines.append(f"failure: {f}")
        return "\n".join(lines) + "\n"


def analyze(p: Protocol, deltas, mode: str = "extreme", seed: int = 0, samples: int = 10_000,
            backend: LPBackend | None = None) -> SecurityReport:
    """All four cheating quantities, product checks and the bias certificate.

    Alice's values are exact.  Bob's are enclosures at the finest delta.
    Product checks pair each exact value with the other party's discretized
    value, for both outcomes and every delta: ``alice*bob_delta`` always, and
    ``bob*alice_delta`` (the swapped protocol) when Bob's set is polytopal.
    """
    deltas = sorted({float(d) for d in deltas}, reverse=True)
    if not deltas or deltas[-1] <= 0:
        raise ValueError("delta must be positive")
    failures: list[str] = []
    warn_list: list[str] = []
    if not p.bob_is_closure:
        msg = "Bob's set is restricted; Bob's values are computed over the full closure"
        warnings.warn(msg, RestrictedBobWarning, stacklevel=2)
        warn_list.append(msg)
    p_alice = {b: (cheat_alice(p, b),) * 2 for b in OUTCOMES}
    p_bob: dict[int, SandwichEnclosure | None] = {b: None for b in OUTCOMES}
    bob_gap: dict[int, float] = {}
    checks: list[ProductCheck] = []
    extraction: list[dict] = []
    try:
        swapped = p.swapped()
        swapped_alice = {b: cheat_alice(swapped, b) for b in OUTCOMES}
    except geo.GeometryError:
        swapped = None
    for delta in deltas:
        m = build_mesh(p.alice_set, delta, mode=mode, samples=samples, seed=seed)
        for b in OUTCOMES:
            sol, enc = cheat_bob(p, b, m, backend)
            if enc is None:
                failures.append(f"Bob LP b={b} delta={delta}: {sol.status.value}")
                checks.append(ProductCheck("alice*bob_delta", b, delta, None, False))
                continue
            prod = p_alice[b][0] * enc.p_delta
            checks.append(ProductCheck("alice*bob_delta", b, delta, prod, prod >= HONEST_VALUE - PRODUCT_TOL))
            if delta == deltas[-1]:
                p_bob[b] = enc
                bob_gap[b] = sol.gap
                extraction.append(_extraction_entry(p, b, sol, m, enc.p_delta))
        if swapped is None:
            for b in OUTCOMES:
                checks.append(ProductCheck("bob*alice_delta", b, delta, None, None, applicable=False))
            continue
        ms = build_mesh(swapped.alice_set, delta, mode=mode, samples=samples, seed=seed)
        for b in OUTCOMES:
            sol, enc = cheat_bob(swapped, b, ms, backend)
            if enc is None:
                failures.append(f"swapped LP b={b} delta={delta}: {sol.status.value}")
                checks.append(ProductCheck("bob*alice_delta", b, delta, None, False))
                continue
            prod = swapped_alice[b] * enc.p_delta
            checks.append(ProductCheck("bob*alice_delta", b, delta, prod, prod >= HONEST_VALUE - PRODUCT_TOL))
    for c in checks:
        if c.applicable and not c.passed:
            failures.append(f"product check {c.ordering} b={c.b} delta={c.delta} failed")
    for e in extraction:
        if not e["pass"]:
            failures.append(f"extraction b={e['b']} failed")
    max_cert = bias = verdict = None
    if all(p_bob[b] is not None for b in OUTCOMES):
        vals = [p_alice[b][0] for b in OUTCOMES] + [p_bob[b].lower for b in OUTCOMES]
        max_cert = max(vals)
        bias = max_cert - HONEST_VALUE
    if not failures and max_cert is not None:
        verdict = max_cert >= THEOREM4_THRESHOLD - THEOREM4_TOL
    return SecurityReport(p.name, deltas, mode, p_alice, p_bob, bob_gap, bias, max_cert, checks,
                          extraction, verdict, failures, warn_list)


def _extraction_entry(p: Protocol, b: int, sol: ProgramSolution, m: Mesh, p_delta: float) -> dict:
    entry = {"b": b, "p_delta": p_delta}
    try:
        A = extract_alice_strategy(sol, m, p_delta)
    except ExtractionError as exc:
        entry.update({"pass": False, "error": str(exc)})
        return entry
    dist = p.alice_set.distance(A)
    achieved = geo.inner(A, p.bob(b))
    need = 1.0 / (2.0 * p_delta)
    entry.update({
        "strategy": [float(v) for v in A],
        "membership_distance": dist,
        "achieved": achieved,
        "required": need,
        "pass": bool(dist <= EXTRACTION_MEMBER_TOL and achieved >= need - EXTRACTION_VALUE_TOL),
    })
    return entry
