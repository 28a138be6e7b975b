import json
import math
import warnings

import numpy as np
import pytest

from coinsip import geometry as geo
from coinsip.coinflip import (ExtractionError, RestrictedBobWarning, analyze, cheat_alice, cheat_bob,
                              extract_alice_strategy, product_bound_check, validate_protocol)
from coinsip.conesolver import ProgramSolution, Status
from coinsip.mesh import build_mesh
from coinsip.protocol import Protocol
from coinsip.theories import box_world, classical_bit, disk, get_theory
from oracles import POLYTOPAL_THEORIES, THEORY_VERTICES, alice_value_oracle

CB = classical_bit()


def cb_mesh():
    return build_mesh(CB.strategy_set, 0.5)


# --- validation ---------------------------------------------------------------

def test_reference_protocol_is_valid():
    assert validate_protocol(CB.protocol) == []


def test_perturbed_honest_strategy_names_the_pairing():
    p = CB.protocol
    bad = Protocol(p.alice_set, p.alice_triple + np.array([[0.1, 0], [0, 0], [0, 0]]), p.bob_triple)
    viols = validate_protocol(bad)
    pairing = [v for v in viols if v.name == "⟨A_0,B_0⟩ ≠ 1/2"]
    assert len(pairing) == 1
    assert pairing[0].residual == pytest.approx(0.1 * p.bob(0)[0], abs=1e-15)


def test_abort_outside_alice_set_is_reported():
    p = CB.protocol
    bad = Protocol(p.alice_set, [p.alice(0), p.alice(1), [0.6, 0.6]], p.bob_triple)
    names = {v.name for v in validate_protocol(bad)}
    assert "alice_member_abort" in names
    assert "alice_completion" in names


def test_bob_outside_closure_is_reported():
    p = CB.protocol
    bad = Protocol(p.alice_set, p.alice_triple, [[1, 0], [0, 1], [0.5, 0]])
    assert {v.name for v in validate_protocol(bad)} == {"bob_completion"}


@pytest.mark.parametrize("name", POLYTOPAL_THEORIES + ["disk"])
def test_zoo_protocols_are_valid(name):
    assert validate_protocol(get_theory(name).protocol) == []


# --- cheating values -----------------------------------------------------------

def test_classical_alice_cheats_perfectly():
    assert cheat_alice(CB.protocol, 0) == 1.0
    assert cheat_alice(CB.protocol, 1) == 1.0


def test_zero_functional_gives_zero():
    p = CB.protocol
    q = Protocol(p.alice_set, p.alice_triple, [[0, 0], p.bob(1), [0, 0]])
    assert cheat_alice(q, 0) == 0.0


@pytest.mark.parametrize("name", POLYTOPAL_THEORIES)
def test_cheat_alice_matches_vertex_oracle(name):
    p = get_theory(name).protocol
    for b in (0, 1):
        exact = alice_value_oracle(THEORY_VERTICES[name], p.bob(b))
        assert abs(cheat_alice(p, b) - float(exact)) <= 1e-12
        assert cheat_alice(p, b) >= 0.5 - 1e-9


def test_cheat_alice_on_disk_uses_support_function():
    p = disk().protocol
    # B_b = (1, +-s)/2 is maximized at the lifted state s (or -s): value 1
    assert cheat_alice(p, 0) == pytest.approx(1.0, abs=1e-12)


def test_cheat_alice_needs_a_support_function():
    class Opaque(geo.VertexHull):
        @property
        def is_polytope(self):
            return False

        def support(self, direction):
            raise geo.NonPolyhedralError("no support function")

    a = Opaque(CB.strategy_set.points)
    p = Protocol(a, CB.protocol.alice_triple, CB.protocol.bob_triple)
    with pytest.raises(geo.GeometryError):
        cheat_alice(p, 0)


def test_classical_bob_enclosure():
    sol, enc = cheat_bob(CB.protocol, 0, cb_mesh())
    assert enc.lower == enc.upper == pytest.approx(0.5, abs=1e-12)


def test_swapping_outcome_relabels_objective():
    m = cb_mesh()
    r = CB.protocol.relabeled()
    assert cheat_bob(r, 0, m)[0].primal_value == cheat_bob(CB.protocol, 1, m)[0].primal_value
    assert cheat_bob(r, 1, m)[0].primal_value == cheat_bob(CB.protocol, 0, m)[0].primal_value


@pytest.mark.parametrize("name", POLYTOPAL_THEORIES + ["disk"])
def test_bob_enclosure_lower_bound_at_least_honest(name):
    spec = get_theory(name)
    for delta in (0.5, 0.05):
        m = build_mesh(spec.strategy_set, delta, samples=0)
        for b in (0, 1):
            _, enc = cheat_bob(spec.protocol, b, m)
            if enc.cone_exact:
                assert enc.lower >= 0.5 - 1e-9
            assert enc.upper >= 0.5 - 1e-9


# --- extraction ----------------------------------------------------------------

def test_classical_extraction_is_perfect_cheat():
    m = cb_mesh()
    sol, enc = cheat_bob(CB.protocol, 0, m)
    A = extract_alice_strategy(sol, m, enc.p_delta, CB.strategy_set, CB.protocol.bob(0))
    assert geo.inner(A, CB.protocol.bob(0)) >= 1 - 1e-7


def fake_solution(y):
    return ProgramSolution(Status.OPTIMAL, dual_weights=np.asarray(y, float), dual_value=float(np.sum(y)))


def test_single_weight_extracts_that_point():
    m = cb_mesh()
    y = np.zeros(len(m))
    y[1] = 0.7
    A = extract_alice_strategy(fake_solution(y), m, 0.7)
    assert np.array_equal(A, m.points[1])


def test_extraction_is_scale_invariant():
    m = cb_mesh()
    y = np.arange(len(m), dtype=float) + 1
    A1 = extract_alice_strategy(fake_solution(y), m, y.sum())
    A2 = extract_alice_strategy(fake_solution(3.5 * y), m, 3.5 * y.sum())
    assert np.allclose(A1, A2, atol=1e-15)


def test_degenerate_dual_is_rejected():
    m = cb_mesh()
    with pytest.raises(ExtractionError):
        extract_alice_strategy(fake_solution(np.zeros(len(m))), m, 0.0)
    with pytest.raises(ExtractionError):
        extract_alice_strategy(ProgramSolution(Status.INFEASIBLE), m, 0.5)


@pytest.mark.parametrize("name", POLYTOPAL_THEORIES + ["disk"])
def test_extraction_soundness(name):
    spec = get_theory(name)
    for delta in (0.5, 0.1, 0.05):
        m = build_mesh(spec.strategy_set, delta, samples=0)
        for b in (0, 1):
            sol, enc = cheat_bob(spec.protocol, b, m)
            A = extract_alice_strategy(sol, m, enc.p_delta, spec.strategy_set, spec.protocol.bob(b))
            assert spec.strategy_set.distance(A) <= 1e-8
            assert geo.inner(A, spec.protocol.bob(b)) >= 1 / (2 * enc.p_delta) - 1e-7


# --- product bound and reports ---------------------------------------------------

def test_classical_product_is_tight():
    prod, ok = product_bound_check(CB.protocol, 0, cb_mesh())
    assert ok and prod == pytest.approx(0.5, abs=1e-12)


def test_box_world_product_holds():
    spec = box_world()
    m = build_mesh(spec.strategy_set, 0.25)
    for b in (0, 1):
        prod, ok = product_bound_check(spec.protocol, b, m)
        assert ok and prod >= 0.5 - 1e-7


def test_classical_report():
    r = analyze(CB.protocol, [0.5, 0.25])
    assert r.theorem4_pass is True
    assert r.max_certified == 1.0
    assert r.bias_lower == 0.5
    assert r.failures == []


def test_box_world_report_clears_threshold():
    r = analyze(box_world().protocol, [0.1])
    assert r.max_certified >= 1 / math.sqrt(2) - 1e-6
    assert r.theorem4_pass


@pytest.mark.parametrize("name", ["classical_bit", "polygon_5", "disk"])
def test_bias_lower_is_max_lower_bound_minus_half(name):
    r = analyze(get_theory(name).protocol, [0.25, 0.1])
    assert r.bias_lower == max(r.lower_bounds()) - 0.5


@pytest.mark.parametrize("name", ["classical_bit", "box_world", "polygon_3", "disk"])
def test_relabeling_exchanges_report_entries(name):
    p = get_theory(name).protocol
    r, s = analyze(p, [0.5, 0.1]), analyze(p.relabeled(), [0.5, 0.1])
    assert r.p_alice[0] == s.p_alice[1] and r.p_alice[1] == s.p_alice[0]
    for b in (0, 1):
        assert r.p_bob[b].lower == s.p_bob[1 - b].lower
        assert r.p_bob[b].upper == s.p_bob[1 - b].upper


def test_report_json_has_fixed_key_order_and_is_reproducible():
    r1 = analyze(disk().protocol, [0.25, 0.1]).to_json()
    r2 = analyze(disk().protocol, [0.25, 0.1]).to_json()
    assert r1 == r2
    d = json.loads(r1)
    assert list(d)[:4] == ["protocol", "mode", "deltas", "p_alice"]
    assert list(d)[-1] == "theorem4_pass"
    assert d["p_bob"]["0"]["cone_exact"] is False


def test_report_lists_both_orderings():
    r = analyze(box_world().protocol, [0.5])
    orders = {(c.ordering, c.b) for c in r.product_checks}
    assert orders == {("alice*bob_delta", 0), ("alice*bob_delta", 1),
                      ("bob*alice_delta", 0), ("bob*alice_delta", 1)}
    rd = analyze(disk().protocol, [0.5])
    assert all(not c.applicable for c in rd.product_checks if c.ordering == "bob*alice_delta")


def test_failed_component_drops_verdict(monkeypatch):
    import coinsip.coinflip as cf

    def broken(p, b, m, backend=None):
        return ProgramSolution(Status.NUMERICAL_FAILURE), None

    monkeypatch.setattr(cf, "cheat_bob", broken)
    r = cf.analyze(CB.protocol, [0.5])
    assert r.theorem4_pass is None
    assert "theorem4_pass" not in r.to_dict()
    assert r.failures


def test_restricted_bob_set_warns():
    p = CB.protocol
    q = Protocol(p.alice_set, p.alice_triple, p.bob_triple,
                 bob_set=geo.VertexHull([[0, 0], [1, 0], [0, 1], [1, 1]]))
    assert validate_protocol(q) == []
    with pytest.warns(RestrictedBobWarning):
        r = analyze(q, [0.5])
    assert r.warnings


def test_bob_set_outside_closure_is_invalid():
    p = CB.protocol
    q = Protocol(p.alice_set, p.alice_triple, p.bob_triple,
                 bob_set=geo.VertexHull([[0, 0], [2, 0], [0, 1], [1, 1]]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert "bob_set_in_closure" in {v.name for v in validate_protocol(q)}
