"""Certified cheating bounds for coin flipping in generalized probabilistic theories."""
from .coinflip import (SecurityReport, Violation, analyze, cheat_alice, cheat_bob,
                       extract_alice_strategy, product_bound_check, validate_protocol)
from .conesolver import ConeProgram, ProgramSolution, Status, solve_program
from .geometry import (Ball, Cone, ConvexBody, HalfspaceIntersection, Lifted, VertexHull,
                       dual_cone, gnrh_closure, inner, polar)
from .mesh import Mesh, build_mesh
from .protocol import Protocol
from .sip import SandwichEnclosure, delta_sweep, solve_cheating_bob

__version__ = "0.1.0"
__all__ = [
    "Ball", "Cone", "ConeProgram", "ConvexBody", "HalfspaceIntersection", "Lifted", "Mesh",
    "ProgramSolution", "Protocol", "SandwichEnclosure", "SecurityReport", "Status",
    "VertexHull", "Violation", "analyze", "build_mesh", "cheat_alice", "cheat_bob",
    "delta_sweep", "dual_cone", "extract_alice_strategy", "gnrh_closure", "inner", "polar",
    "product_bound_check", "solve_cheating_bob", "solve_program", "validate_protocol",
]
