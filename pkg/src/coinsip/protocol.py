"""Coin-flipping protocols over a pair of strategy sets."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry as geo
from .geometry import ConvexBody

OUTCOMES = (0, 1)
ABORT = 2


@dataclass(eq=False)
class Protocol:
    """Honest triples ``(S_0, S_1, S_abort)`` for Alice and Bob.

    ``bob_set=None`` means Bob's set is the closure of Alice's set, i.e.
    every strategy pairing with all of Alice's into [0, 1] is available.
    """

    alice_set: ConvexBody
    alice_triple: np.ndarray
    bob_triple: np.ndarray
    bob_set: ConvexBody | None = None
    name: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.alice_set.ambient_dim
        self.alice_triple = geo.as_rows(self.alice_triple, n)
        self.bob_triple = geo.as_rows(self.bob_triple, n)
        if self.alice_triple.shape != (3, n) or self.bob_triple.shape != (3, n):
            raise geo.GeometryError(f"triples must be three vectors of dimension {n}")
        if self.bob_set is not None and self.bob_set.ambient_dim != n:
            raise geo.GeometryError("Alice's and Bob's sets live in different dimensions")

    @property
    def dim(self) -> int:
        return self.alice_set.ambient_dim

    @property
    def bob_is_closure(self) -> bool:
        return self.bob_set is None

    def alice(self, b: int) -> np.ndarray:
        return self.alice_triple[b]

    def bob(self, b: int) -> np.ndarray:
        return self.bob_triple[b]

    def bob_body(self) -> ConvexBody:
        """Bob's set as a body; the closure is only available for polytopal sets."""
        if self.bob_set is not None:
            return self.bob_set
        return geo.gnrh_closure(self.alice_set)

    def bob_contains(self, w, tol: float = 1e-9) -> bool:
        if self.bob_set is not None:
            return self.bob_set.contains(w, tol)
        return geo.closure_contains(self.alice_set, w, tol)

    def relabeled(self) -> "Protocol":
        """Exchange the roles of outcomes 0 and 1."""
        perm = [1, 0, 2]
        return replace(self, alice_triple=self.alice_triple[perm], bob_triple=self.bob_triple[perm],
                       metadata=dict(self.metadata))

    def swapped(self) -> "Protocol":
        """Exchange the parties; Bob's body must be explicit or polytopal."""
        bob = self.bob_body()
        return Protocol(bob, self.bob_triple.copy(), self.alice_triple.copy(), self.alice_set,
                        name=f"{self.name}:swapped", metadata=dict(self.metadata))
