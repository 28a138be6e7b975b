"""JSON protocol files.

A file holds ``dimension``, ``alice_set``, optional ``bob_set``, the two
honest triples and a free-form ``metadata`` map.  Bodies are tagged:

    {"type": "VertexHull", "points": [[...], ...]}
    {"type": "HalfspaceIntersection", "normals": [[...], ...], "offsets": [...]}
    {"type": "Ball", "center": [...], "radius": r}
    {"type": "Lifted", "base": <body>}

Floats are written by ``json`` as shortest round-trip decimals, so a
load/dump cycle is exact.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .geometry import Ball, ConvexBody, GeometryError, HalfspaceIntersection, Lifted, VertexHull
from .protocol import Protocol

TOP_KEYS = ("dimension", "alice_set", "bob_set", "alice_triple", "bob_triple", "metadata")
REQUIRED = ("dimension", "alice_set", "alice_triple", "bob_triple")
BODY_KEYS = {
    "VertexHull": ("points",),
    "HalfspaceIntersection": ("normals", "offsets"),
    "Ball": ("center", "radius"),
    "Lifted": ("base",),
}


class ProtocolFileError(ValueError):
    """Malformed protocol file; ``field`` is a JSON path, ``line`` 1-based or None."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field {field}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


def _floats(lst) -> list:
    if isinstance(lst, np.ndarray):
        lst = lst.tolist()
    if isinstance(lst, (list, tuple)):
        return [_floats(v) for v in lst]
    return float(lst)


def body_to_json(c: ConvexBody) -> dict:
    if isinstance(c, VertexHull):
        return {"type": "VertexHull", "points": _floats(c.points)}
    if isinstance(c, HalfspaceIntersection):
        return {"type": "HalfspaceIntersection", "normals": _floats(c.normals),
                "offsets": _floats(c.offsets)}
    if isinstance(c, Ball):
        return {"type": "Ball", "center": _floats(c.center), "radius": float(c.radius)}
    if isinstance(c, Lifted):
        return {"type": "Lifted", "base": body_to_json(c.base)}
    raise TypeError(f"cannot serialize {type(c).__name__}")


def protocol_to_json(p: Protocol) -> dict:
    d = {"dimension": p.dim, "alice_set": body_to_json(p.alice_set)}
    if p.bob_set is not None:
        d["bob_set"] = body_to_json(p.bob_set)
    d["alice_triple"] = _floats(p.alice_triple)
    d["bob_triple"] = _floats(p.bob_triple)
    d["metadata"] = {"name": p.name, **p.metadata}
    return d


def dumps(p: Protocol) -> str:
    return json.dumps(protocol_to_json(p), indent=2, allow_nan=False) + "\n"


def dump(p: Protocol, path) -> None:
    Path(path).write_text(dumps(p))


class _Loader:
    def __init__(self, text: str):
        self.text = text

    def line_of(self, key: str) -> int | None:
        needle = json.dumps(key) + ":"
        for i, ln in enumerate(self.text.splitlines(), 1):
            if needle in ln.replace('": ', '":'):
                return i
        return None

    def fail(self, msg: str, field: str) -> None:
        top = field.split(".")[0].split("[")[0]
        raise ProtocolFileError(msg, field, self.line_of(top))

    def number(self, v, field: str) -> float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"expected a number, got {type(v).__name__}", field)
        if not math.isfinite(v):
            self.fail("number is not finite", field)
        return float(v)

    def vec(self, v, field: str, dim: int | None) -> np.ndarray:
        if not isinstance(v, list) or not v:
            self.fail("expected a nonempty list of numbers", field)
        out = np.array([self.number(x, f"{field}[{i}]") for i, x in enumerate(v)])
        if dim is not None and len(out) != dim:
            self.fail(f"expected {dim} coordinates, got {len(out)}", field)
        return out

    def rows(self, v, field: str, dim: int | None) -> np.ndarray:
        if not isinstance(v, list) or not v:
            self.fail("expected a nonempty list of vectors", field)
        return np.array([self.vec(r, f"{field}[{i}]", dim) for i, r in enumerate(v)])

    def body(self, v, field: str, dim: int) -> ConvexBody:
        if not isinstance(v, dict):
            self.fail("expected an object with a 'type' tag", field)
        kind = v.get("type")
        if kind not in BODY_KEYS:
            self.fail(f"unknown body type {kind!r}; expected one of {sorted(BODY_KEYS)}", field)
        extra = set(v) - {"type", *BODY_KEYS[kind]}
        if extra:
            self.fail(f"unknown keys {sorted(extra)}", field)
        for k in BODY_KEYS[kind]:
            if k not in v:
                self.fail(f"missing key {k!r}", field)
        try:
            if kind == "VertexHull":
                return VertexHull(self.rows(v["points"], f"{field}.points", dim))
            if kind == "HalfspaceIntersection":
                normals = self.rows(v["normals"], f"{field}.normals", dim)
                offsets = self.vec(v["offsets"], f"{field}.offsets", len(normals))
                return HalfspaceIntersection(normals, offsets)
            if kind == "Ball":
                return Ball(self.vec(v["center"], f"{field}.center", dim),
                            self.number(v["radius"], f"{field}.radius"))
            if dim < 2:
                self.fail("a lifted body needs dimension >= 2", field)
            return Lifted(self.body(v["base"], f"{field}.base", dim - 1))
        except GeometryError as exc:
            self.fail(str(exc), field)


def loads(text: str) -> Protocol:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolFileError(exc.msg, None, exc.lineno) from None
    ld = _Loader(text)
    if not isinstance(doc, dict):
        raise ProtocolFileError("top level must be an object", None, 1)
    unknown = [k for k in doc if k not in TOP_KEYS]
    if unknown:
        ld.fail(f"unknown key {unknown[0]!r}", unknown[0])
    for k in REQUIRED:
        if k not in doc:
            raise ProtocolFileError("missing required key", k)
    dim = doc["dimension"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        ld.fail("dimension must be a positive integer", "dimension")
    alice = ld.body(doc["alice_set"], "alice_set", dim)
    bob = ld.body(doc["bob_set"], "bob_set", dim) if doc.get("bob_set") is not None else None
    at = ld.rows(doc["alice_triple"], "alice_triple", dim)
    bt = ld.rows(doc["bob_triple"], "bob_triple", dim)
    for key, t in (("alice_triple", at), ("bob_triple", bt)):
        if len(t) != 3:
            ld.fail(f"expected three vectors (outcome 0, outcome 1, abort), got {len(t)}", key)
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict):
        ld.fail("metadata must be an object", "metadata")
    meta = dict(meta)
    name = meta.pop("name", "")
    if not isinstance(name, str):
        ld.fail("metadata.name must be a string", "metadata.name")
    return Protocol(alice, at, bt, bob, name=name, metadata=meta)


def load(path) -> Protocol:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProtocolFileError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text)
