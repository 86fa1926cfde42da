"""Canonical JSON-compatible serialization.

All formats are plain JSON values with fields in a fixed order, rendered with
no insignificant whitespace and decimal integers, so equal values serialize
byte-identically.  Fingerprints are SHA-256 over the canonical bytes.
"""

from __future__ import annotations

import hashlib
import json

from .errors import RingMismatch
from .matrix import Matrix
from .ring import GaloisRingSpec, RingElement, RingSpec
from .words import FreeWord, IdentityWordPair


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def fingerprint(obj) -> str:
    """64 hex chars over the canonical bytes of a JSON-ready object."""
    return hashlib.sha256(dumps(obj).encode()).hexdigest()


# --- rings ------------------------------------------------------------------

def ring_to_obj(ring: RingSpec) -> dict:
    return {"summands": [
        {"p": g.p, "m": g.m, "r": g.r, "modulus": list(g.modulus)}
        for g in ring.summands]}


def ring_from_obj(obj: dict) -> RingSpec:
    return RingSpec(tuple(
        GaloisRingSpec(s["p"], s["m"], s["r"], tuple(s["modulus"]))
        for s in obj["summands"]))


def elem_to_obj(a: RingElement) -> list:
    return [list(cs) for cs in a.coeffs]


def elem_from_obj(ring: RingSpec, obj: list) -> RingElement:
    if len(obj) != len(ring.summands):
        raise RingMismatch("element has wrong summand count")
    return ring.element([tuple(cs) for cs in obj])


# --- matrices and vectors ----------------------------------------------------

def matrix_to_obj(a: Matrix) -> dict:
    return {"n": a.n, "ring": ring_to_obj(a.ring),
            "rows": [[elem_to_obj(e) for e in row] for row in a.rows]}


def matrix_from_obj(obj: dict) -> Matrix:
    ring = ring_from_obj(obj["ring"])
    rows = tuple(tuple(elem_from_obj(ring, e) for e in row)
                 for row in obj["rows"])
    return Matrix(obj["n"], ring, rows)


def vector_to_obj(ring: RingSpec, v: tuple) -> dict:
    return {"ring": ring_to_obj(ring), "coords": [elem_to_obj(e) for e in v]}


def vector_from_obj(obj: dict) -> tuple:
    ring = ring_from_obj(obj["ring"])
    return tuple(elem_from_obj(ring, e) for e in obj["coords"])


# --- words -------------------------------------------------------------------

def word_to_obj(w) -> list:
    letters = w.letters if hasattr(w, "letters") else w
    return list(letters)


def freeword_from_obj(k: int, obj: list) -> FreeWord:
    return FreeWord(k, tuple(obj))


def pair_to_obj(p: IdentityWordPair) -> dict:
    return {"wa": word_to_obj(p.wa), "wb": word_to_obj(p.wb),
            "schedule_a": list(p.schedule_a), "schedule_b": list(p.schedule_b)}


def pair_from_obj(obj: dict) -> IdentityWordPair:
    return IdentityWordPair(
        FreeWord(2, tuple(obj["wa"])), FreeWord(2, tuple(obj["wb"])),
        tuple(obj["schedule_a"]), tuple(obj["schedule_b"]))
