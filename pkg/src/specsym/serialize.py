"""JSON-ready encodings of spaces, elements, distributions and foldings.

Rationals travel as strings (``"p/q"`` or an integer).  Cells are written in
space order and elements refer to them by position, so a file rebuilds an
identical space with :func:`read_space`.
"""

from __future__ import annotations

import json

from .cellspace import from_masses, new_space
from .element import Element, from_atoms
from .rational import as_rational, format_rational

FORMAT = "specsym.decomposition/1"


class FormatError(ValueError):
    """Input data does not follow the expected layout."""


def fmt(q) -> str:
    return format_rational(q)


def parse(value, what="value"):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise FormatError(f"{what} must be an integer or a \"p/q\" string")
    try:
        return as_rational(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise FormatError(f"bad {what}: {value!r}") from exc


def read_atoms(data) -> tuple:
    """``(atoms, stabilize)`` from an atoms document."""
    if not isinstance(data, dict) or not isinstance(data.get("atoms"), list):
        raise FormatError("expected an object with an \"atoms\" list")
    atoms = []
    for i, entry in enumerate(data["atoms"]):
        if not isinstance(entry, dict) or set(entry) != {"value", "mass"}:
            raise FormatError(f"atom {i} must have exactly \"value\" and \"mass\"")
        value = parse(entry["value"], f"atom {i} value")
        mass = parse(entry["mass"], f"atom {i} mass")
        if mass <= 0:
            raise FormatError(f"atom {i} mass must be positive")
        atoms.append((value, mass))
    if sum(m for _, m in atoms) > 1:
        raise FormatError("atom masses add up to more than 1")
    stabilize = data.get("stabilize", False)
    if not isinstance(stabilize, bool):
        raise FormatError("\"stabilize\" must be a boolean")
    return atoms, stabilize


def element_from_atoms(atoms) -> Element:
    return from_atoms(new_space(), atoms)


def write_space(space) -> dict:
    return {"total_mass": fmt(space.total_mass),
            "cells": [fmt(c.mass) for c in space.cells]}


def read_space(data) -> tuple:
    """``(space, ids)`` where ``ids[i]`` is the cell written at position i."""
    try:
        masses = [parse(m, "cell mass") for m in data["cells"]]
        total = parse(data["total_mass"], "total mass")
    except (KeyError, TypeError) as exc:
        raise FormatError("space needs \"cells\" and \"total_mass\"") from exc
    if not masses or any(m <= 0 for m in masses):
        raise FormatError("cell masses must be positive")
    try:
        return from_masses(masses, total)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def write_element(a: Element) -> list:
    """Rows ``[position, a, b]`` for every cell where ``a`` is nonzero."""
    pos = a.space.position
    return [[pos(c), fmt(x), fmt(y)] for c, (x, y) in
            sorted(a.coeffs.items(), key=lambda item: pos(item[0]))]


def read_element(rows, space, ids) -> Element:
    coeffs = {}
    try:
        for i, x, y in rows:
            if isinstance(i, bool) or not isinstance(i, int) or not 0 <= i < len(ids):
                raise FormatError(f"cell position {i!r} out of range")
            if ids[i] in coeffs:
                raise FormatError(f"cell position {i} listed twice")
            coeffs[ids[i]] = (parse(x, "coefficient"), parse(y, "coefficient"))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError("element rows must be [position, a, b]") from exc
    return Element(space, coeffs)


def write_distribution(d) -> dict:
    return {"atoms": [[fmt(v), fmt(m)] for v, m in d.atoms],
            "density": [[fmt(l), fmt(r), fmt(h)] for l, r, h in d.density]}


def write_folding(phi) -> dict:
    return {"A": [write_element(e) for e in phi.a],
            "B": [write_element(e) for e in phi.b]}


def dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"
