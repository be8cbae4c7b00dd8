"""Generators and independent oracles shared by the test modules."""

from __future__ import annotations

import functools
import math
import random
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from specsym.cellspace import carve, from_masses, new_space
from specsym.element import Element, from_atoms, projection

F = Fraction


# -- seeded generators ---------------------------------------------------------

def rand_value(rng: random.Random, lo=-10, hi=10, den=6) -> Fraction:
    while True:
        v = F(rng.randint(lo * den, hi * den), rng.randint(1, den))
        if v:
            return v


def rand_masses(rng: random.Random, n: int, total) -> list:
    weights = [rng.randint(1, 12) for _ in range(n)]
    s = sum(weights)
    return [F(w, s) * total for w in weights]


def random_step(rng: random.Random, max_atoms=32, support=None) -> Element:
    n = rng.randint(1, max_atoms)
    if support is None:
        support = F(rng.randint(1, 64), 64)
    values = [rand_value(rng) for _ in range(n)]
    return from_atoms(new_space(), list(zip(values, rand_masses(rng, n, support))))


def trace_zero_atoms(rng: random.Random, max_atoms: int, support) -> list:
    """Atoms with both signs, exact trace zero and total mass ``support``."""
    npos = rng.randint(1, max(1, max_atoms // 2))
    nneg = rng.randint(1, max(1, max_atoms - npos))
    pos = [rand_value(rng, 1, 10) for _ in range(npos)]
    neg = [rand_value(rng, -10, -1) for _ in range(nneg)]
    wp = [F(rng.randint(1, 10)) for _ in pos]
    wn = [F(rng.randint(1, 10)) for _ in neg]
    tp = sum(v * w for v, w in zip(pos, wp))
    tn = sum(-v * w for v, w in zip(neg, wn))
    wn = [w * tp / tn for w in wn]
    scale = support / (sum(wp) + sum(wn))
    return [(v, w * scale) for v, w in zip(pos, wp)] + [(v, w * scale) for v, w in zip(neg, wn)]


def random_trace_zero(rng: random.Random, max_atoms=16, support=None) -> Element:
    if support is None:
        support = F(rng.randint(1, 63), 64)
    return from_atoms(new_space(), trace_zero_atoms(rng, max_atoms, support))


def relayout(rng: random.Random, atoms) -> Element:
    """A different cell layout of the same atoms: shuffled and split."""
    pieces = []
    for v, m in atoms:
        if rng.random() < 0.5:
            r = F(rng.randint(1, 4), 5)
            pieces += [(v, m * r), (v, m * (1 - r))]
        else:
            pieces.append((v, m))
    rng.shuffle(pieces)
    rest = 1 - sum(m for _, m in pieces)
    masses = [m for _, m in pieces] + ([rest] if rest else [])
    space, ids = from_masses(masses)
    return Element(space, {c: (v, 0) for c, (v, _) in zip(ids, pieces)})


def layout(*groups):
    """Each group of atoms on its own cells of one fresh unit space."""
    masses = [m for g in groups for _, m in g]
    rest = 1 - sum(masses)
    space, ids = from_masses(masses + ([rest] if rest else []))
    out, i = [], 0
    for g in groups:
        out.append(Element(space, {ids[i + j]: (v, 0) for j, (v, _) in enumerate(g)}))
        i += len(g)
    return out


def carve_projection(elem_space, pool, mass):
    space, ((cells,),) = carve(elem_space, [(sorted(pool), [mass])])
    return projection(space, cells)


# -- hypothesis strategies -----------------------------------------------------

small_rationals = st.fractions(min_value=-8, max_value=8, max_denominator=7)
nonzero_rationals = small_rationals.filter(bool)


@st.composite
def atom_lists(draw, min_size=1, max_size=8, total=None):
    n = draw(st.integers(min_size, max_size))
    values = draw(st.lists(nonzero_rationals, min_size=n, max_size=n))
    weights = draw(st.lists(st.integers(1, 9), min_size=n, max_size=n))
    if total is None:
        total = F(draw(st.integers(1, 16)), 16)
    s = sum(weights)
    return [(v, F(w, s) * total) for v, w in zip(values, weights)]


@st.composite
def affine_elements(draw, max_cells=6):
    """Elements mixing step cells and affine (mediator-like) cells."""
    n = draw(st.integers(1, max_cells))
    weights = draw(st.lists(st.integers(1, 9), min_size=n + 1, max_size=n + 1))
    s = sum(weights)
    space, ids = from_masses([F(w, s) for w in weights])
    coeffs = {}
    for c in ids[:n]:
        a = draw(small_rationals)
        b = draw(st.one_of(st.just(F(0)), small_rationals))
        coeffs[c] = (a, b)
    return Element(space, coeffs)


# -- floating-point oracles ------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _nodes(k: int):
    x, w = np.polynomial.legendre.leggauss(k // 2 + 2)
    return (x + 1) / 2, w / 2


def float_moment(a: Element, k: int) -> tuple:
    """``(moment, absolute moment)`` of ``a`` in floating point.

    The moment integrates each cell's affine value by Gauss-Legendre from the
    raw cell table, independently of the exact code paths.  The absolute
    moment only sets the error scale, so it uses the uniform-law closed form.
    """
    return float_moments(a, [k])[k]


def float_moments(a: Element, ks) -> dict:
    """``float_moment`` for several orders, reading the cell table once."""
    if not a.coeffs:
        return {k: (0.0, 0.0) for k in ks}
    mass = a.space.mass
    rows = np.array([[float(mass(c)), float(x), float(y)] for c, (x, y) in a.coeffs.items()])
    out = {}
    for k in ks:
        u, w = _nodes(k)
        vals = rows[:, 1:2] + rows[:, 2:3] * u[None, :]
        per_cell = (vals ** k) @ w
        abs_cell = _abs_mean(rows[:, 1], rows[:, 2], k)
        out[k] = (math.fsum(rows[:, 0] * per_cell), math.fsum(rows[:, 0] * abs_cell))
    return out


def _abs_mean(x, y, k: int):
    # mean of |t|^k for t uniform between x and x + y, cellwise
    lo, hi = np.minimum(x, x + y), np.maximum(x, x + y)
    flat = y == 0
    width = np.where(flat, 1.0, hi - lo)
    straddle = (lo < 0) & (hi > 0)
    big, small = np.maximum(abs(lo), abs(hi)), np.minimum(abs(lo), abs(hi))
    top = np.where(straddle, hi ** (k + 1) + (-lo) ** (k + 1),
                   big ** (k + 1) - small ** (k + 1))
    return np.where(flat, abs(x) ** k, top / ((k + 1) * width))


def close(approx: tuple, exact, tol=1e-9) -> bool:
    value, scale = approx
    return abs(value - float(exact)) <= tol * max(scale, 1e-300)


def float_agrees(a: Element, k: int, exact, tol=1e-9) -> bool:
    return close(float_moment(a, k), exact, tol)
