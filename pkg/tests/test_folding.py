from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from helpers import carve_projection, float_agrees, trace_zero_atoms
from specsym.cellspace import from_masses, new_space
from specsym.element import (
    Element, PreconditionError, align, below, dimension, from_atoms, identity,
    is_projection, moment, orthogonal, projection, quasitrace, zero,
)
from specsym.folding import (
    Folding, Superprojection, check_superprojection, folding_sum,
    gamma_folding, local_folding, local_folding_pieces, mediator,
    small_packing, small_packing_report, validate_folding, zero_folding,
)
from specsym.spectra import distribution


def superprojection(masses):
    """Four cells of the given masses, plus a spare cell if room is left."""
    rest = 1 - sum(masses)
    space, ids = from_masses(list(masses) + ([rest] if rest else []))
    return Superprojection(*(projection(space, [c]) for c in ids[:4]))


def example_gamma():
    pi = superprojection([F(1, 6), F(1, 3), F(1, 6), F(1, 3)])
    return pi, gamma_folding(pi, 2, 1)


# -- mediator ------------------------------------------------------------------

def test_full_mediator_moments():
    m = mediator(identity(new_space()))
    assert [moment(m, k) for k in range(1, 21)] == [F(1, k + 1) for k in range(1, 21)]


def test_half_mediator_trace():
    space, ids = from_masses([F(1, 2), F(1, 2)])
    m = mediator(projection(space, ids[:1]))
    assert quasitrace(m) == F(1, 4)
    assert float_agrees(m, 1, F(1, 4))


def test_mediator_edge_cases():
    assert mediator(zero(new_space())).is_zero
    with pytest.raises(PreconditionError):
        mediator(2 * identity(new_space()))


def test_mediator_independent_of_steps():
    space, ids = from_masses([F(1, 4), F(1, 4), F(1, 2)])
    p = projection(space, ids[:2])
    m = mediator(p)
    b = Element(space, {ids[0]: (3, 0), ids[1]: (-1, 0)})
    # B M is affine on each cell, with slope equal to B's value there
    bm = Element(space, {c: (0, b.coeffs[c][0]) for c in b.coeffs})
    # relative to the compression by P the mediator has mean 1/2
    assert quasitrace(m) / dimension(p) == F(1, 2)
    assert quasitrace(bm) == quasitrace(b) * F(1, 2)


# -- gamma folding ---------------------------------------------------------------

def test_gamma_example_traces():
    pi, phi = example_gamma()
    (a, b), (v, w) = phi.a, phi.b
    assert quasitrace(a) == quasitrace(v) == F(3, 4)
    assert quasitrace(b) == quasitrace(w) == F(-5, 12)
    for e, val in ((a, F(3, 4)), (v, F(3, 4)), (b, F(-5, 12)), (w, F(-5, 12))):
        assert float_agrees(e, 1, val)


def test_gamma_example_contract():
    pi, phi = example_gamma()
    p1, p2 = align(pi.p1, pi.p2)
    assert phi.x == 2 * p1 and phi.y == p2
    assert validate_folding(phi) == []


def test_gamma_rejects_bad_input():
    pi = superprojection([F(1, 6), F(1, 3), F(1, 6), F(1, 3)])
    with pytest.raises(PreconditionError):
        gamma_folding(pi, 1, 1)
    with pytest.raises(PreconditionError):
        gamma_folding(pi, 0, 1)
    bad = superprojection([F(1, 6), F(1, 4), F(1, 5), F(1, 4)])
    assert check_superprojection(bad) == ["D(P1) != D(P3)"]
    with pytest.raises(PreconditionError):
        gamma_folding(bad, 2, 1)


@st.composite
def gamma_instances(draw):
    alpha = F(draw(st.integers(1, 9)), draw(st.integers(1, 5)))
    beta = F(draw(st.integers(1, 9)), draw(st.integers(1, 5)))
    lam = F(draw(st.integers(1, 20)), 1)
    # D(P1) = lam*beta, D(P2) = lam*alpha, scaled down to fit in a unit space
    b, a = lam * beta, lam * alpha
    scale = 2 * (a + b) * draw(st.integers(1, 3))
    b, a, lam = b / scale, a / scale, lam / scale
    return superprojection([b, a, b, a]), alpha, beta, lam, a, b


@given(gamma_instances(), st.integers(1, 12))
@settings(max_examples=60)
def test_gamma_moment_identities(inst, k):
    pi, alpha, beta, lam, a, b = inst
    phi = gamma_folding(pi, alpha, beta)
    (ea, eb), (ev, ew) = phi.a, phi.b
    top = lam * (alpha + beta) ** (k + 1) / (k + 1)
    bottom = (-1) ** k * (alpha ** k * a + beta ** k * b) / (k + 1)
    assert moment(ea, k) == moment(ev, k) == top
    assert moment(eb, k) == moment(ew, k) == bottom


# -- validation and sums ---------------------------------------------------------

def test_validate_flags_tampering():
    _, phi = example_gamma()
    b0 = phi.b[0]
    c = next(iter(b0.coeffs))
    x, y = b0.coeffs[c]
    tampered = Element(b0.space, {**b0.coeffs, c: (x + 1, y)})
    bad = Folding(phi.a, (tampered, phi.b[1]))
    assert [(i.clause, i.indices) for i in validate_folding(bad)] == [("equivalence", (0,))]


def test_validate_flags_overlap():
    _, phi = example_gamma()
    bad = Folding((phi.a[0], phi.a[1]), (phi.a[1], phi.b[1]))
    clauses = {i.clause for i in validate_folding(bad)}
    assert "orthogonality" in clauses


def test_zero_folding_is_valid():
    assert validate_folding(zero_folding(new_space())) == []


def test_folding_sum_with_zero():
    _, phi = example_gamma()
    total = folding_sum(phi, zero_folding(phi.space))
    assert total.a == phi.a and total.b == phi.b


def test_folding_sum_of_disjoint_gammas():
    space, ids = from_masses([F(1, 16)] * 8 + [F(1, 2)])
    p = [projection(space, [c]) for c in ids[:8]]
    phi1 = gamma_folding(Superprojection(*p[:4]), 1, 1)
    phi2 = gamma_folding(Superprojection(*p[4:]), 3, 3)
    s = folding_sum(phi1, phi2)
    assert validate_folding(s) == []
    assert s.norm == max(phi1.norm, phi2.norm) == 6
    with pytest.raises(PreconditionError):
        folding_sum(phi1, phi1)
    with pytest.raises(PreconditionError):
        folding_sum(phi1, zero_folding(space, 3))


# -- local folding -----------------------------------------------------------------

def local_setup(atoms, beta):
    """X from atoms, Q carved from the free cells with q(X) = beta D(Q)."""
    x = from_atoms(new_space(), atoms)
    free = sorted(c for c in x.space.ids if c not in x.coeffs)
    q = carve_projection(x.space, free, quasitrace(x) / beta)
    p = identity(q.space)
    return x.on(q.space), q, p


def check_local(x, q, beta, p, phi):
    x, q, p = align(x, q, p, phi.a[0])[:3]
    assert validate_folding(phi) == []
    assert phi.x == x and phi.y == beta * q
    assert below(phi.support(), p)


def test_local_zero():
    space = new_space()
    phi = local_folding(zero(space), zero(space), 1, identity(space))
    assert validate_folding(phi) == [] and all(e.is_zero for e in phi.members())


def test_local_indicator():
    beta, m = F(3, 2), F(1, 8)
    x, q, p = local_setup([(beta, m)], beta)
    assert dimension(q) == m
    phi = local_folding(x, q, beta, p)
    check_local(x, q, beta, p, phi)
    assert all(moment(phi.x, k) == beta ** k * m for k in range(1, 6))


def test_local_two_steps():
    beta = F(1, 2)
    x, q, p = local_setup([(1, F(1, 16)), (F(5, 2), F(1, 32))], beta)
    phi = local_folding(x, q, beta, p)
    check_local(x, q, beta, p, phi)
    (a, b), (v, w) = phi.a, phi.b
    assert distribution(a) == distribution(v) and distribution(b) == distribution(w)


def test_local_blocks_exhaust_q():
    beta = F(2, 3)
    x, q, p = local_setup([(1, F(1, 16)), (2, F(1, 32)), (F(7, 3), F(1, 24))], beta)
    pieces = local_folding_pieces(x, q, beta, p)
    assert sum(dimension(piece.pi.p2) for piece in pieces) == dimension(q)
    for piece in pieces:
        assert piece.alpha * dimension(piece.pi.p1) == beta * dimension(piece.pi.p2)
        assert check_superprojection(piece.pi) == []


def test_local_preconditions():
    beta = F(1, 2)
    x, q, p = local_setup([(1, F(1, 8))], beta)
    with pytest.raises(PreconditionError, match="q\\(X\\)"):
        local_folding(x, q, 1, p)
    with pytest.raises(PreconditionError, match="positive"):
        local_folding(-x, q, beta, p)
    with pytest.raises(PreconditionError, match="orthogonal"):
        local_folding(x, projection(x.space, x.coeffs), 1, p)
    big = from_atoms(new_space(), [(1, F(1, 3))])
    free = [c for c in big.space.ids if c not in big.coeffs]
    qb = carve_projection(big.space, free, F(1, 3))
    with pytest.raises(PreconditionError, match="D\\(P\\)"):
        local_folding(big, qb, 1, identity(qb.space))


@given(st.lists(st.tuples(st.integers(1, 20), st.integers(1, 5)), min_size=1, max_size=8),
       st.integers(1, 6))
@settings(max_examples=40, deadline=None)
def test_local_soundness(raw, beta_num):
    total = sum(w for _, w in raw)
    # support at most 1/8, so Q and the mirrors always fit
    atoms = [(F(v, 4), F(w, 8 * total)) for v, w in raw]
    beta = F(beta_num, 2)
    x = from_atoms(new_space(), atoms)
    if quasitrace(x) / beta > F(1, 8):
        beta = quasitrace(x) * 8
    x, q, p = local_setup(atoms, beta)
    check_local(x, q, beta, p, local_folding(x, q, beta, p))


# -- small packing -----------------------------------------------------------------

def packing_setup(atoms, q_mass):
    x = from_atoms(new_space(), atoms)
    free = sorted(c for c in x.space.ids if c not in x.coeffs)
    p = projection(x.space, free)
    q = carve_projection(x.space, free, q_mass)
    return x.on(q.space), p.on(q.space), q


def test_packing_zero():
    space, ids = from_masses([F(1, 2), F(1, 2)])
    sp = small_packing(zero(space), projection(space, ids), projection(space, ids[:1]))
    assert all(e.is_zero for e in (sp.a1, sp.a2, sp.b1, sp.b2, sp.y))


def test_packing_example():
    x, p, q = packing_setup([(1, F(1, 5)), (-1, F(1, 5))], F(1, 10))
    assert dimension(p) == F(3, 5)
    sp = small_packing(x, p, q)
    x, a1, a2, b1, b2, y = align(x, sp.a1, sp.a2, sp.b1, sp.b2, sp.y)
    assert a1 + a2 - b1 - b2 + y == x
    assert quasitrace(y) == quasitrace(x) == 0
    assert orthogonal(a1, a2) and orthogonal(b1, b2)
    assert orthogonal(a1, b1) and orthogonal(a2, b2)
    assert small_packing_report(x, p, q, sp) == []
    assert sp.n == 2 and sp.alpha == F(1, 10)


def test_packing_preconditions():
    x, p, q = packing_setup([(1, F(1, 5))], F(1, 10))
    with pytest.raises(PreconditionError):
        small_packing(x, identity(x.space), q)
    with pytest.raises(PreconditionError):
        small_packing(x, p, zero(x.space))


@given(st.lists(st.tuples(st.integers(-12, 12).filter(bool), st.integers(1, 6)),
                min_size=1, max_size=6),
       st.integers(1, 7), st.integers(1, 8))
@settings(max_examples=30, deadline=None)
def test_packing_soundness(raw, support_num, q_num):
    total = sum(w for _, w in raw)
    support = F(support_num, 8)
    atoms = [(F(v, 3), support * F(w, total)) for v, w in raw]
    q_mass = (1 - support) * F(q_num, 8)
    x, p, q = packing_setup(atoms, q_mass)
    sp = small_packing(x, p, q)
    assert small_packing_report(x, p, q, sp) == []
    assert is_projection(q) and sp.y.is_step


def test_packing_on_trace_zero_keeps_trace_of_y():
    import random
    rng = random.Random(5)
    atoms = trace_zero_atoms(rng, 10, F(1, 2))
    x, p, q = packing_setup(atoms, F(1, 8))
    sp = small_packing(x, p, q)
    assert quasitrace(sp.y) == 0 and small_packing_report(x, p, q, sp) == []
