"""Splitting a trace-zero element into three commuting spectrally symmetric
summands, and an independent verifier for the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cellspace import VersionMismatch, carve, from_masses
from .element import (
    Element, PreconditionError, align, complement, dimension, identity,
    pos_neg_parts, projection, quasitrace, support, zero,
)
from .folding import (
    Folding, SmallPacking, folding_sum, local_folding, small_packing,
    validate_folding, zero_folding,
)
from .rational import Rat
from .spectra import distribution, is_symmetric_distribution, odd_moments_vanish

ZERO = Rat(0)


class VerificationError(AssertionError):
    """A construction produced output that fails its own contract."""


@dataclass(frozen=True)
class Decomposition:
    x: Element
    summands: tuple
    provenance: dict = field(default_factory=dict, repr=False)
    report: tuple = ()

    @property
    def space(self):
        return self.summands[0].space

    def on(self, space) -> "Decomposition":
        return Decomposition(self.x.on(space), tuple(s.on(space) for s in self.summands),
                             {k: v.on(space) for k, v in self.provenance.items()},
                             self.report)


def _require_step_trace_zero(x: Element) -> None:
    if not x.is_step:
        raise PreconditionError("X must be a step element")
    if quasitrace(x) != 0:
        raise PreconditionError(f"q(X) = {quasitrace(x)} is not zero")


def fold_as_symmetric(x: Element, ambient: Element | None = None) -> tuple:
    """``(S, phi)``: a spectrally symmetric S and a 2-folding of X as S.

    Everything lives under ``ambient`` (the identity by default), which must
    contain the support of X with room to spare: D(s(X)) < D(ambient) / 2.
    """
    if ambient is None:
        ambient = identity(x.space)
    x, ambient = align(x, ambient)
    _require_step_trace_zero(x)
    if not set(x.coeffs) <= set(ambient.coeffs):
        raise PreconditionError("X is not supported under the ambient projection")
    space = x.space
    big = dimension(ambient)
    if 2 * space.mass_of(x.coeffs) >= big:
        raise PreconditionError("support of X must have dimension below half the ambient")
    if x.is_zero:
        return zero(space), zero_folding(space)

    xp, xm = pos_neg_parts(x)
    e1, e2 = sorted(xp.coeffs), sorted(xm.coeffs)
    d1, d2 = space.mass_of(e1), space.mass_of(e2)
    delta = (big - 2 * d1 - 2 * d2) / 4
    pool = sorted(c for c in ambient.coeffs if c not in x.coeffs)
    space, (parts,) = carve(space, [(pool, [d1, d2, delta, delta, delta, delta])])
    e3, e4, q1, q2, q3, q4 = (projection(space, p) for p in parts)
    xp, xm = xp.on(space), xm.on(space)
    beta = quasitrace(xp) / delta
    p1 = projection(space, sorted(xp.coeffs)) + e3 + q1 + q2
    p2 = projection(space, sorted(xm.coeffs)) + e4 + q3 + q4
    phi1 = local_folding(xp, q1, beta, p1)
    # the second folding must refine the space the first one produced
    xm, q3, p2 = align(xm, q3, p2, phi1.a[0])[:3]
    phi2 = local_folding(xm, q3, beta, p2)
    phi = folding_sum(phi1, -phi2)
    s = beta * q1 - beta * q3
    return s.on(phi.space), phi


def _bookkeeping(x, sp: SmallPacking, s, phi, p, q) -> dict:
    return {"X": x, "P": p, "Q": q, "A1": sp.a1, "A2": sp.a2, "B1": sp.b1,
            "B2": sp.b2, "Y": sp.y, "S": s, "Y1": phi.a[0], "Y2": phi.a[1],
            "S1": phi.b[0], "S2": phi.b[1]}


def three_symmetric(x: Element) -> Decomposition:
    """X = X1 + X2 + X3 with every X_i spectrally symmetric, all commuting.

    Needs q(X) = 0 and a support strictly smaller than the whole space.
    """
    _require_step_trace_zero(x)
    space = x.space
    if space.mass_of(x.coeffs) >= space.total_mass:
        raise PreconditionError("X has full support; use stabilize_decompose")
    if x.is_zero:
        z = zero(space)
        return Decomposition(x, (z, z, z), {"X": x}, ())

    p = complement(support(x))
    space, ((qcells,),) = carve(space, [(sorted(p.coeffs), [dimension(p) / 4])])
    q = projection(space, qcells)
    x, p = x.on(space), p.on(space)
    sp = small_packing(x, p, q)
    s, phi = fold_as_symmetric(sp.y, ambient=p)
    space = phi.space
    sp, s, x, p, q = sp.on(space), s.on(space), x.on(space), p.on(space), q.on(space)
    y1, y2 = phi.a
    s1, s2 = phi.b
    x1 = (sp.a1 - sp.b1) + (y1 - s1)
    x2 = (sp.a2 - sp.b2) + s
    x3 = y2 - s2
    d = Decomposition(x, (x1, x2, x3), _bookkeeping(x, sp, s, phi, p, q))
    report = tuple(verify_decomposition(x, d)) + tuple(_internal_checks(d, phi))
    if report:
        raise VerificationError("; ".join(report))
    _check_size(x, sp.n, d.space)
    return d


def _internal_checks(d: Decomposition, phi: Folding) -> list:
    pv = d.provenance
    out = []
    if validate_folding(phi):
        out.append("folding of Y is invalid")
    if pv["Y1"] - pv["S1"] + pv["Y2"] - pv["S2"] + pv["S"] != pv["Y"]:
        out.append("Y != (Y1 - S1) + (Y2 - S2) + S")
    if pv["A1"] + pv["A2"] - pv["B1"] - pv["B2"] + pv["Y"] != pv["X"]:
        out.append("X != A1 + A2 - B1 - B2 + Y")
    return out


def size_bound(atoms: int, n: int) -> int:
    """Upper bound on output cells for an input with ``atoms`` nonzero values.

    The packing splits the support scale at the multiples of alpha and at the
    shifted breakpoints of every g_k (at most ``2n`` shifts of ``atoms``
    breaks), and the folding stage adds at most a constant number of cuts per
    step of Y.
    """
    return 32 * (atoms + 2) * (n + 2) + 64


def _check_size(x: Element, n: int, space) -> None:
    atoms = len({v for v, _ in x.coeffs.values()})
    if len(space) > size_bound(atoms, n):
        raise VerificationError(f"output has {len(space)} cells, over the bound "
                                f"{size_bound(atoms, n)}")


def embed_doubled(x: Element) -> Element:
    """X on a fresh space of the same total: a zero half plus every cell of X's
    space at half mass."""
    if not x.is_step:
        raise PreconditionError("X must be a step element")
    src = x.space
    half = src.total_mass / 2
    cells = src.ids
    space, ids = from_masses([half] + [src.mass(c) / 2 for c in cells], src.total_mass)
    return Element._trusted(space, {new: x.coeffs[old] for new, old in zip(ids[1:], cells)
                                    if old in x.coeffs})


def stabilize_decompose(x: Element) -> Decomposition:
    """three_symmetric after diluting the support of X by half.

    The result's ``x`` is the embedded element, not the original one.
    """
    _require_step_trace_zero(x)
    return three_symmetric(embed_doubled(x))


def verify_decomposition(x: Element, d: Decomposition) -> list:
    """Failed checks of a decomposition as short messages; empty when sound."""
    try:
        members = align(x, *d.summands)
    except VersionMismatch:
        return ["summands and X do not share a common space"]
    x, parts = members[0], members[1:]
    out = []
    if len(parts) != 3:
        out.append(f"expected 3 summands, got {len(parts)}")
    acc = zero(x.space)
    for p in parts:
        acc = acc + p
    if acc != x:
        out.append("summands do not add up to X")
    kmax = 2 * len({v for v, _ in x.coeffs.values()}) + 1
    for i, p in enumerate(parts, 1):
        dist = distribution(p)
        if not is_symmetric_distribution(dist):
            out.append(f"X{i} is not spectrally symmetric")
        if not odd_moments_vanish(dist, kmax):
            out.append(f"X{i} has a nonzero odd moment of order <= {kmax}")
        if quasitrace(p) != ZERO:
            out.append(f"q(X{i}) is not zero")
    return out
