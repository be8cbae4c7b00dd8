"""Foldings: the explicit 2-foldings built from superprojections and
mediators, their validation and orthogonal sums, and the two constructions
that drive the decomposition (local folding and small packing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .cellspace import VersionMismatch, carve, common_space
from .element import (
    Element, PreconditionError, align, below, dimension, is_nonnegative,
    is_projection, orthogonal, projection, quasitrace, require_projection,
    sup_norm, support, total, zero,
)
from .rational import Rat, as_rational
from .scales import (
    Scale, StepFunction, concat, make_scale, rescale_dims, riemann_integral,
    support_scale,
)
from .spectra import equivalent

ZERO = Rat(0)
ONE = Rat(1)


class Issue(NamedTuple):
    clause: str
    indices: tuple
    message: str


@dataclass(frozen=True)
class Folding:
    """A k-folding ``(A_1..A_k; B_1..B_k)``: a folding of sum(A) as sum(B)."""

    a: tuple
    b: tuple

    def __post_init__(self):
        if len(self.a) != len(self.b) or not self.a:
            raise ValueError("a folding needs two non-empty lists of equal length")

    @property
    def k(self) -> int:
        return len(self.a)

    @property
    def space(self):
        return common_space(*(e.space for e in self.a + self.b))

    def members(self) -> tuple:
        return self.a + self.b

    def on(self, space) -> "Folding":
        return Folding(tuple(e.on(space) for e in self.a), tuple(e.on(space) for e in self.b))

    @property
    def x(self) -> Element:
        return total(self.a)

    @property
    def y(self) -> Element:
        return total(self.b)

    def support(self) -> Element:
        members = align(*self.members())
        cells = set()
        for e in members:
            cells.update(e.coeffs)
        return projection(members[0].space, cells)

    @property
    def norm(self) -> Rat:
        return max(sup_norm(e) for e in self.members())

    def __neg__(self) -> "Folding":
        return Folding(tuple(-e for e in self.a), tuple(-e for e in self.b))


def zero_folding(space, k: int = 2) -> Folding:
    return Folding((zero(space),) * k, (zero(space),) * k)


@dataclass(frozen=True)
class Superprojection:
    p1: Element
    p2: Element
    p3: Element
    p4: Element

    def members(self) -> tuple:
        return self.p1, self.p2, self.p3, self.p4


def check_superprojection(pi: Superprojection) -> list:
    issues = []
    ps = align(*pi.members())
    for i, p in enumerate(ps):
        if not is_projection(p):
            issues.append(f"P{i + 1} is not a projection")
    if issues:
        return issues
    for i in range(4):
        for j in range(i + 1, 4):
            if not orthogonal(ps[i], ps[j]):
                issues.append(f"P{i + 1} and P{j + 1} are not orthogonal")
    if dimension(ps[0]) != dimension(ps[2]):
        issues.append("D(P1) != D(P3)")
    if dimension(ps[1]) != dimension(ps[3]):
        issues.append("D(P2) != D(P4)")
    return issues


def mediator(p: Element) -> Element:
    """The coordinate element on the cells of ``p``: uniform on [0, 1] there."""
    if not is_projection(p):
        raise PreconditionError("mediator needs a projection")
    return Element._trusted(p.space, {c: (ZERO, ONE) for c in p.coeffs})


def gamma_folding(pi: Superprojection, alpha, beta) -> Folding:
    """The explicit 2-folding of ``alpha*P1`` as ``beta*P2``."""
    alpha, beta = as_rational(alpha), as_rational(beta)
    if alpha <= 0 or beta <= 0:
        raise PreconditionError("alpha and beta must be positive")
    issues = check_superprojection(pi)
    if issues:
        raise PreconditionError("; ".join(issues))
    p1, p2, p3, p4 = align(*pi.members())
    if any(p.is_zero for p in (p1, p2, p3, p4)):
        raise PreconditionError("superprojection has a zero projection")
    if alpha * dimension(p1) != beta * dimension(p2):
        raise PreconditionError("superprojection is not of type alpha|beta")
    return _gamma(p1, p2, p3, p4, alpha, beta)


def _gamma(p1, p2, p3, p4, alpha, beta) -> Folding:
    # A = aP1 + bM1 + aM4    B = -bM1 - aM4
    # V = bP2 + aM2 + bM3    W = -bM3 - aM2
    space = p1.space
    a, b, v, w = {}, {}, {}, {}
    for c in p1.coeffs:
        a[c] = (alpha, beta)
        b[c] = (ZERO, -beta)
    for c in p4.coeffs:
        a[c] = (ZERO, alpha)
        b[c] = (ZERO, -alpha)
    for c in p2.coeffs:
        v[c] = (beta, alpha)
        w[c] = (ZERO, -alpha)
    for c in p3.coeffs:
        v[c] = (ZERO, beta)
        w[c] = (ZERO, -beta)
    t = Element._trusted
    return Folding((t(space, a), t(space, b)), (t(space, v), t(space, w)))


def validate_folding(phi: Folding) -> list:
    """Every failed folding clause; empty when ``phi`` is a folding."""
    try:
        members = align(*phi.members())
    except VersionMismatch:
        return [Issue("space", (), "members do not live on a common space")]
    a, b = members[:phi.k], members[phi.k:]
    issues = []
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            if not orthogonal(ai, bj):
                issues.append(Issue("orthogonality", (i, j),
                                    f"A[{i}] is not orthogonal to B[{j}]"))
    for i, (ai, bi) in enumerate(zip(a, b)):
        if not equivalent(ai, bi):
            issues.append(Issue("equivalence", (i,), f"A[{i}] is not equivalent to B[{i}]"))
    return issues


def folding_sum(*foldings: Folding) -> Folding:
    if not foldings:
        raise ValueError("folding_sum needs at least one folding")
    k = foldings[0].k
    if any(f.k != k for f in foldings):
        raise PreconditionError("foldings have different lengths")
    space = common_space(*(e.space for f in foldings for e in f.members()))
    foldings = [f.on(space) for f in foldings]
    seen = set()
    for f in foldings:
        cells = f.support().coeffs.keys()
        if seen.intersection(cells):
            raise PreconditionError("folding supports are not orthogonal")
        seen.update(cells)
    a = tuple(total([f.a[i] for f in foldings]) for i in range(k))
    b = tuple(total([f.b[i] for f in foldings]) for i in range(k))
    return Folding(a, b)


# -- local folding -------------------------------------------------------------

@dataclass(frozen=True)
class LocalPiece:
    """One quantile step J with its superprojection (E_J, Q_J; E'_J, Q'_J)."""

    alpha: Rat
    pi: Superprojection


def local_folding_pieces(x: Element, q: Element, beta, p: Element) -> list:
    """Allocate the superprojections of a local folding; see local_folding."""
    beta = as_rational(beta)
    x, q, p = align(x, q, p)
    require_projection(q, "Q")
    require_projection(p, "P")
    if beta <= 0:
        raise PreconditionError("beta must be positive")
    if not x.is_step:
        raise PreconditionError("X must be a step element")
    if not is_nonnegative(x):
        raise PreconditionError("X must be positive")
    if not below(support(x), p):
        raise PreconditionError("X must live under P")
    if not below(q, p):
        raise PreconditionError("Q must lie below P")
    if not orthogonal(x, q):
        raise PreconditionError("X must be orthogonal to Q")
    if quasitrace(x) != beta * dimension(q):
        raise PreconditionError("q(X) must equal beta * D(Q)")
    space = x.space
    s_mass = space.mass_of(x.coeffs)
    q_mass = space.mass_of(q.coeffs)
    if space.mass_of(p.coeffs) < 2 * (s_mass + q_mass):
        raise PreconditionError("D(P) must be at least 2[D(s(X)) + D(Q)]")
    if x.is_zero:
        return []

    steps: dict = {}
    for c in x.cells():
        steps.setdefault(x.coeffs[c][0], []).append(c)
    alphas = sorted(steps)
    lengths = [space.mass_of(steps[v]) for v in alphas]
    q_sizes = [v * l / beta for v, l in zip(alphas, lengths)]

    used = set(x.coeffs) | set(q.coeffs)
    mirror_pool = sorted(c for c in p.coeffs if c not in used)
    space, (mirrors, q_parts) = carve(space, [
        (mirror_pool, lengths + q_sizes),
        (sorted(q.coeffs), q_sizes),
    ])
    n = len(alphas)
    x = x.on(space)
    # E_J may have been lifted; recollect by value on the refined space
    by_value: dict = {}
    for c, (v, _) in x.coeffs.items():
        by_value.setdefault(v, []).append(c)
    pieces = []
    for i, v in enumerate(alphas):
        pi = Superprojection(projection(space, by_value[v]),
                             projection(space, q_parts[i]),
                             projection(space, mirrors[i]),
                             projection(space, mirrors[n + i]))
        pieces.append(LocalPiece(v, pi))
    return pieces


def local_folding(x: Element, q: Element, beta, p: Element) -> Folding:
    """A 2-folding of X as beta*Q supported under P.

    X is a positive step element.  Its quantile steps J (value alpha_J on a
    region E_J) each get a block Q_J of Q with alpha_J D(E_J) = beta D(Q_J),
    mirrors E'_J, Q'_J carved from the free part of P, and the explicit
    folding of alpha_J E_J as beta Q_J on that superprojection.  Summing the
    blocks gives the folding; the blocks of Q exhaust Q exactly because
    q(X) = beta D(Q).

    No limit over finer partitions is needed: cutting a step into pieces
    with the same value gives blocks whose sum equals the block built on the
    whole step, so the partition into quantile steps is already final.
    """
    beta = as_rational(beta)
    pieces = local_folding_pieces(x, q, beta, p)
    if not pieces:
        space = common_space(x.space, q.space, p.space)
        return zero_folding(space)
    blocks = [_gamma(*piece.pi.members(), piece.alpha, beta) for piece in pieces]
    return folding_sum(*blocks)


# -- small packing -------------------------------------------------------------

@dataclass(frozen=True)
class SmallPacking:
    a1: Element
    a2: Element
    b1: Element
    b2: Element
    y: Element
    n: int = 0
    alpha: Rat = ZERO
    v: tuple = field(default=(), repr=False)
    w: tuple = field(default=(), repr=False)
    scale: Scale | None = field(default=None, repr=False)

    def on(self, space) -> "SmallPacking":
        return SmallPacking(self.a1.on(space), self.a2.on(space), self.b1.on(space),
                            self.b2.on(space), self.y.on(space), self.n, self.alpha,
                            tuple(e.on(space) for e in self.v),
                            tuple(e.on(space) for e in self.w), self.scale)


def small_packing(x: Element, p: Element, q: Element) -> SmallPacking:
    """Move X, up to a packing of equivalent pieces, into a small corner of Q.

    Returns A1, A2, B1, B2, Y with X = A1 + A2 - B1 - B2 + Y, A1 ~ B1,
    A2 ~ B2, everything but B2 orthogonal to P, B2 P = Y and Y under Q.
    """
    x, p, q = align(x, p, q)
    require_projection(p, "P")
    require_projection(q, "Q")
    if not x.is_step:
        raise PreconditionError("X must be a step element")
    if not orthogonal(x, p):
        raise PreconditionError("X must be orthogonal to P")
    if not below(q, p):
        raise PreconditionError("Q must lie below P")
    if q.is_zero:
        raise PreconditionError("Q must be nonzero")
    space = x.space
    if x.is_zero:
        z = zero(space)
        return SmallPacking(z, z, z, z, z)

    lam = dimension(p)
    beta = dimension(q)
    s_mass = space.mass_of(x.coeffs)
    n = max(1, math.ceil(s_mass / (2 * beta)))
    alpha = s_mass / (2 * n)

    f_scale, f = support_scale(x)
    # a full scale of Q measured inside P A P, relabelled in ambient dimensions
    g_scale = rescale_dims(make_scale(space, sorted(q.coeffs), unit=lam), lam)
    g_slice = g_scale.restrict(ZERO, alpha)
    g_slice = Scale(g_slice.space, ZERO, g_slice.run)
    scale = concat(f_scale, g_slice)

    blocks = [f.restrict((k - 1) * alpha, k * alpha) for k in range(1, 2 * n + 1)]
    g = [blocks[0]]
    for k in range(1, 2 * n):
        g.append(blocks[k] + g[-1].translate(alpha))
    shifted = [gk.translate(alpha) for gk in g]

    points = {k * alpha for k in range(2 * n + 2)}
    for gk in g + shifted:
        points.update(gk.breaks)
    scale = scale.split_at(sorted(points))

    v = tuple(riemann_integral(scale.restrict(*gk.domain), gk) for gk in g)
    w = tuple(riemann_integral(scale.restrict(*hk.domain), hk) for hk in shifted)
    a1 = total(v[0::2], scale.space)
    a2 = total(v[1::2], scale.space)
    b1 = total(w[0::2], scale.space)
    b2 = total(w[1::2], scale.space)
    return SmallPacking(a1, a2, b1, b2, w[-1], n, alpha, v, w, scale)


def small_packing_report(x: Element, p: Element, q: Element, sp: SmallPacking) -> list:
    """Names of the packing conditions that fail (empty when all hold)."""
    x, p, q, a1, a2, b1, b2, y = align(x, p, q, sp.a1, sp.a2, sp.b1, sp.b2, sp.y)
    failed = []
    if not (orthogonal(a1, a2) and orthogonal(b1, b2)
            and orthogonal(a1, b1) and orthogonal(a2, b2)):
        failed.append("pieces orthogonal")
    if not (equivalent(a1, b1) and equivalent(a2, b2)):
        failed.append("A1 ~ B1 and A2 ~ B2")
    if not (orthogonal(a1, p) and orthogonal(a2, p) and orthogonal(b1, p)):
        failed.append("A1, A2, B1 orthogonal to P")
    if not (below(support(y), q) and y.is_step):
        failed.append("Y is a step element under Q")
    b2p = Element._trusted(b2.space, {c: b2.coeffs[c] for c in b2.coeffs if c in p.coeffs})
    if b2p != y:
        failed.append("B2 P = Y")
    if a1 + a2 - b1 - b2 + y != x:
        failed.append("X = A1 + A2 - B1 - B2 + Y")
    return failed
