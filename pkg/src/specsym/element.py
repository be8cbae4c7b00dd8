"""Self-adjoint elements of the commutative model algebra.

An :class:`Element` assigns to each cell an affine function ``a + b*u`` of the
cell's coordinate.  Step elements have ``b == 0`` everywhere; projections are
step elements with values in ``{0, 1}``.  The mediator of a projection is the
coordinate itself on every cell of that projection.

Binary operations accept elements on different versions of the same space and
lift both to the more refined one.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping, Sequence

from .cellspace import (
    COORD, CellSpace, SpaceError, carve, common_space, lift_coeffs, refine,
)
from .rational import Rat, as_rational

ZERO = Rat(0)
ONE = Rat(1)


class PreconditionError(ValueError):
    """An operation was called outside its domain."""


class Element:
    __slots__ = ("space", "coeffs")

    def __init__(self, space: CellSpace, coeffs: Mapping[int, tuple] = ()):
        clean = {}
        for cid, (a, b) in dict(coeffs).items():
            a, b = as_rational(a), as_rational(b)
            if a or b:
                if cid not in space:
                    raise SpaceError(f"cell {cid!r} is not in the space")
                clean[cid] = (a, b)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def _trusted(cls, space, coeffs):
        # internal fast path: coeffs already exact rationals, no zero pairs
        obj = cls.__new__(cls)
        object.__setattr__(obj, "space", space)
        object.__setattr__(obj, "coeffs", coeffs)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("Element is immutable")

    def __repr__(self):
        return f"Element(v{self.space.version}, {len(self.coeffs)} cells)"

    def on(self, space: CellSpace) -> "Element":
        """This element expressed on a refinement of its space."""
        if space is self.space:
            return self
        coeffs = lift_coeffs(self.coeffs, self.space, space)
        return Element._trusted(space, coeffs)

    def pair(self, cid) -> tuple:
        return self.coeffs.get(cid, (ZERO, ZERO))

    @property
    def is_step(self) -> bool:
        return all(b == 0 for _, b in self.coeffs.values())

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def cells(self) -> list:
        """Support cells in space order."""
        return self.space.ordered(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        a, b = align(self, other)
        return a.coeffs == b.coeffs

    __hash__ = None

    def __add__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return linear_combine(ONE, self, ONE, other)

    def __sub__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return linear_combine(ONE, self, -ONE, other)

    def __neg__(self):
        return Element._trusted(self.space, {c: (-a, -b) for c, (a, b) in self.coeffs.items()})

    def __mul__(self, scalar):
        scalar = as_rational(scalar)
        if not scalar:
            return Element._trusted(self.space, {})
        return Element._trusted(
            self.space, {c: (scalar * a, scalar * b) for c, (a, b) in self.coeffs.items()})

    __rmul__ = __mul__


def align(*elements: Element) -> list:
    """Lift elements to their most refined common space."""
    space = common_space(*(e.space for e in elements))
    return [e.on(space) for e in elements]


def zero(space: CellSpace) -> Element:
    return Element._trusted(space, {})


def identity(space: CellSpace) -> Element:
    return projection(space, space.ids)


def projection(space: CellSpace, cells: Iterable[int]) -> Element:
    return Element._trusted(space, {c: (ONE, ZERO) for c in cells})


def step(space: CellSpace, values: Mapping[int, Rat]) -> Element:
    return Element(space, {c: (v, ZERO) for c, v in values.items()})


def is_projection(p: Element) -> bool:
    return all(pair == (ONE, ZERO) for pair in p.coeffs.values())


def require_projection(p: Element, name: str = "P") -> None:
    if not is_projection(p):
        raise PreconditionError(f"{name} is not a projection")


def dimension(p: Element) -> Rat:
    """D(P): total mass of a projection's cells."""
    require_projection(p)
    return p.space.mass_of(p.coeffs)


def complement(p: Element, within: Element | None = None) -> Element:
    """``within - p`` (default: identity minus ``p``)."""
    if within is None:
        within = identity(p.space)
    p, within = align(p, within)
    require_projection(p)
    require_projection(within, "within")
    if not set(p.coeffs) <= set(within.coeffs):
        raise PreconditionError("projection is not below the ambient projection")
    return projection(within.space, [c for c in within.cells() if c not in p.coeffs])


def below(p: Element, q: Element) -> bool:
    """Projection order ``P <= Q``; also support containment for elements."""
    p, q = align(p, q)
    return set(p.coeffs) <= set(q.coeffs)


def is_nonnegative(a: Element) -> bool:
    return all(x >= 0 and x + y >= 0 for x, y in a.coeffs.values())


# -- ingestion ---------------------------------------------------------------

def from_atoms(space: CellSpace, atoms: Sequence[tuple]) -> Element:
    """A step element whose nonzero atoms are exactly ``atoms``.

    Atoms are ``(value, mass)`` pairs; equal values are merged and zero values
    only use up mass.  Atoms are laid out by ascending value over the space's
    cells in order.  The returned element lives on the refined space.
    """
    merged: dict = {}
    total = ZERO
    for value, mass in atoms:
        value, mass = as_rational(value), as_rational(mass)
        if mass <= 0:
            raise PreconditionError("atom masses must be positive")
        total += mass
        if value:
            merged[value] = merged.get(value, ZERO) + mass
    if total > space.total_mass:
        raise PreconditionError("atom masses exceed the total mass")
    values = sorted(merged)
    space, (pieces,) = carve(space, [(space.ids, [merged[v] for v in values])])
    coeffs = {}
    for v, cells in zip(values, pieces):
        for c in cells:
            coeffs[c] = (v, ZERO)
    return Element._trusted(space, coeffs)


# -- linear structure and trace -----------------------------------------------

def linear_combine(alpha, a: Element, beta, b: Element) -> Element:
    alpha, beta = as_rational(alpha), as_rational(beta)
    a, b = align(a, b)
    out = {}
    for c, (x, y) in a.coeffs.items():
        out[c] = (alpha * x, alpha * y)
    for c, (x, y) in b.coeffs.items():
        px, py = out.get(c, (ZERO, ZERO))
        out[c] = (px + beta * x, py + beta * y)
    return Element._trusted(a.space, {c: p for c, p in out.items() if p[0] or p[1]})


def total(elements: Iterable[Element], space: CellSpace | None = None) -> Element:
    """Sum of several elements on their common space."""
    elements = list(elements)
    if not elements:
        if space is None:
            raise ValueError("empty sum needs a space")
        return zero(space)
    if space is not None:
        elements.append(zero(space))
    elements = align(*elements)
    out: dict = {}
    for e in elements:
        for c, (x, y) in e.coeffs.items():
            if c in out:
                px, py = out[c]
                out[c] = (px + x, py + y)
            else:
                out[c] = (x, y)
    return Element._trusted(elements[0].space, {c: p for c, p in out.items() if p[0] or p[1]})


def _power_integral(a: Rat, b: Rat, k: int) -> Rat:
    # integral of (a + b u)^k over u in [0, 1]
    if not b:
        return a ** k
    return ((a + b) ** (k + 1) - a ** (k + 1)) / ((k + 1) * b)


def quasitrace(a: Element) -> Rat:
    mass = a.space.mass
    return sum((mass(c) * (x + y / 2) for c, (x, y) in a.coeffs.items()), ZERO)


def moment(a: Element, k: int) -> Rat:
    if k < 1:
        raise ValueError("moment order must be >= 1")
    mass = a.space.mass
    return sum((mass(c) * _power_integral(x, y, k) for c, (x, y) in a.coeffs.items()), ZERO)


def support(a: Element) -> Element:
    """Indicator of every cell where ``a`` is not identically zero."""
    return projection(a.space, a.coeffs)


def orthogonal(a: Element, b: Element) -> bool:
    a, b = align(a, b)
    small, big = sorted((a.coeffs, b.coeffs), key=len)
    return not any(c in big for c in small)


def sup_norm(a: Element) -> Rat:
    return max((max(abs(x), abs(x + y)) for x, y in a.coeffs.values()), default=ZERO)


def pos_neg_parts(a: Element) -> tuple:
    """``(A+, A-)`` on a space where every cell has a constant sign.

    Cells whose affine value crosses zero in the interior are cut there first.
    """
    plan = {}
    for c, (x, y) in a.coeffs.items():
        if y:
            u = -x / y
            if 0 < u < 1:
                plan[c] = (COORD, [u])
    if plan:
        space, _ = refine(a.space, plan)
        a = a.on(space)
    pos, neg = {}, {}
    for c, (x, y) in a.coeffs.items():
        if x >= 0 and x + y >= 0:
            pos[c] = (x, y)
        else:
            neg[c] = (-x, -y)
    return Element._trusted(a.space, pos), Element._trusted(a.space, neg)


def map_values(a: Element, fn: Callable[[Rat], Rat]) -> Element:
    """``fn(A)`` for a step element, with ``fn(0)`` filling the zero region."""
    if not a.is_step:
        raise PreconditionError("functional calculus is only provided for step elements")
    out = {}
    z = as_rational(fn(ZERO))
    for c in a.space.ids:
        v = as_rational(fn(a.coeffs[c][0])) if c in a.coeffs else z
        if v:
            out[c] = (v, ZERO)
    return Element._trusted(a.space, out)


def copy_onto(a: Element, target: Element) -> Element:
    """An element equivalent to ``a`` supported under ``target``."""
    a, target = align(a, target)
    if not is_projection(target):
        raise PreconditionError("target is not a projection")
    if not a.is_step:
        raise PreconditionError("copy_onto needs a step element")
    if not orthogonal(a, target):
        raise PreconditionError("target must be orthogonal to the support")
    cells = a.cells()
    space = a.space
    if space.mass_of(cells) > space.mass_of(target.coeffs):
        raise PreconditionError("target too small")
    pool = sorted(target.coeffs)
    space, (pieces,) = carve(space, [(pool, [space.mass(c) for c in cells])])
    out = {}
    for c, piece in zip(cells, pieces):
        for child in piece:
            out[child] = a.coeffs[c]
    return Element._trusted(space, out)
