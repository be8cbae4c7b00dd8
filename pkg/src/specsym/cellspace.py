"""Finite measure-space substrate.

A :class:`CellSpace` is an ordered partition of a finite measure space into
cells of positive rational mass.  Geometrically every root cell is a unit
square scaled by its mass: one axis is "mass" (cutting along it makes pieces
that are interchangeable copies), the other is the cell's uniform coordinate
``u`` on which elements are affine.  Every later cell is a rectangle inside a
root cell.

Spaces are never mutated.  Refining returns a new space that remembers its
parent and a :class:`Refinement` describing how data moves to the children.
Two refinements of a common ancestor always have a canonical common
refinement (pairwise intersections of rectangles); :func:`join` builds it, so
anything living on related spaces can be combined.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .rational import Rat, as_rational

MASS = "mass"
COORD = "coord"

ZERO = Rat(0)
ONE = Rat(1)
FULL = (ZERO, ONE, ZERO, ONE)


class SpaceError(ValueError):
    """Invalid refinement or lookup on a cell space."""


class VersionMismatch(SpaceError):
    """Two objects live on spaces with no common ancestor."""


@dataclass(frozen=True)
class Cell:
    id: int
    mass: Rat
    parent: Optional[int] = None
    # (mass_lo, mass_hi, coord_lo, coord_hi): the rectangle of the parent
    # cell this child occupies, in the parent's own unit coordinates.
    region: tuple = FULL

    @property
    def is_root(self) -> bool:
        return self.parent is None

    @property
    def kind(self) -> Optional[str]:
        if self.parent is None:
            return None
        mlo, mhi, clo, chi = self.region
        if (clo, chi) == (0, 1):
            return MASS
        if (mlo, mhi) == (0, 1):
            return COORD
        return "rect"


@dataclass(frozen=True)
class Refinement:
    """Remap rule from one space to a refinement of it.

    ``rules`` maps each parent id to its children as
    ``(child_id, mass_lo, mass_hi, coord_lo, coord_hi)``.  Cells without a
    rule are carried over under the same id.
    """

    from_version: int
    to_version: int
    rules: Mapping[int, tuple]

    def remap(self, coeffs: Mapping[int, tuple]) -> dict:
        if not self.rules:
            return dict(coeffs)
        out = {}
        rules = self.rules
        for cid, pair in coeffs.items():
            children = rules.get(cid)
            if children is None:
                out[cid] = pair
                continue
            a, b = pair
            for child, _, _, clo, chi in children:
                out[child] = (a + b * clo, b * (chi - clo)) if b else pair
        return out

    def remap_ids(self, ids: Iterable[int]) -> list:
        out = []
        for cid in ids:
            children = self.rules.get(cid)
            if children is None:
                out.append(cid)
            else:
                out.extend(child[0] for child in children)
        return out


class CellSpace:
    """An immutable, versioned finite partition with rational masses."""

    __slots__ = ("version", "cells", "total_mass", "parent", "refinement",
                 "_next_id", "_index", "_also", "_joins", "__weakref__")

    def __init__(self, cells: Sequence[Cell], total_mass: Rat, *,
                 version: int = 0, parent: Optional["CellSpace"] = None,
                 refinement: Optional[Refinement] = None,
                 next_id: Optional[int] = None, also: tuple = ()):
        cells = tuple(cells)
        if sum((c.mass for c in cells), ZERO) != total_mass:
            raise SpaceError("cell masses do not sum to the total mass")
        if any(c.mass <= 0 for c in cells):
            raise SpaceError("cell masses must be strictly positive")
        index = {c.id: i for i, c in enumerate(cells)}
        if len(index) != len(cells):
            raise SpaceError("duplicate cell identifiers")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "total_mass", total_mass)
        object.__setattr__(self, "version", version)
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "refinement", refinement)
        object.__setattr__(self, "_index", index)
        if next_id is None:
            next_id = max(index) + 1
        object.__setattr__(self, "_next_id", next_id)
        # further (space, refinement) pairs this space refines, from joins
        object.__setattr__(self, "_also", tuple(also))
        object.__setattr__(self, "_joins", {})

    def __setattr__(self, name, value):
        raise AttributeError("CellSpace is immutable")

    def __repr__(self):
        return (f"CellSpace(version={self.version}, cells={len(self.cells)}, "
                f"total_mass={self.total_mass})")

    def __len__(self):
        return len(self.cells)

    def __contains__(self, cid) -> bool:
        return cid in self._index

    @property
    def ids(self) -> tuple:
        return tuple(c.id for c in self.cells)

    def cell(self, cid: int) -> Cell:
        try:
            return self.cells[self._index[cid]]
        except KeyError:
            raise SpaceError(f"unknown cell {cid!r}") from None

    def mass(self, cid: int) -> Rat:
        return self.cell(cid).mass

    def position(self, cid: int) -> int:
        return self._index[cid]

    def ordered(self, ids: Iterable[int]) -> list:
        """``ids`` sorted into the space's positional order."""
        return sorted(ids, key=self._index.__getitem__)

    def mass_of(self, ids: Iterable[int]) -> Rat:
        cells, index = self.cells, self._index
        return sum((cells[index[i]].mass for i in ids), ZERO)

    def _links(self):
        if self.parent is not None:
            yield self.parent, self.refinement
        yield from self._also

    def descends_from(self, other: "CellSpace") -> bool:
        try:
            self.chain_from(other)
        except VersionMismatch:
            return False
        return True

    def chain_from(self, ancestor: "CellSpace") -> list:
        """Refinements leading from ``ancestor`` to this space, oldest first."""
        # fast path: the primary lineage
        steps, node = [], self
        while node is not None and node.version >= ancestor.version:
            if node is ancestor:
                steps.reverse()
                return steps
            steps.append(node.refinement)
            node = node.parent
        # general case: joins give some spaces several parents
        seen = {id(self)}
        queue = deque([(self, [])])
        while queue:
            node, path = queue.popleft()
            if node is ancestor:
                return path[::-1]
            for up, ref in node._links():
                if id(up) not in seen and up.version >= ancestor.version:
                    seen.add(id(up))
                    queue.append((up, path + [ref]))
        raise VersionMismatch(
            f"space v{ancestor.version} is not an ancestor of v{self.version}")


def new_space(total_mass=1) -> CellSpace:
    total_mass = as_rational(total_mass)
    if total_mass <= 0:
        raise SpaceError("total mass must be positive")
    return CellSpace([Cell(0, total_mass)], total_mass)


def _bounds(cuts) -> list:
    cuts = [as_rational(c) for c in cuts]
    bounds = [ZERO, *cuts, ONE]
    if any(lo >= hi for lo, hi in zip(bounds, bounds[1:])):
        raise SpaceError("split points must lie strictly inside (0, 1) and increase")
    return bounds


def refine(space: CellSpace, plan: Mapping[int, tuple]) -> tuple:
    """Split several cells at once.

    ``plan`` maps a cell id to ``(kind, cuts)`` where ``kind`` is MASS or
    COORD and ``cuts`` is a strictly increasing sequence in ``(0, 1)``.
    Children replace their parent in place, left child first.  Returns
    ``(new_space, refinement)``; an empty plan returns the space itself with
    an identity refinement.
    """
    if not plan:
        return space, Refinement(space.version, space.version, {})
    next_id = space._next_id
    rules = {}
    cells = []
    pending = dict(plan)
    for cell in space.cells:
        spec = pending.pop(cell.id, None)
        if spec is None or not spec[1]:
            cells.append(cell)
            continue
        kind, cuts = spec
        if kind not in (MASS, COORD):
            raise SpaceError(f"unknown split kind {kind!r}")
        bounds = _bounds(cuts)
        children = []
        for lo, hi in zip(bounds, bounds[1:]):
            region = (lo, hi, ZERO, ONE) if kind == MASS else (ZERO, ONE, lo, hi)
            cells.append(Cell(next_id, cell.mass * (hi - lo), cell.id, region))
            children.append((next_id, *region))
            next_id += 1
        rules[cell.id] = tuple(children)
    if pending:
        raise SpaceError(f"unknown cell {next(iter(pending))!r}")
    new = CellSpace(cells, space.total_mass, version=space.version + 1,
                    parent=space,
                    refinement=Refinement(space.version, space.version + 1, rules),
                    next_id=next_id)
    return new, new.refinement


def split_mass(space: CellSpace, cell: int, r) -> tuple:
    """Split ``cell`` into masses ``r*m`` and ``(1-r)*m``."""
    r = as_rational(r)
    if not 0 < r < 1:
        raise SpaceError("mass split ratio must lie in (0, 1)")
    space.cell(cell)
    return refine(space, {cell: (MASS, [r])})


def split_coord(space: CellSpace, cell: int, t) -> tuple:
    """Cut ``cell`` at coordinate ``t``; affine data is reparameterized."""
    t = as_rational(t)
    if not 0 < t < 1:
        raise SpaceError("coordinate split point must lie in (0, 1)")
    space.cell(cell)
    return refine(space, {cell: (COORD, [t])})


# -- combining related spaces ----------------------------------------------------

def _primary_ancestor(a: CellSpace, b: CellSpace) -> CellSpace:
    seen = set()
    node = a
    while node is not None:
        seen.add(id(node))
        node = node.parent
    node = b
    while node is not None:
        if id(node) in seen:
            return node
        node = node.parent
    raise VersionMismatch("objects live on unrelated spaces")


def _geometry(space: CellSpace, ancestor: CellSpace) -> dict:
    """Each cell as ``(ancestor cell, mlo, mhi, clo, chi)`` in that cell's units."""
    geo = {c.id: (c.id, *FULL) for c in ancestor.cells}
    for step in space.chain_from(ancestor):
        for parent, children in step.rules.items():
            root, m0, m1, u0, u1 = geo.pop(parent)
            dm, du = m1 - m0, u1 - u0
            for cid, a, b, c, d in children:
                geo[cid] = (root, m0 + a * dm, m0 + b * dm, u0 + c * du, u0 + d * du)
    return geo


def _relative(inner, outer) -> tuple:
    _, m0, m1, u0, u1 = outer
    _, a, b, c, d = inner
    dm, du = m1 - m0, u1 - u0
    return ((a - m0) / dm, (b - m0) / dm, (c - u0) / du, (d - u0) / du)


def join(a: CellSpace, b: CellSpace) -> CellSpace:
    """The coarsest common refinement of two related spaces."""
    if a is b or a.descends_from(b):
        return a
    if b.descends_from(a):
        return b
    cached = a._joins.get(id(b))
    if cached is not None:
        return cached
    anc = _primary_ancestor(a, b)
    ga, gb = _geometry(a, anc), _geometry(b, anc)
    by_root: dict = {}
    for c in b.cells:
        by_root.setdefault(gb[c.id][0], []).append(c.id)
    next_id = max(a._next_id, b._next_id)
    cells, rules_a, rules_b = [], {}, {}
    for ca in a.cells:
        geo_a = ga[ca.id]
        root, am0, am1, au0, au1 = geo_a
        pieces = []
        for cb in by_root[root]:
            geo_b = gb[cb]
            _, bm0, bm1, bu0, bu1 = geo_b
            m0, m1 = max(am0, bm0), min(am1, bm1)
            if m0 >= m1:
                continue
            u0, u1 = max(au0, bu0), min(au1, bu1)
            if u0 >= u1:
                continue
            pieces.append(((root, m0, m1, u0, u1), cb, geo_b))
        pieces.sort(key=lambda p: (p[0][1], p[0][3]))
        root_mass = anc.mass(root)
        for geo, cb, geo_b in pieces:
            _, m0, m1, u0, u1 = geo
            if len(pieces) == 1:
                cid = ca.id
                cells.append(ca)
            else:
                cid = next_id
                next_id += 1
                cells.append(Cell(cid, root_mass * (m1 - m0) * (u1 - u0), ca.id,
                                  _relative(geo, geo_a)))
                rules_a.setdefault(ca.id, []).append((cid, *_relative(geo, geo_a)))
            rules_b.setdefault(cb, []).append((cid, *_relative(geo, geo_b)))
    version = max(a.version, b.version) + 1
    ref_a = Refinement(a.version, version, {k: tuple(v) for k, v in rules_a.items()})
    ref_b = Refinement(b.version, version, {k: tuple(v) for k, v in rules_b.items()})
    new = CellSpace(cells, a.total_mass, version=version, parent=a, refinement=ref_a,
                    next_id=next_id, also=((b, ref_b),))
    a._joins[id(b)] = new
    b._joins[id(a)] = new
    return new


def common_space(*spaces: CellSpace) -> CellSpace:
    """A space refining all of ``spaces``: the most refined one when they
    form a chain, otherwise their join."""
    target = spaces[0]
    for s in spaces[1:]:
        if s is not target:
            target = join(target, s)
    return target


def lift_ids(ids: Iterable[int], src: CellSpace, dst: CellSpace) -> list:
    ids = list(ids)
    if src is dst:
        return ids
    for step in dst.chain_from(src):
        ids = step.remap_ids(ids)
    return ids


def lift_coeffs(coeffs: Mapping[int, tuple], src: CellSpace, dst: CellSpace) -> dict:
    if src is dst:
        return dict(coeffs)
    for step in dst.chain_from(src):
        coeffs = step.remap(coeffs)
    return dict(coeffs)


def carve(space: CellSpace, requests: Sequence[tuple]) -> tuple:
    """Cut sub-regions of prescribed masses out of cell pools.

    ``requests`` is a sequence of ``(pool, masses)`` pairs.  Each pool is an
    ordered list of cell ids; its masses are carved greedily left to right,
    mass-splitting a cell whenever a request ends inside it.  Pools must be
    disjoint.  Returns ``(new_space, pieces)`` where ``pieces[i][j]`` is the
    list of cell ids (in the new space) making up mass ``requests[i][1][j]``.
    """
    plan = {}
    # per pool: list of (cell, [(request index, amount), ...])
    layouts = []
    seen = set()
    for pool, masses in requests:
        masses = [as_rational(m) for m in masses]
        if any(m < 0 for m in masses):
            raise SpaceError("cannot carve a negative mass")
        need = sum(masses, ZERO)
        pool = list(pool)
        if seen.intersection(pool):
            raise SpaceError("carving pools overlap")
        seen.update(pool)
        if space.mass_of(pool) < need:
            raise SpaceError("pool too small for the requested masses")
        layout = []
        j = 0
        left = masses[0] if masses else ZERO
        for cid in pool:
            while j < len(masses) and left == 0:
                j += 1
                left = masses[j] if j < len(masses) else ZERO
            if j >= len(masses):
                break
            room = space.mass(cid)
            segs = []
            while room > 0 and j < len(masses):
                take = min(room, left)
                if take > 0:
                    segs.append((j, take))
                room -= take
                left -= take
                if left == 0:
                    j += 1
                    left = masses[j] if j < len(masses) else ZERO
            if room > 0:
                segs.append((None, room))
            layout.append((cid, segs))
        layouts.append((len(masses), layout))
        for cid, segs in layout:
            if len(segs) > 1:
                cuts, acc = [], ZERO
                m = space.mass(cid)
                for _, amount in segs[:-1]:
                    acc += amount
                    cuts.append(acc / m)
                plan[cid] = (MASS, cuts)
    new, ref = refine(space, plan)
    pieces = []
    for count, layout in layouts:
        out = [[] for _ in range(count)]
        for cid, segs in layout:
            children = ref.rules.get(cid)
            ids = [cid] if children is None else [c[0] for c in children]
            for (j, _), child in zip(segs, ids):
                if j is not None:
                    out[j].append(child)
        pieces.append(out)
    return new, pieces


def from_masses(masses: Sequence, total_mass=None) -> tuple:
    """A fresh space whose cells have the given masses, in order.

    Returns ``(space, ids)``.  Used to rebuild spaces from serialized tables.
    """
    masses = [as_rational(m) for m in masses]
    total = sum(masses, ZERO) if total_mass is None else as_rational(total_mass)
    if sum(masses, ZERO) != total:
        raise SpaceError("masses do not add up to the total mass")
    space = new_space(total)
    if len(masses) == 1:
        return space, [0]
    cuts, acc = [], ZERO
    for m in masses[:-1]:
        acc += m
        cuts.append(acc / total)
    space, ref = refine(space, {0: (MASS, cuts)})
    return space, [c[0] for c in ref.rules[0]]
