"""Scales of projections and the Riemann integral calculus they carry.

A :class:`Scale` realizes ``t -> E(t)`` on a closed dimension range
``[t0, t1]``: ``E(t0)`` is the base projection and ``E(t)`` grows by running
through an ordered list of cells.  Evaluating inside a cell mass-splits it, so
every result comes back on a (possibly) refined space.

``unit`` is the mass carried by one unit of dimension.  It is 1 for scales
measured in the ambient algebra and ``D(P)`` for scales measured inside a
compression ``P A P``.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .cellspace import MASS, CellSpace, common_space, lift_ids, refine
from .element import (
    Element, PreconditionError, align, is_projection, orthogonal, projection,
)
from .rational import Rat, as_rational

ZERO = Rat(0)


class StepFunction:
    """A step function on ``[breaks[0], breaks[-1]]``.

    ``values[i]`` holds on the open piece ``(breaks[i], breaks[i+1])``.
    Values at breakpoints only matter to Darboux sums; by default a breakpoint
    carries no value of its own, ``point_values`` overrides that.
    """

    __slots__ = ("breaks", "values", "point_values")

    def __init__(self, breaks: Sequence, values: Sequence, point_values=None):
        breaks = [as_rational(b) for b in breaks]
        values = [as_rational(v) for v in values]
        if len(breaks) != len(values) + 1 or not values:
            raise ValueError("need len(breaks) == len(values) + 1 >= 2")
        if any(a >= b for a, b in zip(breaks, breaks[1:])):
            raise ValueError("breakpoints must increase strictly")
        kb, kv = [breaks[0]], []
        for i, v in enumerate(values):
            if kv and kv[-1] == v:
                kb[-1] = breaks[i + 1]
            else:
                kv.append(v)
                kb.append(breaks[i + 1])
        self.breaks = tuple(kb)
        self.values = tuple(kv)
        self.point_values = {as_rational(t): as_rational(v)
                             for t, v in (point_values or {}).items()}

    @classmethod
    def constant(cls, lo, hi, value) -> "StepFunction":
        return cls([lo, hi], [value])

    def __repr__(self):
        return f"StepFunction({list(self.breaks)}, {list(self.values)})"

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (self.breaks, self.values, self.point_values) == (
            other.breaks, other.values, other.point_values)

    __hash__ = None

    @property
    def domain(self) -> tuple:
        return self.breaks[0], self.breaks[-1]

    def pieces(self):
        for i, v in enumerate(self.values):
            yield self.breaks[i], self.breaks[i + 1], v

    def __call__(self, t) -> Rat:
        t = as_rational(t)
        if t in self.point_values:
            return self.point_values[t]
        lo, hi = self.domain
        if not lo <= t <= hi:
            raise ValueError("argument outside the domain")
        i = bisect.bisect_right(self.breaks, t) - 1
        return self.values[min(i, len(self.values) - 1)]

    def integral(self) -> Rat:
        return sum(((r - l) * v for l, r, v in self.pieces()), ZERO)

    def inf_on(self, lo, hi) -> Rat:
        return min(self._values_on(lo, hi))

    def sup_on(self, lo, hi) -> Rat:
        return max(self._values_on(lo, hi))

    def _values_on(self, lo, hi):
        vals = [v for l, r, v in self.pieces() if l < hi and r > lo]
        vals.extend(v for t, v in self.point_values.items() if lo <= t <= hi)
        return vals

    def _merge(self, other: "StepFunction", op: Callable) -> "StepFunction":
        if self.domain != other.domain:
            raise ValueError("step functions have different domains")
        grid = sorted(set(self.breaks) | set(other.breaks))
        mids = [(a + b) / 2 for a, b in zip(grid, grid[1:])]
        return StepFunction(grid, [op(self(m), other(m)) for m in mids])

    def __add__(self, other):
        return self._merge(other, lambda x, y: x + y)

    def __mul__(self, scalar):
        scalar = as_rational(scalar)
        return StepFunction(self.breaks, [scalar * v for v in self.values])

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return StepFunction(self.breaks, [v ** k for v in self.values])

    def compose(self, phi: Callable) -> "StepFunction":
        """``phi o f`` (point values are dropped)."""
        return StepFunction(self.breaks, [as_rational(phi(v)) for v in self.values])

    def translate(self, shift) -> "StepFunction":
        """The translated function ``t -> f(t - shift)`` on the shifted domain."""
        shift = as_rational(shift)
        return StepFunction([b + shift for b in self.breaks], self.values,
                            {t + shift: v for t, v in self.point_values.items()})

    def precompose_scaling(self, lam) -> "StepFunction":
        """``t -> f(lam * t)`` on ``[a/lam, b/lam]``."""
        lam = as_rational(lam)
        return StepFunction([b / lam for b in self.breaks], self.values,
                            {t / lam: v for t, v in self.point_values.items()})

    def restrict(self, lo, hi) -> "StepFunction":
        lo, hi = as_rational(lo), as_rational(hi)
        a, b = self.domain
        if not a <= lo < hi <= b:
            raise ValueError("restriction interval outside the domain")
        grid = [lo] + [t for t in self.breaks if lo < t < hi] + [hi]
        mids = [(x + y) / 2 for x, y in zip(grid, grid[1:])]
        return StepFunction(grid, [self(m) for m in mids])

    def is_nondecreasing(self) -> bool:
        return all(a <= b for a, b in zip(self.values, self.values[1:]))


@dataclass(frozen=True)
class Scale:
    space: CellSpace
    t0: Rat
    run: tuple
    base: tuple = ()
    unit: Rat = Rat(1)
    _cum: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._cum is None:
            mass = self.space.mass
            cum = [self.t0]
            for c in self.run:
                cum.append(cum[-1] + mass(c) / self.unit)
            object.__setattr__(self, "_cum", tuple(cum))

    @property
    def t1(self) -> Rat:
        return self._cum[-1]

    @property
    def dimension_range(self) -> tuple:
        return self.t0, self.t1

    @property
    def measure(self) -> Rat:
        return self.t1 - self.t0

    def on(self, space: CellSpace) -> "Scale":
        if space is self.space:
            return self
        return Scale(space, self.t0, tuple(lift_ids(self.run, self.space, space)),
                     tuple(lift_ids(self.base, self.space, space)), self.unit)

    def initial(self) -> Element:
        return projection(self.space, self.base)

    def terminal(self) -> Element:
        return projection(self.space, self.base + self.run)

    def width(self) -> Element:
        return projection(self.space, self.run)

    def boundaries(self) -> tuple:
        """Dimensions at which no cell straddles."""
        return self._cum

    def _check(self, t):
        if not self.t0 <= t <= self.t1:
            raise PreconditionError(f"{t} outside the dimension range "
                                    f"[{self.t0}, {self.t1}]")

    def split_at(self, points: Iterable) -> "Scale":
        """Refine the space so that every point is a cell boundary of the run."""
        plan = {}
        cum = self._cum
        for t in points:
            t = as_rational(t)
            self._check(t)
            i = bisect.bisect_left(cum, t)
            if cum[i] == t:
                continue
            lo, hi = cum[i - 1], cum[i]
            cid = self.run[i - 1]
            plan.setdefault(cid, set()).add((t - lo) / (hi - lo))
        if not plan:
            return self
        space, _ = refine(self.space, {c: (MASS, sorted(f)) for c, f in plan.items()})
        return self.on(space)

    def _index(self, t) -> int:
        i = bisect.bisect_left(self._cum, t)
        if i == len(self._cum) or self._cum[i] != t:
            raise PreconditionError("scale not split at this dimension")
        return i

    def eval(self, t) -> Element:
        """E(t), on a refined space when ``t`` falls inside a cell."""
        t = as_rational(t)
        scale = self.split_at([t])
        i = scale._index(t)
        return projection(scale.space, scale.base + scale.run[:i])

    def increment(self, lo, hi) -> Element:
        """E(hi) - E(lo)."""
        scale = self.split_at([lo, hi])
        return projection(scale.space, scale.run[scale._index(lo):scale._index(hi)])

    def restrict(self, lo, hi) -> "Scale":
        lo, hi = as_rational(lo), as_rational(hi)
        if lo > hi:
            raise PreconditionError("empty restriction")
        scale = self.split_at([lo, hi])
        i, j = scale._index(lo), scale._index(hi)
        return Scale(scale.space, lo, scale.run[i:j], scale.base + scale.run[:i],
                     scale.unit, scale._cum[i:j + 1])


def make_scale(space: CellSpace, cells: Sequence, t0=0, base: Sequence = (),
               unit=1) -> Scale:
    cells = tuple(cells)
    base = tuple(base)
    t0, unit = as_rational(t0), as_rational(unit)
    if len(set(cells)) != len(cells) or set(cells) & set(base):
        raise PreconditionError("duplicate cells in scale")
    for c in cells + base:
        space.cell(c)
    if t0 < 0 or unit <= 0:
        raise PreconditionError("invalid scale parameters")
    if space.mass_of(base) != t0 * unit:
        raise PreconditionError("base projection must have dimension t0")
    scale = Scale(space, t0, cells, base, unit)
    if scale.t1 * unit > space.total_mass:
        raise PreconditionError("scale exceeds the total mass")
    return scale


def riemann_integral(scale: Scale, f: StepFunction) -> Element:
    """The step element sum value * (E(r) - E(l)) over the pieces of ``f``."""
    if f.domain != scale.dimension_range:
        raise PreconditionError("integrand domain differs from the dimension range")
    scale = scale.split_at(f.breaks)
    coeffs = {}
    cum = scale.boundaries()
    for l, r, v in f.pieces():
        if not v:
            continue
        i = bisect.bisect_left(cum, l)
        j = bisect.bisect_left(cum, r)
        for c in scale.run[i:j]:
            coeffs[c] = (v, ZERO)
    return Element._trusted(scale.space, coeffs)


def darboux_bounds(scale: Scale, f: StepFunction, partition: Sequence) -> tuple:
    """Lower and upper Darboux sums of ``f`` against ``scale``."""
    partition = [as_rational(t) for t in partition]
    if (partition[0], partition[-1]) != scale.dimension_range or f.domain != scale.dimension_range:
        raise PreconditionError("partition must cover the dimension range")
    if any(a >= b for a, b in zip(partition, partition[1:])):
        raise PreconditionError("partition points must increase")
    scale = scale.split_at(partition)
    cum = scale.boundaries()
    lower, upper = {}, {}
    for a, b in zip(partition, partition[1:]):
        lo, hi = f.inf_on(a, b), f.sup_on(a, b)
        cells = scale.run[bisect.bisect_left(cum, a):bisect.bisect_left(cum, b)]
        for c in cells:
            if lo:
                lower[c] = (lo, ZERO)
            if hi:
                upper[c] = (hi, ZERO)
    return Element._trusted(scale.space, lower), Element._trusted(scale.space, upper)


def spectral_scale(a: Element) -> Scale:
    """Full scale through all of ``a``'s spectral projections."""
    if not a.is_step:
        raise PreconditionError("spectral_scale needs a step element")
    space = a.space
    key = {c: (a.coeffs[c][0] if c in a.coeffs else ZERO, c) for c in space.ids}
    return Scale(space, ZERO, tuple(sorted(space.ids, key=key.__getitem__)))


def support_scale(a: Element) -> tuple:
    """``(scale, f)`` with ``E(delta) = s(A)``, f non-decreasing, A = int f dE."""
    if not a.is_step:
        raise PreconditionError("support_scale needs a step element")
    run = tuple(sorted(a.coeffs, key=lambda c: (a.coeffs[c][0], c)))
    scale = Scale(a.space, ZERO, run)
    if not run:
        return scale, None
    cum = scale.boundaries()
    breaks, values = [cum[0]], []
    for c, t in zip(run, cum[1:]):
        v = a.coeffs[c][0]
        if values and values[-1] == v:
            breaks[-1] = t
        else:
            values.append(v)
            breaks.append(t)
    return scale, StepFunction(breaks, values)


def step_quantile(a: Element) -> StepFunction:
    from .spectra import quantile
    return quantile(a).as_step()


def translate(scale: Scale, direction: str, p: Element) -> Scale:
    """Downward (``E(t) - P``) or upward (``E(t) + P``) translation."""
    space = common_space(scale.space, p.space)
    scale, p = scale.on(space), p.on(space)
    if not is_projection(p):
        raise PreconditionError("translation needs a projection")
    cells = set(p.coeffs)
    shift = space.mass_of(cells) / scale.unit
    if direction == "down":
        if not cells <= set(scale.base):
            raise PreconditionError("P must lie below the initial projection")
        base = tuple(c for c in scale.base if c not in cells)
        return Scale(space, scale.t0 - shift, scale.run, base, scale.unit)
    if direction == "up":
        if cells & (set(scale.base) | set(scale.run)):
            raise PreconditionError("P must be orthogonal to the terminal projection")
        base = scale.base + tuple(space.ordered(cells))
        return Scale(space, scale.t0 + shift, scale.run, base, scale.unit)
    raise ValueError("direction must be 'down' or 'up'")


def concat(first: Scale, second: Scale) -> Scale:
    """``first`` followed by ``second``'s width."""
    space = common_space(first.space, second.space)
    first, second = first.on(space), second.on(space)
    if first.unit != second.unit:
        raise PreconditionError("scales measure dimension in different units")
    if set(second.run) & (set(first.base) | set(first.run)):
        raise PreconditionError("widths are not orthogonal")
    return Scale(space, first.t0, first.run + second.run, first.base, first.unit)


def rescale_dims(scale: Scale, lam) -> Scale:
    """Relabel dimensions ``t -> lam * t`` (compression to ambient algebra)."""
    lam = as_rational(lam)
    if lam <= 0:
        raise PreconditionError("rescaling factor must be positive")
    return Scale(scale.space, scale.t0 * lam, scale.run, scale.base, scale.unit / lam)
