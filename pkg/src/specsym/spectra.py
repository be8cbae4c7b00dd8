"""Spectral measures in canonical form, quantile functions, and the two
predicates built on them: equivalence and spectral symmetry.

A distribution is a finite set of atoms plus a piecewise-constant density.
Canonical form makes structural equality coincide with equality of measures:
atoms sorted with distinct values, density pieces disjoint, positive, and
adjacent pieces of equal height merged.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from math import lcm
from typing import Iterable, Sequence

from .element import Element, PreconditionError
from .rational import Rat, as_rational

ZERO = Rat(0)


@dataclass(frozen=True)
class SpectralDistribution:
    atoms: tuple  # ((value, mass), ...) strictly increasing values
    density: tuple  # ((left, right, height), ...) disjoint, increasing

    @classmethod
    def build(cls, atoms: Iterable[tuple] = (), pieces: Iterable[tuple] = ()):
        merged: dict = {}
        for v, m in atoms:
            if m:
                merged[v] = merged.get(v, ZERO) + m
        return cls(tuple(sorted((v, m) for v, m in merged.items() if m)),
                   _canonical_density(pieces))

    @property
    def total_mass(self) -> Rat:
        return (sum((m for _, m in self.atoms), ZERO)
                + sum(((r - l) * h for l, r, h in self.density), ZERO))

    def reflect(self) -> "SpectralDistribution":
        """Pushforward under t -> -t."""
        return SpectralDistribution(
            tuple((-v, m) for v, m in reversed(self.atoms)),
            tuple((-r, -l, h) for l, r, h in reversed(self.density)))

    def values(self) -> list:
        """Spectrum as a list of atoms and closed intervals (l, r)."""
        return [v for v, _ in self.atoms] + [(l, r) for l, r, _ in self.density]

    def support_bounds(self) -> tuple:
        lows = [v for v, _ in self.atoms] + [l for l, _, _ in self.density]
        highs = [v for v, _ in self.atoms] + [r for _, r, _ in self.density]
        return min(lows), max(highs)

    def mass_of(self, lo, hi, closed=(True, True)) -> Rat:
        """mu(I) for the interval I between lo and hi."""
        lc, hc = closed
        total = ZERO
        for v, m in self.atoms:
            if (lo < v or (lc and v == lo)) and (v < hi or (hc and v == hi)):
                total += m
        for l, r, h in self.density:
            a, b = max(l, lo), min(r, hi)
            if a < b:
                total += (b - a) * h
        return total


def _canonical_density(pieces: Iterable[tuple]) -> tuple:
    events: dict = {}
    for l, r, h in pieces:
        if l > r:
            l, r = r, l
        if l == r or not h:
            continue
        events[l] = events.get(l, ZERO) + h
        events[r] = events.get(r, ZERO) - h
    out = []
    height = ZERO
    points = sorted(events)
    for p, q in zip(points, points[1:]):
        height += events[p]
        if not height:
            continue
        if out and out[-1][1] == p and out[-1][2] == height:
            out[-1] = (out[-1][0], q, height)
        else:
            out.append((p, q, height))
    return tuple(out)


def distribution(a: Element) -> SpectralDistribution:
    mass = a.space.mass
    atoms = []
    pieces = []
    covered = ZERO
    for c, (x, y) in a.coeffs.items():
        m = mass(c)
        covered += m
        if y:
            pieces.append((min(x, x + y), max(x, x + y), m / abs(y)))
        else:
            atoms.append((x, m))
    rest = a.space.total_mass - covered
    if rest:
        atoms.append((ZERO, rest))
    return SpectralDistribution.build(atoms, pieces)


def dist_moment(d: SpectralDistribution, k: int) -> Rat:
    if k < 1:
        raise ValueError("moment order must be >= 1")
    out = sum((m * v ** k for v, m in d.atoms), ZERO)
    out += sum((h * (r ** (k + 1) - l ** (k + 1)) for l, r, h in d.density), ZERO) / (k + 1)
    return out


def equivalent(a: Element, b: Element) -> bool:
    """Equality of spectral measures (approximate unitary equivalence)."""
    if a.space.total_mass != b.space.total_mass:
        raise PreconditionError("elements live on spaces of different total mass")
    return distribution(a) == distribution(b)


def is_symmetric_distribution(d: SpectralDistribution) -> bool:
    return d == d.reflect()


def is_spectrally_symmetric(a: Element) -> bool:
    return is_symmetric_distribution(distribution(a))


def node_count(d: SpectralDistribution) -> int:
    """Distinct absolute values at which the odd part of ``d`` can live.

    The odd moments of a measure with this many nodes are a nonsingular
    (confluent) Vandermonde system, so vanishing of the first ``node_count``
    odd moments already forces symmetry.
    """
    atom_nodes = {abs(v) for v, _ in d.atoms} - {ZERO}
    edge_nodes = {abs(x) for l, r, _ in d.density for x in (l, r)} - {ZERO}
    return len(atom_nodes) + len(edge_nodes)


def odd_moments_vanish(d: SpectralDistribution, kmax: int) -> bool:
    """Whether every odd moment with 1 <= k <= kmax is exactly zero.

    Works in scaled integers: all values share a common denominator, so each
    moment is an integer combination of integer powers.
    """
    den = 1
    for v, _ in d.atoms:
        den = lcm(den, v.denominator)
    for l, r, _ in d.density:
        den = lcm(den, l.denominator, r.denominator)
    wden = 1
    for _, m in d.atoms:
        wden = lcm(wden, m.denominator)
    for _, _, h in d.density:
        wden = lcm(wden, h.denominator)
    atoms = [(int(v * den), int(m * wden)) for v, m in d.atoms if v]
    pieces = [(int(l * den), int(r * den), int(h * wden)) for l, r, h in d.density]
    # moment_k * den^(k+1) * wden * (k+1) =
    #   (k+1) * den * sum m v^k + sum h (r^(k+1) - l^(k+1))
    apow = [v for v, _ in atoms]
    lpow = [l * l for l, _, _ in pieces]
    rpow = [r * r for _, r, _ in pieces]
    for k in range(1, kmax + 1, 2):
        s = (k + 1) * den * sum(m * p for (_, m), p in zip(atoms, apow))
        s += sum(h * (rp - lp) for (_, _, h), lp, rp in zip(pieces, lpow, rpow))
        if s:
            return False
        apow = [p * v * v for (v, _), p in zip(atoms, apow)]
        lpow = [p * l * l for (l, _, _), p in zip(pieces, lpow)]
        rpow = [p * r * r for (_, r, _), p in zip(pieces, rpow)]
    return True


# -- quantile functions --------------------------------------------------------

@dataclass(frozen=True)
class QuantilePiece:
    t_lo: Rat
    t_hi: Rat
    v_lo: Rat
    v_hi: Rat

    @property
    def is_constant(self) -> bool:
        return self.v_lo == self.v_hi


@dataclass(frozen=True)
class QuantileFunction:
    """Lower quantile on ``[0, total]``, left-continuous, non-decreasing."""

    pieces: tuple

    @property
    def total(self) -> Rat:
        return self.pieces[-1].t_hi

    def __call__(self, t) -> Rat:
        t = as_rational(t)
        if t == 0:
            return self.pieces[0].v_lo
        if not 0 < t <= self.total:
            raise ValueError("quantile argument outside its domain")
        i = bisect.bisect_left([p.t_hi for p in self.pieces], t)
        p = self.pieces[i]
        if p.is_constant:
            return p.v_lo
        return p.v_lo + (p.v_hi - p.v_lo) * (t - p.t_lo) / (p.t_hi - p.t_lo)

    def breakpoints(self) -> list:
        """``(t, value)`` rows tracing the graph, two rows at every jump."""
        rows = []
        for p in self.pieces:
            rows.append((p.t_lo, p.v_lo))
            rows.append((p.t_hi, p.v_hi))
        return rows

    def as_step(self):
        from .scales import StepFunction
        if not all(p.is_constant for p in self.pieces):
            raise ValueError("quantile function has affine pieces")
        return StepFunction([self.pieces[0].t_lo] + [p.t_hi for p in self.pieces],
                            [p.v_lo for p in self.pieces])


def quantile_of(d: SpectralDistribution) -> QuantileFunction:
    cut_at = [v for v, _ in d.atoms]
    parts = []
    for v, m in d.atoms:
        parts.append(((v, 1), m, v, v))
    for l, r, h in d.density:
        inner = [v for v in cut_at if l < v < r]
        bounds = [l, *inner, r]
        for a, b in zip(bounds, bounds[1:]):
            parts.append(((a, 2), (b - a) * h, a, b))
    parts.sort(key=lambda p: p[0])
    pieces = []
    t = ZERO
    for _, length, lo, hi in parts:
        piece = QuantilePiece(t, t + length, lo, hi)
        if pieces:
            prev = pieces[-1]
            same_line = (not prev.is_constant and not piece.is_constant
                         and prev.v_hi == piece.v_lo
                         and (prev.v_hi - prev.v_lo) / (prev.t_hi - prev.t_lo)
                         == (piece.v_hi - piece.v_lo) / length)
            if same_line:
                piece = QuantilePiece(prev.t_lo, piece.t_hi, prev.v_lo, piece.v_hi)
                pieces.pop()
        pieces.append(piece)
        t += length
    return QuantileFunction(tuple(pieces))


def quantile(a: Element) -> QuantileFunction:
    return quantile_of(distribution(a))


def quantile_moment(w: QuantileFunction, k: int) -> Rat:
    if k < 1:
        raise ValueError("moment order must be >= 1")
    out = ZERO
    for p in w.pieces:
        length = p.t_hi - p.t_lo
        if p.is_constant:
            out += length * p.v_lo ** k
        else:
            out += length * (p.v_hi ** (k + 1) - p.v_lo ** (k + 1)) / ((k + 1) * (p.v_hi - p.v_lo))
    return out
