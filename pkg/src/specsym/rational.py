"""Exact rational helpers shared by every module.

The engine computes with ``gmpy2.mpq``; it compares, hashes and mixes with
``fractions.Fraction`` transparently, so callers may pass either.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq

__all__ = ["Rat", "as_rational", "format_rational", "parse_rational"]

Rat = mpq
_RAT = type(mpq(0))


def as_rational(value) -> Rat:
    """Coerce ints, Fractions, mpq values and "p/q" strings to ``Rat``.

    Floats are refused: a binary float almost never means the rational the
    caller had in mind, and the engine promises exact arithmetic.
    """
    if type(value) is _RAT:
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, (int, Rational)) or hasattr(value, "__index__"):
        return mpq(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def parse_rational(text: str) -> Rat:
    text = text.strip()
    if not text or any(c in text for c in ".eE"):
        raise ValueError(f"not a rational literal: {text!r}")
    return mpq(Fraction(text))


def format_rational(q) -> str:
    q = as_rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"
