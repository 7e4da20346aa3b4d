"""Exact scalars: arbitrary-precision rationals and affine-linear forms over named unknowns.

Every coefficient in the engine is a ``LinForm``: an exact rational constant plus a
sparse rational combination of unknown symbols (``c``, ``a1`` .. ``a5``, ...).  The
unknowns only ever occur linearly, so the product of two non-constant forms is a
pipeline bug and raises ``NonlinearProduct`` instead of silently extending the ring.
"""

from __future__ import annotations

from fractions import Fraction

# Rationals are stdlib Fractions: always reduced, positive denominator, exact.
Rational = Fraction


class NonlinearProduct(Exception):
    """Product of two non-constant linear forms (forbidden: unknowns are first order)."""


def parse_rational(text: str) -> Fraction:
    """Parse ``p/q`` or an integer literal, with optional sign."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational literal: {text!r}") from exc


def format_rational(q: Fraction) -> str:
    return str(Fraction(q))


def symbol_sort_key(name: str):
    """Deterministic symbol order: alphabetical, with the constant ``c`` last."""
    return (name == "c", name)


class LinForm:
    """Affine-linear expression ``constant + sum(coeff * symbol)`` with exact coefficients.

    Zero coefficients are never stored; two forms are equal iff constant and term
    maps are equal.  Instances are immutable.
    """

    __slots__ = ("constant", "terms")

    def __init__(self, constant=0, terms=None):
        object.__setattr__(self, "constant", Fraction(constant))
        pruned = {}
        if terms:
            for name, coeff in terms.items():
                coeff = Fraction(coeff)
                if coeff:
                    pruned[name] = coeff
        object.__setattr__(self, "terms", pruned)

    def __setattr__(self, name, value):
        raise AttributeError("LinForm is immutable")

    @classmethod
    def const(cls, value) -> "LinForm":
        return cls(value)

    @classmethod
    def symbol(cls, name: str, coeff=1) -> "LinForm":
        return cls(0, {name: Fraction(coeff)})

    def coefficient(self, name: str) -> Fraction:
        return self.terms.get(name, Fraction(0))

    def symbols(self):
        return sorted(self.terms, key=symbol_sort_key)

    @property
    def is_zero(self) -> bool:
        return not self.constant and not self.terms

    @property
    def is_constant(self) -> bool:
        return not self.terms

    def __add__(self, other) -> "LinForm":
        other = _coerce(other)
        merged = dict(self.terms)
        for name, coeff in other.terms.items():
            acc = merged.get(name, Fraction(0)) + coeff
            if acc:
                merged[name] = acc
            else:
                merged.pop(name, None)
        return LinForm(self.constant + other.constant, merged)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __neg__(self) -> "LinForm":
        return self.scale(-1)

    def scale(self, r) -> "LinForm":
        r = Fraction(r)
        if not r:
            return LinForm(0)
        return LinForm(self.constant * r, {n: c * r for n, c in self.terms.items()})

    def __mul__(self, other) -> "LinForm":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = _coerce(other)
        if self.is_constant:
            return other.scale(self.constant)
        if other.is_constant:
            return self.scale(other.constant)
        raise NonlinearProduct(f"({self}) * ({other})")

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LinForm(other)
        if not isinstance(other, LinForm):
            return NotImplemented
        return self.constant == other.constant and self.terms == other.terms

    def __hash__(self):
        return hash((self.constant, tuple(sorted(self.terms.items()))))

    def __bool__(self):
        return not self.is_zero

    def __str__(self):
        if self.is_zero:
            return "0"
        pieces = []
        if self.constant:
            pieces.append((self.constant, None))
        for name in self.symbols():
            pieces.append((self.terms[name], name))
        out = []
        for i, (coeff, name) in enumerate(pieces):
            sign = "-" if coeff < 0 else "+"
            mag = abs(coeff)
            if name is None:
                body = format_rational(mag)
            elif mag == 1:
                body = name
            else:
                body = f"{format_rational(mag)}*{name}"
            if i == 0:
                out.append(body if sign == "+" else "-" + body)
            else:
                out.append(f" {sign} {body}")
        return "".join(out)

    def __repr__(self):
        return f"LinForm({self})"


def _coerce(value) -> LinForm:
    if isinstance(value, LinForm):
        return value
    if isinstance(value, (int, Fraction)):
        return LinForm(value)
    raise TypeError(f"cannot treat {value!r} as a linear form")


ZERO = LinForm(0)
ONE = LinForm(1)
