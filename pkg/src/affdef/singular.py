"""Catalog and verification of the singular vectors generating the maximal ideals.

A homogeneous vector of weight w is singular iff e(0) and every positive mode
a(m), 1 <= m <= w, annihilate it; modes deeper than w land below weight zero
and vanish automatically, so the check is finite and complete.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .liealg import LieAlgebra, sl2
from .pbw import Mode, State, apply_mode, normal_order, weight

ADMISSIBLE_LEVEL = Fraction(-4, 3)

# Weight-3, charge-2 words of the level -4/3 story, in their traditional
# mixed-order spelling (h-modes written first).
WEIGHT3_WORDS = (
    (Mode(1, -1), Mode(0, -2)),               # h(-1)e(-2)|0>
    (Mode(0, -1), Mode(0, -1), Mode(2, -1)),  # e(-1)^2 f(-1)|0>
    (Mode(1, -2), Mode(0, -1)),               # h(-2)e(-1)|0>
    (Mode(1, -1), Mode(1, -1), Mode(0, -1)),  # h(-1)^2 e(-1)|0>
    (Mode(0, -3),),                           # e(-3)|0>
)

# Coefficients of the weight-3 singular vector at level -4/3 over WEIGHT3_WORDS.
# The e(-1)^2 f(-1)|0> coefficient must be 36: it is forced by the annihilation
# conditions, which also pin every other coefficient (the annihilator of the
# five-dimensional stratum has a one-dimensional kernel; see the uniqueness test).
SINGULAR_COEFFS = (Fraction(-48), Fraction(36), Fraction(-6), Fraction(9), Fraction(80))


class NonPositiveLevel(Exception):
    pass


@dataclass(frozen=True)
class SingularVector:
    level: Fraction
    vector: State
    label: str


def integral_relation(k: int) -> SingularVector:
    """e(-1)^(k+1)|0> at positive integral level k."""
    if not isinstance(k, int) or k < 1:
        raise NonPositiveLevel(f"integral level must be a positive integer, got {k!r}")
    g = sl2()
    e = g.theta[0]
    word = (Mode(e, -1),) * (k + 1)
    return SingularVector(Fraction(k), State.monomial(word), f"integral:k={k}")


def admissible_sl2() -> SingularVector:
    """The weight-3 singular vector of the level -4/3 vacuum module, in canonical form."""
    g = sl2()
    vec = State.zero()
    for coeff, word in zip(SINGULAR_COEFFS, WEIGHT3_WORDS):
        vec = vec + normal_order(g, word, ADMISSIBLE_LEVEL).scale(coeff)
    return SingularVector(ADMISSIBLE_LEVEL, vec, "sl2:-4/3")


def catalog(label: str) -> SingularVector:
    """Look up a cataloged singular vector: ``integral:k=N`` or ``sl2:-4/3``."""
    if label == "sl2:-4/3":
        return admissible_sl2()
    if label.startswith("integral:k="):
        try:
            k = int(label.removeprefix("integral:k="))
        except ValueError:
            raise KeyError(f"bad catalog label {label!r}") from None
        return integral_relation(k)
    raise KeyError(f"unknown catalog label {label!r}")


def is_singular(v: State, k, g: LieAlgebra = None) -> tuple:
    """True iff e(0) v = 0 and a(m) v = 0 for every basis a and 1 <= m <= weight(v).

    Returns ``(ok, witness)``; the witness names the first nonvanishing
    application and carries the offending state.
    """
    if g is None:
        g = sl2()
    k = Fraction(k)
    w = weight(v)
    checks = [(g.theta[0], 0)]
    checks += [(a, m) for m in range(1, w + 1) for a in range(g.dim)]
    for a, m in checks:
        image = apply_mode(g, a, m, v, k)
        if image:
            witness = f"{g.label(a)}({m}) leaves {image.render(g)}"
            return False, (g.label(a), m, image, witness)
    return True, None
