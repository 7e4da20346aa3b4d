"""The vacuum module of the affine algebra at level k, in exact arithmetic.

States are finite sums of canonical PBW monomials: words of creation modes
a(-m), m >= 1, applied to the vacuum ``|0>``.  The canonical word order sorts
primarily by generator index (e before h before f for sl2), secondarily by
depth, deeper modes first within a generator.  All mode actions are computed
from the commutation relation

    [a(m), b(n)] = [a,b](m+n) + m * delta_{m+n,0} * k * <a,b> * Id.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .liealg import LieAlgebra, LieElt
from .scalar import LinForm


class Mode(NamedTuple):
    gen: int
    depth: int


Word = tuple  # tuple[Mode, ...]

VACUUM_WORD: Word = ()


class NotHomogeneous(Exception):
    pass


def mode_sort_key(mode: Mode):
    # depth ascending = deeper first: e(-3) precedes e(-2)
    return (mode.gen, mode.depth)


def is_canonical(word: Word) -> bool:
    return all(
        mode_sort_key(word[i]) <= mode_sort_key(word[i + 1])
        for i in range(len(word) - 1)
    )


def word_weight(word: Word) -> int:
    return sum(-m.depth for m in word)


def word_charge(g: LieAlgebra, word: Word) -> int:
    return sum(g.charge(m.gen) for m in word)


class State:
    """Finite LinForm-weighted sum of canonical PBW monomials."""

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        data = {}
        if terms:
            for word, coeff in terms.items():
                word = tuple(word)
                if any(m.depth >= 0 for m in word):
                    raise ValueError(f"monomial word has a non-creation mode: {word}")
                if not is_canonical(word):
                    raise ValueError(f"monomial word is not canonical: {word}")
                if not isinstance(coeff, LinForm):
                    coeff = LinForm(coeff)
                if coeff:
                    data[word] = coeff
        self._terms = data

    @classmethod
    def zero(cls) -> "State":
        return cls()

    @classmethod
    def vacuum(cls, coeff=1) -> "State":
        return cls({VACUUM_WORD: coeff})

    @classmethod
    def monomial(cls, word: Word, coeff=1) -> "State":
        return cls({tuple(word): coeff})

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def items(self):
        return self._terms.items()

    def words(self):
        return self._terms.keys()

    def coefficient(self, word: Word) -> LinForm:
        return self._terms.get(tuple(word), LinForm(0))

    def __add__(self, other: "State") -> "State":
        out = dict(self._terms)
        for word, coeff in other._terms.items():
            acc = out.get(word, LinForm(0)) + coeff
            if acc:
                out[word] = acc
            else:
                out.pop(word, None)
        st = State.__new__(State)
        st._terms = out
        return st

    def __sub__(self, other: "State") -> "State":
        return self + other.scale(-1)

    def scale(self, factor) -> "State":
        """Scale by a rational or a LinForm (guarded: no nonlinear products)."""
        if isinstance(factor, LinForm):
            if not factor:
                return State.zero()
            return State({w: coeff * factor for w, coeff in self._terms.items()})
        factor = Fraction(factor)
        if not factor:
            return State.zero()
        return State({w: coeff.scale(factor) for w, coeff in self._terms.items()})

    def __eq__(self, other):
        return isinstance(other, State) and self._terms == other._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def render(self, g: LieAlgebra) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for word in sorted(self._terms, key=lambda w: (word_weight(w), w)):
            coeff = self._terms[word]
            body = render_word(g, word)
            if coeff == LinForm(1):
                text = body
            elif coeff == LinForm(-1):
                text = "-" + body
            elif coeff.is_constant or _is_single_symbol(coeff):
                text = f"{coeff}*{body}"
            else:
                text = f"({coeff})*{body}"
            pieces.append(text)
        out = pieces[0]
        for p in pieces[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"State({dict(self._terms)!r})"


def _is_single_symbol(coeff: LinForm) -> bool:
    if coeff.constant or len(coeff.terms) != 1:
        return False
    value = next(iter(coeff.terms.values()))
    return value in (1, -1)


def render_word(g: LieAlgebra, word: Word) -> str:
    """Canonical text form, collapsing equal adjacent modes: ``e(-1)^2*f(-1)|0>``."""
    if not word:
        return "|0>"
    groups = []
    for mode in word:
        if groups and groups[-1][0] == mode:
            groups[-1][1] += 1
        else:
            groups.append([mode, 1])
    factors = []
    for mode, count in groups:
        base = f"{g.label(mode.gen)}({mode.depth})"
        factors.append(base if count == 1 else f"{base}^{count}")
    return "*".join(factors) + "|0>"


def affine_commutator(g: LieAlgebra, a, m: int, b, n: int, k) -> tuple:
    """[a(m), b(n)] as the pair ([a,b], m+n) plus the central scalar m*k*<a,b>.

    ``a`` and ``b`` may be basis indices or LieElts; the scalar is nonzero only
    when m + n = 0.
    """
    if isinstance(a, int):
        a = LieElt.basis(a)
    if isinstance(b, int):
        b = LieElt.basis(b)
    elt = g.bracket_elt(a, b)
    central = Fraction(m) * Fraction(k) * g.form_elt(a, b) if m + n == 0 else Fraction(0)
    return elt, m + n, central


def apply_mode(g: LieAlgebra, a, m: int, v: State, k) -> State:
    """a(m) . v in canonical form; a may be a basis index or a LieElt."""
    k = Fraction(k)
    if isinstance(a, LieElt):
        out = State.zero()
        for idx, coeff in a.items():
            out = out + apply_mode(g, idx, m, v, k).scale(coeff)
        return out
    out = State.zero()
    for word, coeff in v.items():
        out = out + _apply_to_word(g, a, m, word, k).scale(coeff)
    return out


def _apply_to_word(g: LieAlgebra, gen: int, m: int, word: Word, k) -> State:
    # creation mode already in canonical position: prepend
    if m <= -1 and (not word or mode_sort_key(Mode(gen, m)) <= mode_sort_key(word[0])):
        return State.monomial((Mode(gen, m),) + word)
    if not word:
        return State.zero()  # m >= 0 annihilates the vacuum
    b, rest = word[0], word[1:]
    # a(m) b(n) = b(n) a(m) + [a,b](m+n) + central
    out = State.zero()
    inner = _apply_to_word(g, gen, m, rest, k)
    for w2, c2 in inner.items():
        out = out + _apply_to_word(g, b.gen, b.depth, w2, k).scale(c2)
    elt, depth, central = affine_commutator(g, gen, m, b.gen, b.depth, k)
    for g2, c in elt.items():
        out = out + _apply_to_word(g, g2, depth, rest, k).scale(c)
    if central:
        out = out + State.monomial(rest).scale(central)
    return out


def normal_order(g: LieAlgebra, word, k) -> State:
    """The state equal to the (possibly unordered) word applied to the vacuum."""
    word = tuple(word if isinstance(word[0], Mode) else (Mode(*m) for m in word)) if word else ()
    for mode in word:
        if mode.depth >= 0:
            raise ValueError(f"normal_order expects creation modes, got depth {mode.depth}")
    state = State.vacuum()
    for mode in reversed(word):
        state = apply_mode(g, mode.gen, mode.depth, state, k)
    return state


def weight(v: State) -> int:
    """Conformal weight of a homogeneous state."""
    weights = {word_weight(w) for w in v.words()}
    if not weights:
        raise NotHomogeneous("weight of the zero state is undefined")
    if len(weights) > 1:
        raise NotHomogeneous(f"mixed weights {sorted(weights)}")
    return weights.pop()


def charge(g: LieAlgebra, v: State) -> int:
    """Cartan charge (h(0)-eigenvalue) of a homogeneous state."""
    charges = {word_charge(g, w) for w in v.words()}
    if not charges:
        raise NotHomogeneous("charge of the zero state is undefined")
    if len(charges) > 1:
        raise NotHomogeneous(f"mixed charges {sorted(charges)}")
    return charges.pop()


def basis_enum(g: LieAlgebra, w: int, q=None) -> list:
    """All canonical words of conformal weight w (and Cartan charge q if given).

    Deterministic order: shorter words first, then by the modes nearest the
    vacuum; this reproduces the listing order used by the rigidity ansatz.
    """
    if w < 0:
        raise ValueError("weight must be >= 0")
    words = []

    def extend(prefix, remaining, min_key):
        if remaining == 0:
            words.append(tuple(prefix))
            return
        for gen in range(g.dim):
            for depth in range(-remaining, 0):
                mode = Mode(gen, depth)
                if mode_sort_key(mode) < min_key:
                    continue
                prefix.append(mode)
                extend(prefix, remaining + depth, mode_sort_key(mode))
                prefix.pop()

    extend([], w, (-1, -(w + 1)))
    if q is not None:
        words = [wd for wd in words if word_charge(g, wd) == q]
    words.sort(key=lambda wd: (len(wd), tuple((m.gen, -m.depth) for m in reversed(wd))))
    return words


def d_operator(v: State) -> State:
    """Translation operator: D(a(-m) w) = m a(-m-1) w + a(-m) D(w), D|0> = 0."""
    out = State.zero()
    for word, coeff in v.items():
        for i, mode in enumerate(word):
            shifted = word[:i] + (Mode(mode.gen, mode.depth - 1),) + word[i + 1 :]
            # same-generator modes commute freely, so resorting is exact
            shifted = tuple(sorted(shifted, key=mode_sort_key))
            out = out + State.monomial(shifted).scale(coeff.scale(-mode.depth))
    return out
