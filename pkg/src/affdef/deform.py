"""First-order deformation calculus: def-modes, the rule registry, and the evaluator.

A def-mode a^def(m) is the m-th mode of the deformation field attached to the
weight-1 generator a.  Irreducible applications a^def(m).(word)|0> are atoms;
the registry holds their known or ansatz values (states with symbolic
coefficients) plus authoritative rewrite rules.  The evaluator pushes def-modes
rightward with the master commutator identity

    a^def(m) b(n) = b(n) a^def(m) - a(m) b^def(n) + b^def(n) a(m)
                    + [a,b]^def(m+n) + m * c * <a,b> * delta_{m+n,0}

until every atom hits a terminal rule (vacuum target, generator pairing) or a
registered value.  Atoms with negative mode depth are never pushed; they must
be registered, which keeps the reduction terminating.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

from .liealg import LieAlgebra
from .pbw import (
    Mode,
    State,
    apply_mode,
    basis_enum,
    charge,
    d_operator,
    normal_order,
    render_word,
    weight,
    word_charge,
    word_weight,
)
from .scalar import LinForm
from .singular import ADMISSIBLE_LEVEL, WEIGHT3_WORDS


class DefMode(NamedTuple):
    gen: int
    depth: int


@dataclass(frozen=True)
class DefAtom:
    gen: int
    depth: int
    word: tuple

    def key(self):
        return (self.gen, self.depth, self.word)


class UnresolvedAtom(Exception):
    def __init__(self, atom: DefAtom):
        self.atom = atom
        super().__init__(f"no rule for def-atom {atom}")


class DuplicateAtom(Exception):
    pass


class RegistryFrozen(Exception):
    pass


@dataclass(frozen=True)
class Rule:
    atom: DefAtom
    value: State
    provenance: str


class DefTerm(NamedTuple):
    coeff: LinForm
    prefix: tuple  # ordinary modes applied after the def-mode, leftmost outermost
    defmode: DefMode
    target: tuple  # word the def-mode acts on (need not be canonical)


class DefExpression:
    """Sum of def-carrying terms plus a def-free state tail."""

    __slots__ = ("terms", "tail")

    def __init__(self, terms=(), tail=None):
        self.terms = _merge_terms(terms)
        self.tail = tail if tail is not None else State.zero()

    @classmethod
    def atom(cls, defmode: DefMode, target, coeff=1) -> "DefExpression":
        coeff = coeff if isinstance(coeff, LinForm) else LinForm(coeff)
        return cls([DefTerm(coeff, (), defmode, tuple(target))])

    @classmethod
    def from_state(cls, state: State) -> "DefExpression":
        return cls([], state)

    def __add__(self, other: "DefExpression") -> "DefExpression":
        return DefExpression(list(self.terms) + list(other.terms), self.tail + other.tail)

    def scale(self, factor) -> "DefExpression":
        factor = factor if isinstance(factor, LinForm) else LinForm(factor)
        return DefExpression(
            [DefTerm(t.coeff * factor, t.prefix, t.defmode, t.target) for t in self.terms],
            self.tail.scale(factor),
        )

    @property
    def is_state(self) -> bool:
        return not self.terms

    def render(self, g: LieAlgebra) -> str:
        pieces = []
        for t in self.terms:
            body = "".join(f"{g.label(m.gen)}({m.depth})" for m in t.prefix)
            body += f"{g.label(t.defmode.gen)}^def({t.defmode.depth})"
            body += render_word(g, t.target).replace("*", "")
            if t.coeff == LinForm(1):
                pieces.append(body)
            elif t.coeff == LinForm(-1):
                pieces.append("-" + body)
            elif t.coeff.is_constant:
                pieces.append(f"{t.coeff}*{body}")
            else:
                pieces.append(f"({t.coeff})*{body}")
        if self.tail:
            pieces.append(self.tail.render(g))
        if not pieces:
            return "0"
        out = pieces[0]
        for p in pieces[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out


def _merge_terms(terms):
    merged = {}
    order = []
    for t in terms:
        key = (t.prefix, t.defmode, t.target)
        if key in merged:
            merged[key] = merged[key] + t.coeff
        else:
            merged[key] = t.coeff
            order.append(key)
    return tuple(
        DefTerm(merged[key], *key) for key in order if merged[key]
    )


class RuleRegistry:
    """Atom values and rewrite rules; frozen after pipeline setup."""

    def __init__(self, g: LieAlgebra):
        self.g = g
        self._values = {}
        self._rewrites = {}
        self._frozen = False

    def register_value(self, atom: DefAtom, value: State, provenance: str) -> Rule:
        if self._frozen:
            raise RegistryFrozen("registry is frozen")
        key = atom.key()
        if key in self._values:
            raise DuplicateAtom(f"atom already registered: {self.render_atom(atom)}")
        self._check_grading(atom, value)
        rule = Rule(atom, value, provenance)
        self._values[key] = rule
        return rule

    def register_rewrite(self, atom: DefAtom, expr: DefExpression, provenance: str):
        if self._frozen:
            raise RegistryFrozen("registry is frozen")
        key = atom.key()
        if key in self._rewrites:
            raise DuplicateAtom(f"rewrite already registered: {self.render_atom(atom)}")
        self._rewrites[key] = (expr, provenance)

    def _check_grading(self, atom: DefAtom, value: State):
        # weight of a^def(m) v is wt(a) - m - 1 + wt(v) = wt(v) - m for weight-1 a
        if value.is_zero:
            return
        want_weight = word_weight(atom.word) - atom.depth
        want_charge = self.g.charge(atom.gen) + word_charge(self.g, atom.word)
        if weight(value) != want_weight:
            raise ValueError(
                f"rule breaks the weight law: {self.render_atom(atom)} has weight "
                f"{want_weight}, value has {weight(value)}"
            )
        if charge(self.g, value) != want_charge:
            raise ValueError(
                f"rule breaks charge additivity: {self.render_atom(atom)} has charge "
                f"{want_charge}, value has {charge(self.g, value)}"
            )

    def lookup_value(self, defmode: DefMode, word) -> Optional[Rule]:
        return self._values.get((defmode.gen, defmode.depth, tuple(word)))

    def lookup_rewrite(self, defmode: DefMode, word):
        return self._rewrites.get((defmode.gen, defmode.depth, tuple(word)))

    def rules(self):
        return list(self._values.values())

    def freeze(self):
        self._frozen = True

    def render_atom(self, atom: DefAtom) -> str:
        g = self.g
        return (
            f"{g.label(atom.gen)}^def({atom.depth}) "
            + render_word(g, atom.word)
        )

    def dump(self) -> str:
        lines = []
        for key in sorted(self._values):
            rule = self._values[key]
            lines.append(
                f"{self.render_atom(rule.atom)} := {rule.value.render(self.g)} ; {rule.provenance}"
            )
        for key in sorted(self._rewrites):
            expr, provenance = self._rewrites[key]
            atom = DefAtom(*key)
            lines.append(
                f"{self.render_atom(atom)} := {expr.render(self.g)} ; {provenance}"
            )
        return "\n".join(lines)


def vacuum_rule(g: LieAlgebra, a: int, m: int) -> State:
    """The deformation field kills the vacuum: a^def(m)|0> = 0 for every m."""
    return State.zero()


def generator_value(g: LieAlgebra, a: int, m: int, b: int) -> State:
    """a^def(m) b(-1)|0> for m >= 0: c*<a,b>|0> at m = 1, zero otherwise."""
    if m < 0:
        raise ValueError("generator_value covers non-negative mode depths only")
    if m != 1:
        return State.zero()
    pairing = g.form(a, b)
    if not pairing:
        return State.zero()
    return State.vacuum(LinForm.symbol("c", pairing))


@dataclass(frozen=True)
class ModeIdentity:
    """Operator identity [a^def(m), b(n)] + [a(m), b^def(n)] = sum of the terms.

    Each term is (coefficient, def-mode) with ``None`` for the identity operator.
    """

    terms: tuple

    def render(self, g: LieAlgebra) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for coeff, dm in self.terms:
            body = f"{g.label(dm.gen)}^def({dm.depth})" if dm is not None else None
            if body is None:
                pieces.append(str(coeff))
            elif coeff == LinForm(1):
                pieces.append(body)
            elif coeff == LinForm(-1):
                pieces.append("-" + body)
            else:
                pieces.append(f"{coeff}*{body}")
        out = pieces[0]
        for p in pieces[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out


def mode_identity(g: LieAlgebra, a: int, m: int, b: int, n: int) -> ModeIdentity:
    """The commutator condition specialized to weight-1 generators, as operators."""
    terms = []
    for g2, coeff in g.bracket(a, b).items():
        terms.append((LinForm(coeff), DefMode(g2, m + n)))
    if m + n == 0:
        pairing = g.form(a, b)
        if m and pairing:
            terms.append((LinForm.symbol("c", Fraction(m) * pairing), None))
    return ModeIdentity(tuple(terms))


def master_commute(g: LieAlgebra, a: int, m: int, b: int, n: int, w, k) -> DefExpression:
    """Rewrite a^def(m).(b(n) w|0>) by commuting the def-mode one step rightward."""
    w = tuple(w)
    terms = [
        DefTerm(LinForm(1), (Mode(b, n),), DefMode(a, m), w),
        DefTerm(LinForm(-1), (Mode(a, m),), DefMode(b, n), w),
    ]
    # the moved-past action applies to the vector the word spells
    moved = apply_mode(g, a, m, normal_order(g, w, k), k)
    for w2, coeff in moved.items():
        terms.append(DefTerm(coeff, (), DefMode(b, n), w2))
    for g2, coeff in g.bracket(a, b).items():
        terms.append(DefTerm(LinForm(coeff), (), DefMode(g2, m + n), w))
    tail = State.zero()
    if m + n == 0:
        pairing = g.form(a, b)
        if m and pairing:
            # the target word need not be canonical; its state value is
            tail = normal_order(g, w, k).scale(LinForm.symbol("c", Fraction(m) * pairing))
    return DefExpression(terms, tail)


def _apply_prefix(g: LieAlgebra, prefix, state: State, k) -> State:
    for mode in reversed(prefix):
        state = apply_mode(g, mode.gen, mode.depth, state, k)
    return state


def evaluate(
    expr: DefExpression,
    registry: RuleRegistry,
    k,
    collect_residual: bool = False,
):
    """Reduce a def-expression to a pure state.

    Strict mode raises ``UnresolvedAtom`` on any unregistered negative-depth
    atom.  With ``collect_residual`` the unresolved terms are returned alongside
    the state instead (used by the cross-check diagnostic); trailing Cartan
    zero-modes in front of a residual atom are resolved by charge diagonality.
    """
    g = registry.g
    k = Fraction(k)
    terms = list(expr.terms)
    tail = expr.tail
    residual = []
    rounds = 0
    while terms:
        rounds += 1
        if rounds > 10_000:
            raise RuntimeError("def-mode reduction failed to terminate")
        next_terms = []
        for t in terms:
            if not t.coeff:
                continue
            if not t.target:
                continue  # vacuum rule
            rule = registry.lookup_value(t.defmode, t.target)
            if rule is not None:
                tail = tail + _apply_prefix(g, t.prefix, rule.value, k).scale(t.coeff)
                continue
            rewrite = registry.lookup_rewrite(t.defmode, t.target)
            if rewrite is not None:
                sub, _provenance = rewrite
                for s in sub.terms:
                    next_terms.append(
                        DefTerm(t.coeff * s.coeff, t.prefix + s.prefix, s.defmode, s.target)
                    )
                tail = tail + _apply_prefix(g, t.prefix, sub.tail, k).scale(t.coeff)
                continue
            if t.defmode.depth >= 0:
                if len(t.target) == 1 and t.target[0].depth == -1:
                    value = generator_value(g, t.defmode.gen, t.defmode.depth, t.target[0].gen)
                    tail = tail + _apply_prefix(g, t.prefix, value, k).scale(t.coeff)
                    continue
                head = t.target[0]
                sub = master_commute(
                    g, t.defmode.gen, t.defmode.depth, head.gen, head.depth, t.target[1:], k
                )
                for s in sub.terms:
                    next_terms.append(
                        DefTerm(t.coeff * s.coeff, t.prefix + s.prefix, s.defmode, s.target)
                    )
                tail = tail + _apply_prefix(g, t.prefix, sub.tail, k).scale(t.coeff)
                continue
            if collect_residual:
                residual.append(t)
                continue
            raise UnresolvedAtom(DefAtom(t.defmode.gen, t.defmode.depth, t.target))
        terms = _merge_terms(next_terms)
    if not collect_residual:
        return tail
    return tail, _normalize_residual(g, residual)


def _normalize_residual(g: LieAlgebra, terms):
    h = g.theta[1]
    out = []
    for t in terms:
        coeff, prefix = t.coeff, t.prefix
        # a Cartan zero-mode adjacent to the atom acts by the atom's charge
        while prefix and prefix[-1] == Mode(h, 0):
            q = g.charge(t.defmode.gen) + word_charge(g, t.target)
            coeff = coeff.scale(q)
            prefix = prefix[:-1]
        if coeff:
            out.append(DefTerm(coeff, prefix, t.defmode, t.target))
    return _merge_terms(out)


def e_def_power_value(g: LieAlgebra, j: int, k) -> tuple:
    """Value of e^def(-1) e(-1)^j |0>, certified zero by its vanishing ingredients.

    The double-sum expansion of this mode only involves e(alpha) e(-1)|0> and
    e^def(alpha) e(-1)|0> for alpha >= 0; both vanish (nilpotent direction, and
    modes with alpha >= 2 land below weight zero), so every summand is zero.
    """
    k = Fraction(k)
    if k.denominator == 1 and k > 0 and j > k:
        raise ValueError(f"power {j} exceeds the integral level {k}")
    e = g.theta[0]
    steps = []
    single = State.monomial((Mode(e, -1),))
    for alpha in range(0, 4):
        ordinary = apply_mode(g, e, alpha, single, k)
        deformed = generator_value(g, e, alpha, e)
        if ordinary or deformed:
            raise ArithmeticError(
                f"nonzero ingredient at alpha={alpha}: the vanishing argument fails"
            )
        steps.append(
            ("ingredient",
             f"e({alpha})e(-1)|0> = 0 and e^def({alpha})e(-1)|0> = 0")
        )
    steps.append(("conclude", f"e^def(-1)e(-1)^{j}|0> = 0"))
    return State.zero(), steps


def cartan_def_power_vanishing(g: LieAlgebra, i: int, k) -> tuple:
    """Derive h^def(0) e(-1)^(i-1)|0> = 0 by induction on the power.

    Each step expands with the Cartan mode identity, and every summand dies:
    the previous power by induction, the e^def(-1) terms by the power rule,
    the middle terms by the diagonal action of h(0).
    """
    k = Fraction(k)
    if i < 1:
        raise ValueError("power index must be >= 1")
    if k.denominator == 1 and k > 0 and i > k + 1:
        raise ValueError(f"index {i} exceeds the integral level bound {k + 1}")
    e, h = g.theta[0], g.theta[1]
    identity = mode_identity(g, h, 0, e, -1)
    if identity.terms != ((LinForm(2), DefMode(e, -1)),):
        raise ArithmeticError("Cartan mode identity is not 2*e^def(-1)")
    steps = [("base", "h^def(0)|0> = 0")]
    for p in range(1, i):
        power = State.monomial((Mode(e, -1),) * (p - 1))
        diag = apply_mode(g, h, 0, power, k)
        expected = power.scale(2 * (p - 1))
        if diag != expected:
            raise ArithmeticError("diagonal Cartan action check failed")
        zero_power, _ = e_def_power_value(g, p - 1, k)
        if zero_power:
            raise ArithmeticError("power rule ingredient is nonzero")
        steps.append(
            (
                "induction",
                f"h^def(0)e(-1)^{p}|0> = e(-1)h^def(0)e(-1)^{p - 1}|0> "
                f"- h(0)e^def(-1)e(-1)^{p - 1}|0> + e^def(-1)h(0)e(-1)^{p - 1}|0> "
                f"+ 2e^def(-1)e(-1)^{p - 1}|0> = 0",
            )
        )
    return State.zero(), steps


def d_shift(g: LieAlgebra, a: int, m: int, v: State, value_of, k) -> State:
    """Value of a^def(m).(D v) via the translation identity.

    a^def(m)(Dv) = D(a^def(m) v) + m a^def(m-1) v; ``value_of(gen, depth, word)``
    supplies atom values on the monomials of v.
    """
    k = Fraction(k)
    first = State.zero()
    second = State.zero()
    for word, coeff in v.items():
        first = first + value_of(a, m, word).scale(coeff)
        if m:
            second = second + value_of(a, m - 1, word).scale(coeff)
    out = d_operator(first)
    if m:
        out = out + second.scale(m)
    return out


def single_generator_value(g: LieAlgebra, a: int, m: int, b: int, d: int, k) -> State:
    """a^def(m) b(-d)|0> for m >= 0, chained down from the generator pairing.

    b(-d)|0> = D(b(-d+1)|0>)/(d-1), so the translation identity reduces depth d
    to depth d-1 while keeping the mode depth non-negative.
    """
    if m < 0:
        raise ValueError("only non-negative mode depths reduce this way")
    if d < 1:
        raise ValueError("target depth must be a creation depth")
    if d == 1:
        return generator_value(g, a, m, b)

    def value_of(gen, depth, word):
        assert word == (Mode(b, -(d - 1)),)
        return single_generator_value(g, gen, depth, b, d - 1, k)

    shallower = State.monomial((Mode(b, -(d - 1)),))
    return d_shift(g, a, m, shallower, value_of, k).scale(Fraction(1, d - 1))


def register_ansatz(registry: RuleRegistry, atom: DefAtom, symbol_prefix: str) -> Rule:
    """Expand an unknown atom over the graded basis with fresh symbols.

    The value's weight and charge are forced by the rule laws; the basis order
    fixes which symbol lands on which monomial.
    """
    g = registry.g
    want_weight = word_weight(atom.word) - atom.depth
    want_charge = g.charge(atom.gen) + word_charge(g, atom.word)
    value = State.zero()
    for idx, word in enumerate(basis_enum(g, want_weight, want_charge), start=1):
        value = value + State.monomial(word, LinForm.symbol(f"{symbol_prefix}{idx}"))
    return registry.register_value(atom, value, "ansatz")


def admissible_sl2_rule_table(g: LieAlgebra) -> RuleRegistry:
    """The ten authoritative depth-1 def-mode actions on the weight-3 words.

    These are inputs of the level -4/3 computation, registered as rewrite rules
    keyed by the traditional mixed-order spellings; the cross-check diagnostic
    attempts to re-derive each one independently.
    """
    k = ADMISSIBLE_LEVEL
    e, h, f = g.theta
    w1, w2, w3, w4, w5 = WEIGHT3_WORDS
    c = LinForm.symbol("c")
    registry = RuleRegistry(g)

    def expr(terms, tail=None):
        return DefExpression(terms, tail)

    def term(coeff, prefix, gen, depth, target):
        return DefTerm(LinForm(coeff), prefix, DefMode(gen, depth), tuple(target))

    f1 = (Mode(f, 1),)
    h1 = (Mode(h, 1),)
    e_m2 = (Mode(e, -2),)
    e_m1 = (Mode(e, -1),)
    ef = (Mode(e, -1), Mode(f, -1))
    he = (Mode(h, -1), Mode(e, -1))
    table = {
        (f, 1, w1): expr([term(-1, f1, h, -1, e_m2)]),
        (f, 1, w2): expr(
            [term(-1, f1, e, -1, ef)],
            State.monomial(ef, c.scale(2)),
        ),
        (f, 1, w3): expr(
            [term(-1, f1, h, -2, e_m1)],
            State.monomial((Mode(h, -2),), c),
        ),
        (f, 1, w4): expr(
            [term(-1, f1, h, -1, he)],
            State.monomial((Mode(h, -1), Mode(h, -1)), c),
        ),
        (f, 1, w5): expr([]),
        (h, 1, w1): expr(
            [term(-1, h1, h, -1, e_m2)],
            State.monomial(e_m2, c.scale(2)),
        ),
        (h, 1, w2): expr([term(-1, h1, e, -1, ef)]),
        (h, 1, w3): expr([term(-1, h1, h, -2, e_m1)]),
        (h, 1, w4): expr(
            [term(-1, h1, h, -1, he)],
            normal_order(g, he, k).scale(c.scale(4)),
        ),
        (h, 1, w5): expr([]),
    }
    for (gen, depth, word), rhs in table.items():
        registry.register_rewrite(DefAtom(gen, depth, tuple(word)), rhs, "stated")
    return registry


def trivializing_map(v: State, registry: RuleRegistry, k) -> State:
    """The coboundary candidate on monomials: deform each factor but the last.

    f1(a1(-m1) ... an(-mn)|0>) = -sum_{i<n} a1(-m1) ... ai^def(-mi) ... an(-mn)|0>,
    f1(|0>) = 0.  Every needed atom must be registered.
    """
    g = registry.g
    out = State.zero()
    for word, coeff in v.items():
        for i in range(len(word) - 1):
            mode = word[i]
            expr = DefExpression(
                [DefTerm(LinForm(-1), word[:i], DefMode(mode.gen, mode.depth), word[i + 1 :])]
            )
            out = out + evaluate(expr, registry, k).scale(coeff)
    return out
