import random
from fractions import Fraction

import pytest

from affdef.deform import (
    DefAtom,
    DefExpression,
    DefMode,
    DefTerm,
    DuplicateAtom,
    RegistryFrozen,
    RuleRegistry,
    UnresolvedAtom,
    admissible_sl2_rule_table,
    cartan_def_power_vanishing,
    d_shift,
    e_def_power_value,
    evaluate,
    generator_value,
    master_commute,
    mode_identity,
    register_ansatz,
    single_generator_value,
    trivializing_map,
    vacuum_rule,
)
from affdef.liealg import sl2
from affdef.pbw import Mode, State, basis_enum
from affdef.scalar import LinForm, NonlinearProduct
from affdef.singular import WEIGHT3_WORDS

G = sl2()
E, H, F = G.theta
K43 = Fraction(-4, 3)
C = LinForm.symbol("c")


def atom_expr(gen, depth, word):
    return DefExpression.atom(DefMode(gen, depth), word)


def empty_registry():
    return RuleRegistry(G)


# --- terminal rules ---

def test_vacuum_rule_everywhere():
    for gen, m in [(H, 0), (F, 1), (E, -5)]:
        assert vacuum_rule(G, gen, m).is_zero
        assert evaluate(atom_expr(gen, m, ()), empty_registry(), K43).is_zero


def test_generator_value_pairings():
    assert generator_value(G, F, 1, E) == State.vacuum(C)
    assert generator_value(G, F, 0, E).is_zero
    assert generator_value(G, H, 1, H) == State.vacuum(C.scale(2))
    assert generator_value(G, E, 1, E).is_zero
    with pytest.raises(ValueError):
        generator_value(G, F, -1, E)


# --- master commutator identity ---

def test_mode_identity_f1_e():
    ident = mode_identity(G, F, 1, E, -1)
    assert ident.terms == ((LinForm(-1), DefMode(H, 0)), (C, None))
    assert ident.render(G) == "-h^def(0) + c"


def test_mode_identity_h0_e():
    ident = mode_identity(G, H, 0, E, -1)
    assert ident.terms == ((LinForm(2), DefMode(E, -1)),)
    assert ident.render(G) == "2*e^def(-1)"


def test_mode_identity_nilpotent_direction():
    ident = mode_identity(G, E, 1, E, -1)
    assert ident.terms == ()
    assert ident.render(G) == "0"


def test_master_commute_structure():
    expr = master_commute(G, F, 1, E, -1, (), Fraction(2))
    # pushes past one mode: b(n) a^def(m) - a(m) b^def(n) (+ moved + bracket + central)
    assert DefTerm(LinForm(1), (Mode(E, -1),), DefMode(F, 1), ()) in expr.terms
    assert DefTerm(LinForm(-1), (Mode(F, 1),), DefMode(E, -1), ()) in expr.terms
    assert DefTerm(LinForm(-1), (), DefMode(H, 0), ()) in expr.terms
    assert expr.tail == State.vacuum(C)


def test_generator_value_agrees_with_master_route():
    """Dual route: the pairing rule is re-derivable from the master rewrite alone."""
    for a in (E, H, F):
        for b in (E, H, F):
            for m in (0, 1, 2):
                direct = generator_value(G, a, m, b)
                expr = master_commute(G, a, m, b, -1, (), K43)
                assert evaluate(expr, empty_registry(), K43) == direct


# --- translation identity ---

def zero_values(gen, depth, word):
    return State.zero()


def test_single_generator_deep_targets_vanish():
    # f^def(1) e(-2)|0> = D(c|0>) + f^def(0) e(-1)|0> = 0
    assert single_generator_value(G, F, 1, E, 2, K43).is_zero
    assert single_generator_value(G, F, 1, E, 3, K43).is_zero
    assert single_generator_value(G, H, 0, E, 2, K43).is_zero
    assert single_generator_value(G, F, 1, E, 1, K43) == State.vacuum(C)


def test_d_shift_produces_depth_constraint():
    # with h^def(-1)e(-1)|0> = 0:  h^def(-1)e(-2)|0> = -h^def(-2)e(-1)|0>
    placeholder = State.monomial((Mode(E, -3),), LinForm.symbol("a1"))

    def values(gen, depth, word):
        assert word == (Mode(E, -1),)
        if (gen, depth) == (H, -1):
            return State.zero()
        if (gen, depth) == (H, -2):
            return placeholder
        raise AssertionError((gen, depth))

    got = d_shift(G, H, -1, State.monomial((Mode(E, -1),)), values, K43)
    assert got == placeholder.scale(-1)


def test_d_shift_on_vacuum():
    got = d_shift(G, E, 0, State.vacuum(), zero_values, K43)
    assert got.is_zero


# --- the two vanishing lemmas ---

@pytest.mark.parametrize("j,k", [(1, 1), (1, 5), (3, 3)])
def test_power_rule_vanishes(j, k):
    value, steps = e_def_power_value(G, j, Fraction(k))
    assert value.is_zero
    assert any("conclude" in s[0] for s in steps)


def test_power_rule_guard():
    with pytest.raises(ValueError):
        e_def_power_value(G, 4, Fraction(3))


def test_cartan_vanishing_base_case():
    value, steps = cartan_def_power_vanishing(G, 1, Fraction(2))
    assert value.is_zero
    assert len(steps) == 1  # base case only


def test_cartan_vanishing_induction():
    value, steps = cartan_def_power_vanishing(G, 3, Fraction(2))
    assert value.is_zero
    inductions = [s for s in steps if s[0] == "induction"]
    assert len(inductions) == 2


# --- registry ---

def test_register_ansatz_expansions():
    registry = empty_registry()
    rule = register_ansatz(registry, DefAtom(H, -1, (Mode(E, -2),)), "a")
    expected = State.zero()
    for idx, word in enumerate(basis_enum(G, 3, 2), start=1):
        expected = expected + State.monomial(word, LinForm.symbol(f"a{idx}"))
    assert rule.value == expected
    # the other two families expand over the same five monomials
    rule_b = register_ansatz(registry, DefAtom(E, -1, (Mode(E, -1), Mode(F, -1))), "b")
    rule_c = register_ansatz(registry, DefAtom(H, -1, (Mode(H, -1), Mode(E, -1))), "c")
    assert sorted(rule_b.value.words()) == sorted(expected.words())
    assert sorted(rule_c.value.words()) == sorted(expected.words())
    assert rule_b.value.coefficient((Mode(E, -3),)) == LinForm.symbol("b1")
    assert rule_c.value.coefficient((Mode(E, -3),)) == LinForm.symbol("c1")


def test_register_duplicate_atom():
    registry = empty_registry()
    register_ansatz(registry, DefAtom(H, -1, (Mode(E, -2),)), "a")
    with pytest.raises(DuplicateAtom):
        register_ansatz(registry, DefAtom(H, -1, (Mode(E, -2),)), "x")


def test_registry_rejects_weight_law_violation():
    registry = empty_registry()
    # h^def(-1)e(-2)|0> has weight 3 and charge 2; a weight-2 value must be rejected
    with pytest.raises(ValueError, match="weight"):
        registry.register_value(
            DefAtom(H, -1, (Mode(E, -2),)), State.monomial((Mode(E, -2),)), "bad"
        )
    with pytest.raises(ValueError, match="charge"):
        registry.register_value(
            DefAtom(H, -1, (Mode(E, -2),)),
            State.monomial((Mode(E, -1), Mode(H, -1), Mode(F, -1))),
            "bad",
        )


def test_registry_freeze():
    registry = empty_registry()
    registry.freeze()
    with pytest.raises(RegistryFrozen):
        registry.register_value(DefAtom(H, -1, (Mode(E, -1),)), State.zero(), "late")


def test_registry_rule_grading_holds_for_pipeline_rules():
    registry = empty_registry()
    register_ansatz(registry, DefAtom(H, -1, (Mode(E, -2),)), "a")
    register_ansatz(registry, DefAtom(H, -1, (Mode(H, -1), Mode(E, -1))), "b")
    register_ansatz(registry, DefAtom(E, -1, (Mode(E, -1), Mode(F, -1))), "c")
    for rule in registry.rules():
        registry._check_grading(rule.atom, rule.value)  # re-check, exact


def test_registry_dump():
    registry = empty_registry()
    register_ansatz(registry, DefAtom(H, -1, (Mode(E, -2),)), "a")
    dump = registry.dump()
    assert "h^def(-1) e(-2)|0> :=" in dump
    assert "; ansatz" in dump


# --- the stated rule table ---

def test_rule_table_lookups():
    table = admissible_sl2_rule_table(G)
    w1, w2, w3, w4, w5 = WEIGHT3_WORDS
    expr, _ = table.lookup_rewrite(DefMode(F, 1), w5)
    assert expr.is_state and expr.tail.is_zero  # f^def(1)e(-3)|0> = 0
    expr, _ = table.lookup_rewrite(DefMode(H, 1), w3)
    assert expr.tail.is_zero
    assert expr.terms == (
        DefTerm(LinForm(-1), (Mode(H, 1),), DefMode(H, -2), (Mode(E, -1),)),
    )
    expr, _ = table.lookup_rewrite(DefMode(F, 1), w3)
    assert expr.tail == State.monomial((Mode(H, -2),), C)
    assert expr.terms == (
        DefTerm(LinForm(-1), (Mode(F, 1),), DefMode(H, -2), (Mode(E, -1),)),
    )


# --- the evaluator ---

def test_evaluate_generator_pairing():
    got = evaluate(atom_expr(F, 1, (Mode(E, -1),)), empty_registry(), Fraction(1))
    assert got == State.vacuum(C)


def test_evaluate_telescoped_power_at_k1():
    registry = empty_registry()
    value, _ = e_def_power_value(G, 1, Fraction(1))
    registry.register_value(DefAtom(E, -1, (Mode(E, -1),)), value, "derived:power-rule")
    value, _ = cartan_def_power_vanishing(G, 2, Fraction(1))
    registry.register_value(DefAtom(H, 0, (Mode(E, -1),)), value, "derived:cartan")
    got = evaluate(atom_expr(F, 1, (Mode(E, -1), Mode(E, -1))), registry, Fraction(1))
    assert got == State.monomial((Mode(E, -1),), C.scale(2))


def test_evaluate_is_linear():
    registry = empty_registry()
    for j in range(1, 4):
        registry.register_value(
            DefAtom(E, -1, (Mode(E, -1),) * j), State.zero(), "derived:power-rule"
        )
        registry.register_value(
            DefAtom(H, 0, (Mode(E, -1),) * j), State.zero(), "derived:cartan"
        )
    registry.freeze()
    rng = random.Random(11)
    for _ in range(10):
        alpha = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        beta = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        x = atom_expr(F, 1, (Mode(E, -1),) * rng.randint(1, 4))
        y = atom_expr(F, 1, (Mode(E, -1),) * rng.randint(1, 4))
        combined = x.scale(alpha) + y.scale(beta)
        k = Fraction(3)
        lhs = evaluate(combined, registry, k)
        rhs = evaluate(x, registry, k).scale(alpha) + evaluate(y, registry, k).scale(beta)
        assert lhs == rhs


def test_evaluate_unresolved_atom():
    with pytest.raises(UnresolvedAtom) as err:
        evaluate(atom_expr(H, -1, (Mode(E, -2),)), empty_registry(), K43)
    assert err.value.atom == DefAtom(H, -1, (Mode(E, -2),))


def test_evaluate_nonlinear_guard_fires():
    registry = empty_registry()
    register_ansatz(registry, DefAtom(H, -1, (Mode(E, -2),)), "a")
    expr = DefExpression.atom(DefMode(H, -1), (Mode(E, -2),), coeff=C)
    with pytest.raises(NonlinearProduct):
        evaluate(expr, registry, K43)


def test_evaluate_collect_residual():
    tail, residual = evaluate(
        atom_expr(F, 1, WEIGHT3_WORDS[0]), empty_registry(), K43, collect_residual=True
    )
    atoms = {(t.defmode, t.target) for t in residual}
    assert (DefMode(H, -1), (Mode(E, -2),)) in atoms


# --- the trivializing map ---

def test_trivializing_map_on_vacuum_and_generators():
    registry = empty_registry()
    registry.freeze()
    assert trivializing_map(State.vacuum(), registry, K43).is_zero
    # single-factor monomials have no summands (the sum stops before the last factor)
    assert trivializing_map(State.monomial((Mode(E, -1),)), registry, K43).is_zero
    assert trivializing_map(State.monomial((Mode(E, -3),)), registry, K43).is_zero


def test_trivializing_map_zero_registry():
    registry = empty_registry()
    registry.register_value(DefAtom(E, -1, (Mode(E, -1), Mode(F, -1))), State.zero(), "zero")
    registry.register_value(DefAtom(E, -1, (Mode(F, -1),)), State.zero(), "zero")
    registry.freeze()
    v = State.monomial((Mode(E, -1), Mode(E, -1), Mode(F, -1)))
    assert trivializing_map(v, registry, K43).is_zero


def test_trivializing_map_single_term():
    registry = empty_registry()
    # e^def(-1) f(-1)|0> has weight 2 and charge 0
    value = State.monomial((Mode(H, -2),), LinForm.symbol("a1"))
    registry.register_value(DefAtom(E, -1, (Mode(F, -1),)), value, "test")
    registry.freeze()
    v = State.monomial((Mode(E, -1), Mode(F, -1)))
    # f1(e(-1)f(-1)|0>) = -e^def(-1) f(-1)|0>
    assert trivializing_map(v, registry, K43) == value.scale(-1)


def test_trivializing_map_unresolved():
    registry = empty_registry()
    registry.freeze()
    with pytest.raises(UnresolvedAtom):
        trivializing_map(State.monomial((Mode(E, -1), Mode(F, -1))), registry, K43)
