"""The two rigidity pipelines, the exact linear solver, and verdict generation.

Both pipelines extract linear relations on the deformation constant ``c`` by
evaluating def-modes against a singular relation of the quotient module.  Every
extracted relation lives in a weight stratum strictly below the lowest weight
of the ideal, where universal and simple-quotient coordinates agree, so the
coefficient equations are valid verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .deform import (
    DefAtom,
    DefExpression,
    DefMode,
    RuleRegistry,
    UnresolvedAtom,
    _merge_terms,
    admissible_sl2_rule_table,
    cartan_def_power_vanishing,
    e_def_power_value,
    evaluate,
    register_ansatz,
)
from .liealg import LieAlgebra, sl2, validate
from .pbw import Mode, State, render_word
from .scalar import LinForm, format_rational, symbol_sort_key
from .singular import ADMISSIBLE_LEVEL, WEIGHT3_WORDS


class PipelineStuck(Exception):
    pass


class SystemMismatch(Exception):
    pass


@dataclass(frozen=True)
class Step:
    rule: str
    detail: str
    output: str = ""


@dataclass
class ProofTranscript:
    steps: list = field(default_factory=list)
    conclusion: LinForm = None

    def add(self, rule: str, detail: str, output: str = ""):
        self.steps.append(Step(rule, detail, output))

    def render(self) -> str:
        lines = []
        for i, step in enumerate(self.steps, 1):
            line = f"{i:3d}. [{step.rule}] {step.detail}"
            if step.output:
                line += f" => {step.output}"
            lines.append(line)
        if self.conclusion is not None:
            lines.append(f"conclusion: {self.conclusion} = 0")
        return "\n".join(lines)

    def to_jsonable(self) -> list:
        return [
            {"rule": s.rule, "detail": s.detail, "output": s.output} for s in self.steps
        ]


@dataclass
class LinearSystem:
    equations: list  # LinForms, each asserted = 0
    unknowns: list  # ordered symbol names

    def __post_init__(self):
        known = set(self.unknowns)
        for eq in self.equations:
            extra = set(eq.terms) - known
            if extra:
                raise ValueError(f"equation uses symbols outside the system: {sorted(extra)}")


@dataclass
class EliminationResult:
    reduced: LinearSystem
    c_forced_zero: bool
    c_row: LinForm = None
    inconsistent: bool = False


def eliminate(system: LinearSystem) -> EliminationResult:
    """Exact reduced row echelon form over the rationals.

    ``c_forced_zero`` holds iff the reduced system contains a homogeneous row
    supported on the symbol ``c`` alone, i.e. the c-unit vector lies in the row
    space of the coefficient matrix.
    """
    unknowns = list(system.unknowns)
    rows = [[eq.coefficient(u) for u in unknowns] for eq in system.equations]
    aug = [eq.constant for eq in system.equations]
    nrows, ncols = len(rows), len(unknowns)
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, nrows) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        aug[rank], aug[pivot] = aug[pivot], aug[rank]
        lead = rows[rank][col]
        rows[rank] = [x / lead for x in rows[rank]]
        aug[rank] = aug[rank] / lead
        for r in range(nrows):
            if r != rank and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[rank])]
                aug[r] -= factor * aug[rank]
        rank += 1
    inconsistent = any(
        not any(rows[r]) and aug[r] for r in range(nrows)
    )
    reduced_eqs = []
    for r in range(nrows):
        if any(rows[r]) or aug[r]:
            reduced_eqs.append(
                LinForm(aug[r], {u: rows[r][i] for i, u in enumerate(unknowns)})
            )
    c_row = None
    if "c" in unknowns:
        c_idx = unknowns.index("c")
        for r in range(nrows):
            support = [i for i, x in enumerate(rows[r]) if x]
            if support == [c_idx] and not aug[r]:
                c_row = LinForm(0, {"c": rows[r][c_idx]})
                break
    return EliminationResult(
        LinearSystem(reduced_eqs, unknowns), c_row is not None, c_row, inconsistent
    )


@dataclass
class Verdict:
    pipeline: str
    level: Fraction
    c_forced_zero: bool
    final_relation: LinForm
    equations: list
    transcript: ProofTranscript
    quarantine: list = field(default_factory=list)
    _replay = None

    def replay(self) -> bool:
        """Re-execute the originating pipeline and compare transcripts bit-exactly."""
        if self._replay is None:
            raise ValueError("verdict carries no replay context")
        fresh = self._replay()
        return (
            fresh.transcript.steps == self.transcript.steps
            and fresh.final_relation == self.final_relation
            and fresh.c_forced_zero == self.c_forced_zero
        )

    def to_jsonable(self, include_steps: bool = False) -> dict:
        return {
            "pipeline": self.pipeline,
            "level": format_rational(self.level),
            "equations": [linform_jsonable(eq) for eq in self.equations],
            "final_relation": linform_jsonable(self.final_relation),
            "c_forced_zero": self.c_forced_zero,
            "quarantine": list(self.quarantine),
            "steps": self.transcript.to_jsonable() if include_steps else [],
        }


def linform_jsonable(lin: LinForm) -> dict:
    out = {}
    if lin.constant:
        out["const"] = rational_jsonable(lin.constant)
    for name in lin.symbols():
        out[name] = rational_jsonable(lin.terms[name])
    return out


def rational_jsonable(q: Fraction):
    return int(q) if q.denominator == 1 else format_rational(q)


def integral_pipeline(g: LieAlgebra = None, k: int = 1) -> Verdict:
    """Run the positive-integral-level computation and force c = 0.

    Builds the registry of vanishing rules, reduces f^def(1) e(-1)^(k+1)|0>
    mechanically, and telescopes to the relation (k+1)*c = 0.
    """
    if g is None:
        g = sl2()
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"level must be a positive integer, got {k!r}")
    report = validate(g)
    if not report.ok:
        raise ValueError(f"algebra fails validation: {report}")
    e, h, f = g.theta
    transcript = ProofTranscript()
    transcript.add("setup", f"algebra validated; level k = {k}")

    registry = RuleRegistry(g)
    for j in range(1, k + 1):
        value, _ = e_def_power_value(g, j, k)
        registry.register_value(
            DefAtom(e, -1, (Mode(e, -1),) * j), value, "derived:power-rule"
        )
        transcript.add("power-rule", f"e^def(-1)e(-1)^{j}|0> := 0", "all ingredients vanish")
    for p in range(1, k + 1):
        value, steps = cartan_def_power_vanishing(g, p + 1, k)
        registry.register_value(
            DefAtom(h, 0, (Mode(e, -1),) * p), value, "derived:cartan-induction"
        )
        transcript.add("cartan-rule", f"h^def(0)e(-1)^{p}|0> := 0", f"{len(steps)}-step induction")
    registry.freeze()

    def e_word(n):
        return (Mode(e, -1),) * n

    try:
        for i in range(1, k + 2):
            got = evaluate(DefExpression.atom(DefMode(f, 1), e_word(i)), registry, k)
            want = State.monomial(e_word(i - 1), LinForm.symbol("c", i))
            if got != want:
                raise SystemMismatch(
                    f"reduction of f^def(1)e(-1)^{i}|0> gave {got.render(g)}"
                )
            transcript.add(
                "reduce",
                f"f^def(1)e(-1)^{i}|0>",
                f"{i}*c*{render_word(g, e_word(i - 1))}",
            )
    except UnresolvedAtom as exc:
        raise PipelineStuck(str(exc)) from exc

    transcript.add(
        "telescope",
        f"0 = f^def(1)e(-1)^{k + 1}|0> (the power generates the ideal)",
    )
    for i in range(k, 0, -1):
        done = k + 1 - i
        prefix = "e(-1)*" if done == 1 else f"e(-1)^{done}*"
        transcript.add(
            "telescope",
            f"0 = {prefix}f^def(1)e(-1)^{i}|0> + {done}*c*e(-1)^{k}|0>",
        )
    relation = LinForm.symbol("c", k + 1)
    transcript.add(
        "extract",
        f"coefficient of {render_word(g, e_word(k))} at weight {k}, below the ideal's weight {k + 1}",
        f"{relation} = 0",
    )
    system = LinearSystem([relation], ["c"])
    elim = eliminate(system)
    transcript.add("solve", "row reduction on the extracted relation", f"c forced: {elim.c_forced_zero}")
    transcript.conclusion = relation
    verdict = Verdict(
        pipeline="integral",
        level=Fraction(k),
        c_forced_zero=elim.c_forced_zero,
        final_relation=relation,
        equations=[relation],
        transcript=transcript,
    )
    verdict._replay = lambda: integral_pipeline(g, k)
    return verdict


# The five equations of the level -4/3 system, frozen coefficient-for-coefficient,
# in the reporting order (three charge-0 rows, then two charge-2 rows).
ADMISSIBLE_EQUATIONS = (
    {"a3": 84, "a4": 168, "a5": -28, "b3": -18, "b4": -36, "b5": 6,
     "c3": -12, "c4": -24, "c5": 4, "c": 12},
    {"a2": -42, "a4": -56, "b2": 9, "b4": 12, "c2": 6, "c4": 8, "c": 9},
    {"a1": -42, "a3": -56, "b1": 9, "b3": 12, "c1": 6, "c3": 8, "c": -6},
    {"a2": 84, "a4": -560, "a5": 168, "b2": -18, "b4": 120, "b5": -36,
     "c2": -12, "c4": 80, "c5": -24, "c": 36},
    {"a1": 84, "a2": -280, "a3": -168, "a4": 784, "a5": -336, "b1": -18,
     "b2": 60, "b3": 36, "b4": -168, "b5": 72, "c1": -12, "c2": 40,
     "c3": 24, "c4": -112, "c5": 48, "c": -96},
)
ADMISSIBLE_C_NORMALIZATION = (12, 9, -6, 36, -96)

# Eliminated-row contents reached by the stated row operations, up to scaling.
ELIMINATED_ROW_4 = {"a4": 112, "a5": -28, "b4": -24, "b5": 6, "c": -9, "c4": -16, "c5": 4}
ELIMINATED_ROW_5 = {"a4": 1288, "a5": -322, "b4": -276, "b5": 69, "c": -96,
                    "c4": -184, "c5": 46}

# Combination coefficients of the singular relation as used by the derivation.
DISPLAY_COMBINATION = (Fraction(-48), Fraction(6), Fraction(-6), Fraction(9), Fraction(80))


def _proportionality(lin: LinForm, row: dict):
    """Exact ratio lin / row if the supports agree and all ratios coincide."""
    if lin.constant or set(lin.terms) != set(row):
        return None
    ratio = None
    for name, coeff in row.items():
        r = lin.terms[name] / Fraction(coeff)
        if ratio is None:
            ratio = r
        elif ratio != r:
            return None
    return ratio


def admissible_pipeline(combination=None) -> Verdict:
    """Run the level -4/3 computation on sl2 and force c = 0.

    Registers the stated rule table, the three ansatz expansions, and the
    translation constraint; evaluates the two depth-1 def-modes against the
    weight-3 singular relation; collects the five weight-2 coefficient
    equations; golden-checks them; and replays the stated row operations down
    to the final relation on c.
    """
    g = sl2()
    k = ADMISSIBLE_LEVEL
    e, h, f = g.theta
    transcript = ProofTranscript()
    sigma = tuple(combination) if combination is not None else DISPLAY_COMBINATION
    golden = combination is None

    registry = admissible_sl2_rule_table(g)
    registry.register_value(DefAtom(h, -1, (Mode(e, -1),)), State.zero(), "stated")
    transcript.add("input-rule", "h^def(-1)e(-1)|0> := 0")
    a_rule = register_ansatz(registry, DefAtom(h, -1, (Mode(e, -2),)), "a")
    b_rule = register_ansatz(registry, DefAtom(h, -1, (Mode(h, -1), Mode(e, -1))), "b")
    c_rule = register_ansatz(registry, DefAtom(e, -1, (Mode(e, -1), Mode(f, -1))), "c")
    for rule in (a_rule, b_rule, c_rule):
        transcript.add("ansatz", registry.render_atom(rule.atom), rule.value.render(g))
    # D-commutator constraint: h^def(-2)e(-1)|0> = -h^def(-1)e(-2)|0>
    registry.register_value(
        DefAtom(h, -2, (Mode(e, -1),)), a_rule.value.scale(-1), "derived:translation"
    )
    transcript.add("translation", "h^def(-2)e(-1)|0> := -h^def(-1)e(-2)|0>")
    registry.freeze()

    words = WEIGHT3_WORDS
    relation_text = ""
    for s, w in zip(sigma, words):
        piece = f"{format_rational(abs(s))}*{render_word(g, w)}"
        if not relation_text:
            relation_text = ("-" if s < 0 else "") + piece
        else:
            relation_text += (" - " if s < 0 else " + ") + piece
    transcript.add("singular-relation", f"0 = {relation_text}")
    try:
        f_image = State.zero()
        h_image = State.zero()
        for s, w in zip(sigma, words):
            f_image = f_image + evaluate(
                DefExpression.atom(DefMode(f, 1), w), registry, k
            ).scale(s)
            h_image = h_image + evaluate(
                DefExpression.atom(DefMode(h, 1), w), registry, k
            ).scale(s)
    except UnresolvedAtom as exc:
        raise PipelineStuck(str(exc)) from exc
    transcript.add("mode-action", "f^def(1) on the relation", f_image.render(g))
    transcript.add("mode-action", "h^def(1) on the relation", h_image.render(g))

    ef_word = (Mode(e, -1), Mode(f, -1))
    hh_word = (Mode(h, -1), Mode(h, -1))
    h2_word = (Mode(h, -2),)
    e2_word = (Mode(e, -2),)
    eh_word = (Mode(e, -1), Mode(h, -1))
    if set(f_image.words()) - {ef_word, hh_word, h2_word}:
        raise SystemMismatch("unexpected monomials in the charge-0 image")
    if set(h_image.words()) - {e2_word, eh_word}:
        raise SystemMismatch("unexpected monomials in the charge-2 image")
    alpha = h_image.coefficient(e2_word)
    beta = h_image.coefficient(eh_word)
    equations = [
        f_image.coefficient(ef_word),
        f_image.coefficient(hh_word),
        f_image.coefficient(h2_word),
        # charge-2 rows are reported in the mixed-spelling basis
        # {e(-2)|0>, h(-1)e(-1)|0>}: (alpha, beta) -> (beta, alpha - 2*beta)
        beta,
        alpha - beta.scale(2),
    ]
    labels = ["e(-1)*f(-1)|0>", "h(-1)^2|0>", "h(-2)|0>", "h(-1)e(-1)|0>", "e(-2)|0>"]
    for label, eq in zip(labels, equations):
        transcript.add("collect", f"coefficient of {label}", f"{eq} = 0")

    quarantine = []
    normalized = equations
    if golden:
        normalized = []
        for idx, (eq, expected, target_c) in enumerate(
            zip(equations, ADMISSIBLE_EQUATIONS, ADMISSIBLE_C_NORMALIZATION), 1
        ):
            ratio = _proportionality(eq, expected)
            if ratio is None:
                raise SystemMismatch(
                    f"collected equation {idx} does not match the expected row: {eq}"
                )
            scaled = eq.scale(Fraction(1) / ratio)
            if scaled.coefficient("c") != Fraction(target_c):
                raise SystemMismatch(
                    f"equation {idx} normalizes to c-coefficient "
                    f"{scaled.coefficient('c')}, expected {target_c}"
                )
            normalized.append(scaled)
        transcript.add(
            "golden-check",
            "all five equations match the expected rows",
            f"c-coefficients normalize to {ADMISSIBLE_C_NORMALIZATION}",
        )

    eq1, eq2, eq3, eq4, eq5 = normalized
    row4 = eq4 + eq2.scale(2)
    row5 = eq5 + eq3.scale(2) + eq2.scale(Fraction(-20, 3)) + eq1.scale(Fraction(10, 3))
    if golden:
        r4 = _proportionality(row4, ELIMINATED_ROW_4)
        r5 = _proportionality(row5, ELIMINATED_ROW_5)
        if r4 is None:
            quarantine.append(f"row operation eq4 + 2*eq2 gave {row4}, not the expected content")
        else:
            transcript.add("row-op", "eq4 + 2*eq2", f"({format_rational(r4)}) * expected row")
        if r5 is None:
            quarantine.append(
                "row operation eq5 + 2*eq3 - (20/3)*eq2 + (10/3)*eq1 "
                f"gave {row5}, not the expected content"
            )
        else:
            transcript.add(
                "row-op",
                "eq5 + 2*eq3 - (20/3)*eq2 + (10/3)*eq1",
                f"({format_rational(r5)}) * expected row",
            )
    final = row5 + row4.scale(Fraction(23, 9))
    transcript.add("row-op", "previous + (23/9)*(eq4 + 2*eq2)", f"{final} = 0")
    if set(final.terms) != {"c"} or final.constant:
        quarantine.append(f"final combination is not supported on c alone: {final}")

    unknowns = sorted(
        {name for eq in normalized for name in eq.terms}, key=symbol_sort_key
    )
    elim = eliminate(LinearSystem(list(normalized), unknowns))
    transcript.add(
        "solve",
        "exact row reduction over all sixteen unknowns",
        f"c forced: {elim.c_forced_zero}",
    )
    final_relation = final if not quarantine else (elim.c_row or final)
    transcript.conclusion = final_relation
    verdict = Verdict(
        pipeline="admissible-sl2",
        level=k,
        c_forced_zero=elim.c_forced_zero,
        final_relation=final_relation,
        equations=list(normalized),
        transcript=transcript,
        quarantine=quarantine,
    )
    verdict._replay = lambda: admissible_pipeline(combination)
    return verdict


@dataclass
class CrossCheckEntry:
    label: str
    status: str  # "match" | "residual" | "mismatch"
    residual_atoms: list
    detail: str


def cross_check() -> list:
    """Attempt independent derivations of the stated rule table.

    Each identity is re-derived from the master commutator, the translation
    identity, and the generator pairing alone; the report lists the residual
    atoms whose vanishing would force a match.  Diagnostics only: never raises.
    """
    g = sl2()
    k = ADMISSIBLE_LEVEL
    e, h, f = g.theta
    table = admissible_sl2_rule_table(g)
    base = RuleRegistry(g)
    base.register_value(DefAtom(h, -1, (Mode(e, -1),)), State.zero(), "stated")
    base.freeze()
    entries = []
    for gen in (f, h):
        for word in WEIGHT3_WORDS:
            atom = DefAtom(gen, 1, word)
            label = base.render_atom(atom)
            derived_tail, derived_res = evaluate(
                DefExpression.atom(DefMode(gen, 1), word), base, k, collect_residual=True
            )
            expected_expr, _ = table.lookup_rewrite(DefMode(gen, 1), word)
            expected_tail, expected_res = evaluate(
                expected_expr, base, k, collect_residual=True
            )
            tail_diff = derived_tail - expected_tail
            term_diff = _merge_terms(
                list(derived_res)
                + [t._replace(coeff=-t.coeff) for t in expected_res]
            )
            if not tail_diff and not term_diff:
                entries.append(CrossCheckEntry(label, "match", [], ""))
            elif not tail_diff:
                atoms = sorted(
                    {
                        base.render_atom(DefAtom(t.defmode.gen, t.defmode.depth, t.target))
                        for t in term_diff
                    }
                )
                entries.append(
                    CrossCheckEntry(
                        label,
                        "residual",
                        atoms,
                        "match forced if these atoms vanish",
                    )
                )
            else:
                entries.append(
                    CrossCheckEntry(
                        label, "mismatch", [], f"state discrepancy: {tail_diff.render(g)}"
                    )
                )
    return entries
