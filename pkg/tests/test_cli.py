import json
import random
from fractions import Fraction

import pytest
from click.testing import CliRunner

from affdef.cli import (
    ExprAST,
    NonNegativeDepth,
    StateSyntaxError,
    UnknownGenerator,
    main,
    parse_mode,
    parse_state,
)
from affdef.liealg import sl2
from affdef.pbw import Mode, State

G = sl2()
E, H, F = G.theta


# --- parser ---

def test_parse_two_term_state():
    ast = parse_state("-48*h(-1)e(-2)|0> + 80*e(-3)|0>")
    assert ast.terms == (
        (Fraction(-48), (("h", -1), ("e", -2))),
        (Fraction(80), (("e", -3),)),
    )


def test_parse_vacuum():
    assert parse_state("|0>").terms == ((Fraction(1), ()),)
    assert parse_state("-|0>").terms == ((Fraction(-1), ()),)


def test_parse_exponent_expansion():
    ast = parse_state("e(-1)^2*f(-1)|0>")
    assert ast.terms == ((Fraction(1), (("e", -1), ("e", -1), ("f", -1))),)


def test_parse_rational_coefficient():
    ast = parse_state("3/2*h(-2)|0>")
    assert ast.terms == ((Fraction(3, 2), (("h", -2),)),)


def test_parse_star_optional():
    with_star = parse_state("2*e(-1)*f(-1)|0>")
    without = parse_state("2e(-1)f(-1)|0>")
    assert with_star == without


def test_parse_whitespace_insensitive():
    assert parse_state(" e( -1 ) |0> ") == parse_state("e(-1)|0>")


def test_parse_syntax_error_offset():
    with pytest.raises(StateSyntaxError) as err:
        parse_state("e(-1")
    assert err.value.offset == 4
    with pytest.raises(StateSyntaxError):
        parse_state("e(-1)|0> e(-2)|0>")


def test_parse_unknown_generator():
    with pytest.raises(UnknownGenerator) as err:
        parse_state("q(-1)|0>")
    assert err.value.label == "q"


def test_parse_non_negative_depth():
    with pytest.raises(NonNegativeDepth):
        parse_state("e(0)|0>")
    with pytest.raises(NonNegativeDepth):
        parse_state("e(2)|0>")


def test_ast_to_state_normal_orders():
    ast = parse_state("h(-1)e(-2)|0>")
    got = ast.to_state(G, Fraction(-4, 3))
    expected = State.monomial((Mode(E, -2), Mode(H, -1))) + State.monomial(
        (Mode(E, -3),), 2
    )
    assert got == expected


def random_ast(rng):
    terms = []
    for _ in range(rng.randint(1, 4)):
        num = rng.randint(-20, 20) or 1
        den = rng.randint(1, 6)
        coeff = Fraction(num, den)
        word = tuple(
            (rng.choice("ehf"), -rng.randint(1, 5))
            for _ in range(rng.randint(0, 4))
        )
        terms.append((coeff, word))
    return ExprAST(tuple(terms))


def test_parse_print_roundtrip_1000():
    rng = random.Random(99)
    for _ in range(1000):
        ast = random_ast(rng)
        assert parse_state(ast.render()) == ast


def test_parse_mode():
    assert parse_mode("f(1)", G) == Mode(F, 1)
    assert parse_mode(" h(0) ", G) == Mode(H, 0)
    assert parse_mode("e(-2)", G) == Mode(E, -2)
    with pytest.raises(StateSyntaxError):
        parse_mode("f(1)e(2)", G)


# --- commands ---

runner = CliRunner()


def test_pbw_basis_command():
    result = runner.invoke(main, ["pbw-basis", "--algebra", "sl2", "--weight", "3", "--charge", "2"])
    assert result.exit_code == 0
    lines = result.output.strip().splitlines()
    assert lines == [
        "e(-3)|0>",
        "e(-2)*h(-1)|0>",
        "e(-1)*h(-2)|0>",
        "e(-1)*h(-1)^2|0>",
        "e(-1)^2*f(-1)|0>",
    ]


def test_pbw_basis_json():
    result = runner.invoke(
        main, ["pbw-basis", "--weight", "2", "--charge", "0", "--format", "json"]
    )
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["count"] == 3
    assert payload["basis"][0] == "h(-2)|0>"


def test_act_command():
    result = runner.invoke(
        main,
        ["act", "--mode", "f(1)", "--state", "e(-1)^2|0>", "--level", "2"],
    )
    assert result.exit_code == 0
    assert result.output.strip() == "2*e(-1)|0>"


def test_act_level_rational():
    result = runner.invoke(
        main,
        ["act", "--mode", "f(1)", "--state", "e(-1)|0>", "--level", "-4/3",
         "--format", "json"],
    )
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["result"] == "-4/3*|0>"


def test_act_bad_state_exits_2():
    result = runner.invoke(
        main, ["act", "--mode", "f(1)", "--state", "e(0)|0>", "--level", "1"]
    )
    assert result.exit_code == 2


def test_unknown_flag_exits_2():
    result = runner.invoke(main, ["pbw-basis", "--weight", "2", "--bogus"])
    assert result.exit_code == 2


def test_singular_check_pass():
    result = runner.invoke(main, ["singular-check", "--label", "sl2:-4/3"])
    assert result.exit_code == 0
    assert "singular: True" in result.output


def test_singular_check_integral():
    result = runner.invoke(main, ["singular-check", "--label", "integral:k=2"])
    assert result.exit_code == 0


def test_singular_check_unknown_label():
    result = runner.invoke(main, ["singular-check", "--label", "integral:k=zebra"])
    assert result.exit_code == 2


def test_rigidity_integral_command():
    result = runner.invoke(main, ["rigidity", "integral", "--algebra", "sl2", "--k", "3"])
    assert result.exit_code == 0
    assert "final relation: 4*c = 0" in result.output
    assert "c forced to zero: True" in result.output


def test_rigidity_integral_json_with_transcript():
    result = runner.invoke(
        main,
        ["rigidity", "integral", "--k", "1", "--format", "json", "--transcript"],
    )
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["final_relation"] == {"c": 2}
    assert payload["steps"]


def test_rigidity_admissible_json():
    result = runner.invoke(main, ["rigidity", "admissible-sl2", "--format", "json"])
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["final_relation"] == {"c": 10}
    assert payload["c_forced_zero"] is True


def test_rigidity_bad_k_exits_2():
    result = runner.invoke(main, ["rigidity", "integral", "--k", "0"])
    assert result.exit_code == 2


def test_cross_check_command():
    result = runner.invoke(main, ["cross-check"])
    assert result.exit_code == 0
    assert "MATCH" in result.output
    assert "RESIDUAL" in result.output


def test_cross_check_json():
    result = runner.invoke(main, ["cross-check", "--format", "json"])
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert len(payload) == 10


def test_algebra_file_loading(tmp_path):
    algebra_file = tmp_path / "alg.txt"
    algebra_file.write_text(
        "basis e h f\n[h,e] = 2*e\n[h,f] = -2*f\n[e,f] = h\n"
        "<e,f> = 1\n<h,h> = 2\ntriple e h f\n"
    )
    result = runner.invoke(
        main, ["pbw-basis", "--algebra", str(algebra_file), "--weight", "2", "--charge", "0"]
    )
    assert result.exit_code == 0
    assert len(result.output.strip().splitlines()) == 3
