"""Command-line interface: a state-expression parser and subcommands for every pipeline.

Exit codes: 0 success (or verdict c = 0), 1 failed check or verdict c not
forced, 2 usage or parse errors.
"""

from __future__ import annotations

import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import click

from . import rigidity, singular
from .liealg import LieAlgebra, load_structure_file, sl2, sln
from .pbw import Mode, State, apply_mode, basis_enum, normal_order, render_word
from .scalar import format_rational, parse_rational


class StateSyntaxError(Exception):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at byte {offset})")


class UnknownGenerator(Exception):
    def __init__(self, label: str, offset: int):
        self.label = label
        self.offset = offset
        super().__init__(f"unknown generator {label!r} (at byte {offset})")


class NonNegativeDepth(Exception):
    def __init__(self, depth: int, offset: int):
        self.depth = depth
        self.offset = offset
        super().__init__(
            f"depth {depth} is not a creation depth (at byte {offset})"
        )


_TOKEN = re.compile(
    r"\s*(?:(?P<vac>\|0>)|(?P<number>\d+(?:/\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*^()]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip():
                raise StateSyntaxError(f"unrecognized input {text[pos]!r}", pos)
            break
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


@dataclass(frozen=True)
class ExprAST:
    """Signed terms: (rational coefficient, word of (label, depth) mode pairs)."""

    terms: tuple

    def render(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for coeff, word in self.terms:
            groups = []
            for pair in word:
                if groups and groups[-1][0] == pair:
                    groups[-1][1] += 1
                else:
                    groups.append([pair, 1])
            factors = "*".join(
                f"{label}({depth})" + (f"^{n}" if n > 1 else "")
                for (label, depth), n in groups
            )
            body = (factors + "|0>") if factors else "|0>"
            if coeff == 1:
                pieces.append(body)
            elif coeff == -1:
                pieces.append("-" + body)
            else:
                pieces.append(f"{format_rational(coeff)}*{body}")
        out = pieces[0]
        for p in pieces[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def to_state(self, g: LieAlgebra, k) -> State:
        total = State.zero()
        for coeff, word in self.terms:
            modes = tuple(Mode(g.index(label), depth) for label, depth in word)
            part = normal_order(g, modes, k) if modes else State.vacuum()
            total = total + part.scale(coeff)
        return total


def parse_state(text: str, g: LieAlgebra = None) -> ExprAST:
    """Parse a signed sum of mode words applied to ``|0>``."""
    if g is None:
        g = sl2()
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos]

    def advance():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def parse_int(context):
        sign = 1
        kind, value, off = peek()
        if kind == "op" and value in "+-":
            advance()
            sign = -1 if value == "-" else 1
            kind, value, off = peek()
        if kind != "number" or "/" in value:
            raise StateSyntaxError(f"expected an integer {context}", off)
        advance()
        return sign * int(value)

    def parse_term(sign):
        coeff = Fraction(sign)
        kind, value, off = peek()
        if kind == "number":
            advance()
            coeff *= Fraction(value)
            kind, value, off = peek()
            if kind == "op" and value == "*":
                advance()
        word = []
        while True:
            kind, value, off = peek()
            if kind == "vac":
                advance()
                return coeff, tuple(word)
            if kind != "ident":
                raise StateSyntaxError("expected a generator or |0>", off)
            advance()
            label = value
            ident_off = off
            try:
                g.index(label)
            except KeyError:
                raise UnknownGenerator(label, ident_off) from None
            kind, value, off = peek()
            if not (kind == "op" and value == "("):
                raise StateSyntaxError("expected '(' after generator", off)
            advance()
            depth = parse_int("as a mode depth")
            kind, value, off = peek()
            if not (kind == "op" and value == ")"):
                raise StateSyntaxError("expected ')'", off)
            advance()
            if depth >= 0:
                raise NonNegativeDepth(depth, ident_off)
            count = 1
            kind, value, off = peek()
            if kind == "op" and value == "^":
                advance()
                kind, value, off = peek()
                if kind != "number" or "/" in value or int(value) < 1:
                    raise StateSyntaxError("expected a positive exponent", off)
                advance()
                count = int(value)
            word.extend([(label, depth)] * count)
            kind, value, off = peek()
            if kind == "op" and value == "*":
                advance()

    terms = []
    kind, value, off = peek()
    sign = 1
    if kind == "op" and value in "+-":
        advance()
        sign = -1 if value == "-" else 1
    terms.append(parse_term(sign))
    while True:
        kind, value, off = peek()
        if kind == "end":
            break
        if kind == "op" and value in "+-":
            advance()
            terms.append(parse_term(-1 if value == "-" else 1))
        else:
            raise StateSyntaxError("expected '+' or '-' between terms", off)
    return ExprAST(tuple(terms))


def parse_mode(text: str, g: LieAlgebra):
    """Parse a single mode like ``f(1)`` (any depth)."""
    m = re.fullmatch(r"\s*([A-Za-z_][A-Za-z0-9_]*)\(\s*([+-]?\d+)\s*\)\s*", text)
    if not m:
        raise StateSyntaxError(f"bad mode {text!r}", 0)
    return Mode(g.index(m.group(1)), int(m.group(2)))


def resolve_algebra(name: str) -> LieAlgebra:
    if name == "sl2":
        return sl2()
    m = re.fullmatch(r"sl(\d+)", name)
    if m:
        return sln(int(m.group(1)))
    path = Path(name)
    if path.suffix or path.exists():
        return load_structure_file(path.read_text())
    raise click.UsageError(f"unknown algebra {name!r}")


def emit(payload, fmt: str, text_lines):
    if fmt == "json":
        click.echo(json.dumps(payload, sort_keys=True, indent=2))
    else:
        for line in text_lines:
            click.echo(line)


def format_options(fn):
    fn = click.option(
        "--format", "fmt", type=click.Choice(["text", "json"]), default="text",
        help="Report format.",
    )(fn)
    fn = click.option(
        "--transcript", is_flag=True, default=False, help="Include derivation steps."
    )(fn)
    return fn


@click.group()
def main():
    """Exact deformation calculus for affine vacuum modules."""


@main.command("pbw-basis")
@click.option("--algebra", default="sl2", show_default=True)
@click.option("--weight", type=int, required=True)
@click.option("--charge", type=int, default=None)
@format_options
def pbw_basis_cmd(algebra, weight, charge, fmt, transcript):
    """List the canonical monomials of a graded stratum."""
    g = resolve_algebra(algebra)
    try:
        words = basis_enum(g, weight, charge)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    rendered = [render_word(g, w) for w in words]
    emit(
        {"algebra": algebra, "basis": rendered, "charge": charge,
         "count": len(rendered), "weight": weight},
        fmt,
        rendered,
    )


@main.command("act")
@click.option("--algebra", default="sl2", show_default=True)
@click.option("--mode", "mode_text", required=True, help='Mode to apply, e.g. "f(1)".')
@click.option("--state", "state_text", required=True)
@click.option("--level", required=True, help="Level as p/q or an integer.")
@format_options
def act_cmd(algebra, mode_text, state_text, level, fmt, transcript):
    """Apply a single mode to a state at the given level."""
    g = resolve_algebra(algebra)
    try:
        k = parse_rational(level)
        mode = parse_mode(mode_text, g)
        ast = parse_state(state_text, g)
    except (ValueError, StateSyntaxError, UnknownGenerator, NonNegativeDepth, KeyError) as exc:
        raise click.UsageError(str(exc))
    result = apply_mode(g, mode.gen, mode.depth, ast.to_state(g, k), k)
    text = result.render(g)
    emit(
        {"level": format_rational(k), "mode": mode_text.strip(), "result": text},
        fmt,
        [text],
    )


@main.command("singular-check")
@click.option("--label", required=True, help="Catalog label, e.g. sl2:-4/3 or integral:k=2.")
@format_options
def singular_check_cmd(label, fmt, transcript):
    """Verify a cataloged singular vector by exhausting its annihilators."""
    try:
        entry = singular.catalog(label)
    except (KeyError, singular.NonPositiveLevel) as exc:
        raise click.UsageError(str(exc))
    ok, witness = singular.is_singular(entry.vector, entry.level)
    g = sl2()
    lines = [
        f"label: {entry.label}",
        f"level: {format_rational(entry.level)}",
        f"vector: {entry.vector.render(g)}",
        f"singular: {ok}",
    ]
    if witness:
        lines.append(f"witness: {witness[3]}")
    emit(
        {"label": entry.label, "level": format_rational(entry.level),
         "singular": ok, "witness": witness[3] if witness else None},
        fmt,
        lines,
    )
    if not ok:
        sys.exit(1)


@main.group("rigidity")
def rigidity_group():
    """Deformation-rigidity pipelines."""


def _emit_verdict(verdict, fmt, transcript):
    if fmt == "json":
        click.echo(json.dumps(verdict.to_jsonable(include_steps=transcript),
                              sort_keys=True, indent=2))
    else:
        click.echo(f"pipeline: {verdict.pipeline}")
        click.echo(f"level: {format_rational(verdict.level)}")
        for i, eq in enumerate(verdict.equations, 1):
            click.echo(f"equation {i}: {eq} = 0")
        click.echo(f"final relation: {verdict.final_relation} = 0")
        click.echo(f"c forced to zero: {verdict.c_forced_zero}")
        for note in verdict.quarantine:
            click.echo(f"quarantine: {note}")
        if transcript:
            click.echo(verdict.transcript.render())
    if not verdict.c_forced_zero or verdict.quarantine:
        sys.exit(1)


@rigidity_group.command("integral")
@click.option("--algebra", default="sl2", show_default=True)
@click.option("--k", type=int, required=True)
@format_options
def rigidity_integral_cmd(algebra, k, fmt, transcript):
    """Positive integral level: conclude (k+1)*c = 0."""
    g = resolve_algebra(algebra)
    if k < 1:
        raise click.UsageError("k must be a positive integer")
    verdict = rigidity.integral_pipeline(g, k)
    _emit_verdict(verdict, fmt, transcript)


@rigidity_group.command("admissible-sl2")
@format_options
def rigidity_admissible_cmd(fmt, transcript):
    """Level -4/3 on sl2: conclude 10*c = 0."""
    verdict = rigidity.admissible_pipeline()
    _emit_verdict(verdict, fmt, transcript)


@main.command("cross-check")
@format_options
def cross_check_cmd(fmt, transcript):
    """Try to re-derive the stated rule table; report residual atoms."""
    entries = rigidity.cross_check()
    lines = []
    for entry in entries:
        line = f"{entry.label}: {entry.status.upper()}"
        if entry.residual_atoms:
            line += " [" + "; ".join(entry.residual_atoms) + "]"
        if entry.detail:
            line += f" -- {entry.detail}"
        lines.append(line)
    emit(
        [
            {"detail": e.detail, "label": e.label,
             "residual": list(e.residual_atoms), "status": e.status}
            for e in entries
        ],
        fmt,
        lines,
    )


if __name__ == "__main__":
    main()
