"""Finite-dimensional simple Lie algebra data with structural validation.

An algebra is a basis with exact structure-constant tables: the bracket, a
normalized symmetric invariant form, and the distinguished sl2-triple (e, h, f)
of the highest root, satisfying [h,e] = 2e, [h,f] = -2f, [e,f] = h, <e,f> = 1,
<h,h> = 2.  Validation is exhaustive over basis triples, never sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


class InvalidRank(Exception):
    pass


class LieElt:
    """Sparse element of the algebra: basis index -> rational coefficient."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        data = {}
        if coeffs:
            for idx, c in coeffs.items():
                c = Fraction(c)
                if c:
                    data[idx] = c
        self.coeffs = data

    @classmethod
    def basis(cls, idx: int) -> "LieElt":
        return cls({idx: Fraction(1)})

    def __add__(self, other):
        out = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            acc = out.get(idx, Fraction(0)) + c
            if acc:
                out[idx] = acc
            else:
                out.pop(idx, None)
        return LieElt(out)

    def scale(self, r) -> "LieElt":
        r = Fraction(r)
        return LieElt({i: c * r for i, c in self.coeffs.items()}) if r else LieElt()

    def __neg__(self):
        return self.scale(-1)

    def __eq__(self, other):
        return isinstance(other, LieElt) and self.coeffs == other.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def items(self):
        return self.coeffs.items()


class LieAlgebra:
    """Basis labels plus bracket/form tables and the theta-triple indices."""

    def __init__(self, basis, bracket, form, theta_triple):
        self.basis = tuple(basis)
        self.dim = len(self.basis)
        self._index = {label: i for i, label in enumerate(self.basis)}
        if len(self._index) != self.dim:
            raise ValueError("duplicate basis labels")
        # complete the bracket table antisymmetrically
        table = {}
        for (i, j), vec in bracket.items():
            table[(i, j)] = {a: Fraction(c) for a, c in vec.items() if c}
        for (i, j) in list(table):
            if (j, i) not in table:
                table[(j, i)] = {a: -c for a, c in table[(i, j)].items()}
        self._bracket = table
        self._form = {}
        for (i, j), q in form.items():
            q = Fraction(q)
            if q:
                self._form[(i, j)] = q
                self._form[(j, i)] = q
        self.theta = tuple(theta_triple)
        self.charges = self._compute_charges()

    def index(self, label: str) -> int:
        if label not in self._index:
            raise KeyError(f"unknown generator {label!r}")
        return self._index[label]

    def label(self, idx: int) -> str:
        return self.basis[idx]

    def bracket(self, i: int, j: int) -> LieElt:
        return LieElt(self._bracket.get((i, j), {}))

    def bracket_elt(self, x: LieElt, y: LieElt) -> LieElt:
        out = LieElt()
        for i, ci in x.items():
            for j, cj in y.items():
                out = out + self.bracket(i, j).scale(ci * cj)
        return out

    def form(self, i: int, j: int) -> Fraction:
        return self._form.get((i, j), Fraction(0))

    def form_elt(self, x: LieElt, y: LieElt) -> Fraction:
        total = Fraction(0)
        for i, ci in x.items():
            for j, cj in y.items():
                total += ci * cj * self.form(i, j)
        return total

    def charge(self, idx: int) -> int:
        """Eigenvalue of ad(h_theta) on the basis vector (the Cartan charge)."""
        return self.charges[idx]

    def _compute_charges(self):
        h = self.theta[1]
        charges = []
        for i in range(self.dim):
            img = self.bracket(h, i)
            if not img:
                charges.append(0)
                continue
            if set(img.coeffs) != {i}:
                raise ValueError(
                    f"ad(h_theta) is not diagonal on basis vector {self.basis[i]!r}"
                )
            lam = img.coeffs[i]
            if lam.denominator != 1:
                raise ValueError(f"non-integral charge {lam} on {self.basis[i]!r}")
            charges.append(int(lam))
        return tuple(charges)


@dataclass
class ValidationReport:
    ok: bool
    failures: list = field(default_factory=list)

    @property
    def first_counterexample(self):
        return self.failures[0] if self.failures else None

    def __str__(self):
        if self.ok:
            return "pass"
        return "fail: " + "; ".join(self.failures[:5])


def sl2() -> LieAlgebra:
    """The rank-1 algebra on basis (e, h, f) with the standard triple relations."""
    e, h, f = 0, 1, 2
    bracket = {
        (h, e): {e: 2},
        (h, f): {f: -2},
        (e, f): {h: 1},
        (e, e): {},
        (h, h): {},
        (f, f): {},
    }
    form = {(e, f): 1, (h, h): 2}
    return LieAlgebra(("e", "h", "f"), bracket, form, (e, h, f))


def sln(n: int) -> LieAlgebra:
    """sl_n on the matrix-unit basis, trace form, theta-triple (E_1n, E_11-E_nn, E_n1).

    Diagonal basis D_i = E_ii - E_nn (i < n), so D_1 is the theta coroot itself.
    """
    if n < 2:
        raise InvalidRank(f"sln needs n >= 2, got {n}")
    labels = []
    mats = []

    def unit(i, j):
        m = [[Fraction(0)] * n for _ in range(n)]
        m[i][j] = Fraction(1)
        return m

    for i in range(n):
        for j in range(n):
            if i < j:
                labels.append(f"E{i + 1}{j + 1}")
                mats.append(unit(i, j))
    for i in range(n - 1):
        labels.append(f"D{i + 1}")
        m = unit(i, i)
        m[n - 1][n - 1] = Fraction(-1)
        mats.append(m)
    for i in range(n):
        for j in range(n):
            if i > j:
                labels.append(f"E{i + 1}{j + 1}")
                mats.append(unit(i, j))

    def matmul(a, b):
        return [
            [sum(a[i][t] * b[t][j] for t in range(n)) for j in range(n)]
            for i in range(n)
        ]

    def msub(a, b):
        return [[a[i][j] - b[i][j] for j in range(n)] for i in range(n)]

    def decompose(m):
        # off-diagonal entries sit on matrix units; traceless diagonal on the D_i
        out = {}
        for i in range(n):
            for j in range(n):
                if i != j and m[i][j]:
                    out[labels.index(f"E{i + 1}{j + 1}")] = m[i][j]
        for i in range(n - 1):
            if m[i][i]:
                out[labels.index(f"D{i + 1}")] = m[i][i]
        return out

    bracket = {}
    form = {}
    for a in range(len(mats)):
        for b in range(a, len(mats)):
            comm = msub(matmul(mats[a], mats[b]), matmul(mats[b], mats[a]))
            bracket[(a, b)] = decompose(comm)
            tr = sum(matmul(mats[a], mats[b])[i][i] for i in range(n))
            if tr:
                form[(a, b)] = tr
    theta = (labels.index(f"E1{n}"), labels.index("D1"), labels.index(f"E{n}1"))
    return LieAlgebra(labels, bracket, form, theta)


def validate(g: LieAlgebra) -> ValidationReport:
    """Exhaustively check antisymmetry, Jacobi, form symmetry/invariance, and the triple."""
    failures = []
    dim = g.dim

    def name(i):
        return g.basis[i]

    for i in range(dim):
        if g.bracket(i, i):
            failures.append(f"[{name(i)},{name(i)}] != 0")
    for i in range(dim):
        for j in range(dim):
            if g.bracket(i, j) + g.bracket(j, i):
                failures.append(f"[{name(i)},{name(j)}] not antisymmetric")
            if g.form(i, j) != g.form(j, i):
                failures.append(f"<{name(i)},{name(j)}> not symmetric")
    for i in range(dim):
        for j in range(dim):
            for l in range(dim):
                jac = (
                    g.bracket_elt(LieElt.basis(i), g.bracket(j, l))
                    + g.bracket_elt(LieElt.basis(j), g.bracket(l, i))
                    + g.bracket_elt(LieElt.basis(l), g.bracket(i, j))
                )
                if jac:
                    failures.append(f"Jacobi fails on ({name(i)},{name(j)},{name(l)})")
                lhs = g.form_elt(g.bracket(i, j), LieElt.basis(l))
                rhs = g.form_elt(LieElt.basis(i), g.bracket(j, l))
                if lhs != rhs:
                    failures.append(
                        f"form not invariant on ({name(i)},{name(j)},{name(l)})"
                    )
    e, h, f = g.theta
    triple_checks = [
        (g.bracket(h, e), LieElt.basis(e).scale(2), "[h,e] = 2e"),
        (g.bracket(h, f), LieElt.basis(f).scale(-2), "[h,f] = -2f"),
        (g.bracket(e, f), LieElt.basis(h), "[e,f] = h"),
    ]
    for got, want, what in triple_checks:
        if got != want:
            failures.append(f"triple relation {what} fails")
    form_checks = [
        (g.form(e, f), Fraction(1), "<e,f> = 1"),
        (g.form(h, h), Fraction(2), "<h,h> = 2"),
        (g.form(e, e), Fraction(0), "<e,e> = 0"),
        (g.form(f, f), Fraction(0), "<f,f> = 0"),
        (g.form(h, e), Fraction(0), "<h,e> = 0"),
        (g.form(h, f), Fraction(0), "<h,f> = 0"),
    ]
    for got, want, what in form_checks:
        if got != want:
            failures.append(f"triple form normalization {what} fails (got {got})")
    try:
        g._compute_charges()
    except ValueError as exc:
        failures.append(str(exc))
    return ValidationReport(not failures, failures)


def load_structure_file(text: str) -> LieAlgebra:
    """Parse the line-oriented structure-constant format and validate the result.

    Lines: ``basis x y z``, ``[x,y] = q1*z1 + q2*z2``, ``<x,y> = q``,
    ``triple e h f``.  Blank lines and ``#`` comments are ignored.
    """
    import re

    labels = []
    bracket_lines = []
    form_lines = []
    triple = None
    triple_lineno = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("basis "):
            labels = line.split()[1:]
        elif line.startswith("triple "):
            parts = line.split()[1:]
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: triple needs three labels")
            triple = parts
            triple_lineno = lineno
        elif line.startswith("["):
            m = re.match(r"\[\s*(\w+)\s*,\s*(\w+)\s*\]\s*=\s*(.*)$", line)
            if not m:
                raise ValueError(f"line {lineno}: bad bracket line {line!r}")
            bracket_lines.append((lineno, m.group(1), m.group(2), m.group(3)))
        elif line.startswith("<"):
            m = re.match(r"<\s*(\w+)\s*,\s*(\w+)\s*>\s*=\s*(\S+)$", line)
            if not m:
                raise ValueError(f"line {lineno}: bad form line {line!r}")
            form_lines.append((lineno, m.group(1), m.group(2), m.group(3)))
        else:
            raise ValueError(f"line {lineno}: unrecognized line {line!r}")
    if not labels:
        raise ValueError("missing 'basis' line")
    if triple is None:
        raise ValueError("missing 'triple' line")
    index = {lab: i for i, lab in enumerate(labels)}

    def idx(lab, lineno):
        if lab not in index:
            raise ValueError(f"line {lineno}: unknown label {lab!r}")
        return index[lab]

    bracket = {}
    for lineno, x, y, rhs in bracket_lines:
        vec = {}
        rhs = rhs.strip()
        if rhs != "0":
            for piece in re.split(r"(?=[+-])", rhs.replace(" ", "")):
                if not piece:
                    continue
                m = re.match(r"([+-]?[\d/]*)\*?(\w+)$", piece)
                if not m:
                    raise ValueError(f"line {lineno}: bad term {piece!r}")
                coeff_text = m.group(1)
                if coeff_text in ("", "+"):
                    coeff = Fraction(1)
                elif coeff_text == "-":
                    coeff = Fraction(-1)
                else:
                    coeff = parse_fraction(coeff_text, lineno)
                vec[idx(m.group(2), lineno)] = vec.get(idx(m.group(2), lineno), Fraction(0)) + coeff
        key = (idx(x, lineno), idx(y, lineno))
        if key in bracket and bracket[key] != vec:
            raise ValueError(f"line {lineno}: conflicting bracket for [{x},{y}]")
        bracket[key] = vec
        mirror = (key[1], key[0])
        neg = {a: -c for a, c in vec.items()}
        if mirror in bracket and bracket[mirror] != neg:
            raise ValueError(f"line {lineno}: bracket for [{y},{x}] breaks antisymmetry")
        bracket[mirror] = neg
    form = {}
    for lineno, x, y, q in form_lines:
        key = (idx(x, lineno), idx(y, lineno))
        val = parse_fraction(q, lineno)
        for k2 in (key, (key[1], key[0])):
            if k2 in form and form[k2] != val:
                raise ValueError(f"line {lineno}: conflicting form value for <{x},{y}>")
            form[k2] = val
    g = LieAlgebra(labels, bracket, form, tuple(idx(t, triple_lineno) for t in triple))
    report = validate(g)
    if not report.ok:
        raise ValueError(f"structure file invalid: {report}")
    return g


def parse_fraction(text: str, lineno: int) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"line {lineno}: bad rational {text!r}") from None
