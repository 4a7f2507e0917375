"""Formula and sequent syntax trees, parsing, printing, De Morgan negation.

Concrete syntax: `*` for tensor, `|` for par, `!`/`?`/`~` prefix, and the
constants `1`, `bot`, `o`.  Prefixes bind tighter than `*`, which binds
tighter than `|`; both binary operators are left-associative.  Negation is
only syntax on atoms; on compound formulas it is the De Morgan operation
`negate`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


@dataclass(frozen=True)
class Atom:
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class NegAtom:
    name: str

    def __repr__(self) -> str:
        return f"~{self.name}"


@dataclass(frozen=True)
class Par:
    left: "Formula"
    right: "Formula"

    def __repr__(self) -> str:
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Tens:
    left: "Formula"
    right: "Formula"

    def __repr__(self) -> str:
        return f"({self.left} * {self.right})"


@dataclass(frozen=True)
class OfCourse:
    child: "Formula"

    def __repr__(self) -> str:
        return f"!{self.child}"


@dataclass(frozen=True)
class WhyNot:
    child: "Formula"

    def __repr__(self) -> str:
        return f"?{self.child}"


@dataclass(frozen=True)
class One:
    def __repr__(self) -> str:
        return "1"


@dataclass(frozen=True)
class Bot:
    def __repr__(self) -> str:
        return "bot"


@dataclass(frozen=True)
class Jump:
    def __repr__(self) -> str:
        return "o"


Formula = Union[Atom, NegAtom, Par, Tens, OfCourse, WhyNot, One, Bot, Jump]

ONE = One()
BOT = Bot()
JUMP = Jump()

# Vertex-bearing nodes: every node except Par/Tens contributes one vertex to
# the relation-web encoding.
_LEAVES = (Atom, NegAtom, One, Bot, Jump)


class FormulaError(ValueError):
    """Syntax or well-formedness error; `offset` is a byte offset when known."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


_RESERVED = {"bot", "o"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str) -> FormulaError:
        return FormulaError(msg, self.pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def ident(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        if self.pos == start:
            raise self.error("expected an identifier")
        return self.text[start : self.pos]

    def formula(self) -> Formula:
        f = self.term()
        while self.peek() == "|":
            self.take("|")
            f = Par(f, self.term())
        return f

    def term(self) -> Formula:
        f = self.factor()
        while self.peek() == "*":
            self.take("*")
            f = Tens(f, self.factor())
        return f

    def factor(self) -> Formula:
        ch = self.peek()
        if ch == "!":
            self.take("!")
            return OfCourse(self.factor())
        if ch == "?":
            self.take("?")
            return WhyNot(self.factor())
        if ch == "~":
            self.take("~")
            if not (self.peek().isalpha() or self.peek() == "_"):
                raise self.error("negation applies only to atoms")
            name = self.ident()
            if name in _RESERVED or name == "1":
                raise self.error("negation applies only to atoms")
            return NegAtom(name)
        if ch == "(":
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        if ch == "1":
            self.take("1")
            return ONE
        if ch.isalpha() or ch == "_":
            name = self.ident()
            if name == "bot":
                return BOT
            if name == "o":
                return JUMP
            return Atom(name)
        raise self.error("expected a formula")


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    p.skip_ws()
    if p.pos != len(text):
        raise p.error("trailing input")
    return f


@dataclass(frozen=True)
class Sequent:
    formulas: tuple[Formula, ...]

    def __post_init__(self) -> None:
        if not self.formulas:
            raise FormulaError("a sequent is non-empty")

    def __repr__(self) -> str:
        return render_sequent(self)

    def __len__(self) -> int:
        return len(self.formulas)

    def __getitem__(self, i: int) -> Formula:
        return self.formulas[i]

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.formulas)

    def replace(self, index: int, *repl: Formula) -> "Sequent":
        """New sequent with member `index` replaced by `repl` (may be empty)."""
        fs = self.formulas[:index] + tuple(repl) + self.formulas[index + 1 :]
        return Sequent(fs)


def sequent(*formulas: Formula) -> Sequent:
    return Sequent(tuple(formulas))


def parse_sequent(text: str) -> Sequent:
    if not text.strip():
        raise FormulaError("empty sequent", 0)
    parts = []
    p = _Parser(text)
    while True:
        parts.append(p.formula())
        p.skip_ws()
        if p.pos == len(text):
            break
        p.take(",")
    return Sequent(tuple(parts))


def negate(f: Formula) -> Formula:
    """De Morgan dual; undefined on the jump placeholder."""
    if isinstance(f, Atom):
        return NegAtom(f.name)
    if isinstance(f, NegAtom):
        return Atom(f.name)
    if isinstance(f, Par):
        return Tens(negate(f.left), negate(f.right))
    if isinstance(f, Tens):
        return Par(negate(f.left), negate(f.right))
    if isinstance(f, OfCourse):
        return WhyNot(negate(f.child))
    if isinstance(f, WhyNot):
        return OfCourse(negate(f.child))
    if isinstance(f, One):
        return BOT
    if isinstance(f, Bot):
        return ONE
    raise FormulaError("negation is undefined on the jump placeholder")


def _prec(f: Formula) -> int:
    if isinstance(f, Par):
        return 0
    if isinstance(f, Tens):
        return 1
    return 2


def render_formula(f: Formula) -> str:
    """Minimal-parenthesis text; `parse_formula(render_formula(f)) == f`."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, NegAtom):
        return f"~{f.name}"
    if isinstance(f, One):
        return "1"
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, Jump):
        return "o"
    if isinstance(f, OfCourse):
        return "!" + _wrap(f.child, 2)
    if isinstance(f, WhyNot):
        return "?" + _wrap(f.child, 2)
    if isinstance(f, Par):
        return _wrap(f.left, 0) + " | " + _wrap(f.right, 1)
    if isinstance(f, Tens):
        return _wrap(f.left, 1) + " * " + _wrap(f.right, 2)
    raise TypeError(f)


def _wrap(f: Formula, minimum: int) -> str:
    text = render_formula(f)
    return f"({text})" if _prec(f) < minimum else text


def render_sequent(s: Sequent) -> str:
    return ", ".join(render_formula(f) for f in s)


# --- addressing -------------------------------------------------------------
#
# A TargetAddress names one vertex-bearing node of a sequent: the formula
# index plus the child path from that formula's root.  Modal nodes carry a
# vertex themselves and also have children.

Path = tuple[int, ...]


@dataclass(frozen=True, order=True)
class TargetAddress:
    index: int
    path: Path = ()

    def __repr__(self) -> str:
        return str(self.index) + "".join(f".{c}" for c in self.path)

    def child(self, c: int) -> "TargetAddress":
        return TargetAddress(self.index, self.path + (c,))


def parse_address(text: str) -> TargetAddress:
    parts = text.split(".")
    try:
        nums = [int(p) for p in parts]
    except ValueError as exc:
        raise FormulaError(f"bad address {text!r}") from exc
    return TargetAddress(nums[0], tuple(nums[1:]))


def subformula_at(s: Sequent, index: int, path: Path) -> Formula:
    f = s[index]
    for c in path:
        if isinstance(f, (Par, Tens)):
            f = (f.left, f.right)[c]
        elif isinstance(f, (OfCourse, WhyNot)) and c == 0:
            f = f.child
        else:
            raise FormulaError(f"address {TargetAddress(index, path)} does not resolve")
    return f


def replace_at(s: Sequent, index: int, path: Path, repl: Formula) -> Sequent:
    def go(f: Formula, p: Path) -> Formula:
        if not p:
            return repl
        c, rest = p[0], p[1:]
        if isinstance(f, (Par, Tens)):
            cls = type(f)
            if c == 0:
                return cls(go(f.left, rest), f.right)
            if c == 1:
                return cls(f.left, go(f.right, rest))
        elif isinstance(f, (OfCourse, WhyNot)) and c == 0:
            return type(f)(go(f.child, rest))
        raise FormulaError(f"address {TargetAddress(index, path)} does not resolve")

    return s.replace(index, go(s[index], path))


def resolve(s: Sequent, addr: TargetAddress) -> Formula:
    f = subformula_at(s, addr.index, addr.path)
    if not isinstance(f, _LEAVES + (OfCourse, WhyNot)):
        raise FormulaError(f"address {addr} is not vertex-bearing")
    return f


def formula_addresses(f: Formula, index: int, prefix: Path = ()) -> Iterator[TargetAddress]:
    """All vertex-bearing addresses inside one formula, preorder."""
    if isinstance(f, _LEAVES):
        yield TargetAddress(index, prefix)
    elif isinstance(f, (OfCourse, WhyNot)):
        yield TargetAddress(index, prefix)
        yield from formula_addresses(f.child, index, prefix + (0,))
    else:
        yield from formula_addresses(f.left, index, prefix + (0,))
        yield from formula_addresses(f.right, index, prefix + (1,))


def sequent_addresses(s: Sequent) -> Iterator[TargetAddress]:
    for i, f in enumerate(s):
        yield from formula_addresses(f, i)


def formula_size(f: Formula) -> int:
    """Number of vertex-bearing nodes."""
    if isinstance(f, _LEAVES):
        return 1
    if isinstance(f, (OfCourse, WhyNot)):
        return 1 + formula_size(f.child)
    return formula_size(f.left) + formula_size(f.right)


def sequent_size(s: Sequent) -> int:
    return sum(formula_size(f) for f in s)
