"""環/群描述語言的遞迴下降 parser 與標準印出。

    ring_expr  := ring_post ('x' ring_post)*
    ring_post  := ring_atom ('[' group_expr ']')*
    ring_atom  := 'Z' INT | '(' ring_expr ')'
    group_expr := group_atom ('x' group_atom)*
    group_atom := 'C' INT | 'D' INT | 'Q8' | 'S' INT | '(' group_expr ')'

'x' 左結合，'[ ]' 比乘積緊；空白不具意義。
"""
from dataclasses import dataclass
from typing import Iterable, List, Optional

from app.core.errors import ExprSyntaxError
from app.dsl.ast import (
    Cyclic,
    Dihedral,
    GroupExpr,
    GroupRing,
    ProdGroup,
    ProdRing,
    Quaternion8,
    RingExpr,
    Symmetric,
    ZMod,
)

RING_START = {"Z", "("}
GROUP_START = {"C", "D", "Q8", "S", "("}


@dataclass(frozen=True)
class Token:
    kind: str  # 'Z' 'C' 'D' 'Q' 'S' 'INT' 'x' '[' ']' '(' ')' 'EOF'
    text: str
    offset: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(Token("INT", text[i:j], i))
            i = j
        elif ch in "ZCDQSx[]()":
            tokens.append(Token(ch, ch, i))
            i += 1
        else:
            raise ExprSyntaxError(f"unexpected character {ch!r}", i, RING_START | GROUP_START | {"x", "[", "]", ")"})
    tokens.append(Token("EOF", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def fail(self, message: str, expected: Iterable[str], tok: Optional[Token] = None) -> ExprSyntaxError:
        t = tok or self.tok
        if t.kind == "EOF" and message.startswith("expected"):
            message = "unexpected end of input"
        return ExprSyntaxError(message, t.offset, expected)

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            raise self.fail(f"expected {kind!r}", {kind})
        return self.advance()

    def integer(self, head: Token) -> int:
        if self.tok.kind != "INT":
            raise self.fail(f"expected integer after {head.text!r}", {"INT"})
        return int(self.advance().text)

    # ---- ring ----

    def ring_expr(self) -> RingExpr:
        node = self.ring_post()
        while self.tok.kind == "x":
            self.advance()
            node = ProdRing(node, self.ring_post())
        return node

    def ring_post(self) -> RingExpr:
        node = self.ring_atom()
        while self.tok.kind == "[":
            self.advance()
            group = self.group_expr()
            self.expect("]")
            node = GroupRing(node, group)
        return node

    def ring_atom(self) -> RingExpr:
        t = self.tok
        if t.kind == "Z":
            self.advance()
            n = self.integer(t)
            if n < 2:
                raise ExprSyntaxError("modulus must be ≥ 2", t.offset, {"INT"})
            return ZMod(n)
        if t.kind == "(":
            self.advance()
            node = self.ring_expr()
            self.expect(")")
            return node
        raise self.fail("expected ring expression", RING_START)

    # ---- group ----

    def group_expr(self) -> GroupExpr:
        node = self.group_atom()
        while self.tok.kind == "x":
            self.advance()
            node = ProdGroup(node, self.group_atom())
        return node

    def group_atom(self) -> GroupExpr:
        t = self.tok
        if t.kind == "C":
            self.advance()
            n = self.integer(t)
            if n < 1:
                raise ExprSyntaxError("cyclic order must be ≥ 1", t.offset, {"INT"})
            return Cyclic(n)
        if t.kind == "D":
            self.advance()
            n = self.integer(t)
            if n < 2:
                raise ExprSyntaxError("dihedral parameter must be ≥ 2", t.offset, {"INT"})
            return Dihedral(n)
        if t.kind == "Q":
            self.advance()
            if self.integer(t) != 8:
                raise ExprSyntaxError("only Q8 is supported", t.offset, {"Q8"})
            return Quaternion8()
        if t.kind == "S":
            self.advance()
            n = self.integer(t)
            if not 1 <= n <= 4:
                raise ExprSyntaxError("symmetric degree must be between 1 and 4", t.offset, {"INT"})
            return Symmetric(n)
        if t.kind == "(":
            self.advance()
            node = self.group_expr()
            self.expect(")")
            return node
        raise self.fail("expected group expression", GROUP_START)

    def finish(self) -> None:
        if self.tok.kind != "EOF":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset, {"x", "[", "EOF"})


def parse_expr(text: str) -> RingExpr:
    p = _Parser(text)
    node = p.ring_expr()
    p.finish()
    return node


def parse_group_expr(text: str) -> GroupExpr:
    p = _Parser(text)
    node = p.group_expr()
    p.finish()
    return node


def print_group(expr: GroupExpr) -> str:
    match expr:
        case Cyclic(n):
            return f"C{n}"
        case Dihedral(n):
            return f"D{n}"
        case Quaternion8():
            return "Q8"
        case Symmetric(n):
            return f"S{n}"
        case ProdGroup(left, right):
            rhs = print_group(right)
            if isinstance(right, ProdGroup):
                rhs = f"({rhs})"
            return f"{print_group(left)} x {rhs}"
    raise TypeError(f"not a group expression: {expr!r}")


def print_expr(expr: RingExpr) -> str:
    match expr:
        case ZMod(n):
            return f"Z{n}"
        case ProdRing(left, right):
            rhs = print_expr(right)
            if isinstance(right, ProdRing):
                rhs = f"({rhs})"
            return f"{print_expr(left)} x {rhs}"
        case GroupRing(ring, group):
            base = print_expr(ring)
            if isinstance(ring, ProdRing):
                base = f"({base})"
            return f"{base}[{print_group(group)}]"
    raise TypeError(f"not a ring expression: {expr!r}")


def canonical(text: str) -> str:
    return print_expr(parse_expr(text))
