"""A small expression language for coefficient fields.

Variables are ``x1..xm`` (base) and ``y1..yr`` (fiber).  Binary operators are
``+ - * /`` and ``^``; ``^`` is right-associative and binds tighter than
unary minus, so ``-x1^2`` parses as ``-(x1^2)``.  Functions: sin, cos, tan,
exp, ln, sqrt, abs and the binary pow.  Constants: pi, e.  Numeric literals
may use exponent notation (``1e-3``).

Printing an expression and reparsing it returns a structurally identical
tree (``parse(print(parse(s)))`` is a fixpoint).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Tuple

from . import jets
from .errors import ArityError, ExprSyntaxError, UnknownIdentifier
from .jets import ScalarField

FUNCTIONS = {
    "sin": (1, jets.t_sin),
    "cos": (1, jets.t_cos),
    "tan": (1, jets.t_tan),
    "exp": (1, jets.t_exp),
    "ln": (1, jets.t_ln),
    "sqrt": (1, jets.t_sqrt),
    "abs": (1, jets.t_abs),
    "pow": (2, jets.t_pow),
}

CONSTANTS = {"pi": math.pi, "e": math.e}


# -- syntax tree -----------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    """``index`` is the position in the combined (x..., y...) coordinate list."""

    name: str
    index: int


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple["Expr", ...]


Expr = Num | Const | Var | Neg | Bin | Call


# -- tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
)

_VAR_RE = re.compile(r"^([xy])([1-9]\d*)$")


def _tokenize(source):
    tokens = []
    pos = 0
    size = len(source)
    while True:
        while pos < size and source[pos].isspace():
            pos += 1
        if pos >= size:
            break
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ExprSyntaxError(
                f"unexpected character {source[pos]!r}", pos,
                expected=("number", "identifier", "operator"))
        tokens.append((match.lastgroup, match.group(), pos))
        pos = match.end()
    tokens.append(("end", "", size))
    return tokens


class _Parser:
    def __init__(self, source, dims):
        self.source = source
        self.m, self.r = dims
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, offset = self.peek()
        if kind == "op" and text == op:
            return self.advance()
        raise ExprSyntaxError(f"expected '{op}'", offset, expected=(op,))

    def at_op(self, *ops):
        kind, text, _ = self.peek()
        return kind == "op" and text in ops

    # expr := term (('+'|'-') term)*
    def parse_expr(self):
        node = self.parse_term()
        while self.at_op("+", "-"):
            op = self.advance()[1]
            node = Bin(op, node, self.parse_term())
        return node

    # term := unary (('*'|'/') unary)*
    def parse_term(self):
        node = self.parse_unary()
        while self.at_op("*", "/"):
            op = self.advance()[1]
            node = Bin(op, node, self.parse_unary())
        return node

    # unary := '-' unary | power
    def parse_unary(self):
        if self.at_op("-"):
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    # power := atom ('^' unary)?   (right-associative via unary recursion)
    def parse_power(self):
        node = self.parse_atom()
        if self.at_op("^"):
            self.advance()
            node = Bin("^", node, self.parse_unary())
        return node

    def parse_atom(self):
        kind, text, offset = self.peek()
        if kind == "num":
            self.advance()
            return Num(float(text))
        if kind == "ident":
            self.advance()
            if self.at_op("("):
                return self.parse_call(text, offset)
            if text in CONSTANTS:
                return Const(text)
            var = _VAR_RE.match(text)
            if var:
                axis, number = var.group(1), int(var.group(2))
                bound = self.m if axis == "x" else self.r
                if number <= bound:
                    index = number - 1 if axis == "x" else self.m + number - 1
                    return Var(text, index)
            raise UnknownIdentifier(text, offset)
        if kind == "op" and text == "(":
            self.advance()
            node = self.parse_expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError("expected a number, identifier or '('", offset,
                              expected=("number", "identifier", "("))

    def parse_call(self, name, offset):
        if name not in FUNCTIONS:
            raise UnknownIdentifier(name, offset)
        arity = FUNCTIONS[name][0]
        self.expect_op("(")
        args = [self.parse_expr()]
        while self.at_op(","):
            self.advance()
            args.append(self.parse_expr())
        self.expect_op(")")
        if len(args) != arity:
            raise ArityError(
                f"{name} expects {arity} argument(s), got {len(args)}")
        return Call(name, tuple(args))


def parse(source: str, dims: Tuple[int, int]) -> Expr:
    """Parse ``source`` against dimensions ``(m, r)``."""
    parser = _Parser(source, dims)
    node = parser.parse_expr()
    kind, text, offset = parser.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected {text!r}", offset,
                              expected=("end of input",))
    return node


# -- printer ---------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(node):
    if isinstance(node, Bin):
        if node.op in "+-":
            return _PREC_ADD
        if node.op in "*/":
            return _PREC_MUL
        return _PREC_POW
    if isinstance(node, Neg):
        return _PREC_UNARY
    return _PREC_ATOM


def to_source(node: Expr) -> str:
    """Render with minimal parentheses; reparsing gives the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = to_source(node.operand)
        if _prec(node.operand) < _PREC_UNARY:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_source(a) for a in node.args)})"
    left, right = to_source(node.left), to_source(node.right)
    if node.op in "+-":
        if _prec(node.left) < _PREC_ADD:
            left = f"({left})"
        if _prec(node.right) <= _PREC_ADD:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    if node.op in "*/":
        if _prec(node.left) < _PREC_MUL:
            left = f"({left})"
        if _prec(node.right) <= _PREC_MUL:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    # '^' is right-associative and binds tighter than unary minus
    if _prec(node.left) <= _PREC_POW:
        left = f"({left})"
    if _prec(node.right) < _PREC_UNARY:
        right = f"({right})"
    return f"{left}^{right}"


# -- evaluation ------------------------------------------------------------


def evaluate(node: Expr, coords):
    """Evaluate over a scalar list; scalars may be floats or Taylor objects."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        return coords[node.index]
    if isinstance(node, Neg):
        return -evaluate(node.operand, coords)
    if isinstance(node, Call):
        fn = FUNCTIONS[node.name][1]
        return fn(*(evaluate(a, coords) for a in node.args))
    left = evaluate(node.left, coords)
    right = evaluate(node.right, coords)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        return jets.t_div(left, right)
    return jets.t_pow(left, right)


def variables(node: Expr):
    """Set of coordinate indices appearing in the expression."""
    if isinstance(node, Var):
        return {node.index}
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, Bin):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Call):
        out = set()
        for a in node.args:
            out |= variables(a)
        return out
    return set()


def to_field(node: Expr, m: int, r: int) -> ScalarField:
    """Wrap an expression as a scalar field over (x1..xm, y1..yr)."""
    return ScalarField(m, r, lambda coords: evaluate(node, coords),
                       deps=variables(node))


def parse_field(source: str, m: int, r: int) -> ScalarField:
    return to_field(parse(source, (m, r)), m, r)
