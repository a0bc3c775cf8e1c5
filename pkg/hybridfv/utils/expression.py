"""Arithmetic expressions for user-defined coefficient functions.

Grammar (``^`` binds tighter than unary minus, and is right-associative)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Variables are ``x1``, ``x2``, ``x3`` and ``t``; functions are ``exp``,
``sqrt``, ``abs`` and ``sign``. Trees are nested tuples
(``("num", value)``, ``("var", name)``, ``("neg", node)``,
``(op, lhs, rhs)``, ``("call", name, args)``) evaluated with numpy.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

import numpy as np

from hybridfv.exceptions import ExpressionError

VARIABLES = ("x1", "x2", "x3", "t")
FUNCTIONS = {
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sign": np.sign,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)

Node = tuple[Any, ...]


@dataclass(frozen=True)
class Expression:
    """A parsed coefficient expression.

    Attributes:
        text: Source text
        tree: Syntax tree

    """

    text: str
    tree: Node

    @property
    def variables(self) -> frozenset[str]:
        """Variables referenced by the expression."""
        return frozenset(_collect_variables(self.tree))

    def __call__(self, points: np.ndarray, t: float | np.ndarray = 0.0) -> np.ndarray:
        """Evaluate at points (n, d) and time t; see ``eval_expression``."""
        return eval_expression(self, points, t)

    def __repr__(self) -> str:
        """Return the source text."""
        return f"Expression({self.text!r})"


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    position = 0
    stripped_end = len(text.rstrip())
    while position < stripped_end:
        match = _TOKEN.match(text, position)
        if match is None or match.end() == position:
            offset = position + (len(text[position:]) - len(text[position:].lstrip()))
            msg = f"Unexpected character {text[offset]!r}"
            raise ExpressionError(msg, offset)
        kind = match.lastgroup or "op"
        tokens.append((kind, match.group(kind), match.start(kind)))
        position = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser over a token list."""

    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.index = 0

    @property
    def current(self) -> tuple[str, str, int]:
        return self.tokens[self.index]

    def advance(self) -> tuple[str, str, int]:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, symbol: str) -> None:
        kind, value, position = self.current
        if kind != "op" or value != symbol:
            found = "end of input" if kind == "end" else repr(value)
            msg = f"Expected {symbol!r}, found {found}"
            raise ExpressionError(msg, position)
        self.advance()

    def parse(self) -> Node:
        tree = self.expr()
        kind, value, position = self.current
        if kind != "end":
            msg = f"Unexpected token {value!r}"
            raise ExpressionError(msg, position)
        return tree

    def expr(self) -> Node:
        node = self.term()
        while self.current[0] == "op" and self.current[1] in "+-":
            op = self.advance()[1]
            node = (op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.current[0] == "op" and self.current[1] in "*/":
            op = self.advance()[1]
            node = (op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.current[0] == "op" and self.current[1] in "+-":
            op = self.advance()[1]
            operand = self.unary()
            return ("neg", operand) if op == "-" else operand
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.current[0] == "op" and self.current[1] == "^":
            self.advance()
            return ("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, value, position = self.advance()
        if kind == "number":
            return ("num", float(value))
        if kind == "name":
            if self.current[0] == "op" and self.current[1] == "(":
                return self.call(value, position)
            if value not in VARIABLES:
                msg = f"Unknown identifier {value!r}"
                raise ExpressionError(msg, position)
            return ("var", value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        msg = f"Expected a number, variable, function or '(', found {found}"
        raise ExpressionError(msg, position)

    def call(self, name: str, position: int) -> Node:
        if name not in FUNCTIONS:
            msg = f"Unknown function {name!r}"
            raise ExpressionError(msg, position)
        self.expect("(")
        args = [self.expr()]
        while self.current[0] == "op" and self.current[1] == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if len(args) != 1:
            msg = f"Function {name!r} takes 1 argument, got {len(args)}"
            raise ExpressionError(msg, position)
        return ("call", name, tuple(args))


def parse_expression(text: str) -> Expression:
    """Parse an arithmetic expression.

    Args:
        text: Source text, e.g. ``"exp(x1+x2+x3-t-3)"``

    Returns:
        Parsed Expression

    Raises:
        ExpressionError: On syntax errors, unknown identifiers or arity
            mismatches; ``position`` holds the character offset

    """
    if not text or not text.strip():
        msg = "Empty expression"
        raise ExpressionError(msg, 0)
    return Expression(text=text, tree=_Parser(text).parse())


def eval_expression(
    expression: Expression,
    points: np.ndarray,
    t: float | np.ndarray = 0.0,
) -> np.ndarray:
    """Evaluate an expression at points and a time.

    Args:
        expression: Parsed expression
        points: A single point (d,) or points (n, d); x1..xd map to columns
        t: Time, scalar or one value per point

    Returns:
        Values, shape (n,) for (n, d) input or () for a single point

    Raises:
        ExpressionError: On domain errors (sqrt of a negative number,
            division by zero, a power with no real value) or a variable
            beyond the point dimension

    """
    coords = np.asarray(points, dtype=float)
    single = coords.ndim == 1
    coords = np.atleast_2d(coords)
    env: dict[str, Any] = {"t": np.asarray(t, dtype=float)}
    for axis in range(coords.shape[1]):
        env[f"x{axis + 1}"] = coords[:, axis]
    with np.errstate(over="ignore"):
        values = _evaluate(expression.tree, env)
    values = np.broadcast_to(np.asarray(values, dtype=float), (coords.shape[0],)).copy()
    return values[0] if single else values


def _evaluate(node: Node, env: dict[str, Any]) -> Any:
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "var":
        if node[1] not in env:
            msg = (
                f"Variable {node[1]!r} is not defined for "
                f"{len(env) - 1}-dimensional points"
            )
            raise ExpressionError(msg)
        return env[node[1]]
    if kind == "neg":
        return -_evaluate(node[1], env)
    if kind == "call":
        argument = _evaluate(node[2][0], env)
        if node[1] == "sqrt" and np.any(np.asarray(argument) < 0):
            msg = "sqrt of a negative number"
            raise ExpressionError(msg)
        return FUNCTIONS[node[1]](argument)
    lhs = _evaluate(node[1], env)
    rhs = _evaluate(node[2], env)
    if kind == "+":
        return lhs + rhs
    if kind == "-":
        return lhs - rhs
    if kind == "*":
        return lhs * rhs
    if kind == "/":
        if np.any(np.asarray(rhs) == 0):
            msg = "division by zero"
            raise ExpressionError(msg)
        return lhs / rhs
    if kind == "^":
        base, exponent = np.broadcast_arrays(
            np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
        )
        if np.any((base < 0) & (exponent != np.round(exponent))):
            msg = "negative base raised to a non-integer power"
            raise ExpressionError(msg)
        if np.any((base == 0) & (exponent < 0)):
            msg = "zero raised to a negative power"
            raise ExpressionError(msg)
        return base**exponent
    msg = f"Unknown node {kind!r}"
    raise ExpressionError(msg)


def _collect_variables(node: Node) -> set[str]:
    kind = node[0]
    if kind == "num":
        return set()
    if kind == "var":
        return {node[1]}
    if kind == "neg":
        return _collect_variables(node[1])
    if kind == "call":
        return set().union(*(_collect_variables(arg) for arg in node[2]))
    return _collect_variables(node[1]) | _collect_variables(node[2])
