"""Scalar expression language used to describe problem data.

Grammar (standard infix, ``^`` binds tightest and is right-associative)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | CONST | VAR | FUNC "(" expr ("," expr)* ")" | "(" expr ")"

Functions: ``sin cos tan exp log sqrt abs`` and ``mlf(mu, z)`` (one-parameter
Mittag-Leffler function). Constants: ``pi`` and ``e``. The Unicode operators
``×``, ``÷`` and ``−`` are accepted as aliases of ``*``, ``/`` and ``-``.

Evaluation works on floats and on NumPy arrays alike; domain violations
(division by zero, ``log`` of a non-positive value, ``sqrt`` of a negative
value, ...) raise :class:`~fracbvp.errors.DomainError` instead of producing NaN.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from fracbvp.errors import DomainError, ExprSyntaxError, MissingBinding, UnknownIdentifier

CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "abs": 1,
    "mlf": 2,
}
_OP_ALIASES = {"×": "*", "÷": "/", "−": "-"}


# {{{ tree


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: Node


@dataclass(frozen=True)
class Binary:
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Node, ...]


Node = Union[Num, Const, Var, Unary, Binary, Call]

# }}}


# {{{ tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),×÷−])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    # byte offsets are reported, so keep a running UTF-8 count
    byte_pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", byte_pos, source)

        text = m.group()
        kind = m.lastgroup
        assert kind is not None
        if kind != "ws":
            if kind == "op":
                text = _OP_ALIASES.get(text, text)
            tokens.append(_Token(kind, text, byte_pos))

        byte_pos += len(m.group().encode("utf-8"))
        pos = m.end()

    tokens.append(_Token("end", "", byte_pos))
    return tokens


# }}}


# {{{ parser


class _Parser:
    def __init__(self, source: str, allowed_vars: frozenset[str]) -> None:
        self.source = source
        self.allowed = allowed_vars
        self.tokens = _tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, tok: _Token | None = None) -> ExprSyntaxError:
        tok = self.tok if tok is None else tok
        if tok.kind == "end":
            message = f"{message}: unexpected end of input"
        else:
            message = f"{message}: unexpected token {tok.text!r}"
        return ExprSyntaxError(message, tok.offset, self.source)

    def expect(self, text: str) -> _Token:
        if self.tok.kind != "op" or self.tok.text != text:
            raise self.fail(f"expected {text!r}")
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise self.fail("expected an operator")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            return Unary(op, self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))

        if tok.kind == "name":
            self.advance()
            is_call = self.tok.kind == "op" and self.tok.text == "("
            if is_call:
                if tok.text not in FUNCTIONS:
                    raise UnknownIdentifier(tok.text, tok.offset)
                return self.call(tok)
            if tok.text in self.allowed:
                return Var(tok.text)
            if tok.text in CONSTANTS:
                return Const(tok.text)
            raise UnknownIdentifier(tok.text, tok.offset)

        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node

        raise self.fail("expected a number, name or '('")

    def call(self, name_tok: _Token) -> Node:
        self.expect("(")
        args = [self.expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")

        arity = FUNCTIONS[name_tok.text]
        if len(args) != arity:
            raise ExprSyntaxError(
                f"function '{name_tok.text}' takes {arity} argument(s), got {len(args)}",
                name_tok.offset,
                self.source,
            )
        return Call(name_tok.text, tuple(args))


# }}}


# {{{ evaluation


def _check(cond: Any, message: str) -> None:
    if np.any(cond):
        raise DomainError(message)


def _pow(x: Any, p: Any) -> Any:
    x_arr = np.asarray(x, dtype=float)
    p_arr = np.asarray(p, dtype=float)
    negative = (x_arr < 0) & (p_arr != np.round(p_arr))
    _check(negative, "negative base raised to a non-integer power")
    _check((x_arr == 0) & (p_arr < 0), "zero raised to a negative power")
    return np.power(x_arr, p_arr)


def _mlf(mu: Any, z: Any) -> Any:
    from fracbvp.special import mittag_leffler

    mu_arr = np.asarray(mu, dtype=float)
    if mu_arr.ndim > 0 and np.ptp(mu_arr) != 0:
        raise DomainError("mlf order must be a scalar")
    return mittag_leffler(float(mu_arr.flat[0]), z)


def _eval(node: Node, env: Mapping[str, Any]) -> Any:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise MissingBinding(node.name) from None

    if isinstance(node, Unary):
        value = _eval(node.operand, env)
        return -value if node.op == "-" else value

    if isinstance(node, Binary):
        left = _eval(node.left, env)
        right = _eval(node.right, env)
        if node.op == "+":
            return np.add(left, right)
        if node.op == "-":
            return np.subtract(left, right)
        if node.op == "*":
            return np.multiply(left, right)
        if node.op == "/":
            _check(np.asarray(right) == 0, "division by zero")
            return np.divide(left, right)
        return _pow(left, right)

    args = [_eval(arg, env) for arg in node.args]
    name = node.name
    if name == "log":
        _check(np.asarray(args[0]) <= 0, "log of a non-positive value")
        return np.log(args[0])
    if name == "sqrt":
        _check(np.asarray(args[0]) < 0, "sqrt of a negative value")
        return np.sqrt(args[0])
    if name == "mlf":
        return _mlf(*args)
    return getattr(np, "abs" if name == "abs" else name)(args[0])


def _to_source(node: Node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Const, Var)):
        return node.name
    if isinstance(node, Unary):
        return f"({node.op}{_to_source(node.operand)})"
    if isinstance(node, Binary):
        return f"({_to_source(node.left)} {node.op} {_to_source(node.right)})"
    return f"{node.name}({', '.join(_to_source(a) for a in node.args)})"


def _free_vars(node: Node) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset([node.name])
    if isinstance(node, Unary):
        return _free_vars(node.operand)
    if isinstance(node, Binary):
        return _free_vars(node.left) | _free_vars(node.right)
    if isinstance(node, Call):
        out: frozenset[str] = frozenset()
        for arg in node.args:
            out = out | _free_vars(arg)
        return out
    return frozenset()


# }}}


@dataclass(frozen=True)
class Expr:
    """A parsed expression.

    Instances are immutable and can be evaluated concurrently.
    """

    source: str
    """The text the expression was parsed from."""
    ast: Node
    allowed_vars: frozenset[str]
    """Variables the expression was allowed to reference."""

    @property
    def free_vars(self) -> frozenset[str]:
        return _free_vars(self.ast)

    def eval(self, bindings: Mapping[str, Any]) -> Any:
        """Evaluate with *bindings* (floats or broadcastable arrays).

        Returns a float for scalar inputs and an :class:`numpy.ndarray`
        otherwise.
        """
        with np.errstate(all="ignore"):
            value = _eval(self.ast, bindings)
            _check(~np.isfinite(value), f"non-finite value while evaluating {self.source!r}")

        # constant subexpressions do not broadcast by themselves
        shape = np.broadcast_shapes(np.shape(value), *(np.shape(v) for v in bindings.values()))
        if shape == ():
            return float(value)
        return np.broadcast_to(np.asarray(value, dtype=float), shape).copy()

    def __call__(self, **bindings: Any) -> Any:
        return self.eval(bindings)

    def to_source(self) -> str:
        """Fully parenthesized text that reparses to the same tree."""
        return _to_source(self.ast)

    def __str__(self) -> str:
        return self.source


def parse(source: str, allowed_vars: Iterable[str] = ("t",)) -> Expr:
    """Parse *source* into an :class:`Expr` over *allowed_vars*.

    :raises ExprSyntaxError: on malformed input, with the byte offset.
    :raises UnknownIdentifier: for names that are neither an allowed variable,
        a constant nor a function.
    """
    allowed = frozenset(allowed_vars)
    clash = allowed & (set(CONSTANTS) | set(FUNCTIONS))
    if clash:
        raise ValueError(f"variable names shadow builtins: {sorted(clash)}")

    root = _Parser(source, allowed).parse()
    return Expr(source=source, ast=root, allowed_vars=allowed)


def evaluate(e: Expr, bindings: Mapping[str, Any]) -> Any:
    return e.eval(bindings)
