"""Scene expression language: parsing, ASTs, and jet evaluation.

The grammar is plain infix arithmetic with ``^`` binding tighter than unary
minus, then ``*``/``/``, then ``+``/``-``, all left-associative, with
parentheses and the elementary functions sin, cos, exp, log, sqrt.
Integer powers require literal non-negative integer exponents.

Numeric literals are kept as exact rationals (decimal literals included),
so polynomial expressions can be evaluated either in float64 jets or in
exact rational jets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DomainError,
    ExactModeError,
    OrderError,
    ParseError,
    UnknownVariableError,
)
from .jets import MAX_ORDER_DEFAULT, Jet, jet_space

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Call(Expr):
    function: str
    argument: Expr


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    tokens, pos = [], 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            stripped = text[pos:].lstrip()
            where = len(text) - len(stripped)
            raise ParseError(f"unexpected character {text[where]!r}", where)
        kind = match.lastgroup
        if kind is not None:
            tokens.append((kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.variables = set(variables)
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect_op(self, symbol):
        kind, value, where = self.peek()
        if kind != "op" or value != symbol:
            raise ParseError(f"expected '{symbol}'", where)
        return self.advance()

    def parse(self):
        expr = self.sum()
        kind, value, where = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {value!r}", where)
        return expr

    def sum(self):
        node = self.product()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                right = self.product()
                node = Add(node, right) if value == "+" else Sub(node, right)
            else:
                return node

    def product(self):
        node = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                right = self.unary()
                node = Mul(node, right) if value == "*" else Div(node, right)
            else:
                return node

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value == "^":
                self.advance()
                nkind, nvalue, nwhere = self.peek()
                if nkind != "number" or not nvalue.isdigit():
                    raise ParseError("exponent must be a non-negative integer literal", nwhere)
                self.advance()
                node = Pow(node, int(nvalue))
            else:
                return node

    def atom(self):
        kind, value, where = self.advance()
        if kind == "number":
            return Const(Fraction(value))
        if kind == "ident":
            nkind, nvalue, _ = self.peek()
            if nkind == "op" and nvalue == "(":
                if value not in FUNCTIONS:
                    raise ParseError(f"unknown function '{value}'", where)
                self.advance()
                argument = self.sum()
                self.expect_op(")")
                return Call(value, argument)
            if value not in self.variables:
                raise UnknownVariableError(value, where)
            return Var(value)
        if kind == "op" and value == "(":
            node = self.sum()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected token {value!r}" if value else "unexpected end of input", where)


def parse_expression(text, variables):
    """Parse ``text`` against an ordered list of declared variable names."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text, variables).parse()


# -- evaluation ---------------------------------------------------------


def eval_expr(expr, env, exact=False):
    """Evaluate an AST over a dict of variable-name -> Jet bindings."""
    if isinstance(expr, Const):
        sample = next(iter(env.values()))
        return Jet.constant(sample.space, expr.value if exact else float(expr.value),
                            sample.order, exact)
    if isinstance(expr, Var):
        return env[expr.name]
    if isinstance(expr, Add):
        return eval_expr(expr.left, env, exact) + eval_expr(expr.right, env, exact)
    if isinstance(expr, Sub):
        return eval_expr(expr.left, env, exact) - eval_expr(expr.right, env, exact)
    if isinstance(expr, Mul):
        return eval_expr(expr.left, env, exact) * eval_expr(expr.right, env, exact)
    if isinstance(expr, Div):
        return eval_expr(expr.left, env, exact) / eval_expr(expr.right, env, exact)
    if isinstance(expr, Pow):
        return eval_expr(expr.base, env, exact) ** expr.exponent
    if isinstance(expr, Neg):
        return -eval_expr(expr.operand, env, exact)
    if isinstance(expr, Call):
        if exact:
            raise ExactModeError("elementary functions are not available in exact mode")
        arg = eval_expr(expr.argument, env, exact)
        return getattr(arg, expr.function)()
    raise TypeError(f"not an expression node: {expr!r}")


def eval_jet(expr, variables, point, order, exact=False, max_order=MAX_ORDER_DEFAULT):
    """Jet of ``expr`` at ``point`` through total order ``order``.

    ``variables`` fixes the coordinate order of the jet space.  Raises
    OrderError above ``max_order`` and DomainError when the point leaves
    the domain of an elementary function.
    """
    if order < 0:
        raise OrderError("jet order must be non-negative")
    if order > max_order:
        raise OrderError(f"jet order {order} exceeds the configured maximum {max_order}")
    if len(point) != len(variables):
        raise DomainError(
            f"point has {len(point)} coordinates for {len(variables)} variables"
        )
    space = jet_space(len(variables), order)
    env = {
        name: Jet.variable(space, k, point[k], order, exact)
        for k, name in enumerate(variables)
    }
    return eval_expr(expr, env, exact)


def eval_scalar(expr, variables, point):
    return float(eval_jet(expr, variables, point, 0).value)


# -- symbolic utilities --------------------------------------------------


def _is_zero(expr):
    return isinstance(expr, Const) and expr.value == 0


def _is_one(expr):
    return isinstance(expr, Const) and expr.value == 1


def _add(a, b):
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return Add(a, b)


def _mul(a, b):
    if _is_zero(a) or _is_zero(b):
        return Const(Fraction(0))
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    return Mul(a, b)


def derivative(expr, name):
    """Symbolic partial derivative, with light zero/one folding only."""
    if isinstance(expr, Const):
        return Const(Fraction(0))
    if isinstance(expr, Var):
        return Const(Fraction(1 if expr.name == name else 0))
    if isinstance(expr, Add):
        return _add(derivative(expr.left, name), derivative(expr.right, name))
    if isinstance(expr, Sub):
        da, db = derivative(expr.left, name), derivative(expr.right, name)
        if _is_zero(db):
            return da
        return Sub(da, db)
    if isinstance(expr, Mul):
        return _add(
            _mul(derivative(expr.left, name), expr.right),
            _mul(expr.left, derivative(expr.right, name)),
        )
    if isinstance(expr, Div):
        da, db = derivative(expr.left, name), derivative(expr.right, name)
        if _is_zero(db):
            return Div(da, expr.right)
        return Div(Sub(_mul(da, expr.right), _mul(expr.left, db)), Pow(expr.right, 2))
    if isinstance(expr, Pow):
        if expr.exponent == 0:
            return Const(Fraction(0))
        inner = derivative(expr.base, name)
        scaled = _mul(Const(Fraction(expr.exponent)), _mul(Pow(expr.base, expr.exponent - 1)
                                                           if expr.exponent > 1 else Const(Fraction(1)), inner))
        return scaled
    if isinstance(expr, Neg):
        return Neg(derivative(expr.operand, name))
    if isinstance(expr, Call):
        inner = derivative(expr.argument, name)
        if _is_zero(inner):
            return Const(Fraction(0))
        arg = expr.argument
        outer = {
            "sin": Call("cos", arg),
            "cos": Neg(Call("sin", arg)),
            "exp": Call("exp", arg),
            "log": Div(Const(Fraction(1)), arg),
            "sqrt": Div(Const(Fraction(1)), Mul(Const(Fraction(2)), Call("sqrt", arg))),
        }[expr.function]
        return _mul(outer, inner)
    raise TypeError(f"not an expression node: {expr!r}")


def substitute(expr, mapping):
    """Replace variable references by expressions (capture-free)."""
    if isinstance(expr, Const):
        return expr
    if isinstance(expr, Var):
        return mapping.get(expr.name, expr)
    if isinstance(expr, Add):
        return Add(substitute(expr.left, mapping), substitute(expr.right, mapping))
    if isinstance(expr, Sub):
        return Sub(substitute(expr.left, mapping), substitute(expr.right, mapping))
    if isinstance(expr, Mul):
        return Mul(substitute(expr.left, mapping), substitute(expr.right, mapping))
    if isinstance(expr, Div):
        return Div(substitute(expr.left, mapping), substitute(expr.right, mapping))
    if isinstance(expr, Pow):
        return Pow(substitute(expr.base, mapping), expr.exponent)
    if isinstance(expr, Neg):
        return Neg(substitute(expr.operand, mapping))
    if isinstance(expr, Call):
        return Call(expr.function, substitute(expr.argument, mapping))
    raise TypeError(f"not an expression node: {expr!r}")


def variables_of(expr):
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, (Const,)):
        return set()
    if isinstance(expr, (Add, Sub, Mul, Div)):
        return variables_of(expr.left) | variables_of(expr.right)
    if isinstance(expr, Pow):
        return variables_of(expr.base)
    if isinstance(expr, Neg):
        return variables_of(expr.operand)
    if isinstance(expr, Call):
        return variables_of(expr.argument)
    raise TypeError(f"not an expression node: {expr!r}")


def is_polynomial(expr):
    if isinstance(expr, (Const, Var)):
        return True
    if isinstance(expr, (Add, Sub, Mul, Div)):
        return is_polynomial(expr.left) and is_polynomial(expr.right)
    if isinstance(expr, Pow):
        return is_polynomial(expr.base)
    if isinstance(expr, Neg):
        return is_polynomial(expr.operand)
    return False


# -- serialization --------------------------------------------------------


def _const_text(value):
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def to_prefix(expr):
    """Prefix (Polish) rendering, one expression per line, for debug dumps."""
    if isinstance(expr, Const):
        return _const_text(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Add):
        return f"(+ {to_prefix(expr.left)} {to_prefix(expr.right)})"
    if isinstance(expr, Sub):
        return f"(- {to_prefix(expr.left)} {to_prefix(expr.right)})"
    if isinstance(expr, Mul):
        return f"(* {to_prefix(expr.left)} {to_prefix(expr.right)})"
    if isinstance(expr, Div):
        return f"(/ {to_prefix(expr.left)} {to_prefix(expr.right)})"
    if isinstance(expr, Pow):
        return f"(^ {to_prefix(expr.base)} {expr.exponent})"
    if isinstance(expr, Neg):
        return f"(neg {to_prefix(expr.operand)})"
    if isinstance(expr, Call):
        return f"({expr.function} {to_prefix(expr.argument)})"
    raise TypeError(f"not an expression node: {expr!r}")


def to_infix(expr):
    """Deterministic fully-parenthesized infix rendering; re-parses identically."""
    if isinstance(expr, Const):
        value = _const_text(expr.value)
        return f"({value})" if "/" in value else value
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Add):
        return f"({to_infix(expr.left)} + {to_infix(expr.right)})"
    if isinstance(expr, Sub):
        return f"({to_infix(expr.left)} - {to_infix(expr.right)})"
    if isinstance(expr, Mul):
        return f"({to_infix(expr.left)}*{to_infix(expr.right)})"
    if isinstance(expr, Div):
        return f"({to_infix(expr.left)}/{to_infix(expr.right)})"
    if isinstance(expr, Pow):
        return f"{to_infix(expr.base)}^{expr.exponent}" if isinstance(expr.base, (Var,)) \
            else f"({to_infix(expr.base)})^{expr.exponent}"
    if isinstance(expr, Neg):
        return f"(-{to_infix(expr.operand)})"
    if isinstance(expr, Call):
        return f"{expr.function}({to_infix(expr.argument)})"
    raise TypeError(f"not an expression node: {expr!r}")
