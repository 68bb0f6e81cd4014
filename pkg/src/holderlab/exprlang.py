"""A small arithmetic expression language for fields and domain predicates.

Expressions are built from numbers, the coordinates ``x1 ... xN`` (``x``,
``y`` and ``z`` are accepted as aliases for the first three), the constant
``pi``, the binary operators ``+ - * / ^`` and the unary functions
``abs sqrt sin cos exp ln``. ``^`` binds tighter than ``* /`` and is
right-associative.

Predicates combine comparisons between expressions with ``&``, ``|`` and
``!`` (the words ``and``, ``or``, ``not`` work too). A comparison chain such
as ``x1^2 < x2 < 2*x1^2`` means ``x1^2 < x2 & x2 < 2*x1^2``.

>>> e = parse_expr("sin(pi*x1)*exp(-x2)")
>>> eval_expr(e, (0.5, 0.0))
1.0
>>> unparse(parse_expr("2+3*4"))
'(2.0 + (3.0 * 4.0))'
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = [
    "Const", "Var", "Pi", "Unary", "Binary",
    "Compare", "And", "Or", "Not",
    "FieldExpr", "DomainPredicate",
    "ExprSyntaxError", "UnknownIdentifierError", "EvalDomainError",
    "parse_expr", "parse_predicate", "eval_expr", "eval_predicate",
    "evaluate", "evaluate_predicate", "unparse", "max_variable",
]

FUNCTIONS = ("abs", "sqrt", "sin", "cos", "exp", "ln")
ALIASES = {"x": 1, "y": 2, "z": 3}
COMPARISONS = ("<", "<=", ">", ">=")


class ExprSyntaxError(ValueError):
    """Malformed expression text.

    ``offset`` is the byte offset into the UTF-8 source where parsing
    stopped and ``expected`` the set of tokens that would have been valid.
    """

    def __init__(self, message, source, offset, expected=()):
        self.source = source
        self.offset = offset
        self.expected = frozenset(expected)
        hint = f"; expected one of {sorted(self.expected)}" if expected else ""
        super().__init__(f"{message} at offset {offset}{hint}")


class UnknownIdentifierError(ExprSyntaxError):
    pass


class EvalDomainError(ArithmeticError):
    """Evaluation left the real domain of an operation (sqrt(-1), ln(0), ...)."""

    def __init__(self, message, node, point):
        self.node = node
        self.point = tuple(float(v) for v in point) if point is not None else None
        self.cell = None
        super().__init__(f"{message} in {unparse(node)} at point {self.point}")


# ---------------------------------------------------------------------------
# Tree nodes


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or one of FUNCTIONS
    arg: "FieldExpr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^
    left: "FieldExpr"
    right: "FieldExpr"


FieldExpr = Union[Const, Var, Pi, Unary, Binary]


@dataclass(frozen=True)
class Compare:
    op: str
    left: FieldExpr
    right: FieldExpr


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Not:
    arg: "DomainPredicate"


DomainPredicate = Union[Compare, And, Or, Not]


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|>=|≤|≥|&&|\|\||[-+*/^()<>&|!])
    """,
    re.VERBOSE,
)

_OP_CANON = {"≤": "<=", "≥": ">=", "&&": "&", "||": "|"}
_WORD_OPS = {"and": "&", "or": "|", "not": "!"}


@dataclass(frozen=True)
class _Token:
    kind: str  # number, ident, op, end
    text: str
    offset: int  # byte offset


def _tokenize(source: str):
    tokens = []
    pos = 0
    byte = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", source, byte)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            if kind == "op":
                text = _OP_CANON.get(text, text)
            elif kind == "ident" and text in _WORD_OPS:
                kind, text = "op", _WORD_OPS[text]
            tokens.append(_Token(kind, text, byte))
        byte += len(m.group().encode("utf-8"))
        pos = m.end()
    tokens.append(_Token("end", "", byte))
    return tokens


_ATOM_START = frozenset({"number", "identifier", "(", "-", "+"})


class _Parser:
    def __init__(self, source: str):
        if not source or not source.strip():
            raise ExprSyntaxError("empty expression", source or "", 0, _ATOM_START)
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def at_op(self, *ops) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def fail(self, expected, message=None):
        t = self.tok
        if message is None:
            message = "unexpected end of input" if t.kind == "end" else f"unexpected token {t.text!r}"
        raise ExprSyntaxError(message, self.source, t.offset, expected)

    def expect(self, text):
        if not self.at_op(text):
            self.fail({text})
        return self.advance()

    def finish(self, expected):
        if self.tok.kind != "end":
            self.fail(expected | {"end of input"})

    # expr := term (("+" | "-") term)*
    def expr(self):
        node = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    # term := unary (("*" | "/") unary)*
    def term(self):
        node = self.unary()
        while self.at_op("*", "/"):
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    # unary := ("-" | "+") unary | power
    def unary(self):
        if self.at_op("-"):
            self.advance()
            return Unary("neg", self.unary())
        if self.at_op("+"):
            self.advance()
            return self.unary()
        return self.power()

    # power := atom ("^" unary)?   -- recursion through unary gives right associativity
    def power(self):
        base = self.atom()
        if self.at_op("^"):
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Const(float(t.text))
        if t.kind == "ident":
            self.advance()
            name = t.text
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(name, arg)
            if name == "pi":
                return Pi()
            if name in ALIASES:
                return Var(ALIASES[name])
            m = re.fullmatch(r"x([1-9]\d*)", name)
            if m:
                return Var(int(m.group(1)))
            raise UnknownIdentifierError(f"unknown identifier {name!r}", self.source, t.offset)
        if self.at_op("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.fail(_ATOM_START)

    # pred := and ("|" and)*
    def predicate(self):
        parts = [self.conjunction()]
        while self.at_op("|"):
            self.advance()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self):
        parts = [self.negation()]
        while self.at_op("&"):
            self.advance()
            parts.append(self.negation())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def negation(self):
        if self.at_op("!"):
            self.advance()
            return Not(self.negation())
        return self.primary()

    def primary(self):
        # "(" may open either a parenthesized predicate or an arithmetic
        # operand of a comparison; try the comparison first.
        start = self.pos
        try:
            return self.comparison()
        except ExprSyntaxError as err:
            if not self.tokens[start].text == "(" or self.tokens[start].kind != "op":
                raise
            first_error = err
        self.pos = start
        self.advance()
        try:
            node = self.predicate()
            self.expect(")")
        except ExprSyntaxError:
            raise first_error from None
        return node

    def comparison(self):
        left = self.expr()
        if not self.at_op(*COMPARISONS):
            self.fail(set(COMPARISONS))
        links = []
        while self.at_op(*COMPARISONS):
            op = self.advance().text
            right = self.expr()
            links.append(Compare(op, left, right))
            left = right
        return links[0] if len(links) == 1 else And(tuple(links))


def parse_expr(source: str) -> FieldExpr:
    """Parse arithmetic expression text into an immutable tree."""
    p = _Parser(source)
    node = p.expr()
    p.finish({"+", "-", "*", "/", "^"})
    return node


def parse_predicate(source: str) -> DomainPredicate:
    """Parse a boolean combination of comparisons."""
    p = _Parser(source)
    node = p.predicate()
    p.finish({"&", "|"})
    return node


# ---------------------------------------------------------------------------
# Unparsing


def _fmt_const(v: float) -> str:
    if v < 0 or math.copysign(1.0, v) < 0:
        return f"(-{repr(-v)})"
    return repr(float(v))


def unparse(node) -> str:
    """Canonical, fully parenthesized text for an expression or predicate."""
    if isinstance(node, Const):
        return _fmt_const(node.value)
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"(-{unparse(node.arg)})"
        return f"{node.op}({unparse(node.arg)})"
    if isinstance(node, Binary):
        return f"({unparse(node.left)} {node.op} {unparse(node.right)})"
    if isinstance(node, Compare):
        return f"({unparse(node.left)} {node.op} {unparse(node.right)})"
    if isinstance(node, And):
        return "(" + " & ".join(unparse(p) for p in node.parts) + ")"
    if isinstance(node, Or):
        return "(" + " | ".join(unparse(p) for p in node.parts) + ")"
    if isinstance(node, Not):
        return f"(!{unparse(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def max_variable(node) -> int:
    """Largest coordinate index referenced (0 for a constant expression)."""
    if isinstance(node, Var):
        return node.index
    if isinstance(node, (Const, Pi)):
        return 0
    if isinstance(node, (Unary, Not)):
        return max_variable(node.arg)
    if isinstance(node, (Binary, Compare)):
        return max(max_variable(node.left), max_variable(node.right))
    if isinstance(node, (And, Or)):
        return max(max_variable(p) for p in node.parts)
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Scalar evaluation


def _pow(base: float, expo: float, node, point) -> float:
    if base < 0 and not float(expo).is_integer():
        raise EvalDomainError("negative base with non-integer exponent", node, point)
    if base == 0 and expo < 0:
        raise EvalDomainError("zero to a negative power", node, point)
    try:
        return math.pow(base, expo)
    except OverflowError:
        return math.inf


def _scalar(node, point) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return float(point[node.index - 1])
    if isinstance(node, Pi):
        return math.pi
    if isinstance(node, Unary):
        a = _scalar(node.arg, point)
        op = node.op
        if op == "neg":
            return -a
        if op == "abs":
            return abs(a)
        if op == "sqrt":
            if a < 0:
                raise EvalDomainError("sqrt of a negative argument", node, point)
            return math.sqrt(a)
        if op == "ln":
            if not a > 0:
                raise EvalDomainError("ln of a non-positive argument", node, point)
            return math.log(a)
        if op == "exp":
            try:
                return math.exp(a)
            except OverflowError:
                return math.inf
        return math.sin(a) if op == "sin" else math.cos(a)
    a = _scalar(node.left, point)
    b = _scalar(node.right, point)
    op = node.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise EvalDomainError("division by zero", node, point)
        return a / b
    return _pow(a, b, node, point)


def _check_dim(node, dim):
    need = max_variable(node)
    if need > dim:
        raise ValueError(f"expression uses x{need} but the point has dimension {dim}")


def eval_expr(e: FieldExpr, point: Sequence[float]) -> float:
    """Evaluate at one point. Raises EvalDomainError instead of returning NaN."""
    _check_dim(e, len(point))
    return float(_scalar(e, point))


def _scalar_pred(node, point) -> bool:
    if isinstance(node, Compare):
        a = _scalar(node.left, point)
        b = _scalar(node.right, point)
        return _compare(node.op, a, b)
    if isinstance(node, And):
        return all(_scalar_pred(p, point) for p in node.parts)
    if isinstance(node, Or):
        return any(_scalar_pred(p, point) for p in node.parts)
    return not _scalar_pred(node.arg, point)


def _compare(op, a, b):
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def eval_predicate(pred: DomainPredicate, point: Sequence[float]) -> bool:
    _check_dim(pred, len(point))
    return bool(_scalar_pred(pred, point))


# ---------------------------------------------------------------------------
# Vectorized evaluation over an (M, N) array of points


def _raise_at(mask, node, points, message):
    k = int(np.flatnonzero(mask)[0])
    err = EvalDomainError(message, node, points[k])
    err.cell = k
    raise err


def _vec(node, points: np.ndarray) -> np.ndarray:
    m = points.shape[0]
    if isinstance(node, Const):
        return np.full(m, node.value)
    if isinstance(node, Var):
        return points[:, node.index - 1].astype(float, copy=True)
    if isinstance(node, Pi):
        return np.full(m, math.pi)
    if isinstance(node, Unary):
        a = _vec(node.arg, points)
        op = node.op
        if op == "neg":
            return -a
        if op == "abs":
            return np.abs(a)
        if op == "sqrt":
            bad = a < 0
            if bad.any():
                _raise_at(bad, node, points, "sqrt of a negative argument")
            return np.sqrt(a)
        if op == "ln":
            bad = ~(a > 0)
            if bad.any():
                _raise_at(bad, node, points, "ln of a non-positive argument")
            return np.log(a)
        with np.errstate(over="ignore"):
            return getattr(np, op)(a)
    a = _vec(node.left, points)
    b = _vec(node.right, points)
    op = node.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        bad = b == 0
        if bad.any():
            _raise_at(bad, node, points, "division by zero")
        return a / b
    bad = (a < 0) & (b != np.floor(b))
    if bad.any():
        _raise_at(bad, node, points, "negative base with non-integer exponent")
    bad = (a == 0) & (b < 0)
    if bad.any():
        _raise_at(bad, node, points, "zero to a negative power")
    with np.errstate(over="ignore"):
        return np.float_power(a, b)


def evaluate(e: FieldExpr, points) -> np.ndarray:
    """Evaluate at every row of an (M, N) point array.

    On a domain error the raised EvalDomainError has ``cell`` set to the
    row index of the first offending point.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    _check_dim(e, points.shape[1])
    return _vec(e, points)


def _vec_pred(node, points):
    if isinstance(node, Compare):
        return _compare(node.op, _vec(node.left, points), _vec(node.right, points))
    if isinstance(node, And):
        out = _vec_pred(node.parts[0], points)
        for p in node.parts[1:]:
            out = out & _vec_pred(p, points)
        return out
    if isinstance(node, Or):
        out = _vec_pred(node.parts[0], points)
        for p in node.parts[1:]:
            out = out | _vec_pred(p, points)
        return out
    return ~_vec_pred(node.arg, points)


def evaluate_predicate(pred: DomainPredicate, points) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    _check_dim(pred, points.shape[1])
    return np.asarray(_vec_pred(pred, points), dtype=bool)
