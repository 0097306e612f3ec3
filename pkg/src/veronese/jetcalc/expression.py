"""Expression AST, recursive-descent parser, printer and compilers.

Grammar (EBNF)::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = "-" , unary | power ;
    power   = atom , [ "^" , unary ] ;          (* right associative *)
    atom    = number | variable | func , "(" , expr , ")" | "(" , expr , ")" ;
    func    = "exp" | "ln" | "sin" | "cos" | "sqrt" ;
    number  = digits , [ "." , [digits] ] , [ exponent ] | "." , digits , [ exponent ] ;

The exponent of ``^`` must not reference any variable.  Error messages carry
the byte offset of the offending token.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence, Union

from ..errors import ExpressionSyntaxError, SingularityError, UnknownIdentifierError
from .jets import JetAlgebra, Jet, algebra

FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt")


@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError("literal must be finite and non-negative")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


def variables_in(node: Node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg,)):
        return variables_in(node.operand)
    if isinstance(node, Call):
        return variables_in(node.arg)
    return variables_in(node.left) | variables_in(node.right)


# tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    toks, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    toks.append(_Tok("end", "", _byte_offset(text, len(text))))
    return toks


def _byte_offset(text: str, i: int) -> int:
    return len(text[:i].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = set(variables)

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        tok = self.take()
        if tok.text != text:
            raise ExpressionSyntaxError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.offset)

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {tok.text!r}", tok.offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek().text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek().text == "^":
            self.take()
            start = self.peek().offset
            exponent = self.unary()
            if variables_in(exponent):
                raise ExpressionSyntaxError("exponent must be constant", start)
            return BinOp("^", base, exponent)
        return base

    def atom(self) -> Node:
        tok = self.take()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "ident":
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text in self.variables:
                return Var(tok.text)
            raise UnknownIdentifierError(tok.text, tok.offset)
        if tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionSyntaxError(f"unexpected token {tok.text or 'end of input'!r}", tok.offset)


# printer -------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def to_text(node: Node) -> str:
    """Print with the minimal parentheses that re-parse to the same tree."""
    if isinstance(node, Num):
        v = float(node.value)
        return str(int(v)) if v.is_integer() and v < 1e15 else repr(v)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        return "-" + (f"({inner})" if _prec(node.operand) < 3 else inner)
    p = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        if _prec(node.left) <= 4:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left}{node.op}{right}"


# compilers -------------------------------------------------------------------

def _const_value(node: Node) -> float:
    return Expression(node, ()).evaluate()


def _safe_div(a, b):
    if b == 0.0:
        raise SingularityError("division by zero")
    return a / b


def _safe_ln(a):
    if not a > 0.0:
        raise SingularityError(f"ln of non-positive value {a!r}")
    return math.log(a)


def _safe_sqrt(a):
    if a < 0.0:
        raise SingularityError(f"sqrt of negative value {a!r}")
    return math.sqrt(a)


def _safe_exp(a):
    try:
        return math.exp(a)
    except OverflowError:
        raise SingularityError(f"exp overflow at {a!r}") from None


def _safe_pow(a, q):
    if a < 0.0 and not float(q).is_integer():
        raise SingularityError(f"non-integer power {q!r} of negative value {a!r}")
    if a == 0.0 and q < 0:
        raise SingularityError("negative power of zero")
    try:
        return a ** q
    except OverflowError:
        raise SingularityError("power overflow") from None


_FLOAT_FUNCS = {"exp": "_exp", "ln": "_ln", "sin": "_sin", "cos": "_cos", "sqrt": "_sqrt"}
_JET_FUNCS = {"exp": "J.exp", "ln": "J.log", "sin": "J.sin", "cos": "J.cos", "sqrt": "J.sqrt"}


class _Codegen:
    def __init__(self, variables, alg: JetAlgebra | None):
        self.variables = list(variables)
        self.alg = alg
        self.jet = alg is not None
        self.lines: list[str] = []
        self.env: dict = {}
        self.n = 0

    def tmp(self, rhs: str) -> str:
        name = f"t{self.n}"
        self.n += 1
        self.lines.append(f"{name} = {rhs}")
        return name

    def const(self, value: float) -> str:
        """A plain float constant."""
        name = f"c{len(self.env)}"
        self.env[name] = value
        return name

    def visit(self, node: Node) -> str:
        if isinstance(node, Num):
            if self.jet:
                name = f"c{len(self.env)}"
                self.env[name] = self.alg.const(node.value)
                return name
            return self.const(node.value)
        if isinstance(node, Var):
            return f"v{self.variables.index(node.name)}"
        if isinstance(node, Neg):
            a = self.visit(node.operand)
            return self.tmp(f"J.neg({a})" if self.jet else f"-{a}")
        if isinstance(node, Call):
            a = self.visit(node.arg)
            fn = (_JET_FUNCS if self.jet else _FLOAT_FUNCS)[node.func]
            return self.tmp(f"{fn}({a})")
        if node.op == "^":
            q = _const_value(node.right)
            a = self.visit(node.left)
            qn = self.const(q)
            return self.tmp(f"J.pow({a}, {qn})" if self.jet else f"_pow({a}, {qn})")
        # a literal operand stays a float: scale/shift instead of full products
        if self.jet and isinstance(node.left, Num) and node.op in "+*":
            k, b = self.const(node.left.value), self.visit(node.right)
            return self.tmp(f"J.scale({k}, {b})" if node.op == "*" else f"J.shift({b}, {k})")
        if self.jet and isinstance(node.right, Num) and node.op in "+-*/":
            a = self.visit(node.left)
            v = node.right.value
            if node.op == "+":
                return self.tmp(f"J.shift({a}, {self.const(v)})")
            if node.op == "-":
                return self.tmp(f"J.shift({a}, {self.const(-v)})")
            if node.op == "*":
                return self.tmp(f"J.scale({self.const(v)}, {a})")
            if v == 0.0:
                raise SingularityError("division by zero")
            return self.tmp(f"J.scale({self.const(1.0 / v)}, {a})")
        a, b = self.visit(node.left), self.visit(node.right)
        if self.jet:
            fn = {"+": "J.add", "-": "J.sub", "*": "J.mul", "/": "J.div"}[node.op]
            return self.tmp(f"{fn}({a}, {b})")
        if node.op == "/":
            return self.tmp(f"_div({a}, {b})")
        return self.tmp(f"{a} {node.op} {b}")


def _compile(node: Node, variables, alg: JetAlgebra | None):
    gen = _Codegen(variables, alg)
    result = gen.visit(node)
    env = gen.env
    if alg is not None:
        env["J"] = alg
    else:
        env.update(_exp=_safe_exp, _ln=_safe_ln, _sin=math.sin, _cos=math.cos,
                   _sqrt=_safe_sqrt, _pow=_safe_pow, _div=_safe_div)
    args = ", ".join(f"v{i}" for i in range(len(variables)))
    body = "\n".join("    " + line for line in gen.lines) or "    pass"
    src = f"def _f({args}):\n{body}\n    return {result}\n"
    exec(src, env)
    return env["_f"]


@dataclass(frozen=True)
class Expression:
    """An AST over a declared, ordered variable list."""

    root: Node
    variables: tuple[str, ...]
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        unknown = variables_in(self.root) - set(self.variables)
        if unknown:
            raise ValueError(f"undeclared variables {sorted(unknown)}")

    def __str__(self):
        return to_text(self.root)

    def _compiled(self, key):
        fn = self._cache.get(key)
        if fn is None:
            fn = _compile(self.root, self.variables, None if key is None else algebra(*key))
            self._cache[key] = fn
        return fn

    def evaluate(self, *values: float) -> float:
        if len(values) != len(self.variables):
            raise ValueError(f"expected {len(self.variables)} values")
        try:
            out = self._compiled(None)(*values)
        except ZeroDivisionError:
            raise SingularityError("division by zero") from None
        except OverflowError:
            raise SingularityError("overflow") from None
        if not math.isfinite(out):
            raise SingularityError(f"non-finite value {out!r}")
        return float(out)

    def jet_coeffs(self, alg: JetAlgebra, inputs: Sequence[tuple]) -> tuple:
        """Evaluate on raw coefficient tuples of ``alg`` (one per variable)."""
        out = self._compiled((alg.nvars, alg.order))(*inputs)
        if not all(math.isfinite(c) for c in out):
            raise SingularityError("non-finite jet coefficient")
        return out

    def jet(self, point: Sequence[float], order: int) -> Jet:
        alg = algebra(len(self.variables), order)
        return Jet(alg, self.jet_coeffs(alg, alg.seed(point)))


def parse_expression(text: str, variables: Sequence[str]) -> Expression:
    variables = tuple(variables)
    if len(set(variables)) != len(variables):
        raise ValueError("variable names must be distinct")
    clash = set(variables) & set(FUNCTIONS)
    if clash:
        raise ValueError(f"variable names clash with functions: {sorted(clash)}")
    if not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    return Expression(_Parser(text, variables).parse(), variables)
