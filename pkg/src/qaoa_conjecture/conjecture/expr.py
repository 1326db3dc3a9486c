"""Small expression trees for conjectured bounds.

Expressions are kept in a canonical form (see :func:`make_sum` and
:func:`scaled`) so that printing is deterministic and
``parse(to_string(e)) == e``.
"""
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

Number = Union[Fraction, float]

MAX_DEPTH = 3


@dataclass(frozen=True)
class Const:
    value: Number


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Pow:
    arg: "Expr"
    exponent: int


@dataclass(frozen=True)
class Sqrt:
    arg: "Expr"


@dataclass(frozen=True)
class Floor:
    arg: "Expr"


@dataclass(frozen=True)
class Scale:
    coef: Number
    arg: "Expr"


@dataclass(frozen=True)
class Sum:
    terms: tuple


Expr = Union[Const, Var, Pow, Sqrt, Floor, Scale, Sum]


# ---------------------------------------------------------------- construction


def _is_zero(c):
    return c == 0


def scaled(coef, arg):
    """``coef * arg`` in canonical form."""
    if isinstance(arg, Const):
        return Const(coef * arg.value)
    if isinstance(arg, Scale):
        coef, arg = coef * arg.coef, arg.arg
    if isinstance(arg, Sum):
        return make_sum(tuple(scaled(coef, t) for t in arg.terms))
    if _is_zero(coef):
        return Const(Fraction(0))
    if coef == 1:
        return arg
    return Scale(coef, arg)


_RANK = {Pow: 0, Var: 1, Sqrt: 2, Floor: 3, Sum: 4}


def _term_key(t):
    if isinstance(t, Const):
        return (9, "")
    atom = t.arg if isinstance(t, Scale) else t
    return (_RANK.get(type(atom), 5), to_string(atom))


def make_sum(terms):
    """Flatten, merge constants, drop zero terms, order canonically."""
    flat = []
    for t in terms:
        if isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    const = None
    rest = []
    for t in flat:
        if isinstance(t, Const):
            const = t.value if const is None else const + t.value
        elif isinstance(t, Scale) and _is_zero(t.coef):
            continue
        else:
            rest.append(t)
    rest.sort(key=_term_key)
    if const is not None and not _is_zero(const):
        rest.append(Const(const))
    if not rest:
        return Const(Fraction(0))
    if len(rest) == 1:
        return rest[0]
    return Sum(tuple(rest))


# ---------------------------------------------------------------- printing


def format_number(c):
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    if isinstance(c, int):
        return str(c)
    if not math.isfinite(c):
        raise ValueError("expressions cannot hold non-finite constants")
    return repr(float(c))


def _negative(c):
    return c < 0


def _term_string(t):
    """(is_negative, text without the leading sign)."""
    if isinstance(t, Const):
        return _negative(t.value), format_number(abs(t.value))
    if isinstance(t, Scale):
        neg = _negative(t.coef)
        mag = abs(t.coef)
        body = to_string(t.arg)
        if mag == 1:
            return neg, body
        return neg, f"{format_number(mag)}*{body}"
    return False, to_string(t)


def to_string(e):
    if isinstance(e, Const):
        return format_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Pow):
        return f"{to_string(e.arg)}^{e.exponent}"
    if isinstance(e, Sqrt):
        return f"sqrt({to_string(e.arg)})"
    if isinstance(e, Floor):
        return f"floor({to_string(e.arg)})"
    if isinstance(e, Scale):
        neg, body = _term_string(e)
        return ("-" if neg else "") + body
    if isinstance(e, Sum):
        out = []
        for i, t in enumerate(e.terms):
            neg, body = _term_string(t)
            if i == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.\d*(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+|\d+)"
                    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


def _tokenize(text):
    pos = 0
    tokens = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"unexpected character at {pos} in {text!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ValueError(f"expected {value!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def sum(self):
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        terms = [self.term(sign)]
        while self.peek() in (("op", "+"), ("op", "-")):
            sign = 1 if self.take()[1] == "+" else -1
            terms.append(self.term(sign))
        return make_sum(terms) if len(terms) > 1 else terms[0]

    def number(self):
        text = self.take()[1]
        if any(ch in text for ch in ".eE"):
            return float(text)
        value = Fraction(int(text))
        if self.peek() == ("op", "/"):
            self.take()
            kind, den = self.take()
            if kind != "num" or not den.isdigit():
                raise ValueError("expected an integer denominator")
            value = Fraction(int(text), int(den))
        return value

    def term(self, sign):
        if self.peek()[0] == "num":
            coef = self.number()
            if self.peek() == ("op", "*"):
                self.take()
                return scaled(-coef if sign < 0 else coef, self.atom())
            return Const(-coef if sign < 0 else coef)
        atom = self.atom()
        return scaled(Fraction(-1), atom) if sign < 0 else atom

    def atom(self):
        kind, text = self.take()
        if kind != "name":
            raise ValueError(f"expected a name, got {text!r}")
        if text in ("sqrt", "floor") and self.peek() == ("op", "("):
            self.take("(")
            inner = self.sum()
            self.take(")")
            return Sqrt(inner) if text == "sqrt" else Floor(inner)
        node = Var(text)
        if self.peek() == ("op", "^"):
            self.take()
            kind, k = self.take()
            if kind != "num" or not k.isdigit():
                raise ValueError("expected an integer exponent")
            node = Pow(node, int(k))
        return node


def parse(text):
    p = _Parser(text)
    e = p.sum()
    if p.i != len(p.tokens):
        raise ValueError(f"trailing input in {text!r}")
    return e


# ---------------------------------------------------------------- evaluation


def features(e):
    """Sorted names of the columns an expression reads."""
    out = set()

    def walk(x):
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, (Pow, Sqrt, Floor, Scale)):
            walk(x.arg)
        elif isinstance(x, Sum):
            for t in x.terms:
                walk(t)

    walk(e)
    return sorted(out)


def depth(e):
    if isinstance(e, (Const, Var)):
        return 0
    if isinstance(e, Sum):
        return 1 + max(depth(t) for t in e.terms)
    return 1 + depth(e.arg)


def evaluate(e, columns):
    """Evaluate over a mapping of column name -> array (or scalar)."""
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        return np.asarray(columns[e.name], dtype=float)
    if isinstance(e, Pow):
        return evaluate(e.arg, columns) ** e.exponent
    if isinstance(e, Sqrt):
        return np.sqrt(evaluate(e.arg, columns))
    if isinstance(e, Floor):
        return np.floor(evaluate(e.arg, columns))
    if isinstance(e, Scale):
        return float(e.coef) * evaluate(e.arg, columns)
    if isinstance(e, Sum):
        total = evaluate(e.terms[0], columns)
        for t in e.terms[1:]:
            total = total + evaluate(t, columns)
        return total
    raise TypeError(f"not an expression: {e!r}")
