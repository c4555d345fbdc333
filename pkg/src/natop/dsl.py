"""Textual expression language for tensor operators.

Grammar (underscore is the traced position, exactly one per trace):

    expr    := product (("+" | "-") product)*
    product := [rational "*"] atom ("*" atom)*
    atom    := "T(" expr "," expr ")"
             | "R(" expr "," expr ";" expr ")"
             | "nabla(" expr ";" expr ")"
             | "bracket(" expr "," expr ")"
             | "Tr_" INT "(" expr ")"
             | slot | "_" | "(" expr ")"
    slot    := "X" INT
    rational:= ["-"] INT ["/" INT] | "(" INT "/" INT ")"

``nabla(a; b)`` is the covariant derivative of ``b`` along ``a``; when ``b``
has argument slots it is differentiated as a tensor in all of them.
Products multiply scalar-valued factors (traces) onto at most one
vector-valued factor.  The numeric suffix of ``Tr`` is a positional hint
carried through printing; the traced argument itself is the underscore.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .terms import (
    Bracket,
    Combo,
    Compose,
    CovD,
    Curv,
    Generic,
    Nabla,
    Permute,
    Product,
    Slot,
    Tor,
    Trace,
    combo,
    free_slots,
    is_scalar,
)

__all__ = ["parse", "print_term", "DslError"]


class DslError(ValueError):
    def __init__(self, message, pos, expected=None):
        self.pos = pos
        self.expected = expected or []
        detail = f" (expected one of: {', '.join(self.expected)})" if expected else ""
        super().__init__(f"at position {pos}: {message}{detail}")


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|([+\-*/(),;]))")


def _tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m:
            raise DslError(f"unexpected character {src[pos:].lstrip()[0]!r}",
                           len(src) - len(src[pos:].lstrip()))
        if m.group(1):
            tokens.append(("INT", m.group(1), m.start(1)))
        elif m.group(2):
            tokens.append(("NAME", m.group(2), m.start(2)))
        else:
            tokens.append(("SYM", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("EOF", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0
        self.trace_depth = 0
        self.hole_count = 0

    def peek(self, k=0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise DslError(f"found {tok[1]!r}", tok[2], [str(want)])
        return self.next()

    # -- grammar --------------------------------------------------------------

    @staticmethod
    def _folded(sign, term):
        if isinstance(term, Combo) and len(term.parts) == 1:
            c, t = term.parts[0]
            return (sign * c, t)
        return (sign, term)

    def parse_expr(self):
        lead = Fraction(1)
        if self.peek()[:2] == ("SYM", "-"):
            self.next()
            lead = Fraction(-1)
        parts = [self._folded(lead, self.parse_product())]
        while self.peek()[:2] in (("SYM", "+"), ("SYM", "-")):
            op = self.next()[1]
            sign = Fraction(1) if op == "+" else Fraction(-1)
            parts.append(self._folded(sign, self.parse_product()))
        if len(parts) == 1 and parts[0][0] == 1:
            return parts[0][1]
        return combo(parts)

    def _try_rational(self):
        """A leading coefficient; only consumed when followed by '*'."""
        tok = self.peek()
        if tok[0] == "INT":
            num = int(tok[1])
            if self.peek(1)[:2] == ("SYM", "/") and self.peek(2)[0] == "INT":
                if self.peek(3)[:2] == ("SYM", "*"):
                    self.next(), self.next()
                    den = int(self.next()[1])
                    return Fraction(num, den)
                return None
            if self.peek(1)[:2] == ("SYM", "*"):
                self.next()
                return Fraction(num)
            return None
        if tok[:2] == ("SYM", "(") and self.peek(1)[0] == "INT" \
                and self.peek(2)[:2] == ("SYM", "/") and self.peek(3)[0] == "INT" \
                and self.peek(4)[:2] == ("SYM", ")"):
            self.next(), self.next()
            num = int(self.tokens[self.i - 1][1])
            self.next()
            den = int(self.next()[1])
            self.expect("SYM", ")")
            return Fraction(num, den)
        return None

    def parse_product(self):
        coeff = self._try_rational()
        if coeff is not None:
            self.expect("SYM", "*")
        factors = [self.parse_atom()]
        while self.peek()[:2] == ("SYM", "*"):
            self.next()
            factors.append(self.parse_atom())
        scalars = [f for f in factors if is_scalar(f)]
        vectors = [f for f in factors if not is_scalar(f)]
        if len(vectors) > 1:
            raise DslError("cannot multiply two vector-valued factors",
                           self.peek()[2])
        if vectors:
            term = vectors[0]
            for s in reversed(scalars):
                term = Product(s, term)
        else:
            if not scalars:
                raise DslError("empty product", self.peek()[2])
            term = scalars[0]
            for s in scalars[1:]:
                term = Product(term, s)
        if coeff is not None and coeff != 1:
            term = combo([(coeff, term)])
        return term

    def parse_atom(self):
        tok = self.peek()
        if tok[0] == "NAME":
            name = tok[1]
            if name == "T":
                self.next()
                self.expect("SYM", "(")
                a = self.parse_expr()
                self.expect("SYM", ",")
                b = self.parse_expr()
                self.expect("SYM", ")")
                return Tor(a, b)
            if name == "R":
                self.next()
                self.expect("SYM", "(")
                a = self.parse_expr()
                self.expect("SYM", ",")
                b = self.parse_expr()
                self.expect("SYM", ";")
                c = self.parse_expr()
                self.expect("SYM", ")")
                return Curv(a, b, c)
            if name == "nabla":
                self.next()
                self.expect("SYM", "(")
                direction = self.parse_expr()
                self.expect("SYM", ";")
                body = self.parse_expr()
                self.expect("SYM", ")")
                if isinstance(body, Slot):
                    return Nabla(direction, body)
                wrt = tuple(sorted(free_slots(body)))
                return CovD(direction, body, wrt)
            if name == "bracket":
                self.next()
                self.expect("SYM", "(")
                a = self.parse_expr()
                self.expect("SYM", ",")
                b = self.parse_expr()
                self.expect("SYM", ")")
                return Bracket(a, b)
            m = re.fullmatch(r"Tr_(\d+)", name)
            if m:
                if self.trace_depth:
                    raise DslError("nested traces are not supported", tok[2])
                self.next()
                self.expect("SYM", "(")
                self.trace_depth += 1
                before = self.hole_count
                body = self.parse_expr()
                self.trace_depth -= 1
                self.expect("SYM", ")")
                if self.hole_count - before != 1:
                    raise DslError("a trace needs exactly one '_' inside", tok[2])
                return Trace(body, int(m.group(1)))
            m = re.fullmatch(r"X(\d+)", name)
            if m:
                self.next()
                return Slot(int(m.group(1)))
            if name == "_":
                self.next()
                if not self.trace_depth:
                    raise DslError("'_' is only meaningful inside a trace", tok[2])
                self.hole_count += 1
                return Slot(0)
            raise DslError(f"unknown name {name!r}", tok[2],
                           ["T", "R", "nabla", "bracket", "Tr_<k>", "X<k>", "_"])
        if tok[:2] == ("SYM", "("):
            self.next()
            inner = self.parse_expr()
            self.expect("SYM", ")")
            return inner
        raise DslError(f"found {tok[1]!r}", tok[2], ["atom"])


def parse(src):
    """Parse a source expression into a term; raises DslError with position."""
    p = _Parser(src)
    term = p.parse_expr()
    p.expect("EOF")
    return term


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _coeff_prefix(c):
    c = Fraction(c)
    if c == 1:
        return ""
    if c == -1:
        return "-"
    if c.denominator == 1:
        return f"{c.numerator}*"
    return f"({c.numerator}/{c.denominator})*"


def print_term(term, env=None):
    """Canonical source form; permutations and compositions print inline."""
    if env is None:
        env = {}

    def go(t, env):
        if isinstance(t, Slot):
            if t.index in env:
                return env[t.index]
            return "_" if t.index == 0 else f"X{t.index}"
        if isinstance(t, Tor):
            if t.sym:
                raise ValueError("symmetrized nodes have no source form")
            return f"T({go(t.a, env)}, {go(t.b, env)})"
        if isinstance(t, Curv):
            if t.sym:
                raise ValueError("symmetrized nodes have no source form")
            return f"R({go(t.a, env)}, {go(t.b, env)}; {go(t.c, env)})"
        if isinstance(t, Nabla):
            if t.sym:
                raise ValueError("symmetrized nodes have no source form")
            return f"nabla({go(t.direction, env)}; {go(t.body, env)})"
        if isinstance(t, CovD):
            if t.sym:
                raise ValueError("symmetrized nodes have no source form")
            return f"nabla({go(t.direction, env)}; {go(t.body, env)})"
        if isinstance(t, Bracket):
            return f"bracket({go(t.a, env)}, {go(t.b, env)})"
        if isinstance(t, Trace):
            return f"Tr_{t.index_hint}({go(t.body, env)})"
        if isinstance(t, Compose):
            env2 = dict(env)
            env2[t.slot] = go(t.inner, env)
            return go(t.outer, env2)
        if isinstance(t, Permute):
            p = t.perm
            env2 = dict(env)
            for j in range(1, p.n + 1):
                target = p(j)
                env2[j] = env.get(target, "_" if target == 0 else f"X{target}")
            return go(t.body, env2)
        if isinstance(t, Combo):
            if not t.parts:
                return "0*X1"
            bits = []
            for idx, (c, part) in enumerate(t.parts):
                body = go(part, env)
                if isinstance(part, Combo):
                    body = f"({body})"
                chunk = f"{_coeff_prefix(abs(c))}{body}"
                if idx == 0:
                    bits.append(("-" + chunk) if c < 0 else chunk)
                else:
                    bits.append(("- " if c < 0 else "+ ") + chunk)
            return " ".join(bits)
        if isinstance(t, Product):
            s = go(t.scalar, env)
            v = go(t.vector, env)
            if isinstance(t.vector, Combo):
                v = f"({v})"
            if isinstance(t.scalar, Combo):
                s = f"({s})"
            return f"{s} * {v}"
        if isinstance(t, Generic):
            raise ValueError("auxiliary tensors have no source form")
        raise TypeError(f"not a term: {t!r}")

    return go(term, env)
