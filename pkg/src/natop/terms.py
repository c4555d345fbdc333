"""Tensor-operator expression trees and their exact jet evaluation.

A term denotes an operator built from a linear connection and numbered
vector-field arguments (slots ``1, 2, ...``; slot ``0`` is reserved for the
traced position inside a ``Trace``).  Evaluation produces one exact jet
polynomial per output component; identity checking is evaluation to zero,
never rewriting.

Sign and index conventions.  The covariant derivative of a vector value is

    (nabla_A B)^w = A^mu (d_mu B^w + G^w_{mu nu} B^nu),

the torsion is ``(G^w_{mu nu} - G^w_{nu mu}) A^mu B^nu`` and the curvature
carries the sign making ``R(A,B)C = nabla_{[A,B]}C - [nabla_A, nabla_B]C``.
Nodes carrying ``sym=True`` use the symmetrized Christoffel symbols (the
induced torsion-free connection) instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .jets import (
    JetContext,
    JetPoly,
    poly_orders,
    substitute_slot,
    symmetrize_gamma,
)
from .perm_algebra import Permutation

__all__ = [
    "Slot", "Bracket", "Nabla", "CovD", "Curv", "Tor", "Generic",
    "Trace", "Compose", "Permute", "Combo", "Product",
    "OrderZeroViolation", "Verdict",
    "eval_term", "eval_components", "check_zero", "orders",
    "free_slots", "is_scalar", "depth", "context_for",
    "trace", "compose", "permute", "combo", "relabel_slots",
    "leading_symbol", "format_monomial",
]


@dataclass(frozen=True)
class Slot:
    index: int


@dataclass(frozen=True)
class Bracket:
    a: object
    b: object


@dataclass(frozen=True)
class Nabla:
    """Covariant derivative of a vector value along a vector value."""
    direction: object
    body: object
    sym: bool = False


@dataclass(frozen=True)
class CovD:
    """Covariant derivative of the body viewed as a tensor in ``wrt`` slots."""
    direction: object
    body: object
    wrt: tuple
    sym: bool = False


@dataclass(frozen=True)
class Curv:
    a: object
    b: object
    c: object
    sym: bool = False


@dataclass(frozen=True)
class Tor:
    a: object
    b: object
    sym: bool = False


@dataclass(frozen=True)
class Generic:
    """A (1, r)-tensor with its own jet variables, applied to r arguments."""
    name: str
    args: tuple


@dataclass(frozen=True)
class Trace:
    """Trace over the reserved hole slot 0 of the body."""
    body: object
    index_hint: int = 1


@dataclass(frozen=True)
class Compose:
    outer: object
    slot: int
    inner: object


@dataclass(frozen=True)
class Permute:
    body: object
    perm: Permutation


@dataclass(frozen=True)
class Combo:
    parts: tuple  # of (Fraction, term)


@dataclass(frozen=True)
class Product:
    scalar: object
    vector: object


class OrderZeroViolation(Exception):
    def __init__(self, slot, reason="operator is not linear of order 0 in the slot"):
        self.slot = slot
        super().__init__(f"slot {slot}: {reason}")


# ---------------------------------------------------------------------------
# structural helpers
# ---------------------------------------------------------------------------

def combo(parts):
    cleaned = tuple((Fraction(c), t) for c, t in parts if Fraction(c))
    return Combo(cleaned)


def permute(term, p):
    return Permute(term, p)


def trace(term, slot, index_hint=None):
    """Trace the operator over one of its argument slots."""
    if slot != 0:
        term = relabel_slots(term, {slot: 0})
    return Trace(term, index_hint if index_hint is not None else 1)


def compose(outer, slot, inner):
    return Compose(outer, slot, inner)


def free_slots(term):
    if isinstance(term, Slot):
        return frozenset([term.index])
    if isinstance(term, Bracket):
        return free_slots(term.a) | free_slots(term.b)
    if isinstance(term, Nabla):
        return free_slots(term.direction) | free_slots(term.body)
    if isinstance(term, CovD):
        return free_slots(term.direction) | free_slots(term.body)
    if isinstance(term, Curv):
        return free_slots(term.a) | free_slots(term.b) | free_slots(term.c)
    if isinstance(term, Tor):
        return free_slots(term.a) | free_slots(term.b)
    if isinstance(term, Generic):
        out = frozenset()
        for a in term.args:
            out |= free_slots(a)
        return out
    if isinstance(term, Trace):
        return free_slots(term.body) - frozenset([0])
    if isinstance(term, Compose):
        return (free_slots(term.outer) - frozenset([term.slot])) | free_slots(term.inner)
    if isinstance(term, Permute):
        p = term.perm
        out = set()
        for s in free_slots(term.body):
            out.add(p(s) if 1 <= s <= p.n else s)
        return frozenset(out)
    if isinstance(term, Combo):
        out = frozenset()
        for _, t in term.parts:
            out |= free_slots(t)
        return out
    if isinstance(term, Product):
        return free_slots(term.scalar) | free_slots(term.vector)
    raise TypeError(f"not a term: {term!r}")


def is_scalar(term):
    if isinstance(term, Trace):
        return True
    if isinstance(term, Product):
        return is_scalar(term.vector)
    if isinstance(term, Combo):
        return bool(term.parts) and all(is_scalar(t) for _, t in term.parts)
    if isinstance(term, (Permute, Compose)):
        inner = term.body if isinstance(term, Permute) else term.outer
        return is_scalar(inner)
    return False


def depth(term):
    """Bound on the derivative order any jet variable can reach."""
    if isinstance(term, Slot):
        return 0
    if isinstance(term, Bracket):
        return 1 + max(depth(term.a), depth(term.b))
    if isinstance(term, Nabla):
        return max(depth(term.direction), 1 + depth(term.body))
    if isinstance(term, CovD):
        return 1 + depth(term.body) + depth(term.direction)
    if isinstance(term, Curv):
        return 1 + max(depth(term.a), depth(term.b), depth(term.c))
    if isinstance(term, Tor):
        return max(depth(term.a), depth(term.b))
    if isinstance(term, Generic):
        return max([depth(a) for a in term.args], default=0)
    if isinstance(term, Trace):
        return depth(term.body)
    if isinstance(term, Compose):
        return depth(term.outer) + depth(term.inner)
    if isinstance(term, Permute):
        return depth(term.body)
    if isinstance(term, Combo):
        return max([depth(t) for _, t in term.parts], default=0)
    if isinstance(term, Product):
        return max(depth(term.scalar), depth(term.vector))
    raise TypeError(f"not a term: {term!r}")


def context_for(term, m):
    """Context with the automatic truncation: term depth plus one."""
    return JetContext(m, K=depth(term) + 1)


def relabel_slots(term, mapping):
    """Rewrite slot indices through a partial mapping (tree rewrite)."""
    def go(t):
        if isinstance(t, Slot):
            return Slot(mapping.get(t.index, t.index))
        if isinstance(t, Bracket):
            return Bracket(go(t.a), go(t.b))
        if isinstance(t, Nabla):
            return Nabla(go(t.direction), go(t.body), t.sym)
        if isinstance(t, CovD):
            return CovD(go(t.direction), go(t.body),
                        tuple(mapping.get(s, s) for s in t.wrt), t.sym)
        if isinstance(t, Curv):
            return Curv(go(t.a), go(t.b), go(t.c), t.sym)
        if isinstance(t, Tor):
            return Tor(go(t.a), go(t.b), t.sym)
        if isinstance(t, Generic):
            return Generic(t.name, tuple(go(a) for a in t.args))
        if isinstance(t, Trace):
            if 0 in mapping:
                raise ValueError("cannot relabel the trace hole")
            return Trace(go(t.body), t.index_hint)
        if isinstance(t, Compose):
            return Compose(go(t.outer), mapping.get(t.slot, t.slot), go(t.inner))
        if isinstance(t, Permute):
            # push the permutation into an explicit relabeling first
            return go(_push_permute(t))
        if isinstance(t, Combo):
            return Combo(tuple((c, go(p)) for c, p in t.parts))
        if isinstance(t, Product):
            return Product(go(t.scalar), go(t.vector))
        raise TypeError(f"not a term: {t!r}")
    return go(term)


def _push_permute(t):
    p = t.perm
    mapping = {j: p(j) for j in range(1, p.n + 1)}
    return relabel_slots(t.body, mapping)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def eval_term(term, ctx):
    """Evaluate to (kind, components); kind is 'vector' or 'scalar'."""
    hit = ctx.cache.get(id(term))
    if hit is not None:
        return hit
    out = _eval(term, ctx)
    ctx.cache[id(term)] = out
    ctx._cache_refs.append(term)
    return out


def eval_components(term, ctx):
    """The component polynomials (length m for vectors, 1 for scalars)."""
    return eval_term(term, ctx)[1]


def _vec(comps):
    return ("vector", tuple(comps))


def _scal(poly):
    return ("scalar", (poly,))


def _nabla_comps(ctx, dir_comps, body_comps, sym):
    m = ctx.m
    out = []
    for omega in range(m):
        poly = JetPoly.zero()
        for mu in range(m):
            piece = body_comps[omega].diff(mu, ctx.K)
            for nu in range(m):
                piece = piece + ctx.gamma(omega, mu, nu, (), sym) * body_comps[nu]
            poly = poly + dir_comps[mu] * piece
        out.append(poly)
    return out


def _slot_comps(ctx, slot):
    return [ctx.vf(slot, omega) for omega in range(ctx.m)]


def _eval(term, ctx):
    m = ctx.m

    if isinstance(term, Slot):
        return _vec(_slot_comps(ctx, term.index))

    if isinstance(term, Bracket):
        _, A = eval_term(term.a, ctx)
        _, B = eval_term(term.b, ctx)
        out = []
        for omega in range(m):
            poly = JetPoly.zero()
            for mu in range(m):
                poly = poly + A[mu] * B[omega].diff(mu, ctx.K)
                poly = poly - B[mu] * A[omega].diff(mu, ctx.K)
            out.append(poly)
        return _vec(out)

    if isinstance(term, Nabla):
        _, D = eval_term(term.direction, ctx)
        _, B = eval_term(term.body, ctx)
        return _vec(_nabla_comps(ctx, D, B, term.sym))

    if isinstance(term, Curv):
        _, A = eval_term(term.a, ctx)
        _, B = eval_term(term.b, ctx)
        _, C = eval_term(term.c, ctx)
        out = []
        for omega in range(m):
            poly = JetPoly.zero()
            for lam in range(m):
                for mu in range(m):
                    AB = A[lam] * B[mu]
                    if AB.is_zero():
                        continue
                    for nu in range(m):
                        poly = poly + ctx.curvature_coeff(omega, lam, mu, nu, term.sym) * AB * C[nu]
            out.append(poly)
        return _vec(out)

    if isinstance(term, Tor):
        _, A = eval_term(term.a, ctx)
        _, B = eval_term(term.b, ctx)
        out = []
        for omega in range(m):
            poly = JetPoly.zero()
            for mu in range(m):
                for nu in range(m):
                    coeff = ctx.gamma(omega, mu, nu, (), term.sym) - ctx.gamma(omega, nu, mu, (), term.sym)
                    poly = poly + coeff * A[mu] * B[nu]
            out.append(poly)
        return _vec(out)

    if isinstance(term, Generic):
        r = len(term.args)
        arg_comps = [eval_term(a, ctx)[1] for a in term.args]
        out = []
        for omega in range(m):
            poly = JetPoly.zero()
            for lowers in _index_tuples(m, r):
                coeff = JetPoly.var(("T", term.name, omega, lowers, ()))
                piece = coeff
                for j, nu in enumerate(lowers):
                    piece = piece * arg_comps[j][nu]
                poly = poly + piece
            out.append(poly)
        return _vec(out)

    if isinstance(term, CovD):
        _, D = eval_term(term.direction, ctx)
        _, P = eval_term(term.body, ctx)
        out = _nabla_comps(ctx, D, P, term.sym)
        for j in term.wrt:
            nd = _nabla_comps(ctx, D, _slot_comps(ctx, j), term.sym)
            for omega in range(m):
                out[omega] = out[omega] - substitute_slot(P[omega], j, nd, ctx.K)
        return _vec(out)

    if isinstance(term, Trace):
        kind, P = eval_term(term.body, ctx)
        if kind != "vector":
            raise OrderZeroViolation(0, "trace of a scalar value")
        total = JetPoly.zero()
        for omega in range(m):
            for mono, c in P[omega].terms.items():
                holes = [v for v in mono if v[0] == "X" and v[1] == 0]
                if len(holes) != 1:
                    raise OrderZeroViolation(0)
                hole = holes[0]
                if hole[3]:
                    raise OrderZeroViolation(0, "derivatives of the traced argument occur")
                if hole[2] != omega:
                    continue
                rest = list(mono)
                rest.remove(hole)
                total = total + JetPoly({tuple(sorted(rest)): c})
        return _scal(total)

    if isinstance(term, Compose):
        kind, P = eval_term(term.outer, ctx)
        for poly in P:
            for mono in poly.terms:
                hits = [v for v in mono if v[0] == "X" and v[1] == term.slot]
                if len(hits) != 1:
                    raise OrderZeroViolation(term.slot)
                if hits[0][3]:
                    raise OrderZeroViolation(
                        term.slot, "derivatives of the substituted argument occur")
        _, inner = eval_term(term.inner, ctx)
        return (kind, tuple(substitute_slot(poly, term.slot, inner, ctx.K) for poly in P))

    if isinstance(term, Permute):
        kind, P = eval_term(term.body, ctx)
        p = term.perm

        def rename(v):
            if v[0] == "X" and 1 <= v[1] <= p.n:
                return ("X", p(v[1]), v[2], v[3])
            return v

        return (kind, tuple(poly.map_vars(rename) for poly in P))

    if isinstance(term, Combo):
        kind = None
        acc = None
        for c, t in term.parts:
            k, P = eval_term(t, ctx)
            if kind is None:
                kind = k
                acc = [JetPoly.zero() for _ in P]
            elif k != kind:
                raise TypeError("mixed scalar/vector linear combination")
            for i, poly in enumerate(P):
                acc[i] = acc[i] + poly.scale(c)
        if kind is None:
            return _vec([JetPoly.zero() for _ in range(m)])
        return (kind, tuple(acc))

    if isinstance(term, Product):
        skind, S = eval_term(term.scalar, ctx)
        if skind != "scalar":
            raise TypeError("left factor of a product must be scalar-valued")
        vkind, V = eval_term(term.vector, ctx)
        return (vkind, tuple(S[0] * poly for poly in V))

    raise TypeError(f"not a term: {term!r}")


def _index_tuples(m, r):
    if r == 0:
        return [()]
    out = [()]
    for _ in range(r):
        out = [t + (i,) for t in out for i in range(m)]
    return out


# ---------------------------------------------------------------------------
# verdicts, orders, symbols
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    zero: bool
    witness: str | None = None
    component: int | None = None

    def __bool__(self):
        return self.zero


def format_monomial(mono):
    def fmt(v):
        if v[0] == "G":
            _, omega, mu, nu, derivs = v
            d = ",".join(map(str, derivs))
            return f"G^{omega}_({mu},{nu};{d})"
        if v[0] == "X":
            _, slot, omega, derivs = v
            d = ",".join(map(str, derivs))
            return f"X{slot}^{omega}" + (f"_(;{d})" if derivs else "")
        _, name, omega, lowers, derivs = v
        low = ",".join(map(str, lowers))
        d = ",".join(map(str, derivs))
        return f"{name}^{omega}_({low};{d})"
    return " * ".join(fmt(v) for v in mono)


def check_zero(term, ctx=None, m=None, symmetrize=False):
    """Exact zero test by full expansion; returns a Verdict with witness."""
    if ctx is None:
        ctx = context_for(term, m)
    _, comps = eval_term(term, ctx)
    for i, poly in enumerate(comps):
        if symmetrize:
            poly = symmetrize_gamma(poly)
        if not poly.is_zero():
            mono = min(poly.terms, key=lambda mo: (len(mo), mo))
            return Verdict(False, format_monomial(mono), i)
    return Verdict(True)


def orders(term, ctx):
    """(vf-order, c-order): highest jet orders reached in the evaluation."""
    _, comps = eval_term(term, ctx)
    return poly_orders(comps)


def leading_symbol(term, n, ctx=None):
    """Extract the top Christoffel-jet slice as a symbol-module element.

    Reads off the coefficients at pairwise-distinct coordinate indices, so
    the context dimension must be at least ``n``.
    """
    from .perm_algebra import ENaughtElement, transversal

    if ctx is None:
        ctx = context_for(term, max(n, 2))
    if ctx.m < n:
        raise ValueError("need manifold dimension >= degree to separate indices")
    _, comps = eval_term(term, ctx)
    gvar = ("G", 0, n - 2, n - 1, tuple(range(n - 2)))
    coeffs = {}
    for images in transversal(n):
        mono = [gvar]
        for pos, slot in enumerate(images):
            mono.append(("X", slot, pos, ()))
        c = comps[0].terms.get(tuple(sorted(mono)))
        if c:
            coeffs[images] = c
    return ENaughtElement(n, coeffs)
