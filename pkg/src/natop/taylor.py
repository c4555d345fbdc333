"""Truncated Taylor fields at the origin: the second evaluation route.

Fields are genuine polynomial germs (rational coefficients, truncated at a
total degree), so covariant derivatives, brackets and curvature can be
computed by plain composition of scalar polynomial arithmetic without any
jet-variable machinery.  Used for randomized identity testing and as an
independent oracle for the symbolic evaluator: with fields built from the
same valuation, the value at the origin must agree exactly.

The curvature here deliberately follows the defining composite
``nabla_{[A,B]}C - nabla_A nabla_B C + nabla_B nabla_A C`` rather than a
coefficient formula.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from .jets import random_valuation
from . import terms as T

__all__ = ["TaylorScalar", "TaylorFields", "eval_taylor", "random_fields", "value_at_origin"]


class TaylorScalar:
    """Polynomial in the coordinates, truncated at total degree ``cap``."""

    __slots__ = ("m", "cap", "coeffs")

    def __init__(self, m, cap, coeffs=None):
        self.m = m
        self.cap = cap
        self.coeffs = coeffs if coeffs is not None else {}

    @staticmethod
    def const(m, cap, c):
        c = Fraction(c)
        return TaylorScalar(m, cap, {(0,) * m: c} if c else {})

    def at_origin(self):
        return self.coeffs.get((0,) * self.m, Fraction(0))

    def __add__(self, other):
        cap = min(self.cap, other.cap)
        coeffs = {a: c for a, c in self.coeffs.items() if sum(a) <= cap}
        for a, c in other.coeffs.items():
            if sum(a) > cap:
                continue
            nv = coeffs.get(a, Fraction(0)) + c
            if nv:
                coeffs[a] = nv
            else:
                coeffs.pop(a, None)
        return TaylorScalar(self.m, cap, coeffs)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        if not c:
            return TaylorScalar(self.m, self.cap, {})
        return TaylorScalar(self.m, self.cap, {a: c * v for a, v in self.coeffs.items()})

    def __mul__(self, other):
        cap = min(self.cap, other.cap)
        coeffs = {}
        for a, ca in self.coeffs.items():
            da = sum(a)
            for b, cb in other.coeffs.items():
                if da + sum(b) > cap:
                    continue
                key = tuple(x + y for x, y in zip(a, b))
                nv = coeffs.get(key, Fraction(0)) + ca * cb
                if nv:
                    coeffs[key] = nv
                else:
                    coeffs.pop(key, None)
        return TaylorScalar(self.m, cap, coeffs)

    def diff(self, mu):
        coeffs = {}
        for a, c in self.coeffs.items():
            if a[mu] == 0:
                continue
            key = a[:mu] + (a[mu] - 1,) + a[mu + 1:]
            coeffs[key] = c * a[mu]
        return TaylorScalar(self.m, self.cap - 1, coeffs)


class TaylorFields:
    """Concrete polynomial germs for the connection and the arguments."""

    def __init__(self, m, cap, gamma, vfs, tensors=None):
        self.m = m
        self.cap = cap
        self.gamma = gamma        # (omega, mu, nu) -> TaylorScalar
        self.vfs = vfs            # slot -> [TaylorScalar per component]
        self.tensors = tensors or {}  # (name, omega, lowers) -> TaylorScalar

    def gamma_at(self, omega, mu, nu, sym):
        g = self.gamma[(omega, mu, nu)]
        if not sym:
            return g
        return (g + self.gamma[(omega, nu, mu)]).scale(Fraction(1, 2))


def _multi_indices(m, order):
    for total in range(order + 1):
        for alpha in itertools.product(range(total + 1), repeat=m):
            if sum(alpha) == total:
                yield alpha


def _alpha_to_derivs(alpha):
    out = []
    for i, k in enumerate(alpha):
        out.extend([i] * k)
    return tuple(out)


def _factorial_alpha(alpha):
    out = 1
    for k in alpha:
        out *= math.factorial(k)
    return out


def random_fields(m, cap, slots, seed, trial=0, tensor_specs=()):
    """Fields whose jet at the origin matches ``random_valuation`` exactly.

    ``tensor_specs`` lists (name, rank) for the auxiliary generic tensors.
    """
    val = random_valuation(seed, trial)
    gamma = {}
    for omega in range(m):
        for mu in range(m):
            for nu in range(m):
                coeffs = {}
                for alpha in _multi_indices(m, cap):
                    jv = val(("G", omega, mu, nu, _alpha_to_derivs(alpha)))
                    coeffs[alpha] = Fraction(jv, _factorial_alpha(alpha))
                gamma[(omega, mu, nu)] = TaylorScalar(m, cap, coeffs)
    vfs = {}
    for slot in slots:
        comp = []
        for omega in range(m):
            coeffs = {}
            for alpha in _multi_indices(m, cap):
                jv = val(("X", slot, omega, _alpha_to_derivs(alpha)))
                coeffs[alpha] = Fraction(jv, _factorial_alpha(alpha))
            comp.append(TaylorScalar(m, cap, coeffs))
        vfs[slot] = comp
    tensors = {}
    for name, rank in tensor_specs:
        for omega in range(m):
            for lowers in itertools.product(range(m), repeat=rank):
                coeffs = {}
                for alpha in _multi_indices(m, cap):
                    jv = val(("T", name, omega, lowers, _alpha_to_derivs(alpha)))
                    coeffs[alpha] = Fraction(jv, _factorial_alpha(alpha))
                tensors[(name, omega, lowers)] = TaylorScalar(m, cap, coeffs)
    return TaylorFields(m, cap, gamma, vfs, tensors)


def _nabla(fields, D, B, sym):
    m = fields.m
    out = []
    for omega in range(m):
        acc = TaylorScalar.const(m, fields.cap, 0)
        for mu in range(m):
            piece = B[omega].diff(mu)
            for nu in range(m):
                piece = piece + fields.gamma_at(omega, mu, nu, sym) * B[nu]
            acc = acc + D[mu] * piece
        out.append(acc)
    return out


def _bracket(fields, A, B):
    m = fields.m
    out = []
    for omega in range(m):
        acc = TaylorScalar.const(m, fields.cap, 0)
        for mu in range(m):
            acc = acc + A[mu] * B[omega].diff(mu) - B[mu] * A[omega].diff(mu)
        out.append(acc)
    return out


def _basis_field(fields, nu):
    m = fields.m
    return [TaylorScalar.const(m, fields.cap, 1 if omega == nu else 0)
            for omega in range(m)]


def eval_taylor(term, fields, env=None):
    """Evaluate a term on concrete fields; vector -> component list."""
    if env is None:
        env = dict(fields.vfs)
    m = fields.m

    def go(t, env):
        if isinstance(t, T.Slot):
            return env[t.index]
        if isinstance(t, T.Bracket):
            return _bracket(fields, go(t.a, env), go(t.b, env))
        if isinstance(t, T.Nabla):
            return _nabla(fields, go(t.direction, env), go(t.body, env), t.sym)
        if isinstance(t, T.Curv):
            A, B, C = go(t.a, env), go(t.b, env), go(t.c, env)
            first = _nabla(fields, _bracket(fields, A, B), C, t.sym)
            second = _nabla(fields, A, _nabla(fields, B, C, t.sym), t.sym)
            third = _nabla(fields, B, _nabla(fields, A, C, t.sym), t.sym)
            return [f - s + th for f, s, th in zip(first, second, third)]
        if isinstance(t, T.Tor):
            A, B = go(t.a, env), go(t.b, env)
            one = _nabla(fields, A, B, t.sym)
            two = _nabla(fields, B, A, t.sym)
            three = _bracket(fields, A, B)
            return [a - b - c for a, b, c in zip(one, two, three)]
        if isinstance(t, T.Generic):
            args = [go(a, env) for a in t.args]
            out = []
            for omega in range(m):
                acc = TaylorScalar.const(m, fields.cap, 0)
                for lowers in itertools.product(range(m), repeat=len(args)):
                    piece = fields.tensors[(t.name, omega, lowers)]
                    for j, nu in enumerate(lowers):
                        piece = piece * args[j][nu]
                    acc = acc + piece
                out.append(acc)
            return out
        if isinstance(t, T.CovD):
            D = go(t.direction, env)
            body = go(t.body, env)
            out = _nabla(fields, D, body, t.sym)
            for j in t.wrt:
                replaced = dict(env)
                replaced[j] = _nabla(fields, D, env[j], t.sym)
                corr = go(t.body, replaced)
                out = [o - c for o, c in zip(out, corr)]
            return out
        if isinstance(t, T.Trace):
            acc = TaylorScalar.const(m, fields.cap, 0)
            for nu in range(m):
                env2 = dict(env)
                env2[0] = _basis_field(fields, nu)
                acc = acc + go(t.body, env2)[nu]
            return [acc]
        if isinstance(t, T.Compose):
            env2 = dict(env)
            env2[t.slot] = go(t.inner, env)
            return go(t.outer, env2)
        if isinstance(t, T.Permute):
            p = t.perm
            env2 = dict(env)
            for j in range(1, p.n + 1):
                if p(j) in env:
                    env2[j] = env[p(j)]
                else:
                    env2.pop(j, None)
            return go(t.body, env2)
        if isinstance(t, T.Combo):
            acc = None
            for c, part in t.parts:
                val = go(part, env)
                val = [x.scale(c) for x in val]
                acc = val if acc is None else [a + v for a, v in zip(acc, val)]
            return acc if acc is not None else [TaylorScalar.const(m, fields.cap, 0)] * m
        if isinstance(t, T.Product):
            s = go(t.scalar, env)[0]
            return [s * v for v in go(t.vector, env)]
        raise TypeError(f"not a term: {t!r}")

    return go(term, env)


def value_at_origin(term, fields):
    return [c.at_origin() for c in eval_taylor(term, fields)]


def check_zero_random(term, m, trials=5, seed=0):
    """Probabilistic zero test at random rational jets; not a certificate."""
    slots = sorted(s for s in T.free_slots(term) if s >= 1)
    cap = T.depth(term) + 1
    specs = _generic_specs(term)
    for trial in range(trials):
        fields = random_fields(m, cap, slots, seed, trial, specs)
        if any(value_at_origin(term, fields)):
            return False
    return True


def _generic_specs(term):
    specs = {}

    def walk(t):
        if isinstance(t, T.Generic):
            specs[t.name] = len(t.args)
            for a in t.args:
                walk(a)
        elif isinstance(t, T.Slot):
            pass
        elif isinstance(t, (T.Bracket, T.Tor)):
            walk(t.a), walk(t.b)
        elif isinstance(t, T.Nabla):
            walk(t.direction), walk(t.body)
        elif isinstance(t, T.CovD):
            walk(t.direction), walk(t.body)
        elif isinstance(t, T.Curv):
            walk(t.a), walk(t.b), walk(t.c)
        elif isinstance(t, T.Trace):
            walk(t.body)
        elif isinstance(t, T.Compose):
            walk(t.outer), walk(t.inner)
        elif isinstance(t, T.Permute):
            walk(t.body)
        elif isinstance(t, T.Combo):
            for _, p in t.parts:
                walk(p)
        elif isinstance(t, T.Product):
            walk(t.scalar), walk(t.vector)
        else:
            raise TypeError(f"not a term: {t!r}")

    walk(term)
    return sorted(specs.items())
