"""Exact polynomials in formal jet variables.

A jet variable is the value at the origin of a partial derivative of a field
component: of a Christoffel symbol, of one of the numbered vector-field
arguments, or of a named auxiliary tensor.  Coordinates are 0-based.
Variables are tuples

    ('G', omega, mu, nu, derivs)        d^k Gamma^omega_{mu nu}
    ('X', slot, omega, derivs)          d^k (X_slot)^omega
    ('T', name, omega, lowers, derivs)  d^k Phi^omega_{lowers}

with ``derivs`` a sorted tuple of coordinate indices (partial derivatives
commute; no symmetry is imposed on mu, nu or on the lower indices).
Polynomials are dictionaries monomial -> Fraction, a monomial being a sorted
tuple of variables.  Everything is immutable after construction.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = [
    "JetPoly",
    "JetContext",
    "TruncationError",
    "gamma_var",
    "vf_var",
    "tensor_var",
    "substitute_slot",
    "symmetrize_gamma",
    "poly_orders",
    "random_valuation",
    "evaluate",
]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class TruncationError(Exception):
    """A derivative exceeded the truncation order of the context."""

    def __init__(self, required):
        self.required = required
        super().__init__(f"truncation order too small; need at least {required}")


def gamma_var(omega, mu, nu, derivs=()):
    return ("G", omega, mu, nu, tuple(sorted(derivs)))


def vf_var(slot, omega, derivs=()):
    return ("X", slot, omega, tuple(sorted(derivs)))


def tensor_var(name, omega, lowers, derivs=()):
    return ("T", name, omega, tuple(lowers), tuple(sorted(derivs)))


def _var_diff(var, mu):
    derivs = tuple(sorted(var[-1] + (mu,)))
    return var[:-1] + (derivs,)


def _var_order(var):
    return len(var[-1])


class JetPoly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms if terms is not None else {}

    @staticmethod
    def zero():
        return JetPoly({})

    @staticmethod
    def const(c):
        c = Fraction(c)
        return JetPoly({(): c} if c else {})

    @staticmethod
    def var(v):
        return JetPoly({(v,): _ONE})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if not other.terms:
            return self
        if not self.terms:
            return other
        terms = dict(self.terms)
        for m, c in other.terms.items():
            nv = terms.get(m, _ZERO) + c
            if nv:
                terms[m] = nv
            else:
                del terms[m]
        return JetPoly(terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        if not c:
            return JetPoly({})
        return JetPoly({m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if not self.terms or not other.terms:
            return JetPoly({})
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(sorted(m1 + m2))
                nv = terms.get(m, _ZERO) + c1 * c2
                if nv:
                    terms[m] = nv
                else:
                    del terms[m]
        return JetPoly(terms)

    def diff(self, mu, kmax=None):
        """Formal partial derivative in coordinate direction ``mu``."""
        terms = {}
        for mono, c in self.terms.items():
            for i, var in enumerate(mono):
                new = _var_diff(var, mu)
                if kmax is not None and _var_order(new) > kmax:
                    raise TruncationError(_var_order(new))
                m = tuple(sorted(mono[:i] + (new,) + mono[i + 1:]))
                nv = terms.get(m, _ZERO) + c
                if nv:
                    terms[m] = nv
                else:
                    del terms[m]
        return JetPoly(terms)

    def variables(self):
        for mono in self.terms:
            yield from mono

    def map_vars(self, fn):
        """Rename variables (fn: var -> var); must stay injective per monomial."""
        terms = {}
        for mono, c in self.terms.items():
            m = tuple(sorted(fn(v) for v in mono))
            nv = terms.get(m, _ZERO) + c
            if nv:
                terms[m] = nv
            else:
                del terms[m]
        return JetPoly(terms)

    def __eq__(self, other):
        return isinstance(other, JetPoly) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "JetPoly(0)"
        bits = [f"{c}*{m}" for m, c in sorted(self.terms.items())]
        return "JetPoly(" + " + ".join(bits[:6]) + (" ..." if len(bits) > 6 else "") + ")"


def substitute_slot(poly, slot, comps, kmax=None):
    """Replace the variables of one argument slot by a vector value.

    ``comps`` lists the value's component polynomials; a replaced variable
    carrying derivative indices becomes the formal derivative of the
    component.
    """
    out = JetPoly({})
    for mono, c in poly.terms.items():
        hits = [v for v in mono if v[0] == "X" and v[1] == slot]
        if not hits:
            out = out + JetPoly({mono: c})
            continue
        rest = list(mono)
        for v in hits:
            rest.remove(v)
        acc = JetPoly({tuple(sorted(rest)): c})
        for v in hits:
            comp = comps[v[2]]
            for mu in v[3]:
                comp = comp.diff(mu, kmax)
            acc = acc * comp
        out = out + acc
    return out


def symmetrize_gamma(poly):
    """Substitute the symmetric part for every Christoffel variable.

    Forces the torsion jets to zero; used for degeneration checks.
    """
    half = Fraction(1, 2)
    out = JetPoly({})
    for mono, c in poly.terms.items():
        acc = JetPoly({(): c})
        for v in mono:
            if v[0] == "G":
                _, omega, mu, nu, derivs = v
                sym = JetPoly({
                    (gamma_var(omega, mu, nu, derivs),): half,
                }) + JetPoly({
                    (gamma_var(omega, nu, mu, derivs),): half,
                })
                acc = acc * sym
            else:
                acc = acc * JetPoly.var(v)
        out = out + acc
    return out


def poly_orders(polys):
    """(max vector-field jet order, max Christoffel jet order) over polys."""
    vf = 0
    c = 0
    for poly in polys:
        for v in poly.variables():
            if v[0] == "X":
                vf = max(vf, _var_order(v))
            elif v[0] == "G":
                c = max(c, _var_order(v))
    return vf, c


class JetContext:
    """Evaluation context: manifold dimension and truncation order.

    ``K`` bounds the derivative order of any jet variable; None means
    unbounded.  The context also carries the per-run evaluation cache.
    """

    def __init__(self, m, K=None):
        if m < 1:
            raise ValueError("manifold dimension must be >= 1")
        self.m = m
        self.K = K
        self.cache = {}
        self._cache_refs = []
        self._curv = {}

    def gamma(self, omega, mu, nu, derivs=(), sym=False):
        if self.K is not None and len(derivs) > self.K:
            raise TruncationError(len(derivs))
        if not sym:
            return JetPoly.var(gamma_var(omega, mu, nu, derivs))
        half = Fraction(1, 2)
        return JetPoly({
            (gamma_var(omega, mu, nu, derivs),): half,
        }) + JetPoly({
            (gamma_var(omega, nu, mu, derivs),): half,
        })

    def vf(self, slot, omega, derivs=()):
        if self.K is not None and len(derivs) > self.K:
            raise TruncationError(len(derivs))
        return JetPoly.var(vf_var(slot, omega, derivs))

    def curvature_coeff(self, omega, lam, mu, nu, sym=False):
        """Coefficient polynomial of the curvature in the slot basis.

        d_mu G^w_{l n} - d_l G^w_{m n} + G^w_{m k} G^k_{l n} - G^w_{l k} G^k_{m n}
        """
        key = (omega, lam, mu, nu, sym)
        hit = self._curv.get(key)
        if hit is not None:
            return hit
        poly = self.gamma(omega, lam, nu, (mu,), sym) - self.gamma(omega, mu, nu, (lam,), sym)
        for kappa in range(self.m):
            poly = poly + self.gamma(omega, mu, kappa, (), sym) * self.gamma(kappa, lam, nu, (), sym)
            poly = poly - self.gamma(omega, lam, kappa, (), sym) * self.gamma(kappa, mu, nu, (), sym)
        self._curv[key] = poly
        return poly


def random_valuation(seed, trial=0, low=-9, high=9):
    """Deterministic pseudo-random rational value for each jet variable."""
    import random

    def value(var):
        rng = random.Random(f"{seed}/{trial}/{var!r}")
        v = 0
        while v == 0:
            v = rng.randint(low, high)
        return Fraction(v)

    return value


def evaluate(poly, valuation):
    total = Fraction(0)
    for mono, c in poly.terms.items():
        prod = c
        for v in mono:
            prod *= valuation(v)
        total += prod
    return total
