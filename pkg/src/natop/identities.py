"""Named identity residuals and the explicit streamlined tensors.

Every verifier here builds a residual term (left side minus right side) and
hands it to the exact zero test.  The streamlined degree-3 and degree-4
tensors are transcribed from their explicit formulas; the packed single
tensors are always produced through the five-term inverse-pair combination,
never transcribed directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .perm_algebra import Permutation, quasi_symmetry_check
from .terms import (
    CovD,
    Curv,
    Generic,
    Permute,
    Slot,
    Tor,
    check_zero,
    combo,
    compose,
    context_for,
    orders,
)

__all__ = [
    "fresh_slots", "cov_torsion", "cov_curvature", "psi_term", "phi_terms",
    "build_classical", "build_ideal",
    "bianchi1_residual", "bianchi2_residual", "ricci_residual",
    "split14_residual", "split15_residual", "curvature_split_pair",
    "aa_naive_residual", "b3_naive_residual",
    "verify_ricci", "verify_split", "verify_ideal_suite",
    "identity_registry", "deviation", "DeviationReport",
    "realized_family_member",
]

_FRESH = [10_000]


def fresh_slots(k):
    start = _FRESH[0]
    _FRESH[0] += k
    return list(range(start, start + k))


def _apply(opterm, holes, args):
    out = opterm
    for h, a in zip(holes, args):
        out = compose(out, h, a)
    return out


def cov_torsion(dirs, a, b, sym=False):
    """Iterated covariant derivative of the torsion, applied to arguments.

    ``dirs`` lists the derivative directions outermost first.
    """
    holes = fresh_slots(len(dirs) + 2)
    base = Tor(Slot(holes[-2]), Slot(holes[-1]))
    wrt = (holes[-2], holes[-1])
    for h in reversed(holes[:-2]):
        base = CovD(Slot(h), base, wrt, sym)
        wrt = (h,) + wrt
    return _apply(base, holes, list(dirs) + [a, b])


def cov_curvature(dirs, a, b, c, sym=False):
    holes = fresh_slots(len(dirs) + 3)
    base = Curv(Slot(holes[-3]), Slot(holes[-2]), Slot(holes[-1]))
    wrt = tuple(holes[-3:])
    for h in reversed(holes[:-3]):
        base = CovD(Slot(h), base, wrt, sym)
        wrt = (h,) + wrt
    return _apply(base, holes, list(dirs) + [a, b, c])


def psi_term(r_term, t_term, n):
    """Pack a pair into a single operator: -3R - R.c1 + R.c2 + 2T - 2T.c1."""
    c1 = Permutation(tuple(range(1, n - 2)) + (n - 1, n, n - 2))
    c2 = Permutation(tuple(range(1, n - 2)) + (n, n - 2, n - 1))
    return combo([
        (-3, r_term),
        (-1, Permute(r_term, c1)),
        (1, Permute(r_term, c2)),
        (2, t_term),
        (-2, Permute(t_term, c1)),
    ])


def phi_terms(l_term, n):
    """Recover the pair from a packed operator (the inverse direction)."""
    tau_rn = Permutation.transposition(n, n - 2, n - 1)
    tau_tn = Permutation.transposition(n, n - 1, n)
    sixth = Fraction(1, 6)
    r_term = combo([(sixth, Permute(l_term, tau_rn)), (-sixth, l_term)])
    t_term = combo([(sixth, l_term), (-sixth, Permute(l_term, tau_tn))])
    return r_term, t_term


# ---------------------------------------------------------------------------
# classical and streamlined tensors
# ---------------------------------------------------------------------------

def build_classical(n):
    """(R_n, T_n): iterated covariant derivatives of curvature and torsion.

    R_n exists for n >= 3 (None at n = 2); T_n for n >= 2.  Slots 1..n.
    """
    if n < 2:
        raise ValueError("degree must be >= 2")
    t_n = cov_torsion([Slot(j) for j in range(1, n - 1)], Slot(n - 1), Slot(n))
    r_n = None
    if n >= 3:
        r_n = cov_curvature(
            [Slot(j) for j in range(1, n - 2)], Slot(n - 2), Slot(n - 1), Slot(n))
    return r_n, t_n


def build_ideal(n):
    """Streamlined tensors with corrections killing the lower-order deviations.

    Returns a dict with keys 'iR', 'iT', 'iL' (iR is None at n = 2).
    Explicit formulas exist only up to degree 4.
    """
    if n == 2:
        t = Tor(Slot(1), Slot(2))
        return {"iR": None, "iT": t, "iL": t}
    if n == 3:
        x, y, z = Slot(1), Slot(2), Slot(3)
        i_r = Curv(x, y, z)
        i_t = combo([
            (1, cov_torsion([x], y, z)),
            (-1, Tor(x, Tor(y, z))),
        ])
        return {"iR": i_r, "iT": i_t, "iL": psi_term(i_r, i_t, 3)}
    if n == 4:
        x1, x2, x3, x4 = (Slot(j) for j in range(1, 5))
        half, quarter, eighth = Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)
        i_r = combo([
            (1, cov_curvature([x1], x2, x3, x4)),
            (half, Curv(Tor(x1, x2), x3, x4)),
            (half, Curv(x2, Tor(x1, x3), x4)),
            (-half, Tor(Curv(x2, x3, x1), x4)),
            (-half, Tor(cov_torsion([x1], x2, x3), x4)),
            (-half, Tor(Tor(Tor(x2, x3), x1), x4)),
            (-2 * quarter, cov_torsion([x1], Tor(x2, x3), x4)),
            (-quarter, cov_torsion([x2], Tor(x1, x3), x4)),
            (quarter, cov_torsion([x3], Tor(x1, x2), x4)),
            (eighth, Tor(Tor(x3, x4), Tor(x1, x2))),
            (-eighth, Tor(Tor(x2, x4), Tor(x1, x3))),
            (2 * eighth, Tor(Tor(x2, x3), Tor(x1, x4))),
        ])
        threq = Fraction(3, 4)
        i_t = combo([
            (half, cov_torsion([x1, x2], x3, x4)),
            (half, cov_torsion([x2, x1], x3, x4)),
            (-quarter, Curv(x1, x3, Tor(x4, x2))),
            (-quarter, Curv(x2, x3, Tor(x4, x1))),
            (quarter, Curv(x1, x4, Tor(x3, x2))),
            (quarter, Curv(x2, x4, Tor(x3, x1))),
            (threq, cov_torsion([x1], Tor(x2, x3), x4)),
            (threq, cov_torsion([x2], Tor(x1, x3), x4)),
            (-threq, cov_torsion([x1], Tor(x2, x4), x3)),
            (-threq, cov_torsion([x2], Tor(x1, x4), x3)),
            (half, Tor(cov_torsion([x1], x2, x3), x4)),
            (half, Tor(cov_torsion([x2], x1, x3), x4)),
            (-half, Tor(cov_torsion([x1], x2, x4), x3)),
            (-half, Tor(cov_torsion([x2], x1, x4), x3)),
        ])
        return {"iR": i_r, "iT": i_t, "iL": psi_term(i_r, i_t, 4)}
    raise ValueError(f"no explicit streamlined tensors in degree {n}")


def realized_family_member(kind, n, index):
    """A term realizing the index-th generator of the family in degree n.

    The term's leading symbol equals the corresponding family symbol (this
    is cross-checked in the tests).
    """
    r_n, t_n = build_classical(n)
    if kind == "classical":
        members = [t_n] if n == 2 else [r_n, t_n]
        return members[index]
    if kind == "canonical":
        if index != 0:
            raise IndexError("single-generator family")
        if n == 2:
            return t_n
        return psi_term(r_n, t_n, n)
    raise ValueError(f"no realization for family kind {kind!r}")


# ---------------------------------------------------------------------------
# slot-permutation sums
# ---------------------------------------------------------------------------

def _cyclic_terms(term, n, slots):
    cyc = Permutation.cycle(n, list(slots))
    out = []
    p = Permutation.identity(n)
    for _ in range(len(slots)):
        out.append((Fraction(1), Permute(term, p)))
        p = p * cyc
    return out


def cyclic_sum(term, n, slots):
    return combo(_cyclic_terms(term, n, slots))


# ---------------------------------------------------------------------------
# the displayed identities as residual builders
# ---------------------------------------------------------------------------

def bianchi1_residual():
    """First Bianchi: cyclic R plus cyclic (nabla T + T(T, .)), three slots."""
    x, y, z = Slot(1), Slot(2), Slot(3)
    lhs = cyclic_sum(Curv(x, y, z), 3, (1, 2, 3))
    rhs = cyclic_sum(
        combo([(1, cov_torsion([x], y, z)), (1, Tor(Tor(x, y), z))]),
        3, (1, 2, 3))
    return combo([(1, lhs), (1, rhs)])


def bianchi2_residual():
    """Second Bianchi: cyclic nabla R plus cyclic R(T(.,.), .), four slots."""
    u, x, y, z = Slot(1), Slot(2), Slot(3), Slot(4)
    lhs = cyclic_sum(cov_curvature([u], x, y, z), 4, (1, 2, 3))
    rhs = cyclic_sum(Curv(Tor(u, x), y, z), 4, (1, 2, 3))
    return combo([(1, lhs), (1, rhs)])


def _generic_applied(r, arg_terms=None):
    slots = [Slot(2 + j) for j in range(1, r + 1)]
    return Generic("Phi", tuple(arg_terms if arg_terms is not None else slots))


def ricci_residual(r, drop_torsion_term=False):
    """Commutator of second covariant derivatives of a generic tensor.

    Slots: 1, 2 the directions, 3..r+2 the tensor arguments.  With
    ``drop_torsion_term`` the final correction is removed (negative control).
    """
    zslots = tuple(range(3, r + 3))
    phi = Generic("Phi", tuple(Slot(j) for j in zslots))
    dphi = CovD(Slot(2), phi, zslots)
    ddphi = CovD(Slot(1), dphi, (2,) + zslots)
    swap = Permutation.transposition(r + 2, 1, 2)
    parts = [
        (Fraction(1), ddphi),
        (Fraction(-1), Permute(ddphi, swap)),
        (Fraction(1), Curv(Slot(1), Slot(2), phi)),
    ]
    for j in zslots:
        args = [Curv(Slot(1), Slot(2), Slot(k)) if k == j else Slot(k) for k in zslots]
        parts.append((Fraction(-1), Generic("Phi", tuple(args))))
    if not drop_torsion_term:
        parts.append((Fraction(1), CovD(Tor(Slot(1), Slot(2)), phi, zslots)))
    return combo(parts)


def split14_residual():
    """Curvature against the symmetrized connection plus torsion corrections."""
    x, y, z = Slot(1), Slot(2), Slot(3)
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    return combo([
        (1, Curv(x, y, z)),
        (-1, Curv(x, y, z, sym=True)),
        (half, cov_torsion([x], y, z, sym=True)),
        (-half, cov_torsion([y], x, z, sym=True)),
        (quarter, Tor(x, Tor(y, z))),
        (-quarter, Tor(y, Tor(x, z))),
        (half, Tor(Tor(x, y), z)),
    ])


def split15_residual(r):
    """Covariant derivative of a generic tensor against the symmetrized one."""
    yslots = tuple(range(2, r + 2))
    phi = Generic("Phi", tuple(Slot(j) for j in yslots))
    half = Fraction(1, 2)
    parts = [
        (Fraction(1), CovD(Slot(1), phi, yslots)),
        (Fraction(-1), CovD(Slot(1), phi, yslots, sym=True)),
        (-half, Tor(Slot(1), phi)),
    ]
    for j in yslots:
        args = [Tor(Slot(1), Slot(k)) if k == j else Slot(k) for k in yslots]
        parts.append((half, Generic("Phi", tuple(args))))
    return combo(parts)


def curvature_split_pair():
    """(R, R~) for the torsion-free degeneration check."""
    x, y, z = Slot(1), Slot(2), Slot(3)
    return combo([(1, Curv(x, y, z)), (-1, Curv(x, y, z, sym=True))])


def aa_naive_residual():
    """Cyclic pair sum with the uncorrected nabla T: fails in general."""
    x, y, z = Slot(1), Slot(2), Slot(3)
    return combo([
        (1, cyclic_sum(Curv(x, y, z), 3, (1, 2, 3))),
        (1, cyclic_sum(cov_torsion([x], y, z), 3, (1, 2, 3))),
    ])


def b3_naive_residual():
    """Cyclic sum of the uncorrected nabla R in the derivative slots."""
    return cyclic_sum(cov_curvature([Slot(1)], Slot(2), Slot(3), Slot(4)), 4, (1, 2, 3))


def verify_ricci(r, m, drop_torsion_term=False):
    if r not in (1, 2, 3):
        raise ValueError("tensor rank must be 1, 2 or 3")
    term = ricci_residual(r, drop_torsion_term)
    return check_zero(term, context_for(term, m))


def verify_split(which, m, r=1):
    if which == "1.4":
        term = split14_residual()
        return check_zero(term, context_for(term, m))
    if which == "1.5":
        term = split15_residual(r)
        return check_zero(term, context_for(term, m))
    if which == "1.6-torsion-free-degeneration":
        term = curvature_split_pair()
        return check_zero(term, context_for(term, m), symmetrize=True)
    raise ValueError(f"unknown split identity {which!r}")


# ---------------------------------------------------------------------------
# identity suites over the streamlined tensors
# ---------------------------------------------------------------------------

def _tag_residuals(n, tensors):
    """Residual terms for every identity applicable in degree n."""
    i_r, i_t, i_l = tensors["iR"], tensors["iT"], tensors["iL"]
    res = {}
    ident = Permutation.identity(n)

    def plus(term, p):
        return combo([(1, term), (1, Permute(term, p))])

    def minus(term, p):
        return combo([(1, term), (-1, Permute(term, p))])

    if n == 2:
        res["t1"] = plus(i_t, Permutation.transposition(2, 1, 2))
        res["l1"] = plus(i_l, Permutation.transposition(2, 1, 2))
        return res

    res["t1"] = plus(i_t, Permutation.transposition(n, n - 1, n))
    parts = []
    for j in range(1, n - 2):
        parts.append((Fraction(1), minus(i_t, Permutation.transposition(n, j, j + 1))))
    res["t2"] = combo(parts) if parts else combo([])
    res["b1"] = plus(i_r, Permutation.transposition(n, n - 2, n - 1))
    res["aa"] = combo([
        (1, cyclic_sum(i_r, n, (n - 2, n - 1, n))),
        (1, cyclic_sum(i_t, n, (n - 2, n - 1, n))),
    ])
    sym_parts = []
    for images in itertools.permutations((n - 2, n - 1, n)):
        full = list(range(1, n + 1))
        full[n - 3], full[n - 2], full[n - 1] = images
        sym_parts.append((Fraction(1), Permute(i_l, Permutation(full))))
    res["l1"] = combo(sym_parts)
    if n >= 4:
        res["b3"] = cyclic_sum(i_r, n, (n - 3, n - 2, n - 1))
        b4_parts = []
        l3_parts = []
        for j in range(1, n - 3):
            tau = Permutation.transposition(n, j, j + 1)
            b4_parts.append((Fraction(1), minus(i_r, tau)))
            l3_parts.append((Fraction(1), minus(i_l, tau)))
        res["b4"] = combo(b4_parts)
        res["l3"] = combo(l3_parts)
        alt_parts = []
        for images in itertools.permutations((n - 3, n - 2, n - 1)):
            full = list(range(1, n + 1))
            full[n - 4], full[n - 3], full[n - 2] = images
            p = Permutation(full)
            alt_parts.append((Fraction(p.sign()), Permute(i_l, p)))
        res["l2"] = combo(alt_parts)
        tau = Permutation.transposition(n, n - 3, n - 2)
        lam = Permutation.transposition(n, n - 1, n)
        res["l4"] = combo([
            (1, Permute(i_l, ident)),
            (-1, Permute(i_l, tau)),
            (-1, Permute(i_l, lam)),
            (1, Permute(i_l, tau * lam)),
        ])
    return res


def verify_ideal_suite(n, m, include_controls=True):
    """Check every applicable identity of the streamlined tensors.

    Returns ``{tag: (verdict, expected_zero)}``; the naive negative controls
    carry ``expected_zero=False``.
    """
    if not 2 <= n <= 4:
        raise ValueError("explicit streamlined tensors exist for degrees 2..4 only")
    tensors = build_ideal(n)
    out = {}
    for tag, term in sorted(_tag_residuals(n, tensors).items()):
        out[tag] = (check_zero(term, context_for(term, m)), True)
    if include_controls:
        if n == 3:
            term = aa_naive_residual()
            out["aa-naive"] = (check_zero(term, context_for(term, m)), False)
        if n == 4:
            term = b3_naive_residual()
            out["b3-naive"] = (check_zero(term, context_for(term, m)), False)
    return out


def identity_registry():
    """Name -> (builder, expected-zero, slot count) for the CLI."""
    return {
        "bianchi1": (bianchi1_residual, True),
        "bianchi2": (bianchi2_residual, True),
        "ricci-r1": (lambda: ricci_residual(1), True),
        "ricci-r2": (lambda: ricci_residual(2), True),
        "ricci-r1-control": (lambda: ricci_residual(1, drop_torsion_term=True), False),
        "split-1.4": (split14_residual, True),
        "split-1.5-r1": (lambda: split15_residual(1), True),
        "split-1.5-r2": (lambda: split15_residual(2), True),
        "aa-naive": (aa_naive_residual, False),
        "b3-naive": (b3_naive_residual, False),
    }


# ---------------------------------------------------------------------------
# deviations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeviationReport:
    zero: bool
    vf_order: int
    c_order: int
    witness: str | None


def deviation(alpha, frak_s, term, m=None, ctx=None):
    """Apply a quasi-symmetry to an operator and measure what is left.

    ``alpha`` holds the operator's leading coefficients; ``frak_s`` must
    annihilate them in the group algebra, otherwise the input is rejected.
    The report states whether the lower-order remainder vanishes (the
    quasi-symmetry is an actual symmetry) and its differential orders.
    """
    qs = quasi_symmetry_check(alpha, frak_s)
    if not qs.group_ring:
        raise ValueError("not a quasi-symmetry of the leading coefficients")
    residual = combo([(c, Permute(term, p)) for p, c in sorted(
        frak_s.terms.items(), key=lambda t: t[0].images)])
    if ctx is None:
        ctx = context_for(residual, m)
    verdict = check_zero(residual, ctx)
    vf, c = orders(residual, ctx)
    return DeviationReport(verdict.zero, vf, c, verdict.witness)
