"""Exact arithmetic in the symmetric-group algebra and in the module of
leading symbols of connection jets.

Conventions
-----------
Permutations act on argument slots and are stored in one-line notation on
``{1..n}``.  Products compose left to right, ``(p * q)(j) = q(p(j))``, so
that acting on the right by ``p`` and then by ``q`` equals acting by
``p * q``.  Composing an operator with a permutation permutes its inputs:
``(D . p)(X_1, ..., X_n) = D(X_{p(1)}, ..., X_{p(n)})``.

The degree-``n`` symbol module has one basis vector for every permutation
whose first ``n - 2`` images increase; those index the monomials

    X_{s(1)} ... X_{s(n)} * (order n-2 Christoffel jet),

where the first ``n - 2`` positions are the mutually symmetric derivative
directions and the last two are the (unordered-symmetry-free) lower indices
of the Christoffel symbol.  The module dimension is ``n (n - 1)``.  The
symbol map ``theta`` sends every basis vector to -1; its kernel is the
coefficient-sum-zero subspace, of dimension ``n (n - 1) - 1``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import linalg

__all__ = [
    "Permutation",
    "GroupAlgebraElement",
    "ENaughtElement",
    "GeneratorFamily",
    "transversal",
    "basis_vector",
    "t_symbol",
    "r_symbol",
    "l_symbol",
    "psi_symbol",
    "classical_family",
    "canonical_family",
    "custom_family",
    "theta",
    "kernel_basis",
    "kernel_dimension",
    "submodule_rank",
    "generates_kernel",
    "check_relation_eq3",
    "quasi_symmetry_check",
    "QuasiSymmetryResult",
    "check_symmetry_tags",
]


class Permutation:
    """A permutation of ``{1..n}`` in one-line notation."""

    __slots__ = ("images",)

    def __init__(self, images):
        images = tuple(images)
        n = len(images)
        if sorted(images) != list(range(1, n + 1)):
            raise ValueError(f"not a permutation of 1..{n}: {images!r}")
        object.__setattr__(self, "images", images)

    @property
    def n(self):
        return len(self.images)

    @staticmethod
    def identity(n):
        return Permutation(range(1, n + 1))

    @staticmethod
    def transposition(n, i, j):
        images = list(range(1, n + 1))
        images[i - 1], images[j - 1] = j, i
        return Permutation(images)

    @staticmethod
    def cycle(n, slots):
        """The cycle sending slots[0] -> slots[1] -> ... -> slots[0]."""
        images = list(range(1, n + 1))
        for a, b in zip(slots, slots[1:] + type(slots)([slots[0]])):
            images[a - 1] = b
        return Permutation(images)

    @staticmethod
    def all(n):
        for images in itertools.permutations(range(1, n + 1)):
            yield Permutation(images)

    def __call__(self, j):
        return self.images[j - 1]

    def __mul__(self, other):
        # left-to-right: self first, then other
        if self.n != other.n:
            raise ValueError("degree mismatch")
        return Permutation(tuple(other.images[i - 1] for i in self.images))

    def inverse(self):
        images = [0] * self.n
        for j, i in enumerate(self.images, start=1):
            images[i - 1] = j
        return Permutation(images)

    def sign(self):
        seen = [False] * self.n
        sign = 1
        for start in range(1, self.n + 1):
            if seen[start - 1]:
                continue
            length = 0
            j = start
            while not seen[j - 1]:
                seen[j - 1] = True
                j = self(j)
                length += 1
            if length % 2 == 0:
                sign = -sign
        return sign

    def is_identity(self):
        return all(i == j for j, i in enumerate(self.images, start=1))

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        return f"Permutation({list(self.images)})"


class GroupAlgebraElement:
    """A rational linear combination of permutations of fixed degree."""

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = n
        clean = {}
        for p, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                if p.n != n:
                    raise ValueError("degree mismatch in group algebra element")
                clean[p] = c
        self.terms = clean

    @staticmethod
    def of(p, coeff=1):
        return GroupAlgebraElement(p.n, {p: Fraction(coeff)})

    @staticmethod
    def identity(n):
        return GroupAlgebraElement.of(Permutation.identity(n))

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for p, c in other.terms.items():
            terms[p] = terms.get(p, Fraction(0)) + c
        return GroupAlgebraElement(self.n, terms)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        scalar = Fraction(scalar)
        return GroupAlgebraElement(self.n, {p: scalar * c for p, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, GroupAlgebraElement):
            self._check(other)
            terms = {}
            for p, a in self.terms.items():
                for q, b in other.terms.items():
                    r = p * q
                    terms[r] = terms.get(r, Fraction(0)) + a * b
            return GroupAlgebraElement(self.n, terms)
        return NotImplemented

    def is_zero(self):
        return not self.terms

    def _check(self, other):
        if self.n != other.n:
            raise ValueError("degree mismatch")

    def __eq__(self, other):
        return (
            isinstance(other, GroupAlgebraElement)
            and self.n == other.n
            and self.terms == other.terms
        )

    def __repr__(self):
        if not self.terms:
            return f"GroupAlgebraElement({self.n}, 0)"
        bits = " + ".join(f"{c}*{list(p.images)}" for p, c in sorted(
            self.terms.items(), key=lambda t: t[0].images))
        return f"GroupAlgebraElement({self.n}, {bits})"


# ---------------------------------------------------------------------------
# the induced module of leading symbols
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def transversal(n):
    """Representatives with increasing first ``n - 2`` images, lex ordered."""
    if n < 2:
        raise ValueError("degree must be >= 2")
    reps = []
    for images in itertools.permutations(range(1, n + 1)):
        head = images[: n - 2]
        if all(head[i] < head[i + 1] for i in range(len(head) - 1)):
            reps.append(images)
    reps.sort()
    return tuple(reps)


@lru_cache(maxsize=None)
def _transversal_index(n):
    return {images: i for i, images in enumerate(transversal(n))}


def normalize_images(images):
    """Canonical coset representative: sort the first n-2 images."""
    n = len(images)
    return tuple(sorted(images[: n - 2])) + tuple(images[n - 2:])


class ENaughtElement:
    """An element of the degree-``n`` symbol module.

    ``coeffs`` maps transversal image tuples to nonzero rationals.
    """

    __slots__ = ("n", "coeffs")

    def __init__(self, n, coeffs=None):
        if n < 2:
            raise ValueError("degree must be >= 2")
        self.n = n
        index = _transversal_index(n)
        clean = {}
        for key, c in (coeffs or {}).items():
            key = tuple(key)
            if key not in index:
                raise ValueError(f"{key!r} is not a transversal representative")
            c = Fraction(c)
            if c:
                clean[key] = c
        self.coeffs = clean

    # -- algebra ------------------------------------------------------------

    def __add__(self, other):
        self._check(other)
        coeffs = dict(self.coeffs)
        for k, c in other.coeffs.items():
            coeffs[k] = coeffs.get(k, Fraction(0)) + c
        return ENaughtElement(self.n, coeffs)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        scalar = Fraction(scalar)
        return ENaughtElement(self.n, {k: scalar * c for k, c in self.coeffs.items()})

    def is_zero(self):
        return not self.coeffs

    def _check(self, other):
        if self.n != other.n:
            raise ValueError("degree mismatch")

    def __eq__(self, other):
        return (
            isinstance(other, ENaughtElement)
            and self.n == other.n
            and self.coeffs == other.coeffs
        )

    def __repr__(self):
        bits = " + ".join(f"{c}*e{list(k)}" for k, c in sorted(self.coeffs.items()))
        return f"ENaughtElement({self.n}, {bits or '0'})"

    # -- module structure -----------------------------------------------------

    def right_action(self, p):
        """Permute the argument slots: basis vector at s goes to s * p."""
        if isinstance(p, GroupAlgebraElement):
            out = ENaughtElement(self.n)
            for perm, c in p.terms.items():
                out = out + c * self.right_action(perm)
            return out
        if p.n != self.n:
            raise ValueError("degree mismatch between element and permutation")
        coeffs = {}
        for key, c in self.coeffs.items():
            moved = normalize_images(tuple(p(i) for i in key))
            coeffs[moved] = coeffs.get(moved, Fraction(0)) + c
        return ENaughtElement(self.n, coeffs)

    def theta(self):
        """The symbol map: every basis vector is sent to -1."""
        return -sum(self.coeffs.values(), Fraction(0))

    def vector(self):
        """Dense coefficient list over the lex-ordered transversal."""
        index = _transversal_index(self.n)
        out = [Fraction(0)] * len(index)
        for k, c in self.coeffs.items():
            out[index[k]] = c
        return out

    def sparse(self):
        index = _transversal_index(self.n)
        return {index[k]: c for k, c in self.coeffs.items()}

    def group_algebra_lift(self):
        """The canonical lift: transversal representatives as group elements."""
        return GroupAlgebraElement(
            self.n, {Permutation(k): c for k, c in self.coeffs.items()})

    # -- serialization --------------------------------------------------------

    def to_json_obj(self):
        return {
            "n": self.n,
            "terms": [
                {"images": list(k), "coeff": _frac_str(c)}
                for k, c in sorted(self.coeffs.items())
            ],
        }

    def to_json(self):
        return json.dumps(self.to_json_obj())

    @staticmethod
    def from_json_obj(obj):
        return ENaughtElement(
            obj["n"],
            {tuple(t["images"]): Fraction(t["coeff"]) for t in obj["terms"]},
        )


def _frac_str(c):
    c = Fraction(c)
    return f"{c.numerator}/{c.denominator}"


def basis_vector(n, images):
    return ENaughtElement(n, {tuple(images): Fraction(1)})


def from_vector(n, dense):
    reps = transversal(n)
    return ENaughtElement(n, {reps[i]: c for i, c in enumerate(dense) if c})


def theta(e):
    return e.theta()


# ---------------------------------------------------------------------------
# generator symbols
# ---------------------------------------------------------------------------

def t_symbol(n):
    """Torsion-derivative symbol: antisymmetrized Christoffel pair."""
    if n < 2:
        raise ValueError("torsion symbols start at degree 2")
    ident = tuple(range(1, n + 1))
    swapped = ident[: n - 2] + (n, n - 1)
    return ENaughtElement(n, {ident: 1, swapped: -1})


def r_symbol(n):
    """Curvature-derivative symbol: antisymmetrized derivative direction."""
    if n < 3:
        raise ValueError("curvature symbols start at degree 3")
    ident = tuple(range(1, n + 1))
    swapped = ident[: n - 3] + (n - 1, n - 2, n)
    return ENaughtElement(n, {swapped: 1, ident: -1})


def l_symbol(n):
    """Symbol of the equivariantly-projected single-family generator."""
    if n < 2:
        raise ValueError("degree must be >= 2")
    if n == 2:
        return t_symbol(2)
    coeffs = {tuple(range(1, n + 1)): Fraction(6)}
    head = tuple(range(1, n - 2))
    for a, b, c in itertools.permutations((n - 2, n - 1, n)):
        key = head + (c, a, b)
        coeffs[key] = coeffs.get(key, Fraction(0)) - 1
    return ENaughtElement(n, coeffs)


def psi_symbol(r, t):
    """The five-term combination packing an (r, t) pair into one symbol.

    Mirrors the inverse-pair lemma: -3r - r.c1 + r.c2 + 2t - 2t.c1 with
    c1 moving (n-2, n-1, n) -> (n-1, n, n-2) and c2 its inverse.
    """
    n = r.n
    c1 = Permutation(tuple(range(1, n - 2)) + (n - 1, n, n - 2))
    c2 = Permutation(tuple(range(1, n - 2)) + (n, n - 2, n - 1))
    return (
        Fraction(-3) * r - r.right_action(c1) + r.right_action(c2)
        + Fraction(2) * t - Fraction(2) * t.right_action(c1)
    )


@dataclass(frozen=True)
class GeneratorFamily:
    """A family of kernel generators, one list of symbols per degree."""

    kind: str                      # "classical" | "canonical" | "custom"
    members_by_degree: tuple = ()  # only used for custom families

    def members(self, n):
        if self.kind == "classical":
            return [t_symbol(n)] if n == 2 else [r_symbol(n), t_symbol(n)]
        if self.kind == "canonical":
            return [l_symbol(n)]
        for deg, members in self.members_by_degree:
            if deg == n:
                return list(members)
        raise ValueError(f"family has no members in degree {n}")

    def generator_count(self, n):
        return len(self.members(n))

    def validate(self, n):
        for m in self.members(n):
            if m.theta() != 0:
                raise ValueError("family member has nonzero coefficient sum")


def classical_family():
    return GeneratorFamily("classical")


def canonical_family():
    return GeneratorFamily("canonical")


def custom_family(members_by_degree):
    fam = GeneratorFamily("custom", tuple(
        (n, tuple(ms)) for n, ms in sorted(members_by_degree.items())))
    for n, _ in fam.members_by_degree:
        fam.validate(n)
    return fam


# ---------------------------------------------------------------------------
# kernel of the symbol map and generation checks
# ---------------------------------------------------------------------------

def kernel_dimension(n):
    return n * (n - 1) - 1


@lru_cache(maxsize=None)
def kernel_basis(n):
    """Deterministic basis of the coefficient-sum-zero subspace."""
    if n < 2:
        raise ValueError("degree must be >= 2")
    ncols = n * (n - 1)
    row = {i: Fraction(-1) for i in range(ncols)}  # the matrix of theta
    vectors = linalg.nullspace([row], ncols)
    return tuple(from_vector(n, v) for v in vectors)


def submodule_rank(gens):
    """Rank of the span of all slot-permuted copies of the generators."""
    gens = list(gens)
    if not gens:
        return 0
    n = gens[0].n
    if any(g.n != n for g in gens):
        raise ValueError("generators of mixed degree")
    space = linalg.RowSpace()
    target = n * (n - 1)
    for g in gens:
        for p in Permutation.all(n):
            space.add(g.right_action(p).sparse())
            if space.rank == target:
                return space.rank
    return space.rank


def generates_kernel(gens):
    gens = list(gens)
    if any(g.theta() != 0 for g in gens):
        return False
    if not gens:
        return False
    return submodule_rank(gens) == kernel_dimension(gens[0].n)


def check_relation_eq3(n):
    """Vanishing of the cyclic sum of r + t over the last three slots."""
    if n < 3:
        raise ValueError("the relation needs degree >= 3 (no curvature symbol below)")
    rt = r_symbol(n) + t_symbol(n)
    total = ENaughtElement(n)
    cyc = Permutation.cycle(n, [n - 2, n - 1, n])
    p = Permutation.identity(n)
    for _ in range(3):
        total = total + rt.right_action(p)
        p = p * cyc
    return total.is_zero()


# ---------------------------------------------------------------------------
# quasi-symmetries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuasiSymmetryResult:
    group_ring: bool      # the product vanishes in the group algebra
    module_action: bool   # the right action annihilates the symbol

    def __bool__(self):
        return self.group_ring


def quasi_symmetry_check(alpha, s):
    """Check both readings of "s annihilates the leading coefficients".

    ``alpha`` may be a symbol-module element (canonically lifted to the
    group algebra for the strong check) or a group algebra element.
    """
    if isinstance(alpha, ENaughtElement):
        lift = alpha.group_algebra_lift()
        module_elt = alpha
    else:
        lift = alpha
        module_elt = None
        for p, c in alpha.terms.items():
            piece = c * basis_vector(alpha.n, normalize_images(p.images))
            module_elt = piece if module_elt is None else module_elt + piece
        if module_elt is None:
            module_elt = ENaughtElement(alpha.n)
    if lift.n != s.n:
        raise ValueError("degree mismatch")
    ring_zero = (lift * s).is_zero()
    module_zero = module_elt.right_action(s).is_zero()
    return QuasiSymmetryResult(ring_zero, module_zero)


# ---------------------------------------------------------------------------
# symmetry tags of the generator symbols
# ---------------------------------------------------------------------------

def _sym_sum(n, slots):
    """Sum of all permutations of the given slots (others fixed)."""
    out = GroupAlgebraElement(n)
    for images in itertools.permutations(slots):
        full = list(range(1, n + 1))
        for slot, img in zip(slots, images):
            full[slot - 1] = img
        out = out + GroupAlgebraElement.of(Permutation(full))
    return out


def _alt_sum(n, slots):
    """Signed sum of all permutations of the given slots."""
    out = GroupAlgebraElement(n)
    for images in itertools.permutations(slots):
        full = list(range(1, n + 1))
        for slot, img in zip(slots, images):
            full[slot - 1] = img
        p = Permutation(full)
        out = out + GroupAlgebraElement.of(p, p.sign())
    return out


def _cyclic_sum(n, slots):
    out = GroupAlgebraElement(n)
    p = Permutation.identity(n)
    cyc = Permutation.cycle(n, list(slots))
    for _ in range(len(slots)):
        out = out + GroupAlgebraElement.of(p)
        p = p * cyc
    return out


def _invariant_under(e, slots):
    """True when the symbol is fixed by every permutation of the slots."""
    n = e.n
    for i, j in zip(slots, slots[1:]):
        if e.right_action(Permutation.transposition(n, i, j)) != e:
            return False
    return True


def check_symmetry_tags(family, n):
    """Verify the advertised slot symmetries of a generator family.

    Returns a mapping tag -> bool.  Tags follow the displayed identities:
    for the two-family symbols (s1), (s3), (s4), (t1), (t2); for the packed
    single-family symbol (l1)-(l4), numbered as in the ideal-tensor list
    ((l2) alternating in slots n-3..n-1, (l3) symmetric in slots 1..n-3).
    """
    kind = family.kind if isinstance(family, GeneratorFamily) else str(family)
    report = {}
    if kind == "classical":
        t = t_symbol(n)
        report["t1"] = t.right_action(
            GroupAlgebraElement.identity(n)
            + GroupAlgebraElement.of(Permutation.transposition(n, n - 1, n))
        ).is_zero()
        if n >= 3:
            r = r_symbol(n)
            report["s1"] = r.right_action(
                GroupAlgebraElement.identity(n)
                + GroupAlgebraElement.of(Permutation.transposition(n, n - 2, n - 1))
            ).is_zero()
            report["t2"] = _invariant_under(t, list(range(1, n - 1)))
        if n >= 4:
            r = r_symbol(n)
            report["s3"] = r.right_action(_cyclic_sum(n, (n - 3, n - 2, n - 1))).is_zero()
            report["s4"] = _invariant_under(r, list(range(1, n - 2)))
    elif kind == "canonical":
        l = l_symbol(n)
        if n == 2:
            report["l1"] = l.right_action(
                GroupAlgebraElement.identity(2)
                + GroupAlgebraElement.of(Permutation.transposition(2, 1, 2))
            ).is_zero()
        else:
            report["l1"] = l.right_action(_sym_sum(n, (n - 2, n - 1, n))).is_zero()
        if n >= 4:
            report["l2"] = l.right_action(_alt_sum(n, (n - 3, n - 2, n - 1))).is_zero()
            report["l3"] = _invariant_under(l, list(range(1, n - 2)))
            tau = GroupAlgebraElement.identity(n) - GroupAlgebraElement.of(
                Permutation.transposition(n, n - 3, n - 2))
            lam = GroupAlgebraElement.identity(n) - GroupAlgebraElement.of(
                Permutation.transposition(n, n - 1, n))
            report["l4"] = l.right_action(tau * lam).is_zero()
    else:
        raise ValueError(f"no symmetry tags defined for family kind {kind!r}")
    return report
