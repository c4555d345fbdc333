"""Dense exact n-linear maps and the inverse pair of packing maps.

A map is a table over basis index tuples; slot permutations act by
reindexing, ``(M . p)(X_1, ..., X_n) = M(X_{p(1)}, ..., X_{p(n)})``.  The
two constrained spaces are

* the packed side: maps annihilated by the full symmetrizer of the last
  three slots and, from arity 4 on, by the signed sum over slots
  ``n-3..n-1``, invariant under permutations of slots ``1..n-3`` and
  annihilated by the double antisymmetrizer in ``(n-3, n-2)`` x ``(n-1, n)``;

* the pair side: pairs (R, T) with R antisymmetric in ``(n-2, n-1)``, T
  antisymmetric in ``(n-1, n)`` and symmetric in ``1..n-2``, the coupled
  cyclic sum over the last three slots vanishing, and, from arity 4 on,
  R cyclic in ``(n-3, n-2, n-1)`` and symmetric in ``1..n-3``.

The maps between them are the one-sixth differences and the five-term
combination, exact mutual inverses.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from . import linalg
from .perm_algebra import Permutation

__all__ = [
    "MultilinearMap", "phi_map", "psi_map", "in_FL", "in_FRT",
    "random_FL", "random_FRT",
]


class MultilinearMap:
    def __init__(self, n, dchi, dv, table=None):
        self.n = n
        self.dchi = dchi
        self.dv = dv
        self.table = {}
        for key, c in (table or {}).items():
            c = Fraction(c)
            if c:
                self.table[key] = c

    @staticmethod
    def zero(n, dchi, dv):
        return MultilinearMap(n, dchi, dv)

    def get(self, idx, out):
        return self.table.get((tuple(idx), out), Fraction(0))

    def acted(self, p):
        """Slot permutation: value on (e_i1 .. e_in) picks indices through p."""
        out_table = {}
        for idx in itertools.product(range(self.dchi), repeat=self.n):
            permuted = tuple(idx[p(k) - 1] for k in range(1, self.n + 1))
            for out in range(self.dv):
                c = self.table.get((permuted, out))
                if c:
                    out_table[(idx, out)] = c
        return MultilinearMap(self.n, self.dchi, self.dv, out_table)

    def __add__(self, other):
        table = dict(self.table)
        for k, c in other.table.items():
            nv = table.get(k, Fraction(0)) + c
            if nv:
                table[k] = nv
            else:
                del table[k]
        return MultilinearMap(self.n, self.dchi, self.dv, table)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        return MultilinearMap(
            self.n, self.dchi, self.dv,
            {k: c * v for k, v in self.table.items()} if c else {})

    def is_zero(self):
        return not self.table

    def __eq__(self, other):
        return (
            isinstance(other, MultilinearMap)
            and (self.n, self.dchi, self.dv) == (other.n, other.dchi, other.dv)
            and self.table == other.table
        )

    def __repr__(self):
        return f"MultilinearMap(n={self.n}, dchi={self.dchi}, dv={self.dv}, {len(self.table)} entries)"


def _tau(n, i, j):
    return Permutation.transposition(n, i, j)


def phi_map(l_map):
    """Split a packed map into its pair; defined for arity >= 3."""
    n = l_map.n
    if n < 3:
        raise ValueError("arity must be >= 3")
    sixth = Fraction(1, 6)
    r = (l_map.acted(_tau(n, n - 2, n - 1)) - l_map).scale(sixth)
    t = (l_map - l_map.acted(_tau(n, n - 1, n))).scale(sixth)
    return r, t


def psi_map(r_map, t_map):
    """Pack a pair into a single map; exact inverse of the split."""
    n = r_map.n
    if n < 3:
        raise ValueError("arity must be >= 3")
    c1 = Permutation(tuple(range(1, n - 2)) + (n - 1, n, n - 2))
    c2 = Permutation(tuple(range(1, n - 2)) + (n, n - 2, n - 1))
    return (
        r_map.scale(-3) - r_map.acted(c1) + r_map.acted(c2)
        + t_map.scale(2) - t_map.acted(c1).scale(2)
    )


def _subset_perms(n, slots, signed=False):
    out = []
    for images in itertools.permutations(slots):
        full = list(range(1, n + 1))
        for slot, img in zip(slots, images):
            full[slot - 1] = img
        p = Permutation(full)
        out.append((p, p.sign() if signed else 1))
    return out


def _sum_acted(m, perms):
    total = MultilinearMap.zero(m.n, m.dchi, m.dv)
    for p, sign in perms:
        total = total + m.acted(p).scale(sign)
    return total


def in_FL(l_map):
    n = l_map.n
    if not _sum_acted(l_map, _subset_perms(n, (n - 2, n - 1, n))).is_zero():
        return False
    if n >= 4:
        if not _sum_acted(l_map, _subset_perms(n, (n - 3, n - 2, n - 1), signed=True)).is_zero():
            return False
        for j in range(1, n - 3):
            if l_map.acted(_tau(n, j, j + 1)) != l_map:
                return False
        combo = (
            l_map - l_map.acted(_tau(n, n - 3, n - 2))
            - l_map.acted(_tau(n, n - 1, n))
            + l_map.acted(_tau(n, n - 3, n - 2) * _tau(n, n - 1, n))
        )
        if not combo.is_zero():
            return False
    return True


def in_FRT(r_map, t_map):
    n = r_map.n
    if not (r_map + r_map.acted(_tau(n, n - 2, n - 1))).is_zero():
        return False
    if not (t_map + t_map.acted(_tau(n, n - 1, n))).is_zero():
        return False
    for j in range(1, n - 2):
        if t_map.acted(_tau(n, j, j + 1)) != t_map:
            return False
    cyc = Permutation.cycle(n, [n - 2, n - 1, n])
    total = MultilinearMap.zero(n, r_map.dchi, r_map.dv)
    p = Permutation.identity(n)
    for _ in range(3):
        total = total + r_map.acted(p) + t_map.acted(p)
        p = p * cyc
    if not total.is_zero():
        return False
    if n >= 4:
        cyc2 = Permutation.cycle(n, [n - 3, n - 2, n - 1])
        total = MultilinearMap.zero(n, r_map.dchi, r_map.dv)
        p = Permutation.identity(n)
        for _ in range(3):
            total = total + r_map.acted(p)
            p = p * cyc2
        if not total.is_zero():
            return False
        for j in range(1, n - 3):
            if r_map.acted(_tau(n, j, j + 1)) != r_map:
                return False
    return True


# ---------------------------------------------------------------------------
# random constrained elements via exact nullspaces
# ---------------------------------------------------------------------------

def _entries(n, dchi, dv):
    return [
        (idx, out)
        for idx in itertools.product(range(dchi), repeat=n)
        for out in range(dv)
    ]


def _perm_sum_rows(n, dchi, dv, perms, entry_index, offset=0):
    """Rows of sum_p sign_p (M . p) = 0 over the entry coordinates."""
    rows = []
    for idx in itertools.product(range(dchi), repeat=n):
        for out in range(dv):
            row = {}
            for p, sign in perms:
                permuted = tuple(idx[p(k) - 1] for k in range(1, n + 1))
                col = entry_index[(permuted, out)] + offset
                row[col] = row.get(col, 0) + sign
            row = {c: Fraction(v) for c, v in row.items() if v}
            if row:
                rows.append(row)
    return rows


def _difference_rows(n, dchi, dv, p, entry_index, offset=0):
    """Rows of M . p = M."""
    perms = [(Permutation.identity(n), 1), (p, -1)]
    return _perm_sum_rows(n, dchi, dv, perms, entry_index, offset)


def _fl_rows(n, dchi, dv, entry_index, offset=0):
    rows = _perm_sum_rows(n, dchi, dv, _subset_perms(n, (n - 2, n - 1, n)),
                          entry_index, offset)
    if n >= 4:
        rows += _perm_sum_rows(
            n, dchi, dv, _subset_perms(n, (n - 3, n - 2, n - 1), signed=True),
            entry_index, offset)
        for j in range(1, n - 3):
            rows += _difference_rows(n, dchi, dv, _tau(n, j, j + 1), entry_index, offset)
        tau, lam = _tau(n, n - 3, n - 2), _tau(n, n - 1, n)
        perms = [(Permutation.identity(n), 1), (tau, -1), (lam, -1), (tau * lam, 1)]
        rows += _perm_sum_rows(n, dchi, dv, perms, entry_index, offset)
    return rows


def _random_from_nullspace(rows, ncols, seed, count):
    basis = linalg.nullspace(rows, ncols)
    rng = random.Random(f"constrained/{seed}")
    out = []
    for _ in range(count):
        vec = [Fraction(0)] * ncols
        for b in basis:
            c = rng.randint(-9, 9)
            if c:
                for i, v in enumerate(b):
                    if v:
                        vec[i] += c * v
        out.append(vec)
    return out


def random_FL(n, dchi, dv=1, seed=0, count=1):
    """Random exact elements of the packed constrained space."""
    entries = _entries(n, dchi, dv)
    entry_index = {e: i for i, e in enumerate(entries)}
    rows = _fl_rows(n, dchi, dv, entry_index)
    vecs = _random_from_nullspace(rows, len(entries), f"FL/{seed}/{n}/{dchi}", count)
    out = []
    for vec in vecs:
        table = {entries[i]: c for i, c in enumerate(vec) if c}
        out.append(MultilinearMap(n, dchi, dv, table))
    return out


def random_FRT(n, dchi, dv=1, seed=0, count=1):
    """Random exact pairs of the coupled constrained space."""
    entries = _entries(n, dchi, dv)
    entry_index = {e: i for i, e in enumerate(entries)}
    ne = len(entries)
    rows = []
    ident = Permutation.identity(n)
    # R antisymmetric in (n-2, n-1)
    rows += _perm_sum_rows(n, dchi, dv, [(ident, 1), (_tau(n, n - 2, n - 1), 1)],
                           entry_index, 0)
    # T antisymmetric in (n-1, n), symmetric in 1..n-2
    rows += _perm_sum_rows(n, dchi, dv, [(ident, 1), (_tau(n, n - 1, n), 1)],
                           entry_index, ne)
    for j in range(1, n - 2):
        rows += _difference_rows(n, dchi, dv, _tau(n, j, j + 1), entry_index, ne)
    # coupled cyclic sum over the last three slots
    cyc = Permutation.cycle(n, [n - 2, n - 1, n])
    cyc_perms = [(ident, 1), (cyc, 1), (cyc * cyc, 1)]
    for idx in itertools.product(range(dchi), repeat=n):
        for out in range(dv):
            row = {}
            for p, sign in cyc_perms:
                permuted = tuple(idx[p(k) - 1] for k in range(1, n + 1))
                col = entry_index[(permuted, out)]
                row[col] = row.get(col, 0) + sign
                col2 = entry_index[(permuted, out)] + ne
                row[col2] = row.get(col2, 0) + sign
            row = {c: Fraction(v) for c, v in row.items() if v}
            if row:
                rows.append(row)
    if n >= 4:
        cyc2 = Permutation.cycle(n, [n - 3, n - 2, n - 1])
        rows += _perm_sum_rows(n, dchi, dv, [(ident, 1), (cyc2, 1), (cyc2 * cyc2, 1)],
                               entry_index, 0)
        for j in range(1, n - 3):
            rows += _difference_rows(n, dchi, dv, _tau(n, j, j + 1), entry_index, 0)
    vecs = _random_from_nullspace(rows, 2 * ne, f"FRT/{seed}/{n}/{dchi}", count)
    out = []
    for vec in vecs:
        r_table = {entries[i]: c for i, c in enumerate(vec[:ne]) if c}
        t_table = {entries[i - ne]: c for i, c in enumerate(vec[ne:], start=ne) if c}
        out.append((MultilinearMap(n, dchi, dv, r_table),
                    MultilinearMap(n, dchi, dv, t_table)))
    return out
