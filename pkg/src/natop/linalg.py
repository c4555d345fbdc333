"""Exact linear algebra over the rationals.

Rows are sparse mappings ``column index -> Fraction``.  Everything is
deterministic: the pivot of a row is its smallest column, rows are processed
in the order given, and free columns are reported in increasing order.
Sizes here are desk scale (hundreds of rows), so no fraction-free tricks are
needed; plain normalized elimination keeps the code obviously correct.
"""

from fractions import Fraction

__all__ = ["RowSpace", "rank", "nullspace", "express"]


class RowSpace:
    """Incremental row-echelon basis of a span of sparse rows."""

    def __init__(self):
        self.pivots = {}  # pivot column -> reduced row with leading coeff 1

    @property
    def rank(self):
        return len(self.pivots)

    def reduce(self, row):
        """Reduce ``row`` against the basis.

        Returns ``(remainder, pivot)`` where ``pivot`` is the leading column
        of the remainder, or ``None`` when the row lies in the span.
        """
        row = {c: v for c, v in row.items() if v}
        while row:
            c = min(row)
            piv = self.pivots.get(c)
            if piv is None:
                return row, c
            f = row.pop(c)
            for pc, pv in piv.items():
                if pc == c:
                    continue
                nv = row.get(pc, 0) - f * pv
                if nv:
                    row[pc] = nv
                else:
                    row.pop(pc, None)
        return row, None

    def add(self, row):
        """Absorb ``row``; returns True when it enlarged the span."""
        red, c = self.reduce(row)
        if c is None:
            return False
        lead = red[c]
        self.pivots[c] = {k: v / lead for k, v in red.items()}
        return True

    def contains(self, row):
        return self.reduce(row)[1] is None


def rank(rows):
    space = RowSpace()
    for row in rows:
        space.add(row)
    return space.rank


def nullspace(rows, ncols):
    """Basis of the right kernel ``{x : A x = 0}`` as dense Fraction lists.

    One basis vector per free column, in increasing column order, with a 1
    in the free position (the usual reduced-echelon parametrization).
    """
    space = RowSpace()
    for row in rows:
        space.add(row)
    cols = sorted(space.pivots)
    # back-substitution: clear pivot columns above-right
    for i in range(len(cols) - 1, -1, -1):
        row = space.pivots[cols[i]]
        for c2 in cols[i + 1:]:
            f = row.get(c2)
            if not f:
                continue
            for k, v in space.pivots[c2].items():
                if k == c2:
                    continue
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
            row.pop(c2, None)
    pivot_cols = set(cols)
    basis = []
    for free in range(ncols):
        if free in pivot_cols:
            continue
        vec = [Fraction(0)] * ncols
        vec[free] = Fraction(1)
        for c in cols:
            f = space.pivots[c].get(free)
            if f:
                vec[c] = -f
        basis.append(vec)
    return basis


def express(rows, target):
    """Coefficients writing ``target`` as a combination of ``rows``.

    Returns a list of Fractions aligned with ``rows``, or None when the
    target is outside their span.
    """
    basis = []   # (reduced row, combination over original row indices)
    pivots = {}  # pivot column -> index into basis

    def _reduce(row, combo, sign):
        # invariant maintained: row = start - sign * (combo . rows)
        row = {c: v for c, v in row.items() if v}
        combo = dict(combo)
        while row:
            c = min(row)
            i = pivots.get(c)
            if i is None:
                return row, combo, c
            brow, bcombo = basis[i]
            f = row.pop(c)
            for pc, pv in brow.items():
                if pc == c:
                    continue
                nv = row.get(pc, 0) - f * pv
                if nv:
                    row[pc] = nv
                else:
                    row.pop(pc, None)
            for j, v in bcombo.items():
                nv = combo.get(j, 0) + sign * f * v
                if nv:
                    combo[j] = nv
                else:
                    combo.pop(j, None)
        return row, combo, None

    for idx, row in enumerate(rows):
        # invariant: red = (combo . rows), so seed with {idx: 1}, sign -1
        red, combo, c = _reduce(row, {idx: Fraction(1)}, -1)
        if c is None:
            continue
        lead = red[c]
        red = {k: v / lead for k, v in red.items()}
        combo = {k: v / lead for k, v in combo.items()}
        pivots[c] = len(basis)
        basis.append((red, combo))

    # invariant: remainder = target - (combo . rows)
    red, combo, c = _reduce(target, {}, +1)
    if c is not None:
        return None
    out = [Fraction(0)] * len(rows)
    for j, v in combo.items():
        out[j] = v
    return out
