"""The decorated graph model of natural operators and its raw counterpart.

A configuration is rigid: every vertex input is a numbered position and the
wiring is a bijection from vertex outputs to input positions (one of them
the anchor).  The actual graph space is the quotient by input symmetries:
black-vertex inputs are fully symmetric, the first ``k`` inputs of a raw
derivative vertex are symmetric, white-vertex inputs are fully symmetric,
and permuting the inputs of a kernel-decorated vertex acts on its
decoration through the symbol module.  The quotient is taken by exact
linear algebra over relator vectors, not by canonical hashing.

Output ids double as vertex ids: ``("b", i)`` labeled blacks, ``("v", j)``
decorated vertices, ``("n", j)`` derivative vertices, ``("w", 1)`` the
white vertex.  Input positions are ``(kind, j, p)`` with ``p >= 1``, plus
``("anchor",)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import linalg
from .perm_algebra import Permutation, kernel_basis, kernel_dimension
from .terms import CovD, Compose, Product, Slot, Trace, combo, relabel_slots
from .identities import fresh_slots, realized_family_member
from .jets import JetContext, evaluate, random_valuation
from .terms import depth as term_depth
from .terms import eval_components

__all__ = [
    "DecoratedConfig", "RawConfig", "DecoratedSpace",
    "enumerate_decorated", "dim_H0_via_delta_h", "vforder",
    "contraction_schemes", "check_theoremB_bound",
    "to_tensor_term", "independence_rank", "basis_export", "serialize_wiring",
]


@dataclass(frozen=True)
class DecoratedConfig:
    d: int
    blacks: tuple      # arity per label 1..d
    decos: tuple       # sorted (arity, kernel basis index)
    wiring: tuple      # input ids aligned with output order

    def outputs(self):
        return ([("b", i) for i in range(1, self.d + 1)]
                + [("v", j) for j in range(1, len(self.decos) + 1)])

    def sort_key(self):
        return (self.blacks, self.decos, self.wiring)


@dataclass(frozen=True)
class RawConfig:
    d: int
    blacks: tuple
    nablas: tuple      # sorted symmetric arities k (vertex arity k + 2)
    white: object      # None or the white arity
    wiring: tuple

    def outputs(self):
        out = ([("b", i) for i in range(1, self.d + 1)]
               + [("n", j) for j in range(1, len(self.nablas) + 1)])
        if self.white is not None:
            out.append(("w", 1))
        return out

    def sort_key(self):
        return (self.blacks, self.nablas, self.white or 0, self.wiring)


def vforder(config):
    """Formal vector-field order: the sum of black (or scheme) arities."""
    if isinstance(config, ContractionScheme):
        return sum(config.varities)
    return sum(config.blacks)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def _arity_partitions(total):
    """Multisets of integers >= 1 with the given sum, decreasing order."""
    if total == 0:
        return [()]
    out = []

    def rec(rest, maxpart, acc):
        if rest == 0:
            out.append(tuple(acc))
            return
        for part in range(min(rest, maxpart), 0, -1):
            rec(rest - part, part, acc + [part])

    rec(total, total, [])
    return out


def _input_list(arities):
    """All input positions for {vertex id: arity} plus the anchor."""
    inputs = []
    for vid, arity in arities:
        for p in range(1, arity + 1):
            inputs.append(vid + (p,))
    inputs.append(("anchor",))
    return inputs


def _wirings(outputs, inputs):
    for assignment in itertools.permutations(inputs):
        yield tuple(assignment)


def _deco_lists(svals):
    """Sorted (s, k) tuples for a sorted multiset of decorated arities."""
    groups = []
    for s, grp in itertools.groupby(svals):
        count = len(list(grp))
        kdim = kernel_dimension(s)
        groups.append([tuple((s, k) for k in ks)
                       for ks in itertools.combinations_with_replacement(range(kdim), count)])
    for parts in itertools.product(*groups):
        yield tuple(itertools.chain.from_iterable(parts))


def _decorated_configs(d, vforder_max=None):
    configs = []
    for blacks in itertools.product(range(d), repeat=d):
        total_u = sum(blacks)
        if total_u > d - 1:
            continue
        if vforder_max is not None and total_u > vforder_max:
            continue
        budget = d - 1 - total_u
        for parts in _arity_partitions(budget):
            svals = sorted(p + 1 for p in parts)
            for decos in _deco_lists(svals):
                vertex_arities = (
                    [(("b", i), blacks[i - 1]) for i in range(1, d + 1)]
                    + [(("v", j), decos[j - 1][0]) for j in range(1, len(decos) + 1)]
                )
                outputs = [vid for vid, _ in vertex_arities]
                inputs = _input_list(vertex_arities)
                for wiring in _wirings(outputs, inputs):
                    configs.append(DecoratedConfig(d, blacks, decos, wiring))
    configs.sort(key=DecoratedConfig.sort_key)
    return configs


def _raw_configs(d, with_white):
    configs = []
    budget_total = d - 1 + (1 if with_white else 0)
    for blacks in itertools.product(range(max(d, 1)), repeat=d):
        total_u = sum(blacks)
        if total_u > budget_total:
            continue
        rest = budget_total - total_u
        white_range = range(2, rest + 1) if with_white else [None]
        for white in white_range:
            left = rest - (white or 0)
            if left < 0:
                continue
            for parts in _arity_partitions(left):
                # each part is k + 1 for a derivative vertex of symmetric arity k
                ks = tuple(sorted(p - 1 for p in parts))
                vertex_arities = (
                    [(("b", i), blacks[i - 1]) for i in range(1, d + 1)]
                    + [(("n", j), ks[j - 1] + 2) for j in range(1, len(ks) + 1)]
                )
                if white is not None:
                    vertex_arities.append((("w", 1), white))
                outputs = [vid for vid, _ in vertex_arities]
                inputs = _input_list(vertex_arities)
                for wiring in _wirings(outputs, inputs):
                    configs.append(RawConfig(d, blacks, ks, white, wiring))
    configs.sort(key=RawConfig.sort_key)
    return configs


# ---------------------------------------------------------------------------
# relators
# ---------------------------------------------------------------------------

def _swap_inputs(wiring, a, b):
    def sub(x):
        if x == a:
            return b
        if x == b:
            return a
        return x
    return tuple(sub(x) for x in wiring)


def _swap_vertices(config_outputs, wiring, va, vb):
    """Exchange two whole vertices: outputs and every input position."""
    pos = {out: i for i, out in enumerate(config_outputs)}
    new = list(wiring)
    new[pos[va]], new[pos[vb]] = new[pos[vb]], new[pos[va]]

    def sub(x):
        if x[0] == va[0] and len(x) == 3:
            if (x[0], x[1]) == va:
                return (vb[0], vb[1], x[2])
            if (x[0], x[1]) == vb:
                return (va[0], va[1], x[2])
        return x

    return tuple(sub(x) for x in new)


@lru_cache(maxsize=None)
def _deco_action(s, p_images):
    """Matrix of the right action of a slot transposition on the kernel basis."""
    p = Permutation(p_images)
    basis = kernel_basis(s)
    rows = [b.sparse() for b in basis]
    out = []
    for b in basis:
        coeffs = linalg.express(rows, b.right_action(p).sparse())
        if coeffs is None:
            raise AssertionError("kernel is not stable under the action")
        out.append(coeffs)
    return tuple(tuple(c) for c in out)


def _canon_decorated(d, blacks, decos, wiring):
    """Stably sort the decorated vertices and relabel the wiring to match."""
    order = sorted(range(len(decos)), key=lambda j: (decos[j], j))
    if order == list(range(len(decos))):
        return DecoratedConfig(d, blacks, tuple(decos), tuple(wiring))
    rename = {old + 1: new + 1 for new, old in enumerate(order)}

    def sub(x):
        if x[0] == "v" and len(x) == 3:
            return ("v", rename[x[1]], x[2])
        return x

    by_out = {}
    outputs = ([("b", i) for i in range(1, d + 1)]
               + [("v", j) for j in range(1, len(decos) + 1)])
    for out_id, inp in zip(outputs, wiring):
        if out_id[0] == "v":
            out_id = ("v", rename[out_id[1]])
        by_out[out_id] = sub(inp)
    new_decos = tuple(decos[j] for j in order)
    new_wiring = tuple(by_out[o] for o in
                       [("b", i) for i in range(1, d + 1)]
                       + [("v", j) for j in range(1, len(decos) + 1)])
    return DecoratedConfig(d, blacks, new_decos, new_wiring)


def _decorated_relators(configs):
    index = {c: i for i, c in enumerate(configs)}
    rows = []
    for i, g in enumerate(configs):
        outputs = g.outputs()
        for lab in range(1, g.d + 1):
            u = g.blacks[lab - 1]
            for p in range(1, u):
                w2 = _swap_inputs(g.wiring, ("b", lab, p), ("b", lab, p + 1))
                rows.append({i: Fraction(1),
                             index[DecoratedConfig(g.d, g.blacks, g.decos, w2)]: Fraction(-1)})
        for j, (s, k) in enumerate(g.decos, start=1):
            for p in range(1, s):
                tau = Permutation.transposition(s, p, p + 1)
                w2 = _swap_inputs(g.wiring, ("v", j, p), ("v", j, p + 1))
                action = _deco_action(s, tau.images)[k]
                row = {i: Fraction(1)}
                for t, c in enumerate(action):
                    if not c:
                        continue
                    decos2 = list(g.decos)
                    decos2[j - 1] = (s, t)
                    g2 = _canon_decorated(g.d, g.blacks, decos2, w2)
                    j2 = index[g2]
                    row[j2] = row.get(j2, Fraction(0)) - c
                rows.append({c2: v for c2, v in row.items() if v})
        for j1 in range(1, len(g.decos) + 1):
            for j2 in range(j1 + 1, len(g.decos) + 1):
                if g.decos[j1 - 1] != g.decos[j2 - 1]:
                    continue
                w2 = _swap_vertices(outputs, g.wiring, ("v", j1), ("v", j2))
                g2 = DecoratedConfig(g.d, g.blacks, g.decos, w2)
                if g2 != g:
                    rows.append({i: Fraction(1), index[g2]: Fraction(-1)})
    return rows


def _raw_relators(configs):
    index = {c: i for i, c in enumerate(configs)}
    rows = []
    for i, g in enumerate(configs):
        outputs = g.outputs()
        for lab in range(1, g.d + 1):
            u = g.blacks[lab - 1]
            for p in range(1, u):
                w2 = _swap_inputs(g.wiring, ("b", lab, p), ("b", lab, p + 1))
                rows.append({i: Fraction(1),
                             index[RawConfig(g.d, g.blacks, g.nablas, g.white, w2)]: Fraction(-1)})
        for j, k in enumerate(g.nablas, start=1):
            for p in range(1, k):  # only the first k inputs are symmetric
                w2 = _swap_inputs(g.wiring, ("n", j, p), ("n", j, p + 1))
                rows.append({i: Fraction(1),
                             index[RawConfig(g.d, g.blacks, g.nablas, g.white, w2)]: Fraction(-1)})
        if g.white is not None:
            for p in range(1, g.white):
                w2 = _swap_inputs(g.wiring, ("w", 1, p), ("w", 1, p + 1))
                rows.append({i: Fraction(1),
                             index[RawConfig(g.d, g.blacks, g.nablas, g.white, w2)]: Fraction(-1)})
        for j1 in range(1, len(g.nablas) + 1):
            for j2 in range(j1 + 1, len(g.nablas) + 1):
                if g.nablas[j1 - 1] != g.nablas[j2 - 1]:
                    continue
                w2 = _swap_vertices(outputs, g.wiring, ("n", j1), ("n", j2))
                g2 = RawConfig(g.d, g.blacks, g.nablas, g.white, w2)
                if g2 != g:
                    rows.append({i: Fraction(1), index[g2]: Fraction(-1)})
    return rows


# ---------------------------------------------------------------------------
# the decorated space and the kernel of the horizontal differential
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecoratedSpace:
    d: int
    configs: tuple
    dimension: int
    basis: tuple  # representative configs spanning the quotient


@lru_cache(maxsize=None)
def enumerate_decorated(d, vforder_max=None):
    """Basis description of the decorated graph space in degree ``d``."""
    if d < 1:
        raise ValueError("the number of arguments must be >= 1")
    configs = _decorated_configs(d, vforder_max)
    rows = _decorated_relators(configs)
    space = linalg.RowSpace()
    for row in rows:
        space.add(row)
    relator_rank = space.rank
    basis = []
    for i, c in enumerate(configs):
        if space.add({i: Fraction(1)}):
            basis.append(c)
    dimension = len(configs) - relator_rank
    assert len(basis) == dimension
    return DecoratedSpace(d, tuple(configs), dimension, tuple(basis))


def _delta_image(g, index1):
    """The horizontal differential of a raw no-white configuration.

    Returns a sparse vector over the one-white basis: each derivative
    vertex is replaced, with sign -1, by a white vertex of the same arity.
    """
    out = {}
    outputs = g.outputs()
    for j, k in enumerate(g.nablas, start=1):
        remaining = g.nablas[: j - 1] + g.nablas[j:]

        def sub(x, j=j):
            if x[0] == "n" and len(x) == 3:
                if x[1] == j:
                    return ("w", 1, x[2])
                if x[1] > j:
                    return ("n", x[1] - 1, x[2])
            return x

        # outputs reorder: drop ("n", j), append ("w", 1) at the end
        old_out_order = outputs
        new_wiring_by_out = {}
        for out_id, inp in zip(old_out_order, g.wiring):
            if out_id == ("n", j):
                new_out = ("w", 1)
            elif out_id[0] == "n" and out_id[1] > j:
                new_out = ("n", out_id[1] - 1)
            else:
                new_out = out_id
            new_wiring_by_out[new_out] = sub(inp)
        g2 = RawConfig(g.d, g.blacks, remaining, k + 2, ())
        new_outputs = g2.outputs()
        wiring = tuple(new_wiring_by_out[o] for o in new_outputs)
        g2 = RawConfig(g.d, g.blacks, remaining, k + 2, wiring)
        i2 = index1[g2]
        out[i2] = out.get(i2, Fraction(0)) - 1
    return {c: v for c, v in out.items() if v}


@lru_cache(maxsize=None)
def dim_H0_via_delta_h(d):
    """Kernel dimension of the horizontal differential on the raw slice."""
    if d < 1:
        raise ValueError("the number of arguments must be >= 1")
    configs0 = _raw_configs(d, with_white=False)
    configs1 = _raw_configs(d, with_white=True)
    index1 = {c: i for i, c in enumerate(configs1)}
    w0 = linalg.RowSpace()
    for row in _raw_relators(configs0):
        w0.add(row)
    q0 = len(configs0) - w0.rank
    stacked = linalg.RowSpace()
    for row in _raw_relators(configs1):
        stacked.add(row)
    w1_rank = stacked.rank
    for g in configs0:
        img = _delta_image(g, index1)
        if img:
            stacked.add(img)
    induced_rank = stacked.rank - w1_rank
    return q0 - induced_rank


# ---------------------------------------------------------------------------
# contraction schemes and the arity bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionScheme:
    d: int
    varities: tuple    # arity of the labeled vertex per label 1..d
    gens: tuple        # sorted (n, i): generator vertices, n ordered inputs
    wiring: tuple

    def outputs(self):
        return ([("b", i) for i in range(1, self.d + 1)]
                + [("v", j) for j in range(1, len(self.gens) + 1)])


def _family_gen_counts(kind):
    if kind == "classical":
        return lambda n: 1 if n == 2 else 2
    if kind == "canonical":
        return lambda n: 1
    raise ValueError(f"unknown family kind {kind!r}")


def contraction_schemes(d, vforder_max=0, family="classical"):
    """All rigid iteration diagrams with formal vf-order up to the bound."""
    counts = _family_gen_counts(family)
    schemes = []
    for varities in itertools.product(range(vforder_max + 1), repeat=d):
        if sum(varities) > vforder_max:
            continue
        budget = d - 1 - sum(varities)
        if budget < 0:
            continue
        for parts in _arity_partitions(budget):
            nvals = sorted(p + 1 for p in parts)
            index_choices = [range(counts(n)) for n in nvals]
            for gen_idx in itertools.product(*index_choices):
                gens = tuple(sorted(zip(nvals, gen_idx)))
                vertex_arities = (
                    [(("b", i), varities[i - 1]) for i in range(1, d + 1)]
                    + [(("v", j), gens[j - 1][0]) for j in range(1, len(gens) + 1)]
                )
                outputs = [vid for vid, _ in vertex_arities]
                inputs = _input_list(vertex_arities)
                for wiring in _wirings(outputs, inputs):
                    schemes.append(ContractionScheme(d, varities, gens, wiring))
    return schemes


def check_theoremB_bound(d, a, family="classical"):
    """Arity bound over every scheme of vf-order <= a.

    A labeled vertex of arity p >= 1 stands for an insertion of the basic
    differentiation operator on p + 1 arguments; their (p + 1)-sum must not
    exceed a plus their count.  At a = 0 no such vertex may occur at all.
    """
    schemes = contraction_schemes(d, vforder_max=a, family=family)
    violations = []
    only_generators = True
    for sch in schemes:
        qs = [p + 1 for p in sch.varities if p >= 1]
        t = len(qs)
        if t:
            only_generators = False
        if sum(qs) > a + t:
            violations.append(sch)
    return {
        "d": d,
        "a": a,
        "schemes": len(schemes),
        "holds": not violations,
        "vforder0_uses_only_generators": only_generators if a == 0 else None,
        "violations": len(violations),
    }


# ---------------------------------------------------------------------------
# bridge to tensor terms
# ---------------------------------------------------------------------------

_DECO_TERM_CACHE = {}


def _decoration_term(s, k, family_kind):
    """Realize a kernel basis decoration as a module combination of family
    operators composed with slot permutations (slots 1..s)."""
    key = (s, k, family_kind)
    hit = _DECO_TERM_CACHE.get(key)
    if hit is not None:
        return hit
    from .perm_algebra import GeneratorFamily
    fam = GeneratorFamily(family_kind)
    rows = []
    tags = []
    for gi, sym in enumerate(fam.members(s)):
        for p in Permutation.all(s):
            rows.append(sym.right_action(p).sparse())
            tags.append((gi, p))
    target = kernel_basis(s)[k].sparse()
    coeffs = linalg.express(rows, target)
    if coeffs is None:
        raise ValueError(f"family {family_kind!r} does not cover arity {s}")
    from .terms import Permute
    parts = []
    for c, (gi, p) in zip(coeffs, tags):
        if c:
            parts.append((c, Permute(realized_family_member(family_kind, s, gi), p)))
    term = combo(parts)
    _DECO_TERM_CACHE[key] = term
    return term


def _black_term(label, arity, args):
    if arity == 0:
        return Slot(label)
    holes = fresh_slots(arity)
    body = Slot(label)
    wrt = ()
    for h in reversed(holes):
        body = CovD(Slot(h), body, wrt)
        wrt = (h,) + wrt
    term = body
    for h, a in zip(holes, args):
        term = Compose(term, h, a)
    return term


def to_tensor_term(config, family_kind="classical"):
    """Realize a decorated configuration as an operator expression.

    Black vertices become iterated covariant derivatives of their argument,
    decorations become family combinations, wires become substitutions,
    cycles become traces, and closed components scalar factors.
    """
    outputs = config.outputs()
    by_out = dict(zip(outputs, config.wiring))
    source = {inp: out for out, inp in by_out.items()}

    def vertex_arity(v):
        if v[0] == "b":
            return config.blacks[v[1] - 1]
        return config.decos[v[1] - 1][0]

    def realize_vertex(v, cut):
        args = []
        for p in range(1, vertex_arity(v) + 1):
            inp = (v[0], v[1], p)
            src = source[inp]
            if cut is not None and cut == (src, inp):
                args.append(Slot(0))
            else:
                args.append(realize_vertex(src, cut))
        if v[0] == "b":
            return _black_term(v[1], vertex_arity(v), args)
        s, k = config.decos[v[1] - 1]
        base = _decoration_term(s, k, family_kind)
        holes = fresh_slots(s)
        term = relabel_slots(base, {i + 1: h for i, h in enumerate(holes)})
        for h, a in zip(holes, args):
            term = Compose(term, h, a)
        return term

    # component structure: follow each vertex's output to the next vertex
    def next_vertex(v):
        inp = by_out[v]
        if inp == ("anchor",):
            return None
        return (inp[0], inp[1])

    anchored_root = source[("anchor",)]
    # vertices reaching the anchor
    reaches = {}
    for v in outputs:
        seen = []
        cur = v
        while cur is not None and cur not in reaches and cur not in seen:
            seen.append(cur)
            cur = next_vertex(cur)
        val = reaches.get(cur, False) if cur is not None else True
        if cur in seen:   # fell into a cycle: does not reach the anchor
            val = False
        for w in seen:
            reaches[w] = val

    vector_term = realize_vertex(anchored_root, None)

    # closed components: one cycle each, realized as a trace
    in_cycle = set()
    scalars = []
    for v in sorted(v for v in outputs if not reaches[v]):
        if v in in_cycle:
            continue
        # walk forward to find the cycle through v's component
        path = []
        cur = v
        while cur not in path:
            path.append(cur)
            cur = next_vertex(cur)
        cycle = path[path.index(cur):]
        if any(w in in_cycle for w in cycle):
            continue
        in_cycle.update(cycle)
        vmin = min(cycle)
        cut = (vmin, by_out[vmin])
        scalars.append(Trace(realize_vertex(vmin, cut)))

    term = vector_term
    for s in reversed(scalars):
        term = Product(s, term)
    return term


def independence_rank(d, m, trials=8, seed=0, family="classical"):
    """Rank of the random-jet evaluation matrix of the graph basis."""
    space = enumerate_decorated(d)
    terms = [to_tensor_term(c, family) for c in space.basis]
    kmax = max((term_depth(t) for t in terms), default=0) + 1
    ctx = JetContext(m, K=kmax)
    valuations = [random_valuation(seed, t) for t in range(trials)]
    rows = []
    for term in terms:
        comps = eval_components(term, ctx)
        row = {}
        col = 0
        for val in valuations:
            for poly in comps:
                x = evaluate(poly, val)
                if x:
                    row[col] = x
                col += 1
        rows.append(row)
    return linalg.rank(rows)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def serialize_wiring(config):
    def name(x):
        if x == ("anchor",):
            return "anchor"
        if len(x) == 2:
            return f"{x[0]}{x[1]}"
        return f"{x[0]}{x[1]}.{x[2]}"
    outputs = config.outputs()
    return "; ".join(f"{name(o)}->{name(i)}" for o, i in zip(outputs, config.wiring))


def basis_export(d, family_kind="classical"):
    from .dsl import print_term
    space = enumerate_decorated(d)
    basis = []
    for c in space.basis:
        basis.append({
            "graph": serialize_wiring(c),
            "blacks": list(c.blacks),
            "decorations": [{"arity": s, "kernel_index": k} for s, k in c.decos],
            "vforder": vforder(c),
            "term": print_term(to_tensor_term(c, family_kind)),
        })
    return {"d": d, "dimension": space.dimension, "basis": basis}
