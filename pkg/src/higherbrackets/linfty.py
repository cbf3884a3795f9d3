"""Finite-dimensional L-infinity structures and their generating vector fields.

A structure on a graded space with basis ``e_0..e_{N-1}`` is a family of
odd, graded-symmetric n-ary brackets given by structure constants.  It is
stored on non-decreasing index tuples only; other orderings follow by the
Koszul sign.  The generating field lives in a ``vect`` context whose base
coordinates carry the basis names and parities, and the two are related by

    Q^k_{i1..in} = d_i1 (d_i2 (... d_in Q^k))(0)
    {e_i1, ..., e_in}^k = (-1)^(e~_i1 + ... + e~_in + n) Q^k_{i1..in}
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import factorial
from typing import Sequence

from .contexts import LieContext
from .kernel import ODD, SuperPoly, graded_sort, monomial_factors, partial, shuffles, split_monomial
from .reports import Report

Vector = dict  # basis index -> Fraction, zero entries pruned


class StructureError(ValueError):
    pass


def _add(acc: dict, vec: dict, c=1):
    for k, v in vec.items():
        x = acc.get(k, 0) + c * v
        if x:
            acc[k] = x
        else:
            acc.pop(k, None)


def sorted_tuples(parities: Sequence[int], n: int, antisymmetric: bool = False):
    """Index tuples that index a (graded-)symmetric table of arity n.

    In a symmetric table an odd index cannot repeat; in an antisymmetric
    one an even index cannot.
    """
    banned = 0 if antisymmetric else ODD
    for t in combinations_with_replacement(range(len(parities)), n):
        if any(parities[i] == banned and t.count(i) > 1 for i in set(t)):
            continue
        yield t


@dataclass
class LInftyStructure:
    names: list[str]
    parities: list[int]
    tables: dict[int, dict[tuple[int, ...], Vector]] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.names) != len(self.parities):
            raise StructureError("names and parities differ in length")
        for n, table in self.tables.items():
            for idx, vec in table.items():
                if list(idx) != sorted(idx):
                    raise StructureError(f"table key {idx} is not sorted")
                want = (sum(self.parities[i] for i in idx) + 1) & 1
                for k in vec:
                    if self.parities[k] != want:
                        raise StructureError(f"bracket {idx} -> e_{k} is not odd")

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def arity_cap(self) -> int:
        return max(self.tables, default=-1)

    def value(self, idx: Sequence[int]) -> Vector:
        """{e_i1, ..., e_in} for an arbitrary ordering of indices."""
        par = [self.parities[i] for i in idx]
        order, sign = graded_sort(idx, par)
        key = tuple(idx[i] for i in order)
        vec = self.tables.get(len(idx), {}).get(key)
        if not vec:
            return {}
        return {k: sign * v for k, v in vec.items()}

    def bracket(self, vectors: Sequence[Vector]) -> Vector:
        """Multilinear extension to homogeneous vectors with rational coefficients."""
        out: dict = {}

        def rec(pos, idx, coeff):
            if pos == len(vectors):
                v = self.value(idx)
                if v:
                    _add(out, v, coeff)
                return
            for i, c in vectors[pos].items():
                rec(pos + 1, idx + [i], coeff * c)

        rec(0, [], Fraction(1))
        return out

    def normalized(self) -> LInftyStructure:
        tables = {}
        for n, table in self.tables.items():
            kept = {k: dict(v) for k, v in table.items() if v}
            if kept:
                tables[n] = kept
        return LInftyStructure(list(self.names), list(self.parities), tables)

    def __eq__(self, other):
        if not isinstance(other, LInftyStructure):
            return NotImplemented
        a, b = self.normalized(), other.normalized()
        return a.names == b.names and a.parities == b.parities and a.tables == b.tables


def coordinate_context(names: Sequence[str], parities: Sequence[int]) -> LieContext:
    """``vect`` context whose coordinates are the basis of the structure."""
    return LieContext.build("vect", list(zip(names, parities)))


def components(ctx: LieContext, q: SuperPoly) -> dict[str, SuperPoly]:
    """Q = sum_k Q^k d_k  ->  {k: Q^k}."""
    sig = ctx.sig
    out: dict[str, dict] = {}
    for key, c in q.terms.items():
        rest, part = split_monomial(sig, key, ctx.conj)
        factors = monomial_factors(sig, part)
        if len(factors) != 1 or factors[0][1] != 1:
            raise StructureError("not a vector field")
        name = ctx._base_of[factors[0][0]]
        out.setdefault(name, {})[rest] = c
    return {k: SuperPoly(sig, v) for k, v in out.items()}


def taylor_coefficient(comp: SuperPoly, names: Sequence[str]) -> Fraction:
    """d_names[0] (... d_names[-1] f)(0), innermost derivative applied first."""
    f = comp
    for name in reversed(names):
        f = partial(f, name)
        if not f:
            return Fraction(0)
    return f.constant_term()


def brackets_from_q(ctx: LieContext, q: SuperPoly, arity_cap: int) -> LInftyStructure:
    """Structure constants read off the Taylor expansion of Q at the origin."""
    if ctx.kind != "vect":
        raise StructureError("Q must be a vector field in a vect context")
    if q and ctx.parity(q) != ODD:
        raise StructureError("Q must be odd")
    names = list(ctx.base)
    par = [ctx.sig.parity_of(n) for n in names]
    comps = components(ctx, q)
    tables: dict = {}
    for n in range(arity_cap + 1):
        table = {}
        for idx in sorted_tuples(par, n):
            sign = -1 if (sum(par[i] for i in idx) + n) & 1 else 1
            vec = {}
            for k, name in enumerate(names):
                comp = comps.get(name)
                if comp is None:
                    continue
                c = taylor_coefficient(comp, [names[i] for i in idx])
                if c:
                    vec[k] = sign * c
            if vec:
                table[idx] = vec
        if table:
            tables[n] = table
    return LInftyStructure(names, par, tables)


def q_from_brackets(s: LInftyStructure, ctx: LieContext | None = None) -> tuple[LieContext, SuperPoly]:
    """Generating field Q^k = sum (1/prod m!) xi^in ... xi^i1 Q^k_{i1..in}."""
    ctx = ctx or coordinate_context(s.names, s.parities)
    sig = ctx.sig
    q = sig.zero()
    for n, table in s.tables.items():
        for idx, vec in table.items():
            sign = -1 if (sum(s.parities[i] for i in idx) + n) & 1 else 1
            weight = 1
            for i in set(idx):
                weight *= factorial(idx.count(i))
            mono = sig.one()
            for i in reversed(idx):
                mono = mono * sig.gen(s.names[i])
            for k, c in vec.items():
                d = sig.gen(ctx._conj_of[s.names[k]])
                q = q + (mono * d).scale(Fraction(sign) * c / weight)
    return ctx, q


def jacobiator_table(s: LInftyStructure, idx: Sequence[int]) -> Vector:
    """n-th Jacobiator on basis vectors via the shuffle sum."""
    n = len(idx)
    par = [s.parities[i] for i in idx]
    out: dict = {}
    for k in range(n + 1):
        for perm, sign in shuffles(k, n - k, par):
            inner = s.value([idx[i] for i in perm[:k]])
            if not inner:
                continue
            rest = [{idx[i]: Fraction(1)} for i in perm[k:]]
            _add(out, s.bracket([inner] + rest), sign)
    return out


def square_taylor(ctx: LieContext, q: SuperPoly, idx: Sequence[int]) -> Vector:
    """(-1)^n d_i1 ... d_in (Q^2)^k (0), the same normalisation as the Jacobiator."""
    j = ctx.bracket(q, q).scale(Fraction(1, 2))
    comps = components(ctx, j)
    names = list(ctx.base)
    sign = -1 if len(idx) & 1 else 1
    out = {}
    for k, name in enumerate(names):
        comp = comps.get(name)
        if comp is None:
            continue
        c = taylor_coefficient(comp, [names[i] for i in idx])
        if c:
            out[k] = sign * c
    return out


def check_jacobi_structure(s: LInftyStructure, n_max: int) -> Report:
    """Jacobiators by shuffle sums, against Taylor coefficients of Q^2.

    Each arity gets a verdict (all Jacobiators vanish); a separate
    ``agree n=..`` verdict records whether the two computations coincide
    coefficient by coefficient.
    """
    ctx, q = q_from_brackets(s)
    report = Report(command="linfty check")
    for n in range(n_max + 1):
        report.ok(f"n={n}")
        report.ok(f"agree n={n}")
        for idx in sorted_tuples(s.parities, n):
            report.trials += 1
            a = jacobiator_table(s, idx)
            b = square_taylor(ctx, q, idx)
            inputs = [s.names[i] for i in idx]
            if a:
                report.fail(f"n={n}", inputs, format_vector(s, a), arity=n)
            if a != b:
                report.fail(f"agree n={n}", inputs,
                            f"{format_vector(s, a)} vs {format_vector(s, b)}", arity=n)
    return report


def format_vector(s, vec: Vector) -> str:
    if not vec:
        return "0"
    parts = []
    for k in sorted(vec):
        c = vec[k]
        parts.append(f"{c}*{s.names[k]}")
    return " + ".join(parts).replace("+ -", "- ")


# -- random structures ---------------------------------------------------

def random_structure(rng: random.Random, parities: Sequence[int], arity_cap: int,
                     density: float = 0.3, names: Sequence[str] | None = None,
                     with_phi: bool = True) -> LInftyStructure:
    names = list(names or [f"e{i}" for i in range(len(parities))])
    tables = {}
    for n in range(0 if with_phi else 1, arity_cap + 1):
        table = {}
        for idx in sorted_tuples(parities, n):
            want = (sum(parities[i] for i in idx) + 1) & 1
            vec = {k: Fraction(rng.randint(-3, 3), rng.choice([1, 1, 2]))
                   for k in range(len(parities)) if parities[k] == want and rng.random() < density}
            vec = {k: v for k, v in vec.items() if v}
            if vec:
                table[idx] = vec
        if table:
            tables[n] = table
    return LInftyStructure(names, list(parities), tables)


def lie_structure(names: Sequence[str], structure_constants: dict) -> LInftyStructure:
    """Binary structure on the parity-shifted copy of an even Lie algebra.

    ``structure_constants[(i, j)] = {k: c}`` for ``[x_i, x_j] = sum c x_k``
    with ``i < j``.  The basis e_i = Pi x_i is odd.
    """
    s_anti = AntiBrackets(list(names), [0] * len(names), {2: {}})
    for (i, j), vec in structure_constants.items():
        if i >= j:
            raise StructureError("give constants for i < j")
        s_anti.tables[2][(i, j)] = dict(vec)
    return antialgebra_inverse(s_anti)


# -- antisymmetric conventions -----------------------------------------------

@dataclass
class AntiBrackets:
    """Graded-antisymmetric n-ary brackets on the parity-shifted space.

    ``parities`` are those of the shifted basis x_i with e_i = Pi x_i.
    """

    names: list[str]
    parities: list[int]
    tables: dict[int, dict[tuple[int, ...], Vector]] = field(default_factory=dict)

    def value(self, idx: Sequence[int]) -> Vector:
        par = [self.parities[i] for i in idx]
        order, sign = graded_sort(idx, par)
        # graded antisymmetry: each transposition also contributes -1
        sign *= _perm_sign(order)
        key = tuple(idx[i] for i in order)
        vec = self.tables.get(len(idx), {}).get(key)
        if not vec:
            return {}
        return {k: sign * v for k, v in vec.items()}

    def bracket_parity(self, n: int) -> int:
        return n & 1

    def __eq__(self, other):
        if not isinstance(other, AntiBrackets):
            return NotImplemented
        strip = lambda t: {n: {k: v for k, v in tab.items() if v} for n, tab in t.items() if any(tab.values())}
        return (self.names, self.parities, strip(self.tables)) == (other.names, other.parities, strip(other.tables))


def _perm_sign(order: Sequence[int]) -> int:
    inv = sum(1 for i in range(len(order)) for j in range(i + 1, len(order)) if order[i] > order[j])
    return -1 if inv & 1 else 1


def shift_sign(parities: Sequence[int]) -> int:
    """(-1)^eps with eps = sum_{m<n} x~_m (n - m) for shifted-space parities."""
    n = len(parities)
    eps = sum(parities[m] * (n - 1 - m) for m in range(n))
    return -1 if eps & 1 else 1


def antialgebra_convert(s: LInftyStructure) -> AntiBrackets:
    """[x1..xn] with Pi[x1..xn] = (-1)^eps {Pi x1, .., Pi xn}."""
    shifted = [1 - p for p in s.parities]
    tables = {}
    for n, table in s.tables.items():
        out = {}
        for idx in sorted_tuples(shifted, n, antisymmetric=True):
            vec = s.value(idx)
            if vec:
                sign = shift_sign([shifted[i] for i in idx])
                out[idx] = {k: sign * v for k, v in vec.items()}
        if out:
            tables[n] = out
    return AntiBrackets(list(s.names), shifted, tables)


def antialgebra_inverse(a: AntiBrackets) -> LInftyStructure:
    """Inverse of :func:`antialgebra_convert` (the sign is its own inverse)."""
    par = [1 - p for p in a.parities]
    tables = {}
    for n, table in a.tables.items():
        out = {}
        for idx in sorted_tuples(par, n):
            vec = a.value(idx)
            if vec:
                sign = shift_sign([a.parities[i] for i in idx])
                out[idx] = {k: sign * v for k, v in vec.items()}
        if out:
            tables[n] = out
    return LInftyStructure(list(a.names), par, tables)


def is_graded_antisymmetric(a: AntiBrackets, s: LInftyStructure, n_max: int) -> bool:
    """Check the converted brackets on every ordering, straight from ``s``.

    Uses the conversion formula on unsorted tuples, so it tests the sign
    rule itself rather than the table storage.
    """
    for n in range(n_max + 1):
        for idx in product(range(len(a.names)), repeat=n):
            par = [a.parities[i] for i in idx]
            base = {k: shift_sign(par) * v for k, v in s.value(idx).items()}
            for i in range(n - 1):
                sw = list(idx)
                sw[i], sw[i + 1] = sw[i + 1], sw[i]
                spar = [a.parities[j] for j in sw]
                other = {k: shift_sign(spar) * v for k, v in s.value(sw).items()}
                sign = 1 if par[i] * par[i + 1] else -1
                if other != {k: sign * v for k, v in base.items()}:
                    return False
    return True
