"""Exact supercommutative polynomial arithmetic.

A :class:`Signature` fixes an ordered list of even and odd variables.  A
:class:`SuperPoly` is a sparse map from monomials to :class:`fractions.Fraction`
coefficients.  Monomials are stored in canonical order: even exponents as a
dense tuple, odd factors as a bitmask whose bit order is the canonical order
of the odd variables.  Any reordering sign is absorbed into the coefficient,
so equality of polynomials is equality of coefficient maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from math import comb
from typing import Iterable, Iterator, Mapping, Sequence

EVEN, ODD = 0, 1

ROLES = ("param", "base", "momentum", "antimomentum")
# canonical position of each role group; coefficients sit left of derivatives
_ROLE_RANK = {"param": 0, "base": 1, "momentum": 2, "antimomentum": 2}


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class Var:
    name: str
    parity: int
    role: str = "base"
    base: str | None = None

    def __post_init__(self):
        if self.parity not in (EVEN, ODD):
            raise SignatureError(f"bad parity {self.parity!r} for {self.name}")
        if self.role not in ROLES:
            raise SignatureError(f"unknown role {self.role!r} for {self.name}")
        if self.role in ("momentum", "antimomentum") and self.base is None:
            raise SignatureError(f"{self.name}: conjugate variable needs a base")


class Signature:
    """An ordered set of graded variables.

    Variables are regrouped so that parameters come first, then base
    coordinates, then momenta/antimomenta; declaration order is kept
    within each group.  Momentum parity equals base parity, antimomentum
    parity is the opposite.
    """

    def __init__(self, variables: Iterable[Var]):
        variables = list(variables)
        order = sorted(range(len(variables)), key=lambda i: (_ROLE_RANK[variables[i].role], i))
        self.vars: tuple[Var, ...] = tuple(variables[i] for i in order)
        self.index: dict[str, int] = {}
        for i, v in enumerate(self.vars):
            if v.name in self.index:
                raise SignatureError(f"duplicate variable {v.name!r}")
            self.index[v.name] = i
        for v in self.vars:
            if v.base is None:
                continue
            if v.base not in self.index or self.vars[self.index[v.base]].role != "base":
                raise SignatureError(f"{v.name}: unknown base variable {v.base!r}")
            bp = self.vars[self.index[v.base]].parity
            want = bp if v.role == "momentum" else 1 - bp
            if v.parity != want:
                raise SignatureError(f"{v.name}: parity must be {want}")
        self.even_names = [v.name for v in self.vars if v.parity == EVEN]
        self.odd_names = [v.name for v in self.vars if v.parity == ODD]
        self.n_even = len(self.even_names)
        # name -> (0, slot in even tuple) or (1, bit index)
        self.slot: dict[str, tuple[int, int]] = {}
        for k, name in enumerate(self.even_names):
            self.slot[name] = (EVEN, k)
        for k, name in enumerate(self.odd_names):
            self.slot[name] = (ODD, k)
        self._key = tuple((v.name, v.parity, v.role, v.base) for v in self.vars)
        self._hash = hash(self._key)

    def __eq__(self, other):
        return isinstance(other, Signature) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "Signature(" + ", ".join(f"{v.name}:{'odd' if v.parity else 'even'}" for v in self.vars) + ")"

    def var(self, name: str) -> Var:
        try:
            return self.vars[self.index[name]]
        except KeyError:
            raise SignatureError(f"undeclared variable {name!r}") from None

    def names(self, role: str) -> list[str]:
        return [v.name for v in self.vars if v.role == role]

    def conjugate(self, base: str) -> str | None:
        """Name of the momentum/antimomentum attached to ``base``."""
        for v in self.vars:
            if v.base == base:
                return v.name
        return None

    def parity_of(self, name: str) -> int:
        return self.var(name).parity

    def zero(self) -> SuperPoly:
        return SuperPoly(self, {})

    def one(self) -> SuperPoly:
        return self.const(1)

    def const(self, c) -> SuperPoly:
        c = Fraction(c)
        if c == 0:
            return self.zero()
        return SuperPoly(self, {((0,) * self.n_even, 0): c})

    def gen(self, name: str, power: int = 1) -> SuperPoly:
        kind, pos = self.slot.get(name, (None, None))
        if kind is None:
            raise SignatureError(f"undeclared variable {name!r}")
        if kind == ODD:
            if power < 0:
                raise SignatureError("odd variables have no inverse")
            if power == 0:
                return self.one()
            if power > 1:
                return self.zero()
            return SuperPoly(self, {((0,) * self.n_even, 1 << pos): Fraction(1)})
        if power < 0 and self.var(name).role != "param":
            raise SignatureError(f"negative power of {name!r}: only even parameters are invertible")
        exps = [0] * self.n_even
        exps[pos] = power
        return SuperPoly(self, {(tuple(exps), 0): Fraction(1)})

    def __getitem__(self, name: str) -> SuperPoly:
        return self.gen(name)


@lru_cache(maxsize=1 << 16)
def _merge_sign(ma: int, mb: int) -> int:
    """Sign of sorting the concatenation of two disjoint odd-factor words."""
    s = 0
    m = mb
    while m:
        low = m & -m
        j = low.bit_length() - 1
        s += (ma >> (j + 1)).bit_count()
        m ^= low
    return -1 if s & 1 else 1


def _mask_parity(mask: int) -> int:
    return mask.bit_count() & 1


class SuperPoly:
    """Polynomial in a supercommutative algebra with exact coefficients.

    Immutable.  ``terms`` maps ``(even_exponents, odd_mask)`` to a nonzero
    Fraction.
    """

    __slots__ = ("sig", "terms")

    def __init__(self, sig: Signature, terms: Mapping | None = None):
        self.sig = sig
        self.terms = {k: c for k, c in (terms or {}).items() if c != 0}

    @classmethod
    def _raw(cls, sig, terms):
        p = object.__new__(cls)
        p.sig = sig
        p.terms = terms
        return p

    # -- structure -------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.sig.const(other)
        if not isinstance(other, SuperPoly):
            return NotImplemented
        return self.sig == other.sig and self.terms == other.terms

    def __hash__(self):
        return hash((self.sig, frozenset(self.terms.items())))

    def __repr__(self):
        return f"SuperPoly({format_poly(self)})"

    def __str__(self):
        return format_poly(self)

    def parities(self) -> set[int]:
        return {_mask_parity(m) for (_, m) in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.parities()) <= 1

    def parity(self) -> int:
        """Parity of a homogeneous element (zero counts as even)."""
        ps = self.parities()
        if len(ps) > 1:
            raise ValueError(f"inhomogeneous element {self}")
        return ps.pop() if ps else EVEN

    def homogeneous_parts(self) -> dict[int, SuperPoly]:
        parts: dict[int, dict] = {}
        for k, c in self.terms.items():
            parts.setdefault(_mask_parity(k[1]), {})[k] = c
        return {p: SuperPoly._raw(self.sig, t) for p, t in parts.items()}

    def constant_term(self) -> Fraction:
        return self.terms.get(((0,) * self.sig.n_even, 0), Fraction(0))

    # -- arithmetic ------------------------------------------------------
    def _coerce(self, other) -> SuperPoly:
        if isinstance(other, SuperPoly):
            if other.sig != self.sig:
                raise SignatureError("signature mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return self.sig.const(other)
        raise TypeError(f"cannot combine SuperPoly with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return SuperPoly._raw(self.sig, out)

    __radd__ = __add__

    def __neg__(self):
        return SuperPoly._raw(self.sig, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> SuperPoly:
        c = Fraction(c)
        if c == 0:
            return self.sig.zero()
        return SuperPoly._raw(self.sig, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        return poly_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = self.sig.one()
        for _ in range(n):
            out = out * self
        return out

    # -- restriction -----------------------------------------------------
    def set_zero(self, names: Iterable[str]) -> SuperPoly:
        """Substitute 0 for the given variables."""
        emask, omask = _group_masks(self.sig, names)
        out = {}
        for (e, m), c in self.terms.items():
            if m & omask:
                continue
            if any(e[i] for i in emask):
                if any(e[i] < 0 for i in emask):
                    raise ZeroDivisionError("substituting 0 for an inverted parameter")
                continue
            out[(e, m)] = c
        return SuperPoly._raw(self.sig, out)

    def degree_in(self, names: Iterable[str]) -> int | None:
        """Maximum total degree in the given variables (None for zero)."""
        emask, omask = _group_masks(self.sig, names)
        best = None
        for (e, m), _ in self.terms.items():
            d = sum(e[i] for i in emask) + (m & omask).bit_count()
            best = d if best is None else max(best, d)
        return best

    def part_of_degree(self, names: Iterable[str], degree: int) -> SuperPoly:
        emask, omask = _group_masks(self.sig, names)
        out = {k: c for k, c in self.terms.items()
               if sum(k[0][i] for i in emask) + (k[1] & omask).bit_count() == degree}
        return SuperPoly._raw(self.sig, out)

    def free_of(self, names: Iterable[str]) -> bool:
        return self.degree_in(names) in (None, 0) and self == self.set_zero(names)

    def substitute_param(self, name: str, value) -> SuperPoly:
        """Substitute a rational value for an even variable."""
        kind, pos = self.sig.slot[name]
        if kind != EVEN:
            raise ValueError("only even variables take numeric values")
        value = Fraction(value)
        out = self.sig.zero()
        acc: dict = {}
        for (e, m), c in self.terms.items():
            k = e[pos]
            if k < 0 and value == 0:
                raise ZeroDivisionError(f"{name} appears inverted")
            e2 = e[:pos] + (0,) + e[pos + 1:]
            key = (e2, m)
            acc[key] = acc.get(key, 0) + c * value ** k
        return out + SuperPoly(self.sig, acc)


def _group_masks(sig: Signature, names: Iterable[str]) -> tuple[list[int], int]:
    emask, omask = [], 0
    for n in names:
        kind, pos = sig.slot[n]
        if kind == EVEN:
            emask.append(pos)
        else:
            omask |= 1 << pos
    return emask, omask


def poly_mul(a: SuperPoly, b: SuperPoly) -> SuperPoly:
    """Supercommutative product: ab = (-1)^(|a||b|) ba for homogeneous a, b."""
    if a.sig != b.sig:
        raise SignatureError("signature mismatch")
    out: dict = {}
    for (ea, ma), ca in a.terms.items():
        for (eb, mb), cb in b.terms.items():
            if ma & mb:
                continue
            c = ca * cb
            if _merge_sign(ma, mb) < 0:
                c = -c
            e = tuple(map(int.__add__, ea, eb)) if ea else ea
            key = (e, ma | mb)
            v = out.get(key, 0) + c
            if v:
                out[key] = v
            else:
                del out[key]
    return SuperPoly._raw(a.sig, out)


def partial(a: SuperPoly, name: str) -> SuperPoly:
    """Left derivative with respect to a declared variable.

    Obeys d(fg) = (df)g + (-1)^(|v||f|) f(dg).
    """
    sig = a.sig
    if name not in sig.slot:
        raise SignatureError(f"undeclared variable {name!r}")
    kind, pos = sig.slot[name]
    out: dict = {}
    if kind == EVEN:
        for (e, m), c in a.terms.items():
            k = e[pos]
            if k == 0:
                continue
            key = (e[:pos] + (k - 1,) + e[pos + 1:], m)
            out[key] = out.get(key, 0) + k * c
    else:
        bit = 1 << pos
        below = bit - 1
        for (e, m), c in a.terms.items():
            if not m & bit:
                continue
            if (m & below).bit_count() & 1:
                c = -c
            key = (e, m ^ bit)
            out[key] = out.get(key, 0) + c
    return SuperPoly(sig, out)


def monomial_factors(sig: Signature, key) -> list[tuple[str, int]]:
    """Variables of a monomial in canonical order with exponents."""
    e, m = key
    out = []
    for v in sig.vars:
        kind, pos = sig.slot[v.name]
        if kind == EVEN:
            if e[pos]:
                out.append((v.name, e[pos]))
        elif m >> pos & 1:
            out.append((v.name, 1))
    return out


def monomial_poly(sig: Signature, key, coeff=1) -> SuperPoly:
    return SuperPoly(sig, {key: Fraction(coeff)})


def split_monomial(sig: Signature, key, names: Sequence[str]):
    """Split a monomial key into (rest, part) with ``part`` on the right.

    Valid when every variable in ``names`` sits after every other variable
    in canonical order, so no sign arises.
    """
    e, m = key
    emask, omask = _group_masks(sig, names)
    e_rest = list(e)
    e_part = [0] * len(e)
    for i in emask:
        e_part[i] = e[i]
        e_rest[i] = 0
    return (tuple(e_rest), m & ~omask), (tuple(e_part), m & omask)


def sort_key(sig: Signature, key) -> tuple:
    """Deterministic term order: total degree, then per-variable exponents."""
    factors = dict(monomial_factors(sig, key))
    exps = tuple(-factors.get(v.name, 0) for v in sig.vars)
    return (sum(factors.values()), exps)


def format_poly(p: SuperPoly, names: Mapping[str, str] | None = None) -> str:
    """Render with ``*`` between factors and ``^`` for powers; zero prints "0"."""
    if not p.terms:
        return "0"
    names = names or {}
    pieces = []
    for key in sorted(p.terms, key=lambda k: sort_key(p.sig, k)):
        c = p.terms[key]
        factors = []
        for name, k in monomial_factors(p.sig, key):
            shown = names.get(name, name)
            factors.append(shown if k == 1 else f"{shown}^{k}")
        mag = abs(c)
        if factors:
            body = "*".join(factors) if mag == 1 else f"{mag}*" + "*".join(factors)
        else:
            body = str(mag)
        pieces.append(("-" if c < 0 else "+", body))
    first_sign, first = pieces[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in pieces[1:]:
        text += f" {sign} {body}"
    return text


# -- permutations and shuffles ------------------------------------------

def koszul_sign(perm: Sequence[int], parities: Sequence[int]) -> int:
    """Sign of rearranging graded elements a_0..a_{n-1} into a_perm[0]..a_perm[n-1].

    ``perm[i]`` is the index of the element placed at position ``i``.  Each
    crossing of two odd elements contributes -1.
    """
    if len(perm) != len(parities):
        raise SignatureError("permutation and parity list lengths differ")
    if sorted(perm) != list(range(len(perm))):
        raise SignatureError(f"not a permutation: {perm!r}")
    s = 0
    for i in range(len(perm)):
        if not parities[perm[i]]:
            continue
        for j in range(i + 1, len(perm)):
            if parities[perm[j]] and perm[i] > perm[j]:
                s += 1
    return -1 if s & 1 else 1


def shuffles(k: int, l: int, parities: Sequence[int]) -> list[tuple[tuple[int, ...], int]]:
    """All (k,l)-shuffles with their Koszul signs.

    A shuffle is returned as the rearranged index order: the first ``k``
    entries increase, the last ``l`` entries increase.
    """
    n = k + l
    if len(parities) != n:
        raise SignatureError("k + l must equal the number of parities")
    out = []
    for first in combinations(range(n), k):
        chosen = set(first)
        perm = first + tuple(i for i in range(n) if i not in chosen)
        out.append((perm, koszul_sign(perm, parities)))
    return out


def graded_sort(items: Sequence[int], parities: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Sort positions by ``items`` value, returning (order, Koszul sign)."""
    order = tuple(sorted(range(len(items)), key=lambda i: items[i]))
    return order, koszul_sign(order, parities)


def all_permutations(n: int) -> Iterator[tuple[int, ...]]:
    return permutations(range(n))


def binomial(n: int, k: int) -> int:
    return comb(n, k)
