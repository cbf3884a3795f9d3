"""Concrete Lie superalgebras with a projector onto an Abelian subalgebra.

Every element is a :class:`SuperPoly` over a signature holding base
coordinates ``x^a``, optional scalar parameters, and one conjugate variable
per coordinate:

``vect``
    vector fields ``Q^k(x) d_k``, stored as polynomials linear in the
    momenta ``p_k`` (``p_k`` stands for ``d_k``).  Projector: value at the
    origin.
``ops``
    differential operators in normal order (coefficients left of
    derivatives), stored as their normal-ordered symbol in ``p``.
    Projector: ``D -> D(1)``.
``ham``
    functions on the cotangent bundle with the canonical Poisson bracket.
    Projector: restriction to ``p = 0``.
``multivec``
    multivector fields (functions of ``x`` and antimomenta ``xs_a`` of
    opposite parity) with the Schouten bracket.  The bracket is odd, so the
    Lie parity of an element is its polynomial parity plus one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from typing import Callable, Sequence

from .kernel import (
    EVEN,
    ODD,
    Signature,
    SuperPoly,
    Var,
    format_poly,
    monomial_factors,
    partial,
    split_monomial,
)
from .reports import Report

KINDS = ("vect", "ops", "ham", "multivec")


class ContextError(ValueError):
    pass


class _NegInf:
    """Order of the zero element; compares below every integer."""

    def __lt__(self, other):
        return not isinstance(other, _NegInf)

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return isinstance(other, _NegInf)

    def __repr__(self):
        return "-inf"

    __str__ = __repr__


NEG_INF = _NegInf()


@dataclass(frozen=True)
class Caps:
    max_base_degree: int = 2
    max_operator_order: int = 3
    arity_cap: int = 4
    max_terms: int = 4
    param_rate: float = 0.2


def make_signature(kind: str, base: Sequence[tuple[str, int]],
                   params: Sequence[tuple[str, int]] = ()) -> Signature:
    if kind not in KINDS:
        raise ContextError(f"unknown context kind {kind!r}")
    vs = [Var(n, p, "param") for n, p in params]
    for name, par in base:
        vs.append(Var(name, par, "base"))
    for name, par in base:
        if kind == "multivec":
            vs.append(Var(f"xs_{name}", 1 - par, "antimomentum", name))
        else:
            vs.append(Var(f"p_{name}", par, "momentum", name))
    return Signature(vs)


class LieContext:
    """A Lie superalgebra ``L`` with projector ``P`` (kinds listed in the module doc)."""

    def __init__(self, kind: str, sig: Signature, caps: Caps = Caps(),
                 projector: Callable[[SuperPoly], SuperPoly] | None = None,
                 label: str | None = None):
        if kind not in KINDS:
            raise ContextError(f"unknown context kind {kind!r}")
        self.kind = kind
        self.sig = sig
        self.caps = caps
        self.label = label or kind
        self.base = sig.names("base")
        self.params = sig.names("param")
        role = "antimomentum" if kind == "multivec" else "momentum"
        self.conj = [sig.conjugate(b) for b in self.base]
        if any(c is None or sig.var(c).role != role for c in self.conj):
            raise ContextError(f"signature does not fit a {kind} context")
        self._conj_of = dict(zip(self.base, self.conj))
        self._base_of = dict(zip(self.conj, self.base))
        self._projector = projector
        self._monomial_cache: dict = {}

    @classmethod
    def build(cls, kind: str, base: Sequence[tuple[str, int]],
              params: Sequence[tuple[str, int]] = (), caps: Caps = Caps()) -> LieContext:
        return cls(kind, make_signature(kind, base, params), caps)

    def with_kind(self, kind: str) -> LieContext:
        """Same signature read in another context (ops <-> ham <-> vect)."""
        if (kind == "multivec") != (self.kind == "multivec"):
            raise ContextError("multivector signatures carry antimomenta")
        return LieContext(kind, self.sig, self.caps)

    def with_projector(self, projector, label: str) -> LieContext:
        return LieContext(self.kind, self.sig, self.caps, projector, label)

    def with_caps(self, **kw) -> LieContext:
        return LieContext(self.kind, self.sig, replace(self.caps, **kw), self._projector, self.label)

    def __repr__(self):
        return f"LieContext({self.label}, {self.sig!r})"

    # -- printing ----------------------------------------------------------
    def display_names(self) -> dict[str, str]:
        if self.kind in ("ops", "vect"):
            return {p: f"d({b})" for b, p in self._conj_of.items()}
        return {}

    def format(self, a: SuperPoly) -> str:
        return format_poly(a, self.display_names())

    # -- grading -----------------------------------------------------------
    def _check(self, a: SuperPoly):
        if not isinstance(a, SuperPoly):
            raise ContextError(f"expected a SuperPoly, got {type(a).__name__}")
        if a.sig != self.sig:
            raise ContextError("element belongs to a different context")

    def parity(self, a: SuperPoly) -> int:
        """Parity in the Lie superalgebra (shifted for multivectors)."""
        self._check(a)
        p = a.parity()
        return 1 - p if self.kind == "multivec" else p

    def lie_parts(self, a: SuperPoly) -> dict[int, SuperPoly]:
        parts = a.homogeneous_parts()
        if self.kind == "multivec":
            return {1 - p: v for p, v in parts.items()}
        return parts

    def momentum_names(self) -> list[str]:
        return list(self.conj)

    # -- operator algebra ----------------------------------------------------
    def _dleft(self, pname: str, op: SuperPoly) -> SuperPoly:
        # d_v o op = (d op / d x_v) + p_v * op, for op in normal order
        return partial(op, self._base_of[pname]) + self.sig.gen(pname) * op

    def compose(self, a: SuperPoly, b: SuperPoly) -> SuperPoly:
        """Composition of normal-ordered differential operators."""
        if self.kind not in ("ops", "vect"):
            raise ContextError("composition is defined for operator contexts only")
        self._check(a)
        self._check(b)
        groups: dict = {}
        for key, c in a.terms.items():
            rest, dpart = split_monomial(self.sig, key, self.conj)
            groups.setdefault(dpart, {})[rest] = c
        out = self.sig.zero()
        for dpart, coeffs in groups.items():
            op = b
            for pname, k in reversed(monomial_factors(self.sig, dpart)):
                for _ in range(k):
                    op = self._dleft(pname, op)
                    if not op:
                        break
            if op:
                out = out + SuperPoly(self.sig, coeffs) * op
        return out

    def apply(self, op: SuperPoly, f: SuperPoly) -> SuperPoly:
        """Action of a differential operator on a function of ``x``."""
        if not f.free_of(self.conj):
            raise ContextError("operand must be a function of the base variables")
        return self.compose(op, f).set_zero(self.conj)

    def _bracket_homog(self, a: SuperPoly, pa: int, b: SuperPoly, pb: int) -> SuperPoly:
        if self.kind in ("ops", "vect"):
            ab = self.compose(a, b)
            ba = self.compose(b, a)
            return ab - ba if not (pa and pb) else ab + ba
        out = self.sig.zero()
        fa = a.parity()  # polynomial parity
        for x, p in self._conj_of.items():
            xa = self.sig.parity_of(x)
            pp = self.sig.parity_of(p)
            dpa = partial(a, p)
            dxa = partial(a, x)
            t1 = dpa * partial(b, x) if dpa else None
            t2 = dxa * partial(b, p) if dxa else None
            if self.kind == "ham":
                s = -1 if (xa * (fa + 1)) & 1 else 1
                if t1:
                    out = out + t1.scale(s)
                if t2:
                    # odd coordinates pair symmetrically with their momenta
                    out = out - t2.scale(-s if xa else s)
            else:
                s1 = -1 if (pp * (fa + 1)) & 1 else 1
                s2 = -1 if (xa * (fa + 1)) & 1 else 1
                if t1:
                    out = out + t1.scale(s1)
                if t2:
                    out = out - t2.scale(s2)
        return out

    def bracket(self, a: SuperPoly, b: SuperPoly) -> SuperPoly:
        """Graded Lie bracket, extended bilinearly over homogeneous parts."""
        self._check(a)
        self._check(b)
        out = self.sig.zero()
        if not a or not b:
            return out
        for pa, ha in self.lie_parts(a).items():
            for pb, hb in self.lie_parts(b).items():
                out = out + self._bracket_homog(ha, pa, hb, pb)
        return out

    # -- projector -------------------------------------------------------------
    def project(self, a: SuperPoly) -> SuperPoly:
        self._check(a)
        if self._projector is not None:
            return self._projector(a)
        if self.kind == "vect":
            return a.set_zero(self.base)
        return a.set_zero(self.conj)

    def in_image(self, a: SuperPoly) -> bool:
        return self.project(a) == a

    def embed(self, v: SuperPoly) -> SuperPoly:
        if not self.in_image(v):
            raise ContextError(f"{self.format(v)} is not in the image of the projector")
        return v

    def has_products(self) -> bool:
        """Whether the image of P is a function algebra (closed under product)."""
        return self.kind != "vect"

    # -- order -----------------------------------------------------------------
    def order(self, a: SuperPoly):
        """Order with respect to the image of the projector."""
        self._check(a)
        if not a:
            return NEG_INF
        names = self.base if self.kind == "vect" else self.conj
        return a.degree_in(names)

    def is_vector_field(self, a: SuperPoly) -> bool:
        return a.part_of_degree(self.conj, 1) == a

    # -- monomial enumeration and random elements ----------------------------
    def monomials(self, names: Sequence[str], max_degree: int, min_degree: int = 0) -> list[SuperPoly]:
        key = (tuple(names), max_degree, min_degree)
        if key in self._monomial_cache:
            return self._monomial_cache[key]
        evens = [n for n in names if self.sig.parity_of(n) == EVEN]
        odds = [n for n in names if self.sig.parity_of(n) == ODD]
        out = []
        for k_odd in range(0, min(len(odds), max_degree) + 1):
            for osub in combinations(odds, k_odd):
                rest = max_degree - k_odd
                for k_even in range(0, rest + 1):
                    for emul in combinations_with_replacement(evens, k_even):
                        if k_odd + k_even < min_degree:
                            continue
                        m = self.sig.one()
                        for n in emul:
                            m = m * self.sig.gen(n)
                        for n in osub:
                            m = m * self.sig.gen(n)
                        out.append(m)
        out.sort(key=lambda m: (m.degree_in(names), self.format(m)))
        self._monomial_cache[key] = out
        return out

    def v_basis(self, max_degree: int | None = None) -> list[SuperPoly]:
        """Monomial spanning set of the image of P (constant fields for ``vect``)."""
        if self.kind == "vect":
            return [self.sig.gen(p) for p in self.conj]
        if max_degree is None:
            max_degree = self.caps.max_base_degree
        return self.monomials(self.base, max_degree)

    def _coeff(self, rng: random.Random) -> Fraction:
        return rng.choice([Fraction(1), Fraction(-1), Fraction(2), Fraction(-2),
                           Fraction(3), Fraction(1, 2), Fraction(-3, 2)])

    def _maybe_param(self, rng: random.Random, m: SuperPoly) -> SuperPoly:
        odd_params = [n for n in self.params if self.sig.parity_of(n) == ODD]
        if odd_params and rng.random() < self.caps.param_rate:
            return self.sig.gen(rng.choice(odd_params)) * m
        return m

    def _random_from(self, rng, candidates, parity, nterms) -> SuperPoly:
        out = self.sig.zero()
        tries = 0
        placed = 0
        while placed < nterms and tries < 50 * nterms:
            tries += 1
            m = self._maybe_param(rng, rng.choice(candidates))
            if not m or self.parity(m) != parity:
                continue
            out = out + m.scale(self._coeff(rng))
            placed += 1
        return out

    def element_candidates(self, caps: Caps | None = None) -> list[SuperPoly]:
        caps = caps or self.caps
        coeffs = self.monomials(self.base, caps.max_base_degree)
        if self.kind == "vect":
            derivs = [self.sig.gen(p) for p in self.conj]
        else:
            derivs = self.monomials(self.conj, caps.max_operator_order)
        return [c * d for c in coeffs for d in derivs]

    def random_element(self, rng: random.Random, parity: int | None = None,
                       caps: Caps | None = None, nterms: int | None = None) -> SuperPoly:
        caps = caps or self.caps
        if parity is None:
            parity = rng.randint(0, 1)
        if nterms is None:
            nterms = rng.randint(1, caps.max_terms)
        return self._random_from(rng, self.element_candidates(caps), parity, nterms)

    def random_v(self, rng: random.Random, parity: int | None = None,
                 caps: Caps | None = None, nterms: int | None = None) -> SuperPoly:
        caps = caps or self.caps
        if parity is None:
            parity = rng.randint(0, 1)
        if nterms is None:
            nterms = rng.randint(1, 2)
        return self._random_from(rng, self.v_basis(caps.max_base_degree), parity, nterms)


def compose_operators(ctx: LieContext, a: SuperPoly, b: SuperPoly) -> SuperPoly:
    return ctx.compose(a, b)


def apply_operator(ctx: LieContext, op: SuperPoly, f: SuperPoly) -> SuperPoly:
    return ctx.apply(op, f)


def bracket(ctx: LieContext, a: SuperPoly, b: SuperPoly) -> SuperPoly:
    return ctx.bracket(a, b)


def project(ctx: LieContext, a: SuperPoly) -> SuperPoly:
    return ctx.project(a)


def order(ctx: LieContext, a: SuperPoly):
    return ctx.order(a)


def order_bruteforce(ctx: LieContext, a: SuperPoly, r: int, probe_degree: int) -> bool:
    """Bounded check that all (r+1)-fold brackets with probe monomials vanish.

    Probes are the monomials of degree <= ``probe_degree`` spanning the image
    of P.  A True answer is evidence for ``order <= r``, not a proof.
    """
    probes = ctx.v_basis(probe_degree)

    def descend(x: SuperPoly, start: int, depth: int) -> bool:
        if not x:
            return True
        if depth == r + 1:
            return False
        for i in range(start, len(probes)):
            if not descend(ctx.bracket(x, probes[i]), i, depth + 1):
                return False
        return True

    return descend(a, 0, 0)


def principal_symbol(ctx: LieContext, op: SuperPoly) -> tuple[LieContext, SuperPoly]:
    """Top-order part of a differential operator as a Hamiltonian (d_a -> p_a)."""
    if ctx.kind != "ops":
        raise ContextError("principal symbols are taken of differential operators")
    if not op:
        raise ContextError("zero operator has no principal symbol")
    s = ctx.order(op)
    return ctx.with_kind("ham"), op.part_of_degree(ctx.conj, s)


def check_projector_axioms(ctx: LieContext, trials: int = 100, caps: Caps | None = None,
                           seed: int = 0) -> Report:
    """Random check of P^2 = P, [Pa, Pb] = 0 and P[a,b] = P[Pa,b] + P[a,Pb]."""
    report = Report(command=f"ctx check {ctx.label}", seed=seed, trials=trials)
    for checkname in ("idempotent", "abelian", "distributive"):
        report.verdicts[checkname] = True
    for t in range(trials):
        rng = random.Random(f"{seed}:{t}")
        a = ctx.random_element(rng, caps=caps)
        b = ctx.random_element(rng, caps=caps)
        pa, pb = ctx.project(a), ctx.project(b)
        checks = {
            "idempotent": ctx.project(pa) - pa,
            "abelian": ctx.bracket(pa, pb),
            "distributive": ctx.project(ctx.bracket(a, b))
            - ctx.project(ctx.bracket(pa, b)) - ctx.project(ctx.bracket(a, pb)),
        }
        for name, residual in checks.items():
            if residual:
                report.fail(name, [ctx.format(a), ctx.format(b)], ctx.format(residual), trial=t)
    return report


def evaluation_projector(ctx: LieContext, point: dict) -> LieContext:
    """``vect`` with P = value at ``point`` (even coordinates only).

    Translation conjugates this to evaluation at the origin, so the axioms
    still hold; kept as a sanity fixture.
    """
    if ctx.kind != "vect":
        raise ContextError("evaluation projectors are defined for vector fields")

    def proj(a: SuperPoly) -> SuperPoly:
        out = a
        for b in ctx.base:
            out = out.substitute_param(b, point.get(b, 0)) if b in point else out.set_zero([b])
        return out

    label = "vect@" + ",".join(f"{k}={v}" for k, v in sorted(point.items()))
    return ctx.with_projector(proj, label)


def component_projector(ctx: LieContext, keep: Sequence[str]) -> LieContext:
    """``vect`` with P = value at the origin, keeping only the ``keep`` directions.

    Idempotent with Abelian image, but the kernel is not a subalgebra: for
    ``a = d(y)`` and ``b = y d(x)`` (keeping ``x``), P[a,b] = d(x) while
    P[Pa,b] + P[a,Pb] = 0.  Used as a deliberately wrong projector.
    """
    if ctx.kind != "vect":
        raise ContextError("component projectors are defined for vector fields")
    drop = [ctx._conj_of[b] for b in ctx.base if b not in keep]

    def proj(a: SuperPoly) -> SuperPoly:
        return a.set_zero(ctx.base).set_zero(drop)

    return ctx.with_projector(proj, "vect[" + ",".join(keep) + "]")
