"""Higher derived brackets, their Jacobiators, and the verification harness.

Given a context ``(L, P)`` and a generator -- an element ``D`` of ``L`` or a
derivation ``d`` of ``L`` -- the n-th derived bracket on ``V = P(L)`` is::

    {a1, ..., an}_D = P[...[[D, a1], a2], ..., an]
    {a1, ..., an}_d = P[...[d a1, a2], ..., an]        (n >= 1)

The n-th Jacobiator is the shuffle sum
``sum_{k+l=n} sum_sigma (-1)^alpha {{a_s1..a_sk}, a_s(k+1)..a_sn}``, where
``(-1)^alpha`` is the Koszul sign of the shuffle on the argument parities.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import factorial
from typing import Callable, Sequence

from .contexts import NEG_INF, Caps, ContextError, LieContext, make_signature
from .kernel import ODD, SuperPoly, binomial, koszul_sign, monomial_factors, partial, shuffles
from .reports import Case, Report


class GeneratorError(ValueError):
    pass


@dataclass(frozen=True)
class Derivation:
    """A homogeneous derivation of the Lie superalgebra of a context."""

    apply: Callable[[SuperPoly], SuperPoly]
    parity: int
    label: str = "d"
    inner: SuperPoly | None = None

    def __call__(self, x: SuperPoly) -> SuperPoly:
        return self.apply(x)

    def __add__(self, other: Derivation) -> Derivation:
        if self.parity != other.parity:
            raise GeneratorError("sum of derivations of different parity")
        f, g = self.apply, other.apply
        return Derivation(lambda x: f(x) + g(x), self.parity, f"{self.label} + {other.label}")

    def square(self) -> Derivation:
        f = self.apply
        return Derivation(lambda x: f(f(x)), 0, f"({self.label})^2")


def inner_derivation(ctx: LieContext, delta: SuperPoly) -> Derivation:
    return Derivation(lambda x: ctx.bracket(delta, x), ctx.parity(delta),
                      f"ad({ctx.format(delta)})", inner=delta)


def parameter_derivation(ctx: LieContext, name: str) -> Derivation:
    """Derivative along an odd scalar parameter.

    Acts on coefficients only, so it is a derivation of every context
    bracket but not an inner one; it maps ``V`` into ``V``.
    """
    v = ctx.sig.var(name)
    if v.role != "param" or v.parity != ODD:
        raise GeneratorError(f"{name!r} is not an odd parameter")
    return Derivation(lambda x: partial(x, name), ODD, f"d/d{name}")


def derivation_defect(ctx: LieContext, d: Derivation, a: SuperPoly, b: SuperPoly) -> SuperPoly:
    """d[a,b] - [da,b] - (-1)^(|d||a|)[a,db]; zero for a derivation."""
    s = -1 if d.parity * ctx.parity(a) else 1
    return d(ctx.bracket(a, b)) - ctx.bracket(d(a), b) - ctx.bracket(a, d(b)).scale(s)


def pdp_defect(ctx: LieContext, d: Derivation, x: SuperPoly) -> SuperPoly:
    """P d P x - P d x; zero when the kernel of P is closed under d."""
    return ctx.project(d(ctx.project(x))) - ctx.project(d(x))


@dataclass(frozen=True)
class Generator:
    element: SuperPoly | None = None
    derivation: Derivation | None = None

    def __post_init__(self):
        if (self.element is None) == (self.derivation is None):
            raise GeneratorError("a generator is either an element or a derivation")

    @property
    def is_derivation(self) -> bool:
        return self.derivation is not None

    def parity(self, ctx: LieContext) -> int:
        if self.derivation is not None:
            return self.derivation.parity
        return ctx.parity(self.element)


@dataclass(frozen=True)
class DerivedEngine:
    """A context together with a generator.

    ``scale`` (an even scalar) multiplies the n-ary bracket by ``scale**n``;
    it is 1 except for engines produced by :func:`hbar_rescale`.
    """

    ctx: LieContext
    generator: Generator
    arity_cap: int = 4
    scale: SuperPoly | None = None
    hbar: SuperPoly | None = None

    @classmethod
    def of(cls, ctx: LieContext, delta: SuperPoly, **kw) -> DerivedEngine:
        if delta.sig != ctx.sig:
            raise ContextError("generator belongs to a different context")
        return cls(ctx, Generator(element=delta), **kw)

    @classmethod
    def of_derivation(cls, ctx: LieContext, d: Derivation, **kw) -> DerivedEngine:
        return cls(ctx, Generator(derivation=d), **kw)

    @property
    def delta(self) -> SuperPoly:
        if self.generator.element is None:
            raise GeneratorError("engine is generated by a derivation")
        return self.generator.element

    @property
    def parity(self) -> int:
        return self.generator.parity(self.ctx)

    def _scaled(self, x: SuperPoly, n: int) -> SuperPoly:
        if self.scale is None or not x:
            return x
        return (self.scale ** n) * x

    def nested(self, start: SuperPoly, args: Sequence[SuperPoly]) -> SuperPoly:
        x = start
        for a in args:
            if not x:
                break
            x = self.ctx.bracket(x, a)
        return x

    def bracket(self, args: Sequence[SuperPoly], check: bool = True) -> SuperPoly:
        ctx = self.ctx
        if check:
            for a in args:
                if not ctx.in_image(a):
                    raise ContextError(f"argument {ctx.format(a)} is not in V")
        if self.generator.is_derivation:
            if not args:
                raise GeneratorError("derivation-generated brackets have no 0-ary bracket")
            x = self.nested(self.generator.derivation(args[0]), args[1:])
        else:
            x = self.nested(self.delta, args)
        return self._scaled(ctx.project(x), len(args))

    def bracket_parity(self, arg_parities: Sequence[int]) -> int:
        return (self.parity + sum(arg_parities)) & 1


def derived_bracket(engine: DerivedEngine, args: Sequence[SuperPoly]) -> SuperPoly:
    return engine.bracket(args)


def generator_square(engine: DerivedEngine) -> DerivedEngine:
    """Engine generated by D^2 = [D,D]/2 (or d o d for a derivation).

    For a rescaled engine the square carries one extra factor ``scale``,
    which keeps Jacobiator == bracket of the square intact.
    """
    if engine.parity != ODD:
        raise GeneratorError("the square is taken of an odd generator")
    g = engine.generator
    if g.is_derivation:
        d2 = g.derivation.square()
        if engine.scale is not None:
            f, s = d2.apply, engine.scale
            d2 = Derivation(lambda x: s * f(x), 0, d2.label)
        return replace(engine, generator=Generator(derivation=d2))
    sq = engine.ctx.bracket(g.element, g.element).scale(Fraction(1, 2))
    if engine.scale is not None:
        sq = engine.scale * sq
    return replace(engine, generator=Generator(element=sq))


def jacobiator(engine: DerivedEngine, args: Sequence[SuperPoly], drop_phi: bool = False) -> SuperPoly:
    """n-th Jacobiator of the derived brackets on ``args``.

    The 0-ary inner bracket is omitted for derivation generators, or when
    ``drop_phi`` is set.
    """
    ctx = engine.ctx
    for a in args:
        if not ctx.in_image(a):
            raise ContextError(f"argument {ctx.format(a)} is not in V")
    n = len(args)
    par = [ctx.parity(a) for a in args]
    skip_zero = engine.generator.is_derivation or drop_phi
    inner: dict[tuple[int, ...], SuperPoly] = {}
    total = ctx.sig.zero()
    for k in range(0, n + 1):
        if k == 0 and skip_zero:
            continue
        for perm, sign in shuffles(k, n - k, par):
            head = perm[:k]
            if head not in inner:
                inner[head] = engine.bracket([args[i] for i in head], check=False)
            val = inner[head]
            if not val:
                continue
            outer = engine.bracket([val] + [args[i] for i in perm[k:]], check=False)
            total = total + outer.scale(sign)
    return total


def jacobiator_even(engine: DerivedEngine, xi: SuperPoly, n: int, drop_phi: bool = False) -> SuperPoly:
    """Jacobiator on n copies of one even argument, via binomial weights."""
    ctx = engine.ctx
    if not ctx.in_image(xi):
        raise ContextError("argument is not in V")
    if xi and ctx.parity(xi) != 0:
        raise ContextError("jacobiator_even needs an even argument")
    skip_zero = engine.generator.is_derivation or drop_phi
    total = ctx.sig.zero()
    for l in range(0, n + 1):
        k = n - l
        if k == 0 and skip_zero:
            continue
        val = engine.bracket([xi] * k, check=False)
        if not val:
            continue
        total = total + engine.bracket([val] + [xi] * l, check=False).scale(binomial(n, l))
    return total


# -- random arguments and generators -------------------------------------

def random_args(ctx: LieContext, rng: random.Random, n: int, caps: Caps | None = None) -> list[SuperPoly]:
    out = []
    while len(out) < n:
        a = ctx.random_v(rng, caps=caps, nterms=rng.randint(1, 3))
        if a:
            out.append(a)
    return out


def random_odd_generator(ctx: LieContext, rng: random.Random, caps: Caps | None = None) -> SuperPoly:
    # denser than a default element so that nested brackets rarely vanish
    while True:
        d = ctx.random_element(rng, parity=ODD, caps=caps, nterms=rng.randint(3, 8))
        if d:
            return d


def _fmt_args(ctx, args):
    return [ctx.format(a) for a in args]


def verify_theorem1(target, n_max: int = 4, trials: int = 100, seed: int = 0,
                    caps: Caps | None = None) -> Report:
    """Check J^n_D(args) == {args}_{D^2} exactly on random inputs.

    ``target`` is a fixed :class:`DerivedEngine`, or a :class:`LieContext`
    in which case every trial draws a fresh random odd generator.
    """
    fixed = isinstance(target, DerivedEngine)
    ctx = target.ctx if fixed else target
    report = Report(command="verify theorem1", seed=seed, trials=trials)
    for n in range(n_max + 1):
        report.ok(f"n={n}")
    for t in range(trials):
        rng = random.Random(f"theorem1:{seed}:{t}")
        engine = target if fixed else DerivedEngine.of(ctx, random_odd_generator(ctx, rng, caps))
        if engine.generator.is_derivation or engine.parity != ODD:
            raise GeneratorError("theorem 1 needs an odd element generator")
        square = generator_square(engine)
        for n in range(n_max + 1):
            args = random_args(ctx, rng, n, caps)
            residual = jacobiator(engine, args) - square.bracket(args, check=False)
            if residual:
                report.fail(f"n={n}", [ctx.format(engine.delta)] + _fmt_args(ctx, args),
                            ctx.format(residual), arity=n, trial=t)
    return report


def random_derivation(ctx: LieContext, rng: random.Random, caps: Caps | None = None,
                      kind: str | None = None) -> Derivation:
    """Odd derivation with P d P = P d.

    ``kind`` is ``"inner"`` (ad of an odd element with P(D) = 0) or
    ``"param"`` (inner plus an odd-parameter derivative); random if None.
    """
    odd_params = [n for n in ctx.params if ctx.sig.parity_of(n) == ODD]
    if kind is None:
        kind = rng.choice(["inner", "param"]) if odd_params else "inner"
    while True:
        delta = random_odd_generator(ctx, rng, caps)
        delta = delta - ctx.project(delta)
        if delta:
            break
    d = inner_derivation(ctx, delta)
    if kind == "param":
        if not odd_params:
            raise GeneratorError("context has no odd parameter")
        d = d + parameter_derivation(ctx, rng.choice(odd_params))
    return d


def check_derivation(ctx: LieContext, d: Derivation, trials: int = 20, seed: int = 0,
                     caps: Caps | None = None) -> Report:
    """Random check of the derivation rule and of P d P = P d."""
    report = Report(command=f"check derivation {d.label}", seed=seed, trials=trials)
    report.ok("derivation")
    report.ok("PdP=Pd")
    for t in range(trials):
        rng = random.Random(f"derivation:{seed}:{t}")
        a = ctx.random_element(rng, caps=caps)
        b = ctx.random_element(rng, caps=caps)
        r = derivation_defect(ctx, d, a, b)
        if r:
            report.fail("derivation", _fmt_args(ctx, [a, b]), ctx.format(r), trial=t)
        r = pdp_defect(ctx, d, a)
        if r:
            report.fail("PdP=Pd", [ctx.format(a)], ctx.format(r), trial=t)
    return report


def verify_theorem2(target, n_max: int = 4, trials: int = 50, seed: int = 0,
                    caps: Caps | None = None) -> Report:
    """Check J^n_d(args) == {args}_{d^2} for n = 1..n_max.

    ``target`` is an engine generated by a derivation, or a context in which
    case each trial draws a random odd derivation (inner or parameter type).
    The precondition P d P = P d is checked first; a violation is reported
    with its witness and the identity is not evaluated.
    """
    fixed = isinstance(target, DerivedEngine)
    ctx = target.ctx if fixed else target
    report = Report(command="verify theorem2", seed=seed, trials=trials)
    for n in range(1, n_max + 1):
        report.ok(f"n={n}")
    for t in range(trials):
        rng = random.Random(f"theorem2:{seed}:{t}")
        if fixed:
            engine = target
        else:
            engine = DerivedEngine.of_derivation(ctx, random_derivation(ctx, rng, caps))
        d = engine.generator.derivation
        if d is None or d.parity != ODD:
            raise GeneratorError("theorem 2 needs an odd derivation")
        x = ctx.random_element(rng, caps=caps)
        pre = pdp_defect(ctx, d, x)
        if pre:
            report.fail("PdP=Pd", [ctx.format(x)], ctx.format(pre), trial=t)
            continue
        square = generator_square(engine)
        for n in range(1, n_max + 1):
            args = random_args(ctx, rng, n, caps)
            residual = jacobiator(engine, args) - square.bracket(args, check=False)
            if residual:
                report.fail(f"n={n}", [d.label] + _fmt_args(ctx, args), ctx.format(residual),
                            arity=n, trial=t)
    return report


def check_order_corollary(engine: DerivedEngine, r: int, n_max: int = 4, trials: int = 20,
                          seed: int = 0, caps: Caps | None = None) -> Report:
    """If ord(D^2) <= r, Jacobiators of arity r < n <= n_max vanish.

    For arities n <= r a bounded random search looks for a nonzero
    Jacobiator; a hit is recorded as a witness, a miss only as "not found".
    """
    ctx = engine.ctx
    report = Report(command=f"verify order-corollary r={r}", seed=seed, trials=trials)
    sq = generator_square(engine)
    sq_order = ctx.order(sq.delta) if not sq.generator.is_derivation else None
    if sq_order is None:
        report.fail("precondition", [], "order of a derivation square is not computed")
        return report
    report.notes.append(f"ord(D^2) = {sq_order}")
    if not sq_order <= r:
        report.fail("precondition", [ctx.format(engine.delta)],
                    f"ord(D^2) = {sq_order} exceeds r = {r}")
        return report
    for n in range(r + 1, n_max + 1):
        report.ok(f"n={n}")
    found = set()
    for t in range(trials):
        rng = random.Random(f"order:{seed}:{t}")
        for n in range(0, n_max + 1):
            if n <= r and n in found:
                continue
            args = random_args(ctx, rng, n, caps)
            j = jacobiator(engine, args)
            if n > r and j:
                report.fail(f"n={n}", _fmt_args(ctx, args), ctx.format(j), arity=n, trial=t)
            elif n <= r and j:
                found.add(n)
                report.witnesses.append(
                    _witness(f"nonzero J^{n}", _fmt_args(ctx, args), ctx.format(j), n, t))
    for n in range(0, min(r, n_max) + 1):
        if n not in found:
            report.notes.append(f"no nonzero J^{n} found (bounded search)")
    return report


def _witness(check, inputs, residual, arity, trial):
    return Case(check, inputs, residual, arity, trial)


def leibniz_defect(engine: DerivedEngine, prefix: Sequence[SuperPoly], g: SuperPoly,
                   h: SuperPoly) -> SuperPoly:
    """{a.., gh} - {a.., g} h - (-1)^(|g||h|) {a.., h} g."""
    ctx = engine.ctx
    if not ctx.has_products():
        raise ContextError(f"the image of P in a {ctx.kind} context has no product")
    prefix = list(prefix)
    s = -1 if g.parity() * h.parity() else 1
    return (engine.bracket(prefix + [g * h])
            - engine.bracket(prefix + [g]) * h
            - (engine.bracket(prefix + [h]) * g).scale(s))


def hbar_rescale(engine: DerivedEngine, t) -> DerivedEngine:
    """Brackets multiplied by t^(-n); ``t`` is a rational or an even parameter name.

    The deformed Leibniz rule then carries the factor ``t`` in front of
    the (n+1)-th bracket.
    """
    sig = engine.ctx.sig
    if isinstance(t, str):
        v = sig.var(t)
        if v.role != "param" or v.parity != 0:
            raise GeneratorError(f"{t!r} is not an even parameter")
        tpoly, inv = sig.gen(t), sig.gen(t, -1)
    else:
        t = Fraction(t)
        if t == 0:
            raise ZeroDivisionError("rescaling by zero")
        tpoly, inv = sig.const(t), sig.const(1 / t)
    scale = inv if engine.scale is None else engine.scale * inv
    hbar = tpoly if engine.hbar is None else engine.hbar * tpoly
    return replace(engine, scale=scale, hbar=hbar)


def hbar_insert(ctx: LieContext, op: SuperPoly, t: str) -> SuperPoly:
    """Replace every derivative d_a by t d_a (the semiclassical family)."""
    if ctx.kind != "ops":
        raise ContextError("hbar insertion applies to differential operators")
    out = ctx.sig.zero()
    top = ctx.order(op)
    for k in range(0, (top if top is not NEG_INF else -1) + 1):
        part = op.part_of_degree(ctx.conj, k)
        if part:
            out = out + ctx.sig.gen(t, k) * part
    return out


def phi_split_condition(engine: DerivedEngine) -> bool:
    """Sufficient condition P[D, P(D)] == [D, P(D)] for dropping Phi."""
    ctx = engine.ctx
    d = engine.delta
    b = ctx.bracket(d, ctx.project(d))
    return ctx.project(b) == b


def drop_phi_invariance(engine: DerivedEngine, arg_tuples: dict[int, list] | None = None,
                        probe_degree: int = 1) -> Report:
    """Compare brackets of D and D' = D - P(D), and J^n with J'^n.

    J'^n is the Jacobiator with the 0-ary bracket dropped.  For ord D = s
    the two must agree for s <= n <= 2s-1; brackets of arity >= 1 must
    agree for all arities.  By default every multiset of probe monomials of
    degree <= ``probe_degree`` is used as arguments.
    """
    ctx = engine.ctx
    s = ctx.order(engine.delta)
    report = Report(command="drop-phi invariance", trials=0)
    if s is NEG_INF:
        report.notes.append("zero generator: trivially invariant")
        return report
    primed = DerivedEngine.of(ctx, engine.delta - ctx.project(engine.delta))
    window = range(s, 2 * s)
    report.notes.append(f"ord D = {s}; window n = {s}..{2 * s - 1}")
    probes = [m for m in ctx.v_basis(probe_degree)]

    def tuples(n):
        if arg_tuples is not None:
            return arg_tuples.get(n, [])
        return [list(c) for c in combinations_with_replacement(probes, n)]

    for n in range(1, s + 2):
        report.ok(f"bracket n={n}")
        for args in tuples(n):
            r = engine.bracket(args) - primed.bracket(args)
            if r:
                report.fail(f"bracket n={n}", _fmt_args(ctx, args), ctx.format(r), arity=n)
    for n in range(1, s):
        # below the window Phi does enter; keep one witness per arity
        for args in tuples(n):
            diff = jacobiator(engine, args) - jacobiator(engine, args, drop_phi=True)
            if diff:
                report.witnesses.append(_witness(f"J-J' n={n}", _fmt_args(ctx, args), ctx.format(diff), n, None))
                break
    for n in window:
        report.ok(f"J n={n}")
        report.ok(f"J'=J_D' n={n}")
        for args in tuples(n):
            report.trials += 1
            full = jacobiator(engine, args)
            dropped = jacobiator(engine, args, drop_phi=True)
            if full != dropped:
                report.fail(f"J n={n}", _fmt_args(ctx, args), ctx.format(full - dropped), arity=n)
            r = dropped - jacobiator(primed, args)
            if r:
                report.fail(f"J'=J_D' n={n}", _fmt_args(ctx, args), ctx.format(r), arity=n)
    return report


# -- operators with generic symbolic coefficients --------------------------

@dataclass(frozen=True)
class GenericOperator:
    """An odd operator sum_k (1/k!) S^{a1..ak} d_ak...d_a1 with symbolic S.

    ``coeffs`` maps a sorted index tuple to its coefficient function; the
    coefficient of any other ordering follows from graded symmetry (see
    :meth:`coeff`).  ``xi`` is a generic even element of V when requested.
    """

    ctx: LieContext
    delta: SuperPoly
    coeffs: dict
    xi: SuperPoly | None = None

    def coeff(self, idx: Sequence[str]) -> SuperPoly:
        base = self.ctx.base
        order = sorted(range(len(idx)), key=lambda i: base.index(idx[i]))
        key = tuple(idx[i] for i in order)
        c = self.coeffs.get(key)
        if c is None:
            return self.ctx.sig.zero()
        par = [self.ctx.sig.parity_of(a) for a in idx]
        return c.scale(koszul_sign(order, par))


def _index_tuples(base: Sequence[tuple[str, int]], k: int):
    for combo in combinations_with_replacement(range(len(base)), k):
        names = [base[i][0] for i in combo]
        if any(base[i][1] == ODD and combo.count(i) > 1 for i in set(combo)):
            continue
        yield tuple(names)


def generic_operator(base: Sequence[tuple[str, int]], order: int, orders: Sequence[int] | None = None,
                     coeff_degree: int | Sequence[int] = 0, xi_degree: int | None = None,
                     kind: str = "ops", caps: Caps = Caps()) -> GenericOperator:
    """Odd operator of the given order whose coefficients are free parameters.

    Every coefficient S^{a1..ak}(x) is a sum over base monomials m of degree
    at most ``coeff_degree`` (an int, or one value per k) of a fresh
    parameter times m, the parameter's parity chosen to make the term odd.
    ``orders`` restricts which k appear (default 0..order).  With
    ``xi_degree`` a generic even element of V is built as well.
    """
    if orders is None:
        orders = range(order + 1)
    if isinstance(coeff_degree, int):
        coeff_degree = [coeff_degree] * (order + 1)
    bare = LieContext.build(kind, base)
    mon_cache = {}

    def base_monomials(deg):
        if deg not in mon_cache:
            mon_cache[deg] = [(bare.format(m), m) for m in bare.monomials(bare.base, deg)]
        return mon_cache[deg]

    parities = dict(base)
    plan, params = [], []
    for k in orders:
        for idx in _index_tuples(base, k):
            cpar = (1 + sum(parities[a] for a in idx)) & 1
            for mname, m in base_monomials(coeff_degree[k]):
                suffix = "" if mname == "1" else "__" + mname.replace("*", "_").replace("^", "")
                pname = "S_" + ("_".join(idx) if idx else "0") + suffix
                params.append((pname, (cpar + m.parity()) & 1))
                plan.append((idx, pname, m))
    xi_plan = []
    if xi_degree is not None:
        for mname, m in base_monomials(xi_degree):
            pname = "c__" + mname.replace("*", "_").replace("^", "")
            params.append((pname, m.parity()))
            xi_plan.append((pname, m))
    sig = make_signature(kind, base, params)
    ctx = LieContext(kind, sig, caps)

    def relift(m):
        # monomials built in the parameter-free signature, re-expressed here
        out = sig.one()
        for name, e in _factors(m):
            out = out * sig.gen(name, e)
        return out

    coeffs: dict = {}
    for idx, pname, m in plan:
        coeffs[idx] = coeffs.get(idx, sig.zero()) + sig.gen(pname) * relift(m)
    delta = sig.zero()
    for idx, c in coeffs.items():
        weight = 1
        for a in set(idx):
            weight *= factorial(idx.count(a))
        d = sig.one()
        for a in reversed(idx):
            d = d * sig.gen(ctx._conj_of[a])
        delta = delta + (c * d).scale(Fraction(1, weight))
    xi = None
    if xi_plan:
        xi = sig.zero()
        for pname, m in xi_plan:
            xi = xi + sig.gen(pname) * relift(m)
    return GenericOperator(ctx, delta, coeffs, xi)


def _factors(m: SuperPoly):
    (key, _), = m.terms.items()
    return monomial_factors(m.sig, key)


def symbol_contraction(gen: GenericOperator, args: Sequence[SuperPoly]) -> SuperPoly:
    """sum over index tuples of (-1)^eps S^{a1..an} d_an f1 ... d_a1 fn.

    ``eps`` is the sign from moving each derivative d_ai leftwards past the
    earlier arguments: eps = sum_i f~_i (a~_{i+1} + ... + a~_n) in the
    indexing where f1 pairs with the last index.  This is the polarization
    of the principal symbol computed with plain partial derivatives.
    """
    ctx = gen.ctx
    sig = ctx.sig
    n = len(args)
    total = sig.zero()
    par = [a.parity() for a in args]
    for idx in product(ctx.base, repeat=n):
        c = gen.coeff(idx)
        if not c:
            continue
        ip = [sig.parity_of(a) for a in idx]
        # argument j (0-based) is differentiated by index n-1-j
        eps = 0
        for j in range(n):
            eps += par[j] * sum(ip[: n - 1 - j])
        term = c
        for j in range(n):
            term = term * partial(args[j], idx[n - 1 - j])
            if not term:
                break
        if term:
            total = total + term.scale(-1 if eps & 1 else 1)
    return total


# -- generators with vanishing square ------------------------------------

def _random_even_part(ctx: LieContext, rng: random.Random, names: Sequence[str], conj: Sequence[str],
                      max_degree: int, nterms: int, min_conj: int = 1) -> SuperPoly:
    """Even element built from the given base variables and conjugates only.

    Every term has at least ``min_conj`` conjugate factors, so its image
    under the default projector is zero.
    """
    coeffs = ctx.monomials(names, max_degree)
    derivs = ctx.monomials(conj, 1 if ctx.kind == "vect" else 2, min_degree=min_conj)
    out = ctx.sig.zero()
    cand = [c * d for c in coeffs for d in derivs]
    cand = [m for m in cand if m and m.parity() == 0]
    for _ in range(nterms):
        out = out + rng.choice(cand).scale(ctx._coeff(rng))
    return out


def random_homological(ctx: LieContext, rng: random.Random) -> SuperPoly:
    """Random odd D with [D, D] = 0 and P(D) = 0 for the default projector.

    Built from commuting pieces placed behind distinct odd base variables:

    * ops/ham: th1 f(A) + c(th2) g(A), where A is even and involves only even
      variables and their conjugates, f and g are polynomials in A without
      constant term, and c(th2) is the conjugate of th2;
    * vect: th1 X + th1 th2 h(x) d(th2) with X an even field in x only;
    * multivec: th1 H + th1 th2 G with H odd and G even in x, xs_x only,
      or else a constant-coefficient polynomial in the antimomenta.

    Needs at least one odd base variable.
    """
    sig = ctx.sig
    evens = [b for b in ctx.base if sig.parity_of(b) == 0]
    odds = [b for b in ctx.base if sig.parity_of(b) == ODD]
    if not odds:
        raise GeneratorError("square-zero templates need an odd base variable")
    if not evens:
        raise GeneratorError("square-zero templates need an even base variable")
    econj = [ctx._conj_of[b] for b in evens]
    th1 = sig.gen(odds[0])
    th2 = odds[1] if len(odds) > 1 else None
    c = lambda: ctx._coeff(rng)
    if ctx.kind in ("ops", "ham"):
        a = _random_even_part(ctx, rng, evens, econj, 1, rng.randint(1, 2))
        mul = ctx.compose if ctx.kind == "ops" else (lambda u, v: u * v)
        a2 = mul(a, a)
        delta = th1 * (a.scale(c()) + (a2.scale(c()) if rng.random() < 0.5 else sig.zero()))
        if th2 is not None:
            delta = delta + sig.gen(ctx._conj_of[th2]) * a.scale(c())
        return delta
    if ctx.kind == "vect":
        x = _random_even_part(ctx, rng, evens, econj, 2, rng.randint(1, 3))
        delta = th1 * x
        if th2 is not None:
            h = rng.choice(ctx.monomials(evens, 2)).scale(c())
            delta = delta + th1 * sig.gen(th2) * h * sig.gen(ctx._conj_of[th2])
        return delta
    # multivectors: antimomenta of even variables are odd
    const = [m for m in ctx.monomials(ctx.conj, 2, min_degree=1) if m.parity() == 0]
    if rng.random() < 0.25:
        delta = sig.zero()
        for _ in range(rng.randint(1, 3)):
            delta = delta + rng.choice(const).scale(c())
        if delta:
            return delta
    coeffs = ctx.monomials(evens, 2)
    odd_h = sig.zero()
    for _ in range(rng.randint(1, 2)):
        odd_h = odd_h + rng.choice(coeffs) * sig.gen(rng.choice(econj)).scale(c())
    delta = th1 * odd_h
    if th2 is not None:
        even_g = rng.choice(coeffs) * sig.gen(econj[0]) * sig.gen(econj[-1])
        delta = delta + th1 * sig.gen(th2) * even_g.scale(c())
    return delta


def random_square_zero_derivation(ctx: LieContext, rng: random.Random, kind: str | None = None) -> Derivation:
    """Odd derivation with d^2 = 0 and P d P = P d.

    ``kind``: ``"inner"`` (ad of a square-zero D), ``"param"`` (derivative
    along an odd parameter absent from D, plus the inner part), or random.
    """
    odd_params = [n for n in ctx.params if ctx.sig.parity_of(n) == ODD]
    if kind is None:
        kind = rng.choice(["inner", "param"]) if odd_params else "inner"
    d = inner_derivation(ctx, random_homological(ctx, rng))
    if kind == "param":
        if not odd_params:
            raise GeneratorError("context has no odd parameter")
        d = d + parameter_derivation(ctx, rng.choice(odd_params))
    return d
