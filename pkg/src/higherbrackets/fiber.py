"""Homotopy-fiber construction for a derivation d with P d P = P d.

Elements of the shifted space ``Pi L + V`` are pairs ``(Pi x, a)``; the
parity-reversed component is kept as the plain element ``x`` plus a flag,
so the slot parity of ``Pi x`` is ``x~ + 1``.  The differential and the
extended brackets are

    D(Pi x, a)            = (-Pi dx, P(x + da))
    {Pi x}                = -Pi dx + P x
    {a}                   = P da
    {Pi x, Pi y}          = (-1)^x~ Pi [x, y]
    {Pi x, a1, .., an}    = P[..[x, a1], .., an]
    {a1, .., an}          = P[..[d a1, a2], .., an]

with every other bracket zero (up to symmetry) and no 0-ary bracket.  The
unshifted variant on ``L + Pi V`` uses D(x, Pi a) = (dx, -Pi P(x + da)).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .contexts import Caps, LieContext
from .derived import (Derivation, DerivedEngine, pdp_defect,
                      random_square_zero_derivation)
from .kernel import ODD, SuperPoly, koszul_sign, shuffles
from .reports import Case, Report


class FiberError(ValueError):
    pass


@dataclass(frozen=True)
class Slot:
    """A homogeneous argument: ``Pi x`` (``shifted``) or an element of V."""

    value: SuperPoly
    shifted: bool

    def parity(self, ctx: LieContext) -> int:
        p = ctx.parity(self.value) if self.value else 0
        return (p + 1) & 1 if self.shifted else p


@dataclass(frozen=True)
class CocylPair:
    """``(first, second)``; ``first`` is read as Pi x in the shifted variant."""

    first: SuperPoly
    second: SuperPoly
    shifted: bool = True

    def __add__(self, other: CocylPair) -> CocylPair:
        if self.shifted != other.shifted:
            raise FiberError("pairs from different variants")
        return CocylPair(self.first + other.first, self.second + other.second, self.shifted)

    def __sub__(self, other: CocylPair) -> CocylPair:
        return self + other.scale(-1)

    def scale(self, c) -> CocylPair:
        return CocylPair(self.first.scale(c), self.second.scale(c), self.shifted)

    def __bool__(self):
        return bool(self.first) or bool(self.second)

    def slots(self) -> list[Slot]:
        out = []
        if self.first:
            out.append(Slot(self.first, True))
        if self.second:
            out.append(Slot(self.second, False))
        return out


class FiberEngine:
    """A context with an odd derivation whose kernel-of-P is d-stable.

    The condition P d P = P d is checked on ``check_trials`` random
    elements at construction; a violation raises :class:`FiberError` with
    the witness.  Square-zero is recorded but not required.
    """

    def __init__(self, ctx: LieContext, d: Derivation, check_trials: int = 20,
                 seed: int = 0, caps: Caps | None = None):
        if d.parity != ODD:
            raise FiberError("the fiber construction needs an odd derivation")
        self.ctx = ctx
        self.d = d
        self.derived = DerivedEngine.of_derivation(ctx, d)
        rng = random.Random(f"fiber-build:{seed}")
        self.square_zero = True
        for _ in range(check_trials):
            x = ctx.random_element(rng, caps=caps)
            w = pdp_defect(ctx, d, x)
            if w:
                raise FiberError(f"P d P != P d at x = {ctx.format(x)}: residual {ctx.format(w)}")
            if d(d(x)):
                self.square_zero = False

    def zero(self, shifted: bool = True) -> CocylPair:
        z = self.ctx.sig.zero()
        return CocylPair(z, z, shifted)

    # -- differential and chain maps -----------------------------------------
    def D(self, pair: CocylPair) -> CocylPair:
        ctx, d = self.ctx, self.d
        x, a = pair.first, pair.second
        if not ctx.in_image(a):
            raise FiberError("second component is not in V")
        v = ctx.project(x + d(a))
        if pair.shifted:
            return CocylPair(-d(x), v, True)
        return CocylPair(d(x), -v, False)

    def j(self, x: SuperPoly, shifted: bool = False) -> CocylPair:
        if self.ctx.project(x):
            raise FiberError(f"{self.ctx.format(x)} is not in the kernel of P")
        return CocylPair(x, self.ctx.sig.zero(), shifted)

    @staticmethod
    def p(pair: CocylPair) -> SuperPoly:
        return pair.first

    def q(self, pair: CocylPair) -> SuperPoly:
        y = pair.first + self.d(pair.second)
        return y - self.ctx.project(y)

    # -- extended brackets on Pi L + V -----------------------------------------
    def extended_bracket(self, args: Sequence[Slot]) -> CocylPair:
        ctx, d = self.ctx, self.d
        zero = self.zero()
        n = len(args)
        for s in args:
            if not s.shifted and not ctx.in_image(s.value):
                raise FiberError(f"V slot {ctx.format(s.value)} is not in V")
        if n == 0 or any(not s.value for s in args):
            return zero
        lpos = [i for i, s in enumerate(args) if s.shifted]
        if not lpos:
            if n == 1:
                return CocylPair(zero.first, ctx.project(d(args[0].value)))
            return CocylPair(zero.first, self.derived.bracket([s.value for s in args], check=False))
        par = [s.parity(ctx) for s in args]
        if len(lpos) == 1:
            i = lpos[0]
            perm = (i,) + tuple(k for k in range(n) if k != i)
            sign = koszul_sign(perm, par)
            x = args[i].value
            if n == 1:
                return CocylPair(-d(x), ctx.project(x))
            y = x
            for k in perm[1:]:
                y = ctx.bracket(y, args[k].value)
                if not y:
                    return zero
            return CocylPair(zero.first, ctx.project(y).scale(sign))
        if len(lpos) == 2 and n == 2:
            x, y = args[0].value, args[1].value
            s = -1 if ctx.parity(x) else 1
            return CocylPair(ctx.bracket(x, y).scale(s), zero.second)
        return zero

    def bracket_multilinear(self, args: Sequence[CocylPair]) -> CocylPair:
        """Extended bracket of pairs, expanded over their homogeneous slots."""
        total = self.zero()

        def rec(pos, chosen):
            nonlocal total
            if pos == len(args):
                total = total + self.extended_bracket(chosen)
                return
            for s in _homogeneous_slots(self.ctx, args[pos]):
                rec(pos + 1, chosen + [s])

        rec(0, [])
        return total

    def jacobiator(self, args: Sequence[Slot]) -> CocylPair:
        """Generalized Jacobi sum with vanishing 0-ary bracket."""
        ctx = self.ctx
        n = len(args)
        par = [s.parity(ctx) for s in args]
        total = self.zero()
        for k in range(1, n + 1):
            for perm, sign in shuffles(k, n - k, par):
                inner = self.extended_bracket([args[i] for i in perm[:k]])
                if not inner:
                    continue
                rest = [args[i] for i in perm[k:]]
                for s in _homogeneous_slots(ctx, inner):
                    out = self.extended_bracket([s] + rest)
                    if out:
                        total = total + out.scale(sign)
        return total


def _homogeneous_slots(ctx: LieContext, pair: CocylPair) -> list[Slot]:
    out = []
    for s in pair.slots():
        for part in ctx.lie_parts(s.value).values():
            out.append(Slot(part, s.shifted))
    return out


def D_op(engine: FiberEngine, pair: CocylPair) -> CocylPair:
    return engine.D(pair)


def extended_bracket(engine: FiberEngine, args: Sequence[Slot]) -> CocylPair:
    return engine.extended_bracket(args)


def _random_slot(ctx: LieContext, rng: random.Random, caps: Caps | None) -> Slot:
    while True:
        if rng.random() < 0.5:
            v = ctx.random_element(rng, caps=caps, nterms=rng.randint(1, 3))
            if v:
                return Slot(v, True)
        else:
            v = ctx.random_v(rng, caps=caps, nterms=rng.randint(1, 2))
            if v:
                return Slot(v, False)


def _random_kernel(ctx: LieContext, rng: random.Random, caps: Caps | None) -> SuperPoly:
    while True:
        x = ctx.random_element(rng, caps=caps, nterms=rng.randint(1, 3))
        x = x - ctx.project(x)
        if x:
            return x


def _fmt_pair(ctx, pair: CocylPair) -> str:
    return f"({ctx.format(pair.first)}, {ctx.format(pair.second)})"


def _fmt_slot(ctx, s: Slot) -> str:
    return ("Pi " if s.shifted else "") + ctx.format(s.value)


def verify_fiber_linfty(target, n_max: int = 4, trials: int = 50, seed: int = 0,
                        caps: Caps | None = None) -> Report:
    """Exact checks of the fiber construction on random inputs.

    ``target`` is a :class:`FiberEngine` or a context (then every trial
    draws a random square-zero derivation).  Checks: D^2 = 0, p j = i,
    q j = id, the chain-map identities for j, p and q, the V-ideal
    property, agreement of V-only brackets with the derived brackets of d,
    and the generalized Jacobi identities for n = 1..n_max.  For an engine
    whose d does not square to zero the residuals are still reported but
    the identities that need d^2 = 0 are not asserted.
    """
    fixed = isinstance(target, FiberEngine)
    ctx = target.ctx if fixed else target
    report = Report(command="verify fiber", seed=seed, trials=trials)
    checks = ["D^2=0", "p.j=i", "q.j=id", "j chain", "p chain", "q chain", "V ideal", "V brackets"]
    checks += [f"n={n}" for n in range(1, n_max + 1)]
    for c in checks:
        report.ok(c)
    for t in range(trials):
        rng = random.Random(f"fiber:{seed}:{t}")
        if fixed:
            eng = target
        else:
            eng = FiberEngine(ctx, random_square_zero_derivation(ctx, rng), check_trials=5,
                              seed=t, caps=caps)
        strict = eng.square_zero
        if not strict:
            report.notes.append(f"trial {t}: d^2 != 0, only residuals are reported")
        d = eng.d

        def record(check, inputs, residual, arity=None, needs_square=False):
            if not residual:
                return
            text = _fmt_pair(ctx, residual) if isinstance(residual, CocylPair) else ctx.format(residual)
            if needs_square and not strict:
                report.witnesses.append(_case(check, inputs, text, arity, t))
            else:
                report.fail(check, inputs, text, arity=arity, trial=t)

        x = ctx.random_element(rng, caps=caps, nterms=rng.randint(1, 3))
        a = ctx.random_v(rng, caps=caps, nterms=rng.randint(1, 2))
        k = _random_kernel(ctx, rng, caps)
        for shifted in (True, False):
            pair = CocylPair(x, a, shifted)
            record("D^2=0", [ctx.format(x), ctx.format(a)], eng.D(eng.D(pair)), needs_square=True)
        record("p.j=i", [ctx.format(k)], eng.p(eng.j(k)) - k)
        record("q.j=id", [ctx.format(k)], eng.q(eng.j(k)) - k)
        record("j chain", [ctx.format(k)], eng.D(eng.j(k)) - eng.j(d(k)))
        pair = CocylPair(x, a, False)
        record("p chain", [ctx.format(x), ctx.format(a)], eng.p(eng.D(pair)) - d(eng.p(pair)))
        record("q chain", [ctx.format(x), ctx.format(a)], eng.q(eng.D(pair)) - d(eng.q(pair)),
               needs_square=True)
        for n in range(1, n_max + 1):
            args = [_random_slot(ctx, rng, caps) for _ in range(n)]
            names = [_fmt_slot(ctx, s) for s in args]
            out = eng.extended_bracket(args)
            if any(not s.shifted for s in args) and out.first:
                report.fail("V ideal", names, _fmt_pair(ctx, out), arity=n, trial=t)
            vargs = [ctx.random_v(rng, caps=caps, nterms=rng.randint(1, 2)) or ctx.sig.one()
                     for _ in range(n)]
            lhs = eng.extended_bracket([Slot(v, False) for v in vargs])
            rhs = eng.derived.bracket(vargs, check=False)
            if lhs.first or lhs.second != rhs:
                report.fail("V brackets", [ctx.format(v) for v in vargs],
                            _fmt_pair(ctx, CocylPair(lhs.first, lhs.second - rhs)), arity=n, trial=t)
            record(f"n={n}", names, eng.jacobiator(args), arity=n, needs_square=True)
    return report


def _case(check, inputs, residual, arity, trial):
    return Case(check, list(inputs), residual, arity, trial)
