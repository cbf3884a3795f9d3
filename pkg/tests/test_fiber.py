import random

import pytest

from higherbrackets.contexts import KINDS
from higherbrackets.derived import (DerivedEngine, inner_derivation, parameter_derivation,
                                    random_args, random_square_zero_derivation,
                                    verify_theorem2)
from higherbrackets.fiber import (CocylPair, FiberEngine, FiberError, Slot, D_op, extended_bracket,
                                  verify_fiber_linfty)

from conftest import make_ctx


def engine(kind, seed=0, k=None):
    ctx = make_ctx(kind)
    rng = random.Random(seed)
    return FiberEngine(ctx, random_square_zero_derivation(ctx, rng, kind=k)), rng


def kernel_elem(ctx, rng):
    while True:
        x = ctx.random_element(rng)
        x = x - ctx.project(x)
        if x:
            return x


@pytest.mark.parametrize("kind", KINDS)
def test_D_squares_to_zero(kind):
    eng, rng = engine(kind, 1)
    ctx = eng.ctx
    for _ in range(10):
        x = ctx.random_element(rng)
        a = ctx.random_v(rng)
        for shifted in (True, False):
            p = CocylPair(x, a, shifted)
            assert not D_op(eng, D_op(eng, p))


def test_D_examples(ops):
    rng = random.Random(2)
    eng = FiberEngine(ops, random_square_zero_derivation(ops, rng))
    k = kernel_elem(ops, rng)
    out = eng.D(CocylPair(k, ops.sig.zero(), False))
    assert out.first == eng.d(k) and out.second == 0
    zero_d = FiberEngine(ops, parameter_derivation(ops, "lam").__class__(lambda v: v.sig.zero(), 1, "0"))
    x = ops.random_element(rng)
    out = zero_d.D(CocylPair(x, ops.sig.zero(), False))
    assert out.first == 0 and out.second == -ops.project(x)


def test_maps(ctx):
    rng = random.Random(3)
    eng = FiberEngine(ctx, random_square_zero_derivation(ctx, rng))
    for _ in range(5):
        k = kernel_elem(ctx, rng)
        assert eng.p(eng.j(k)) == k
        assert eng.q(eng.j(k)) == k
        assert eng.D(eng.j(k)) == eng.j(eng.d(k))
    with pytest.raises(FiberError):
        eng.j(ctx.project(ctx.random_v(rng)) + ctx.sig.one())


def test_rejects_pdp_violation(ops):
    d = inner_derivation(ops, ops.sig.gen("a") * ops.sig.gen("x"))
    with pytest.raises(FiberError):
        FiberEngine(ops, d)


def test_bracket_rules(ops):
    rng = random.Random(4)
    eng = FiberEngine(ops, random_square_zero_derivation(ops, rng))
    d = eng.d
    k = kernel_elem(ops, rng)
    out = extended_bracket(eng, [Slot(k, True)])
    assert out.first == -d(k) and out.second == 0
    a, b = random_args(ops, rng, 2)
    out = extended_bracket(eng, [Slot(a, False), Slot(b, False)])
    assert out.first == 0 and out.second == DerivedEngine.of_derivation(ops, d).bracket([a, b])
    x, y = ops.random_element(rng), ops.random_element(rng)
    assert not extended_bracket(eng, [Slot(x, True), Slot(y, True), Slot(a, False)])
    assert not extended_bracket(eng, [])
    two = extended_bracket(eng, [Slot(x, True), Slot(y, True)])
    sign = -1 if ops.parity(x) else 1
    assert two.first == ops.bracket(x, y).scale(sign) and two.second == 0


def test_bracket_graded_symmetric(ctx):
    rng = random.Random(5)
    eng = FiberEngine(ctx, random_square_zero_derivation(ctx, rng))
    x = ctx.random_element(rng)
    a, b = random_args(ctx, rng, 2)
    slots = [Slot(x, True), Slot(a, False), Slot(b, False)]
    base = eng.extended_bracket(slots)
    sw = [slots[1], slots[0], slots[2]]
    sign = -1 if slots[0].parity(ctx) * slots[1].parity(ctx) else 1
    assert not (eng.extended_bracket(sw) - base.scale(sign))


@pytest.mark.parametrize("kind", KINDS)
def test_fiber_identities(kind):
    r = verify_fiber_linfty(make_ctx(kind), n_max=4, trials=8, seed=1)
    assert r.passed, r.cases[:1]


def test_fiber_with_parameter_derivation(ops):
    rng = random.Random(9)
    eng = FiberEngine(ops, random_square_zero_derivation(ops, rng, kind="param"))
    assert verify_fiber_linfty(eng, trials=6).passed


def test_fiber_restricted_to_v_matches_theorem2(ham):
    rng = random.Random(6)
    d = random_square_zero_derivation(ham, rng)
    eng = FiberEngine(ham, d)
    assert verify_theorem2(DerivedEngine.of_derivation(ham, d), trials=5).passed
    for n in range(1, 4):
        args = random_args(ham, rng, n)
        assert eng.extended_bracket([Slot(a, False) for a in args]).second == \
            DerivedEngine.of_derivation(ham, d).bracket(args)


def test_non_square_zero_downgrades(ops):
    from higherbrackets.derived import random_derivation
    eng = FiberEngine(ops, random_derivation(ops, random.Random(1)))
    assert not eng.square_zero
    r = verify_fiber_linfty(eng, trials=4)
    assert r.passed and r.witnesses
    assert any("d^2 != 0" in n for n in r.notes)
