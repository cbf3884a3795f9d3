import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from higherbrackets.contexts import KINDS, ContextError
from higherbrackets.derived import (
    DerivedEngine, GeneratorError, check_derivation, check_order_corollary, derived_bracket,
    drop_phi_invariance, generator_square, generic_operator, hbar_insert, hbar_rescale,
    inner_derivation, jacobiator, jacobiator_even, leibniz_defect, parameter_derivation,
    phi_split_condition, random_args, random_derivation, random_homological, random_odd_generator,
    random_square_zero_derivation, symbol_contraction, verify_theorem1, verify_theorem2,
)

from conftest import make_ctx

BASE3 = [("x", 0), ("y", 0), ("th", 1)]


def g(ctx, name, k=1):
    return ctx.sig.gen(name, k)


def D(ctx, name):
    return g(ctx, ctx._conj_of[name])


def engine_for(kind, seed):
    ctx = make_ctx(kind)
    rng = random.Random(seed)
    return DerivedEngine.of(ctx, random_odd_generator(ctx, rng)), rng


# -- brackets -------------------------------------------------------------------

def test_zero_ary_bracket_is_projection(ctx):
    rng = random.Random(1)
    delta = random_odd_generator(ctx, rng)
    assert derived_bracket(DerivedEngine.of(ctx, delta), []) == ctx.project(delta)


def test_zero_generator(ctx):
    e = DerivedEngine.of(ctx, ctx.sig.zero())
    rng = random.Random(2)
    for n in range(4):
        assert e.bracket(random_args(ctx, rng, n)) == 0


def test_bracket_rejects_non_v_arguments(ops):
    e = DerivedEngine.of(ops, g(ops, "a"))
    with pytest.raises(ContextError):
        e.bracket([D(ops, "x")])


def test_second_order_binary_bracket_formula():
    gen = generic_operator(BASE3, 2)
    e = DerivedEngine.of(gen.ctx, gen.delta)
    basis = gen.ctx.v_basis(2)
    for f, h in product(basis, repeat=2):
        assert e.bracket([f, h]) == symbol_contraction(gen, [f, h])
    for args in product(basis[:5], repeat=3):
        assert e.bracket(list(args)) == 0


def test_binary_formula_written_out():
    # (-1)^(f~ a~) S^{ab} d_b f d_a g, spelled out for two monomials
    gen = generic_operator(BASE3, 2)
    ctx = gen.ctx
    e = DerivedEngine.of(ctx, gen.delta)
    f, h = g(ctx, "x") * g(ctx, "th"), g(ctx, "y") * g(ctx, "th")
    want = ctx.sig.zero()
    for a, b in product(ctx.base, repeat=2):
        sign = -1 if f.parity() * ctx.sig.parity_of(a) else 1
        from higherbrackets.kernel import partial
        want = want + (gen.coeff((a, b)) * partial(f, b) * partial(h, a)).scale(sign)
    assert e.bracket([f, h]) == want != 0


def test_third_order_ternary_formula():
    gen = generic_operator(BASE3, 3, orders=[3])
    e = DerivedEngine.of(gen.ctx, gen.delta)
    basis = gen.ctx.v_basis(2)
    rng = random.Random(0)
    for _ in range(40):
        args = [rng.choice(basis) for _ in range(3)]
        assert e.bracket(args) == symbol_contraction(gen, args)
    for _ in range(10):
        assert e.bracket([rng.choice(basis) for _ in range(4)]) == 0


@pytest.mark.parametrize("kind", KINDS)
def test_graded_symmetry(kind):
    for seed in range(8):
        e, rng = engine_for(kind, seed)
        ctx = e.ctx
        for n in range(2, 5):
            args = random_args(ctx, rng, n)
            base = e.bracket(args)
            for i in range(n - 1):
                sw = list(args)
                sw[i], sw[i + 1] = sw[i + 1], sw[i]
                sign = -1 if ctx.parity(args[i]) * ctx.parity(args[i + 1]) else 1
                assert e.bracket(sw) == base.scale(sign)


@pytest.mark.parametrize("kind", KINDS)
def test_multilinearity(kind):
    e, rng = engine_for(kind, 5)
    ctx = e.ctx
    for n in range(1, 4):
        args = random_args(ctx, rng, n)
        i = rng.randrange(n)
        while True:
            other = ctx.random_v(rng, parity=ctx.parity(args[i]))
            if other:
                break
        lam = Fraction(-3, 2)
        mixed = list(args)
        mixed[i] = args[i] + other.scale(lam)
        alt = list(args)
        alt[i] = other
        assert e.bracket(mixed) == e.bracket(args) + e.bracket(alt).scale(lam)


def test_bracket_parity_matches_generator(ctx):
    e, rng = engine_for(ctx.kind, 9)
    for n in range(4):
        args = random_args(ctx, rng, n)
        b = e.bracket(args)
        if b:
            assert ctx.parity(b) == e.bracket_parity([ctx.parity(a) for a in args])


# -- square of the generator --------------------------------------------------

def test_square_examples(ops):
    th = "a"
    assert generator_square(DerivedEngine.of(ops, D(ops, th))).delta == 0
    delta = g(ops, "a") * D(ops, "x") + g(ops, "x") * D(ops, "a")
    sq = generator_square(DerivedEngine.of(ops, delta)).delta
    assert sq == ops.compose(delta, delta)
    assert sq != 0
    with pytest.raises(GeneratorError):
        generator_square(DerivedEngine.of(ops, g(ops, "x")))


def test_square_of_homological_is_zero(ctx):
    rng = random.Random(4)
    for _ in range(10):
        delta = random_homological(ctx, rng)
        assert generator_square(DerivedEngine.of(ctx, delta)).delta == 0
        assert ctx.project(delta) == 0


# -- Jacobiators ------------------------------------------------------------------

def test_jacobiator_n0_is_projected_square(ctx):
    rng = random.Random(8)
    for _ in range(5):
        e = DerivedEngine.of(ctx, random_odd_generator(ctx, rng))
        assert jacobiator(e, []) == ctx.project(generator_square(e).delta)
        assert jacobiator(e, []) == e.bracket([e.bracket([])])


def test_jacobiator_n1_vanishes_when_square_zero(ctx):
    rng = random.Random(6)
    e = DerivedEngine.of(ctx, random_homological(ctx, rng))
    for _ in range(5):
        assert jacobiator(e, random_args(ctx, rng, 1)) == 0


@pytest.mark.parametrize("kind", KINDS)
def test_low_order_identities_written_out(kind):
    e, rng = engine_for(kind, 12)
    ctx = e.ctx
    B = e.bracket
    phi = B([])
    a, b = random_args(ctx, rng, 2)
    pa, pb = ctx.parity(a), ctx.parity(b)
    s = lambda k: -1 if k % 2 else 1
    j2 = B([B([a, b])]) + B([B([a]), b]) + B([B([b]), a]).scale(s(pa * pb)) + B([phi, a, b])
    assert jacobiator(e, [a, b]) == j2
    a, b, c = random_args(ctx, rng, 3)
    pa, pb, pc = ctx.parity(a), ctx.parity(b), ctx.parity(c)
    j3 = (B([B([a, b, c])]) + B([B([a, b]), c]) + B([B([a, c]), b]).scale(s(pb * pc))
          + B([B([b, c]), a]).scale(s(pa * (pb + pc))) + B([B([a]), b, c])
          + B([B([b]), a, c]).scale(s(pa * pb)) + B([B([c]), a, b]).scale(s((pa + pb) * pc))
          + B([phi, a, b, c]))
    assert jacobiator(e, [a, b, c]) == j3


@pytest.mark.parametrize("kind", KINDS)
def test_jacobiator_graded_symmetric(kind):
    e, rng = engine_for(kind, 21)
    ctx = e.ctx
    args = random_args(ctx, rng, 3)
    sw = [args[1], args[0], args[2]]
    sign = -1 if ctx.parity(args[0]) * ctx.parity(args[1]) else 1
    assert jacobiator(e, sw) == jacobiator(e, args).scale(sign)


@pytest.mark.parametrize("kind", KINDS)
def test_jacobiator_even_agrees_with_shuffles(kind):
    ctx = make_ctx(kind)
    rng = random.Random(3)
    lam = g(ctx, "lam")
    for _ in range(4):
        e = DerivedEngine.of(ctx, random_odd_generator(ctx, rng))
        even = ctx.random_v(rng, parity=0, nterms=2)
        odd = ctx.random_v(rng, parity=1, nterms=2)
        xi = even + lam * odd
        for n in range(5):
            assert jacobiator_even(e, xi, n) == jacobiator(e, [xi] * n)


def test_jacobiator_even_edge_cases(ops):
    rng = random.Random(0)
    e = DerivedEngine.of(ops, random_odd_generator(ops, rng))
    zero = ops.sig.zero()
    assert jacobiator_even(e, zero, 0) == e.bracket([e.bracket([])])
    assert jacobiator_even(e, zero, 3) == 0
    xi = g(ops, "x")
    assert jacobiator_even(e, xi, 1) == e.bracket([e.bracket([xi])]) + e.bracket([e.bracket([]), xi])
    with pytest.raises(ContextError):
        jacobiator_even(e, g(ops, "a"), 2)


# -- theorems -----------------------------------------------------------------------

@pytest.mark.parametrize("kind", KINDS)
def test_theorem1_random(kind):
    r = verify_theorem1(make_ctx(kind), n_max=4, trials=15, seed=1)
    assert r.passed, r.cases[:1]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(KINDS), st.integers(0, 2 ** 32), st.integers(0, 4))
def test_theorem1_property(kind, seed, n):
    e, rng = engine_for(kind, seed)
    args = random_args(e.ctx, rng, n)
    assert jacobiator(e, args) == generator_square(e).bracket(args, check=False)


def test_theorem1_fixed_engine_and_square_zero(ctx):
    rng = random.Random(0)
    e = DerivedEngine.of(ctx, random_homological(ctx, rng))
    assert verify_theorem1(e, trials=5).passed
    for n in range(4):
        assert jacobiator(e, random_args(ctx, rng, n)) == 0


def test_theorem1_requires_odd(ops):
    with pytest.raises(GeneratorError):
        verify_theorem1(DerivedEngine.of(ops, g(ops, "x")), trials=1)


@pytest.mark.parametrize("kind", KINDS)
def test_derivations_are_derivations(kind):
    ctx = make_ctx(kind)
    rng = random.Random(2)
    for k in ("inner", "param"):
        d = random_derivation(ctx, rng, kind=k)
        assert check_derivation(ctx, d, trials=15).passed


@pytest.mark.parametrize("kind", KINDS)
def test_theorem2_random(kind):
    r = verify_theorem2(make_ctx(kind), n_max=4, trials=10, seed=2)
    assert r.passed, r.cases[:1]


def test_theorem2_inner_matches_theorem1_without_phi(ctx):
    rng = random.Random(7)
    delta = random_odd_generator(ctx, rng)
    delta = delta - ctx.project(delta)
    ed = DerivedEngine.of_derivation(ctx, inner_derivation(ctx, delta))
    ee = DerivedEngine.of(ctx, delta)
    for n in range(1, 4):
        args = random_args(ctx, rng, n)
        assert ed.bracket(args) == ee.bracket(args)
        assert jacobiator(ed, args) == jacobiator(ee, args, drop_phi=True)


def test_parameter_derivation_gives_only_unary_bracket(ctx):
    d = parameter_derivation(ctx, "lam")
    e = DerivedEngine.of_derivation(ctx, d)
    rng = random.Random(1)
    for n in (2, 3):
        args = [g(ctx, "lam") * a for a in random_args(ctx, rng, n)]
        assert e.bracket(args) == 0
    assert verify_theorem2(e, trials=5).passed
    with pytest.raises(GeneratorError):
        e.bracket([])


def test_theorem2_detects_pdp_violation(ops):
    # ad of an element with nonzero projection breaks P d P = P d
    d = inner_derivation(ops, g(ops, "a") * g(ops, "x"))
    e = DerivedEngine.of_derivation(ops, d)
    r = verify_theorem2(e, trials=20)
    assert r.verdicts.get("PdP=Pd") is False


def test_square_zero_derivations(ctx):
    rng = random.Random(5)
    for _ in range(5):
        d = random_square_zero_derivation(ctx, rng)
        for _ in range(3):
            x = ctx.random_element(rng)
            assert d(d(x)) == 0


# -- order corollary ------------------------------------------------------------

def test_order_corollary_second_order():
    gen = generic_operator(BASE3, 2, coeff_degree=[1, 1, 0])
    e = DerivedEngine.of(gen.ctx, gen.delta)
    # constant S gives ord D^2 <= 2, hence the Jacobi identity for n = 3, 4
    r = check_order_corollary(e, 2, n_max=4, trials=5)
    assert r.passed, r.cases[:1]


def test_order_corollary_finds_low_order_witness(ops):
    rng = random.Random(4)
    e = DerivedEngine.of(ops, random_odd_generator(ops, rng))
    sq = ops.order(generator_square(e).delta)
    r = check_order_corollary(e, max(sq, 0), n_max=4, trials=10)
    assert r.passed
    assert r.witnesses


def test_order_corollary_rejects_bad_bound(ops):
    e = DerivedEngine.of(ops, g(ops, "a") * D(ops, "x") * D(ops, "x") + g(ops, "x") * D(ops, "a"))
    r = check_order_corollary(e, 0, trials=1)
    assert r.verdicts.get("precondition") is False


# -- Leibniz defect and rescaling ------------------------------------------------

@pytest.mark.parametrize("kind", ["ops", "ham", "multivec"])
def test_leibniz_defect(kind):
    ctx = make_ctx(kind)
    rng = random.Random(13)
    for _ in range(8):
        e = DerivedEngine.of(ctx, random_odd_generator(ctx, rng))
        for n in range(1, 4):
            pre = random_args(ctx, rng, n - 1)
            gg, hh = random_args(ctx, rng, 2)
            want = e.bracket(pre + [gg, hh]) if kind == "ops" else 0
            assert leibniz_defect(e, pre, gg, hh) == want


def test_leibniz_unit_argument(ops):
    e = DerivedEngine.of(ops, g(ops, "a") * D(ops, "x") * D(ops, "y"))
    one = ops.sig.one()
    h = g(ops, "x") * g(ops, "y")
    assert e.bracket([one, h]) == 0
    assert leibniz_defect(e, [], one, h) == 0


def test_leibniz_needs_products(vect):
    e = DerivedEngine.of(vect, g(vect, "a") * D(vect, "x"))
    with pytest.raises(ContextError):
        leibniz_defect(e, [], D(vect, "x"), D(vect, "y"))


def test_hbar_rescale(ops):
    rng = random.Random(3)
    e = DerivedEngine.of(ops, random_odd_generator(ops, rng))
    one = hbar_rescale(e, 1)
    t = g(ops, "t")
    et = hbar_rescale(e, "t")
    for n in range(4):
        args = random_args(ops, rng, n)
        assert one.bracket(args) == e.bracket(args)
        assert et.bracket(args) == ops.sig.gen("t", -n) * e.bracket(args)
        assert jacobiator(et, args) == generator_square(et).bracket(args)
        assert jacobiator(et, args) == ops.sig.gen("t", -(n + 1)) * jacobiator(e, args)
    for n in range(1, 4):
        pre = random_args(ops, rng, n - 1)
        gg, hh = random_args(ops, rng, 2)
        assert leibniz_defect(et, pre, gg, hh) == t * et.bracket(pre + [gg, hh])


def test_semiclassical_limit(ops):
    ham = ops.with_kind("ham")
    rng = random.Random(17)
    for _ in range(5):
        delta = random_odd_generator(ops, rng)
        et = hbar_rescale(DerivedEngine.of(ops, hbar_insert(ops, delta, "t")), "t")
        eh = DerivedEngine.of(ham, delta)
        for n in range(4):
            args = random_args(ops, rng, n)
            assert et.bracket(args).substitute_param("t", 0) == eh.bracket(args)
        pre = random_args(ops, rng, 1)
        gg, hh = random_args(ops, rng, 2)
        assert leibniz_defect(et, pre, gg, hh).substitute_param("t", 0) == 0


# -- dropping the 0-ary bracket -------------------------------------------------

def test_phi_split_condition(ops):
    rng = random.Random(0)
    delta = random_odd_generator(ops, rng)
    assert phi_split_condition(DerivedEngine.of(ops, delta - ops.project(delta)))
    assert phi_split_condition(DerivedEngine.of(ops, g(ops, "a") * g(ops, "x")))
    gen = generic_operator(BASE3, 2, coeff_degree=[2, 1, 1])
    e = DerivedEngine.of(gen.ctx, gen.delta)
    d = gen.delta
    lhs = gen.ctx.bracket(d, gen.ctx.project(d))
    assert phi_split_condition(e) == (gen.ctx.project(lhs) == lhs)
    assert phi_split_condition(e) is False


def test_drop_phi_window_second_order():
    gen = generic_operator(BASE3, 2, coeff_degree=[2, 1, 1])
    r = drop_phi_invariance(DerivedEngine.of(gen.ctx, gen.delta))
    assert r.passed, r.cases[:1]
    assert r.verdicts.keys() >= {"J n=2", "J n=3"}


def test_drop_phi_trivial_when_no_phi(ops):
    e = DerivedEngine.of(ops, g(ops, "a") * D(ops, "x") * D(ops, "y"))
    assert drop_phi_invariance(e).passed
