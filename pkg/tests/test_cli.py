import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from higherbrackets.cli.ctxdoc import ContextDocError, build_context, dump, load, normalize
from higherbrackets.cli.expr import ParseError, parse_expr, print_expr
from higherbrackets.cli.main import main
from higherbrackets.contexts import KINDS

CTX = {k: load(f"demo-{k}")[1] for k in KINDS}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -- expressions ------------------------------------------------------------------

def test_parse_examples():
    ops, ham = CTX["ops"], CTX["ham"]
    lap = parse_expr("1/2 * d(x)*d(x)", ops)
    assert print_expr(lap, ops) == "1/2*d(x)^2"
    p = parse_expr("x^2 + th1*th2", ops)
    assert p.parities() == {0} and len(p) == 2
    assert ops.order(p) == 0
    assert print_expr(parse_expr("p_x * p_x", ham), ham) == "p_x^2"
    assert parse_expr("d(x)*x", ops) == parse_expr("x*d(x) + 1", ops)
    assert parse_expr("t^-2*t", ops) == ops.sig.gen("t", -1)
    assert print_expr(ops.sig.zero(), ops) == "0"


def test_ham_product_is_commutative():
    ham = CTX["ham"]
    assert parse_expr("p_x*x", ham) == parse_expr("x*p_x", ham)
    assert parse_expr("th1*th2", ham) == -parse_expr("th2*th1", ham)


@pytest.mark.parametrize("source, kind, line, column, fragment", [
    ("x +", "ops", 1, 4, "end of input"),
    ("x y", "ops", 1, 3, "unexpected 'y'"),
    ("zz + 1", "ops", 1, 1, "unknown identifier"),
    ("d(x)", "ham", 1, 1, "derivative atoms"),
    ("p_x", "ops", 1, 1, "write d(x)"),
    ("1/0*x", "ops", 1, 1, "zero denominator"),
    ("x^-1", "ops", 1, 1, "negative exponents"),
    ("x +\n  (y", "ops", 2, 5, "')'"),
    ("x $ y", "ops", 1, 3, "unexpected character"),
    ("x^1/2", "ops", 1, 3, "integer"),
])
def test_parse_errors(source, kind, line, column, fragment):
    with pytest.raises(ParseError) as info:
        parse_expr(source, CTX[kind])
    err = info.value
    assert (err.line, err.column) == (line, column)
    assert fragment in str(err)


def test_parse_error_expected_set():
    with pytest.raises(ParseError) as info:
        parse_expr("x *", CTX["ops"])
    assert "identifier" in info.value.expected and "number" in info.value.expected


def test_vect_requires_vector_field():
    with pytest.raises(ParseError):
        parse_expr("x", CTX["vect"])
    assert CTX["vect"].is_vector_field(parse_expr("x*d(y) - th1*d(th2)", CTX["vect"]))


@settings(max_examples=1000, deadline=None)
@given(st.sampled_from(KINDS), st.integers(0, 2 ** 32), st.integers(-2, 2))
def test_print_parse_roundtrip(kind, seed, tpow):
    ctx = CTX[kind]
    rng = random.Random(seed)
    a = ctx.random_element(rng, nterms=rng.randint(0, 5))
    if tpow and kind != "vect":
        a = ctx.sig.gen("t", tpow) * a
    text = print_expr(a, ctx)
    assert parse_expr(text, ctx) == a
    assert print_expr(parse_expr(text, ctx), ctx) == text


ATOMS = {"ops": ["x", "y", "th1", "lam", "d(x)", "d(th2)", "2/3", "t^-1"],
         "ham": ["x", "th2", "p_x", "p_th1", "lam", "5", "t^2"],
         "multivec": ["x", "th1", "xs_x", "xs_th2", "lam", "1/2"]}


@st.composite
def sources(draw, kind):
    def expr(depth):
        terms = []
        for _ in range(draw(st.integers(1, 3))):
            factors = []
            for _ in range(draw(st.integers(1, 3))):
                if depth and draw(st.booleans()):
                    factors.append("(" + expr(depth - 1) + ")")
                else:
                    factors.append(draw(st.sampled_from(ATOMS[kind])))
            terms.append("*".join(factors))
        out = terms[0]
        for t in terms[1:]:
            out += draw(st.sampled_from([" + ", " - "])) + t
        return out
    return expr(1)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_source_roundtrip(data):
    kind = data.draw(st.sampled_from(sorted(ATOMS)))
    src = data.draw(sources(kind))
    ctx = CTX[kind]
    value = parse_expr(src, ctx)
    assert parse_expr(print_expr(value, ctx), ctx) == value


# -- context documents ---------------------------------------------------------

def test_ctxdoc_roundtrip(tmp_path):
    doc = {"kind": "multivec",
           "variables": [{"name": "x", "parity": "even", "role": "base"},
                         {"name": "xs_x", "parity": "odd", "role": "antimomentum", "base": "x"},
                         {"name": "eta", "parity": "odd", "role": "auxiliary-odd-parameter"},
                         {"name": "th", "parity": 1}],
           "caps": {"max-base-degree": 1}}
    norm = normalize(doc)
    assert norm["odd_parameters"] == ["eta"]
    assert norm["caps"]["max_base_degree"] == 1
    assert normalize(norm) == norm
    path = tmp_path / "c.json"
    path.write_text(dump(doc))
    again, ctx = load(str(path))
    assert dump(again) == dump(doc)
    assert ctx.kind == "multivec" and ctx.sig.parity_of("xs_th") == 0


@pytest.mark.parametrize("doc", [
    {"kind": "lie"},
    {"kind": "ops", "variables": []},
    {"kind": "ops", "variables": [{"name": "x", "parity": "weird"}]},
    {"kind": "ops", "variables": [{"name": "x"}, {"name": "x"}]},
    {"kind": "ops", "variables": [{"name": "d"}]},
    {"kind": "ops", "variables": [{"name": "x"}, {"name": "p_x", "parity": "odd", "role": "momentum"}]},
    {"kind": "ops", "variables": [{"name": "x"}], "caps": {"bogus": 1}},
])
def test_ctxdoc_errors(doc):
    with pytest.raises(ContextDocError):
        build_context(doc)


# -- commands and exit codes ------------------------------------------------------

def test_bracket_command_second_order(capsys):
    code, out, _ = run(capsys, "bracket", "--ctx", "demo-ops", "--no-timing",
                       "--delta", "lam*th1 + th1*d(x) + th2*d(x)*d(y)", "--args", "x^2", "y*th1")
    assert code == 0
    rep = json.loads(out)
    assert rep["verdict"] == "pass" and rep["arity"] == 2
    # only th2*d(x)*d(y) contributes: 2*x*th2 * d_y(y*th1) = 2*x*th2*th1
    assert rep["result"] == "-2*x*th1*th2"
    assert "elapsed_ms" not in rep


def test_verify_theorem1_demo_exit_zero(capsys):
    code, out, _ = run(capsys, "verify", "theorem1", "--trials", "20", "--seed", "7")
    assert code == 0
    rep = json.loads(out)
    assert rep["verdict"] == "pass" and rep["seed"] == 7 and isinstance(rep["elapsed_ms"], int)


def test_reports_are_deterministic(capsys):
    argv = ["--ctx", "demo-ham", "verify", "theorem1", "--trials", "8", "--seed", "5", "--no-timing"]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second and first
    assert "." not in "".join(json.dumps(v) for v in json.loads(first).values() if isinstance(v, (int, float)))


def test_unknown_flag_exit_two(capsys):
    code, out, err = run(capsys, "verify", "theorem1", "--bogus")
    assert code == 2 and out == "" and "unrecognized" in err


def test_parse_error_exit_two(capsys):
    code, out, err = run(capsys, "bracket", "--delta", "d(x", "--args")
    assert code == 2 and out == "" and "line 1, column 4" in err


def test_missing_context_file(capsys):
    code, out, err = run(capsys, "--ctx", "/nonexistent.json", "ctx", "check")
    assert code == 2 and out == ""


def test_violation_exit_one(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"basis": [{"name": n, "parity": "odd"} for n in "XYZ"],
                                "brackets": [{"args": ["X", "Y"], "value": {"Z": "1", "X": "1"}},
                                             {"args": ["Y", "Z"], "value": {"X": "1"}},
                                             {"args": ["X", "Z"], "value": {"Y": "-1"}}]}))
    code, out, _ = run(capsys, "linfty", "check", "--structure", str(path), "--no-timing")
    assert code == 1
    rep = json.loads(out)
    assert rep["verdict"] == "fail" and rep["cases"][0]["arity"] == 3
    # witnesses are re-checkable by hand
    assert rep["cases"][0]["inputs"] == ["X", "Y", "Z"]


def test_jacobi_command(capsys):
    code, out, _ = run(capsys, "jacobi", "--delta", "th1*d(x)*d(x) + x*d(th1) + th2", "--n", "2",
                       "--args", "x", "x*y", "--no-timing")
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "pass"
    assert rep["result"] == rep["square_bracket"]
    code, _, _ = run(capsys, "jacobi", "--delta", "th1", "--n", "3", "--args", "x")
    assert code == 2


def test_order_and_symbol_commands(capsys):
    code, out, _ = run(capsys, "order", "--elem", "x*d(x)*d(y) + 3", "--no-timing")
    assert code == 0 and json.loads(out)["order"] == 2
    code, out, _ = run(capsys, "order", "--elem", "0", "--no-timing")
    assert code == 0 and json.loads(out)["order"] is None
    code, out, _ = run(capsys, "symbol", "--delta", "1/6*th1*d(x)^3 + d(y)", "--no-timing")
    assert code == 0 and json.loads(out)["result"] == "1/6*th1*p_x^3"
    code, _, _ = run(capsys, "--ctx", "demo-ham", "symbol", "--delta", "p_x")
    assert code == 2


def test_verify_other_subcommands(capsys):
    for argv in (["verify", "theorem2", "--trials", "5"],
                 ["verify", "fiber", "--trials", "3", "--ctx", "demo-vect"],
                 ["verify", "order-corollary", "--delta", "th1*d(x)*d(y) + th2*x", "--trials", "3"],
                 ["verify", "theorem2", "--delta", "th1*x*d(y)", "--param", "lam", "--trials", "3"],
                 ["ctx", "check", "--trials", "20", "--ctx", "demo-multivec"]):
        code, out, err = run(capsys, *argv, "--no-timing")
        assert code == 0, (argv, out, err)
    code, _, _ = run(capsys, "verify", "order-corollary")
    assert code == 2


def test_linfty_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "--ctx", "demo-vect", "linfty", "from-q",
                       "--q", "th1*th2*d(th1) + x*d(th1)", "--no-timing")
    assert code == 0
    structure = json.loads(out)["result"]
    path = tmp_path / "s.json"
    path.write_text(json.dumps(structure))
    code, out, _ = run(capsys, "linfty", "to-q", "--structure", str(path), "--no-timing")
    assert code == 0
    assert parse_expr(json.loads(out)["result"], CTX["vect"]) == parse_expr("th1*th2*d(th1) + x*d(th1)", CTX["vect"])
    code, out, _ = run(capsys, "--ctx", "demo-vect", "linfty", "check", "--q", "th1*d(x)", "--no-timing")
    assert code == 0


def test_text_format(capsys):
    code, out, _ = run(capsys, "--format", "text", "ctx", "check", "--trials", "5", "--no-timing")
    assert code == 0 and out.startswith("ctx check ops: PASS")
