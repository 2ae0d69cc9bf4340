"""Scalar field kernel: parsing, canonical forms, calculus, evaluation.

The independent oracle here is direct Fraction arithmetic: expression ASTs
are generated first, rendered to strings for the parser, and evaluated
directly over Q at sample points.  Agreement at enough points certifies the
symbolic result.
"""

import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from algebroids.scalars import (
    Patch, PoleError, ScalarParseError,
    evaluate, parse_scalar, partial_derivative, random_scalar,
)


@pytest.fixture
def patch():
    return Patch(["x", "y"])


# ---------------------------------------------------------------------------
# parsing and canonical forms

def test_parse_zero(patch):
    assert parse_scalar("0", patch).is_zero()


def test_parse_cancellation(patch):
    assert parse_scalar("x^2*y - x^2*y", patch).is_zero()


def test_parse_gcd_reduction(patch):
    f = parse_scalar("(x+y)^2/(x+y)", patch)
    x, y = patch.coordinate(0), patch.coordinate(1)
    assert f == x + y


def test_parse_rational_literals(patch):
    assert parse_scalar("3/4", patch) == Fraction(3, 4)
    assert parse_scalar("-3/4", patch) == Fraction(-3, 4)


def test_minus_binds_whole_factor(patch):
    assert parse_scalar("-3^2", patch) == -9
    assert parse_scalar("(-3)^2", patch) == 9


def test_signed_exponent(patch):
    f = parse_scalar("x^-1", patch)
    assert (f * patch.coordinate(0)) == 1


def test_no_chained_exponent(patch):
    with pytest.raises(ScalarParseError):
        parse_scalar("x^2^3", patch)


def test_syntax_error_position(patch):
    with pytest.raises(ScalarParseError) as err:
        parse_scalar("x + * y", patch)
    assert err.value.pos == 4


def test_unknown_identifier(patch):
    with pytest.raises(ScalarParseError) as err:
        parse_scalar("x + z", patch)
    assert "z" in str(err.value)


def test_division_by_zero_polynomial(patch):
    with pytest.raises(ZeroDivisionError):
        parse_scalar("1/(x - x)", patch)
    with pytest.raises(ZeroDivisionError):
        parse_scalar("(x - x)^-1", patch)


def test_empty_input_is_syntax_error(patch):
    with pytest.raises(ScalarParseError):
        parse_scalar("", patch)


# ---------------------------------------------------------------------------
# calculus

def test_power_rule(patch):
    f = parse_scalar("x^2*y", patch)
    assert partial_derivative(f, 0) == parse_scalar("2*x*y", patch)


def test_quotient_rule(patch):
    f = parse_scalar("1/(1+x)", patch)
    assert partial_derivative(f, 0) == parse_scalar("-1/(1+x)^2", patch)


def test_independent_coordinate(patch):
    assert partial_derivative(parse_scalar("x", patch), 1).is_zero()


# ---------------------------------------------------------------------------
# evaluation

def test_evaluate_polynomial(patch):
    assert evaluate(parse_scalar("x^2*y", patch), [2, 3]) == 12


def test_evaluate_rational(patch):
    assert evaluate(parse_scalar("1/(1+x)", patch), [0, 0]) == 1


def test_evaluate_pole(patch):
    with pytest.raises(PoleError):
        evaluate(parse_scalar("1/x", patch), [0, 1])


def test_evaluate_fraction_point(patch):
    f = parse_scalar("x/y", patch)
    assert f.evaluate([Fraction(1, 2), Fraction(3, 4)]) == Fraction(2, 3)


# ---------------------------------------------------------------------------
# hypothesis: ring laws, calculus identities, printer round trip

coeffs = st.integers(min_value=-4, max_value=4)
monoms = st.tuples(st.integers(0, 3), st.integers(0, 3))
poly_dicts = st.dictionaries(monoms, coeffs, max_size=5)


def make_poly(patch, d):
    x, y = patch.coordinate(0), patch.coordinate(1)
    f = patch.zero
    for (a, b), c in d.items():
        f = f + c * x ** a * y ** b
    return f


@settings(max_examples=60, deadline=None)
@given(poly_dicts, poly_dicts, poly_dicts)
def test_ring_laws(d1, d2, d3):
    patch = Patch(["x", "y"])
    f, g, h = (make_poly(patch, d) for d in (d1, d2, d3))
    assert (f + g) + h == f + (g + h)
    assert f * (g + h) == f * g + f * h
    assert f * g == g * f


@settings(max_examples=60, deadline=None)
@given(poly_dicts, poly_dicts)
def test_leibniz(d1, d2):
    patch = Patch(["x", "y"])
    f, g = make_poly(patch, d1), make_poly(patch, d2)
    assert (f * g).diff(0) == f * g.diff(0) + g * f.diff(0)


@settings(max_examples=60, deadline=None)
@given(poly_dicts)
def test_mixed_partials(d):
    patch = Patch(["x", "y"])
    f = make_poly(patch, d)
    assert f.diff(0).diff(1) == f.diff(1).diff(0)


@settings(max_examples=60, deadline=None)
@given(poly_dicts)
def test_is_zero_iff_vanishing_on_grid(d):
    # per-variable degree is at most 3, so a 4x4 grid separates zero from
    # nonzero polynomials
    patch = Patch(["x", "y"])
    f = make_poly(patch, d)
    vanishes = all(f.evaluate([a, b]) == 0 for a in range(4) for b in range(4))
    assert f.is_zero() == vanishes


@settings(max_examples=60, deadline=None)
@given(poly_dicts, poly_dicts)
def test_print_parse_round_trip(d1, d2):
    patch = Patch(["x", "y"])
    f, g = make_poly(patch, d1), make_poly(patch, d2)
    assume(not g.is_zero())
    q = f / g
    assert parse_scalar(str(q), patch) == q


# ---------------------------------------------------------------------------
# hypothesis: parser agrees with direct AST evaluation over Q

atoms = st.one_of(
    st.tuples(st.just("num"), st.integers(-9, 9)),
    st.tuples(st.just("var"), st.sampled_from(["x", "y"])),
)

asts = st.recursive(
    atoms,
    lambda sub: st.one_of(
        st.tuples(st.just("+"), sub, sub),
        st.tuples(st.just("-"), sub, sub),
        st.tuples(st.just("*"), sub, sub),
        st.tuples(st.just("/"), sub, sub),
        st.tuples(st.just("neg"), sub),
        st.tuples(st.just("pow"), sub, st.integers(0, 3)),
    ),
    max_leaves=12,
)


def render(node):
    kind = node[0]
    if kind == "num":
        return str(node[1])
    if kind == "var":
        return node[1]
    if kind == "neg":
        return "-(%s)" % render(node[1])
    if kind == "pow":
        return "(%s)^%d" % (render(node[1]), node[2])
    return "(%s) %s (%s)" % (render(node[1]), kind, render(node[2]))


def eval_ast(node, env):
    kind = node[0]
    if kind == "num":
        return Fraction(node[1])
    if kind == "var":
        return env[node[1]]
    if kind == "neg":
        return -eval_ast(node[1], env)
    if kind == "pow":
        return eval_ast(node[1], env) ** node[2]
    a, b = eval_ast(node[1], env), eval_ast(node[2], env)
    if kind == "+":
        return a + b
    if kind == "-":
        return a - b
    if kind == "*":
        return a * b
    return a / b


POINTS = [(Fraction(2), Fraction(3)), (Fraction(5), Fraction(7)),
          (Fraction(1, 2), Fraction(-1, 3)), (Fraction(-4), Fraction(9))]


@settings(max_examples=80, deadline=None)
@given(asts)
def test_parser_against_fraction_oracle(ast):
    patch = Patch(["x", "y"])
    try:
        f = parse_scalar(render(ast), patch)
    except ZeroDivisionError:
        assume(False)
    for px, py in POINTS:
        env = {"x": px, "y": py}
        try:
            expected = eval_ast(ast, env)
        except ZeroDivisionError:
            continue
        assert f.evaluate([px, py]) == expected


# ---------------------------------------------------------------------------
# misc

def test_random_scalar_deterministic():
    patch = Patch(["x", "y"])
    a = random_scalar(patch, random.Random("seed:check"), max_degree=2)
    b = random_scalar(patch, random.Random("seed:check"), max_degree=2)
    assert a == b


def test_patch_validation():
    with pytest.raises(ValueError):
        Patch(["x", "x"])
    with pytest.raises(ValueError):
        Patch([])
    with pytest.raises(ValueError):
        Patch(["2bad"])


def test_cross_patch_rejected():
    p1, p2 = Patch(["x", "y"]), Patch(["u", "v"])
    with pytest.raises(ValueError):
        p1.coordinate(0) + p2.coordinate(0)
