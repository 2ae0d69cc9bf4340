"""Exterior/Lie calculus identities on the patch."""

import random

import pytest

from algebroids.scalars import Patch, parse_scalar, random_scalar
from algebroids.bundles import random_section
from algebroids.cartan import (
    apply_vf, cotangent, d_function, d_oneform, interior_vf_2form,
    lie_bracket_vf, lie_derivative_1form, pair_form_vf, tangent,
    two_form_matrix,
)


@pytest.fixture
def patch():
    return Patch(["x", "y"])


def test_coordinate_fields_commute(patch):
    TM = tangent(patch)
    assert lie_bracket_vf(TM.basis_section(0), TM.basis_section(1)).is_zero()


def test_bracket_example(patch):
    TM = tangent(patch)
    X = TM.section(["0", "x"])      # x d/dy
    Y = TM.basis_section(0)         # d/dx
    assert lie_bracket_vf(X, Y) == TM.section(["0", "-1"])


def test_bracket_antisymmetry_random(patch):
    TM = tangent(patch)
    rng = random.Random("vf-skew")
    for _ in range(5):
        X = random_section(TM, rng)
        assert lie_bracket_vf(X, X).is_zero()


def test_d_function_product_rule(patch):
    TsM = cotangent(patch)
    f = parse_scalar("x*y", patch)
    assert d_function(f) == TsM.section(["y", "x"])


def test_d_oneform_example(patch):
    TsM = cotangent(patch)
    theta = TsM.section(["0", "x"])     # x dy
    dtheta = d_oneform(theta)
    assert dtheta[0][1] == 1 and dtheta[1][0] == -1
    assert dtheta[0][0].is_zero() and dtheta[1][1].is_zero()


def test_lie_derivative_example(patch):
    TM, TsM = tangent(patch), cotangent(patch)
    X = TM.section(["0", "x"])          # x d/dy
    theta = TsM.basis_section(1)        # dy
    assert lie_derivative_1form(X, theta) == TsM.section(["1", "0"])


def test_d_squared_zero(patch):
    rng = random.Random("ddzero")
    for _ in range(6):
        f = random_scalar(patch, rng, 3)
        ddf = d_oneform(d_function(f))
        assert all(v.is_zero() for row in ddf for v in row)


def test_lie_derivative_leibniz(patch):
    TM, TsM = tangent(patch), cotangent(patch)
    rng = random.Random("lie-leibniz")
    for _ in range(5):
        X = random_section(TM, rng)
        theta = random_section(TsM, rng)
        f = random_scalar(patch, rng, 2)
        lhs = lie_derivative_1form(X, f * theta)
        rhs = apply_vf(X, f) * theta + f * lie_derivative_1form(X, theta)
        assert (lhs - rhs).is_zero()


def test_lie_derivative_bracket_compat(patch):
    TM, TsM = tangent(patch), cotangent(patch)
    rng = random.Random("lie-bracket")
    for _ in range(4):
        X = random_section(TM, rng)
        Y = random_section(TM, rng)
        theta = random_section(TsM, rng)
        lhs = lie_derivative_1form(lie_bracket_vf(X, Y), theta)
        rhs = (lie_derivative_1form(X, lie_derivative_1form(Y, theta))
               - lie_derivative_1form(Y, lie_derivative_1form(X, theta)))
        assert (lhs - rhs).is_zero()


def test_vf_jacobi(patch):
    TM = tangent(patch)
    rng = random.Random("vf-jacobi")
    for _ in range(4):
        X, Y, Z = (random_section(TM, rng) for _ in range(3))
        jac = (lie_bracket_vf(X, lie_bracket_vf(Y, Z))
               + lie_bracket_vf(Y, lie_bracket_vf(Z, X))
               + lie_bracket_vf(Z, lie_bracket_vf(X, Y)))
        assert jac.is_zero()


def test_interior_product(patch):
    TM = tangent(patch)
    omega = two_form_matrix(patch, {(0, 1): "1"})     # dx^dy
    assert interior_vf_2form(TM.basis_section(0), omega) == \
        cotangent(patch).basis_section(1)
    assert interior_vf_2form(TM.basis_section(1), omega) == \
        -cotangent(patch).basis_section(0)


def test_pairing_and_directional_derivative(patch):
    TM, TsM = tangent(patch), cotangent(patch)
    X = TM.section(["y", "x"])
    theta = TsM.section(["x", "0"])
    assert pair_form_vf(theta, X) == parse_scalar("x*y", patch)
    assert apply_vf(X, parse_scalar("x^2", patch)) == parse_scalar("2*x*y", patch)
