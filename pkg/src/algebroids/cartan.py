"""Exterior and Lie calculus on the patch.

Vector fields and 1-forms are sections of TM and T*M; 2-forms are stored as
full antisymmetric matrices.  The Lie derivative on 1-forms is defined by
Cartan's formula L_X theta = i_X d theta + d(theta(X)), which keeps
everything inside exact polynomial calculus.
"""

from __future__ import annotations

from .bundles import Section, TrivialBundle

__all__ = [
    "tangent", "cotangent",
    "lie_bracket_vf", "d_function", "d_oneform",
    "interior_vf_2form", "lie_derivative_1form",
    "apply_vf", "pair_form_vf", "two_form_matrix",
]


def tangent(patch):
    return TrivialBundle(patch, patch.dim, "TM")


def cotangent(patch):
    return TrivialBundle(patch, patch.dim, "T*M")


def apply_vf(X, f):
    """Directional derivative X(f) of a scalar along a vector field."""
    patch = f.patch
    total = patch.zero
    for i, c in enumerate(X.components):
        total = total + c * f.diff(i)
    return total


def pair_form_vf(theta, X):
    """theta(X) for a 1-form and a vector field."""
    patch = theta.bundle.patch
    total = patch.zero
    for t, x in zip(theta.components, X.components):
        total = total + t * x
    return total


def lie_bracket_vf(X, Y):
    """[X, Y]^i = sum_j (X^j d_j Y^i - Y^j d_j X^i)."""
    patch = X.bundle.patch
    if Y.bundle.patch != patch:
        raise ValueError("vector fields over different patches")
    comps = []
    for i in range(patch.dim):
        total = patch.zero
        for j in range(patch.dim):
            total = total + X.components[j] * Y.components[i].diff(j)
            total = total - Y.components[j] * X.components[i].diff(j)
        comps.append(total)
    return Section(tangent(patch), comps)


def d_function(f):
    """Exterior derivative of a scalar, as a 1-form."""
    patch = f.patch
    return Section(cotangent(patch), [f.diff(i) for i in range(patch.dim)])


def d_oneform(theta):
    """Exterior derivative of a 1-form, as an antisymmetric matrix
    (d theta)_{ij} = d_i theta_j - d_j theta_i."""
    patch = theta.bundle.patch
    n = patch.dim
    return [[theta.components[j].diff(i) - theta.components[i].diff(j)
             for j in range(n)] for i in range(n)]


def interior_vf_2form(X, omega):
    """(i_X omega)_j = sum_i X^i omega_{ij}."""
    patch = X.bundle.patch
    n = patch.dim
    comps = []
    for j in range(n):
        total = patch.zero
        for i in range(n):
            total = total + X.components[i] * omega[i][j]
        comps.append(total)
    return Section(cotangent(patch), comps)


def lie_derivative_1form(X, theta):
    """L_X theta = i_X d theta + d(theta(X))."""
    return interior_vf_2form(X, d_oneform(theta)) + d_function(pair_form_vf(theta, X))


def two_form_matrix(patch, entries):
    """Build an antisymmetric matrix from {(i, j): scalar} with i < j."""
    n = patch.dim
    m = [[patch.zero] * n for _ in range(n)]
    for (i, j), v in entries.items():
        v = patch.scalar(v)
        m[i][j] = v
        m[j][i] = -v
    return m
