"""Anchored bundles, dull and Lie algebroids, and linear connections.

A bracket lives on the frame as structure data [e_i, e_j] and is extended
to arbitrary sections by one Leibniz-extension routine (bracket_eval);
nothing else in the package expands brackets by hand, which keeps the
formula in a single place.  Axioms are never assumed: check_skew,
check_anchor_compat and check_jacobi produce exact residual witnesses and
set the corresponding flags on success.

Identity-checking protocol: non-tensorial identities are verified on all
frame tuples and on `trials` random polynomial sections of degree at most
`max_degree`; tensorial ones on frames only (C-infinity-linearity makes the
frame check complete).
"""

from __future__ import annotations

from .bundles import (Section, TrivialBundle, apply_matrix, random_section)
from .cartan import (apply_vf, cotangent, lie_bracket_vf,
                     lie_derivative_1form, tangent)
from .reporting import Check, CheckConfig

__all__ = [
    "AnchoredBundle", "DullAlgebroid", "LinearConnection", "BasicConnections",
    "bracket_eval", "check_anchor_compat", "check_skew", "check_jacobi",
    "check_algebroid", "lie_derivative_ATM", "lie_derivative_TMAs",
    "rho_rhot", "rho_transpose", "basic_connections_from_linear",
    "side_Q", "side_B", "tangent_algebroid",
]


class AnchoredBundle:
    """A bundle with an anchor into TM; the anchor matrix has shape
    dim x rank, column j holding the coordinates of rho(e_j)."""

    __slots__ = ("bundle", "anchor")

    def __init__(self, bundle, anchor):
        patch = bundle.patch
        anchor = [[patch.scalar(v) for v in row] for row in anchor]
        if len(anchor) != patch.dim or any(len(r) != bundle.rank for r in anchor):
            raise ValueError("anchor must be dim x rank")
        self.bundle = bundle
        self.anchor = anchor

    @property
    def patch(self):
        return self.bundle.patch

    @property
    def rank(self):
        return self.bundle.rank

    def anchor_vf(self, s):
        """rho(s) as a vector field."""
        patch = self.patch
        return Section(tangent(patch),
                       apply_matrix(self.anchor, s.components, patch))

    def apply_anchor(self, s, f):
        """Directional derivative rho(s)(f)."""
        return apply_vf(self.anchor_vf(s), f)


class DullAlgebroid:
    """Anchored bundle plus a bracket table [e_i, e_j] on the frame.

    The three axiom flags start False and are set only by the checkers.
    A Lie algebroid is a DullAlgebroid with all three flags set.
    """

    def __init__(self, anchored, bracket):
        rank = anchored.rank
        bracket = [list(row) for row in bracket]
        if len(bracket) != rank or any(len(r) != rank for r in bracket):
            raise ValueError("bracket table must be rank x rank")
        for row in bracket:
            for s in row:
                if s.bundle != anchored.bundle:
                    raise ValueError("bracket values must live in the bundle")
        self.anchored = anchored
        self.bracket = bracket
        self.skew_checked = False
        self.anchor_compat_checked = False
        self.jacobi_checked = False

    @property
    def bundle(self):
        return self.anchored.bundle

    @property
    def patch(self):
        return self.anchored.patch

    @property
    def rank(self):
        return self.anchored.rank

    @property
    def is_lie(self):
        return (self.skew_checked and self.anchor_compat_checked
                and self.jacobi_checked)

    def anchor_vf(self, s):
        return self.anchored.anchor_vf(s)


def tangent_algebroid(patch):
    """TM with the identity anchor and vanishing frame brackets."""
    TM = tangent(patch)
    anchor = [[patch.one if i == j else patch.zero for j in range(patch.dim)]
              for i in range(patch.dim)]
    table = [[TM.zero_section() for _ in range(patch.dim)]
             for _ in range(patch.dim)]
    return DullAlgebroid(AnchoredBundle(TM, anchor), table)


def bracket_eval(alg, q1, q2):
    """Leibniz extension of the frame bracket to arbitrary sections:
    [f e_i, g e_j] = f g [e_i, e_j] + f rho(e_i)(g) e_j - g rho(e_j)(f) e_i,
    summed over components."""
    bundle = alg.bundle
    if q1.bundle != bundle or q2.bundle != bundle:
        raise ValueError("sections do not live in the algebroid bundle")
    patch = alg.patch
    out = bundle.zero_section()
    for i, f in enumerate(q1.components):
        if f.is_zero():
            continue
        for j, g in enumerate(q2.components):
            if g.is_zero():
                continue
            out = out + (f * g) * alg.bracket[i][j]
    X1 = alg.anchor_vf(q1)
    X2 = alg.anchor_vf(q2)
    for j, g in enumerate(q2.components):
        d = apply_vf(X1, g)
        if not d.is_zero():
            out = out + d * bundle.basis_section(j)
    for i, f in enumerate(q1.components):
        d = apply_vf(X2, f)
        if not d.is_zero():
            out = out - d * bundle.basis_section(i)
    return out


# ---------------------------------------------------------------------------
# axiom checkers


def _section_pairs(alg, check):
    """Frame pairs followed by seeded random pairs (the standard protocol)."""
    frame = [alg.bundle.basis_section(i) for i in range(alg.rank)]
    for i, qi in enumerate(frame):
        for j, qj in enumerate(frame):
            yield "e%d" % i, qi, "e%d" % j, qj
    rng = check.rng()
    for t in range(check.config.trials):
        q1 = random_section(alg.bundle, rng, check.config.max_degree)
        q2 = random_section(alg.bundle, rng, check.config.max_degree)
        yield "random#%d.1" % t, q1, "random#%d.2" % t, q2


def check_anchor_compat(alg, config=None, name="algebroid.anchor_compat"):
    """rho[q1, q2] = [rho q1, rho q2] on frames and random sections."""
    check = Check(name, config)
    for l1, q1, l2, q2 in _section_pairs(alg, check):
        lhs = alg.anchor_vf(bracket_eval(alg, q1, q2))
        rhs = lie_bracket_vf(alg.anchor_vf(q1), alg.anchor_vf(q2))
        residual = lhs - rhs
        if not residual.is_zero():
            check.witness(residual, **{l1: q1, l2: q2})
    res = check.result()
    if res.passed:
        alg.anchor_compat_checked = True
    return res


def check_skew(alg, config=None, name="algebroid.skew"):
    """[q1, q2] + [q2, q1] = 0 on frames and random sections."""
    check = Check(name, config)
    for l1, q1, l2, q2 in _section_pairs(alg, check):
        residual = bracket_eval(alg, q1, q2) + bracket_eval(alg, q2, q1)
        if not residual.is_zero():
            check.witness(residual, **{l1: q1, l2: q2})
    res = check.result()
    if res.passed:
        alg.skew_checked = True
    return res


def check_jacobi(alg, config=None, name="algebroid.jacobi"):
    """[q1,[q2,q3]] = [[q1,q2],q3] + [q2,[q1,q3]] on frame triples and
    random sections."""
    check = Check(name, config)
    frame = [alg.bundle.basis_section(i) for i in range(alg.rank)]
    triples = [(("e%d" % i, frame[i]), ("e%d" % j, frame[j]),
                ("e%d" % k, frame[k]))
               for i in range(alg.rank)
               for j in range(alg.rank)
               for k in range(alg.rank)]
    rng = check.rng()
    for t in range(check.config.trials):
        triples.append(tuple(
            ("random#%d.%d" % (t, s),
             random_section(alg.bundle, rng, check.config.max_degree))
            for s in range(3)))
    for (l1, q1), (l2, q2), (l3, q3) in triples:
        residual = (bracket_eval(alg, q1, bracket_eval(alg, q2, q3))
                    - bracket_eval(alg, bracket_eval(alg, q1, q2), q3)
                    - bracket_eval(alg, q2, bracket_eval(alg, q1, q3)))
        if not residual.is_zero():
            check.witness(residual, **{l1: q1, l2: q2, l3: q3})
    res = check.result()
    if res.passed:
        alg.jacobi_checked = True
    return res


def check_algebroid(alg, config=None, prefix="algebroid"):
    """All three Lie-algebroid checks; returns the list of results."""
    return [
        check_anchor_compat(alg, config, name="%s.anchor_compat" % prefix),
        check_skew(alg, config, name="%s.skew" % prefix),
        check_jacobi(alg, config, name="%s.jacobi" % prefix),
    ]


# ---------------------------------------------------------------------------
# side bundles TM+A* and A+T*M and the derivations along sections of A


def side_Q(alg):
    """TM + A*, the side on which dull brackets anchored by pr_TM live."""
    patch = alg.patch
    return TrivialBundle(patch, patch.dim + alg.rank,
                         "TM+%s*" % alg.bundle.name)


def side_B(alg):
    """A + T*M, the side carrying Dorfman connections."""
    patch = alg.patch
    return TrivialBundle(patch, alg.rank + patch.dim,
                         "%s+T*M" % alg.bundle.name)


def lie_derivative_ATM(alg, a, t):
    """L_a (a', theta) = ([a, a'], L_{rho(a)} theta) on A + T*M."""
    ra = alg.rank
    patch = alg.patch
    ap = Section(alg.bundle, t.components[:ra])
    theta = Section(cotangent(patch), t.components[ra:])
    br = bracket_eval(alg, a, ap)
    lth = lie_derivative_1form(alg.anchor_vf(a), theta)
    return Section(t.bundle, list(br.components) + list(lth.components))


def lie_derivative_TMAs(alg, a, v):
    """L_a (X, alpha) = ([rho(a), X], L_a alpha) on TM + A*, where
    <L_a alpha, b> = rho(a)<alpha, b> - <alpha, [a, b]>."""
    patch = alg.patch
    dim = patch.dim
    X = Section(tangent(patch), v.components[:dim])
    alpha = v.components[dim:]
    rho_a = alg.anchor_vf(a)
    first = lie_bracket_vf(rho_a, X)
    out_alpha = []
    for k in range(alg.rank):
        br = bracket_eval(alg, a, alg.bundle.basis_section(k))
        val = apply_vf(rho_a, alpha[k])
        for l in range(alg.rank):
            val = val - alpha[l] * br.components[l]
        out_alpha.append(val)
    return Section(v.bundle, list(first.components) + out_alpha)


def rho_transpose(alg, theta_comps):
    """rho^t theta as A*-components: (rho^t theta)_j = sum_i rho_ij theta_i."""
    patch = alg.patch
    return [sum((alg.anchored.anchor[i][j] * theta_comps[i]
                 for i in range(patch.dim)), patch.zero)
            for j in range(alg.rank)]


def rho_rhot(alg, t, target=None):
    """(rho, rho^t): A + T*M -> TM + A*, (a, theta) -> (rho(a), rho^t theta)."""
    ra = alg.rank
    a = Section(alg.bundle, t.components[:ra])
    X = alg.anchor_vf(a)
    alpha = rho_transpose(alg, t.components[ra:])
    bundle = target if target is not None else side_Q(alg)
    return Section(bundle, list(X.components) + alpha)


# ---------------------------------------------------------------------------
# linear connections and their basic connections


class LinearConnection:
    """Christoffel table: gamma[i][j] = nabla_{d/dx_i} e_j as a section."""

    __slots__ = ("bundle", "gamma")

    def __init__(self, bundle, gamma):
        patch = bundle.patch
        gamma = [list(row) for row in gamma]
        if len(gamma) != patch.dim or any(len(r) != bundle.rank for r in gamma):
            raise ValueError("Christoffel table must be dim x rank")
        for row in gamma:
            for s in row:
                if s.bundle != bundle:
                    raise ValueError("Christoffel values must live in the bundle")
        self.bundle = bundle
        self.gamma = gamma

    @classmethod
    def flat(cls, bundle):
        z = [[bundle.zero_section() for _ in range(bundle.rank)]
             for _ in range(bundle.patch.dim)]
        return cls(bundle, z)

    def eval(self, X, s):
        """nabla_X s = sum_i X^i (d_i s + sum_j s^j gamma[i][j])."""
        patch = self.bundle.patch
        out = self.bundle.zero_section()
        for i in range(patch.dim):
            xi = X.components[i]
            if xi.is_zero():
                continue
            row = Section(self.bundle, [c.diff(i) for c in s.components])
            for j, sj in enumerate(s.components):
                if not sj.is_zero():
                    row = row + sj * self.gamma[i][j]
            out = out + xi * row
        return out


class BasicConnections:
    """The pair of A-connections induced by a linear connection on A,
    together with their curvature tensor on vector fields."""

    def __init__(self, alg, conn):
        if conn.bundle != alg.bundle:
            raise ValueError("connection must live on the algebroid bundle")
        self.alg = alg
        self.conn = conn

    def on_sections(self, a, ap):
        """nabla^bas_a a' = [a, a'] + nabla_{rho(a')} a."""
        return (bracket_eval(self.alg, a, ap)
                + self.conn.eval(self.alg.anchor_vf(ap), a))

    def on_vector_fields(self, a, X):
        """nabla^bas_a X = [rho(a), X] + rho(nabla_X a)."""
        return (lie_bracket_vf(self.alg.anchor_vf(a), X)
                + self.alg.anchor_vf(self.conn.eval(X, a)))

    def curvature(self, a1, a2, X):
        """R^bas(a1,a2)X = -nabla_X [a1,a2] + [nabla_X a1, a2]
        + [a1, nabla_X a2] - nabla_{nabla^bas_{a1} X} a2
        + nabla_{nabla^bas_{a2} X} a1."""
        alg, conn = self.alg, self.conn
        br = bracket_eval(alg, a1, a2)
        return (-conn.eval(X, br)
                + bracket_eval(alg, conn.eval(X, a1), a2)
                + bracket_eval(alg, a1, conn.eval(X, a2))
                - conn.eval(self.on_vector_fields(a1, X), a2)
                + conn.eval(self.on_vector_fields(a2, X), a1))


def basic_connections_from_linear(alg, conn):
    return BasicConnections(alg, conn)
