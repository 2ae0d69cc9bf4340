"""Trivialized vector bundles over a coordinate patch.

Sections are component tuples of scalar fields; subbundles are given by
constant-rank frames.  All linear algebra happens over the field of
rational functions, with deterministic lowest-index pivoting so that rank
certificates, annihilator frames and membership witnesses are reproducible.

A frame is certified by the column index set of a maximal minor whose
determinant is a nonzero rational function; everything downstream is valid
on the Zariski-open locus where that minor does not vanish, and the minor
itself is available for reporting (certificate_minor).

Matrix convention used across the package: a bundle map acts by ordinary
matrix-vector multiplication, so column j holds the components of the image
of the j-th standard basis section.  An anchor rho on A has shape
dim x rank(A) and rho(e_j) = sum_i rho[i][j] d/dx_i.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import Patch, ScalarField, random_scalar

__all__ = [
    "TrivialBundle", "Section", "Frame", "Subbundle",
    "direct_sum", "canonical_pairing", "degenerate_pairing",
    "annihilator", "membership", "complement", "perp_under_gram",
    "rref", "nullspace", "matrix_rank", "det", "solve_with_witness",
    "random_section", "apply_matrix", "concat_sections", "split_section",
    "FrameError",
]


class FrameError(ValueError):
    """A frame failed its constant-rank certificate."""


class TrivialBundle:
    """A trivialized vector bundle over a patch, identified by rank."""

    __slots__ = ("patch", "rank", "name")

    def __init__(self, patch, rank, name):
        if rank < 0:
            raise ValueError("rank must be non-negative")
        self.patch = patch
        self.rank = rank
        self.name = name

    def zero_section(self):
        return Section(self, [self.patch.zero] * self.rank)

    def basis_section(self, i):
        z = self.patch.zero
        comps = [z] * self.rank
        comps[i] = self.patch.one
        return Section(self, comps)

    def standard_frame(self):
        return Frame(self, [self.basis_section(i) for i in range(self.rank)])

    def section(self, components):
        """Build a section, coercing strings/ints/Fractions to scalars."""
        return Section(self, [self.patch.scalar(c) for c in components])

    def __eq__(self, other):
        # name participates: TM+A* and A+T*M have equal ranks but must not
        # mix, and the name is the only layout marker a trivial bundle has
        if isinstance(other, TrivialBundle):
            return (self.patch == other.patch and self.rank == other.rank
                    and self.name == other.name)
        return NotImplemented

    def __hash__(self):
        return hash((self.patch, self.rank, self.name))

    def __repr__(self):
        return "TrivialBundle(%s, rank=%d)" % (self.name, self.rank)


class Section:
    """A section of a trivialized bundle: a tuple of scalar components."""

    __slots__ = ("bundle", "components")

    def __init__(self, bundle, components):
        components = tuple(components)
        if len(components) != bundle.rank:
            raise ValueError("expected %d components, got %d"
                             % (bundle.rank, len(components)))
        self.bundle = bundle
        self.components = components

    def _check(self, other):
        if not isinstance(other, Section) or other.bundle != self.bundle:
            raise ValueError("sections of different bundles")

    def __add__(self, other):
        self._check(other)
        return Section(self.bundle, [a + b for a, b in
                                     zip(self.components, other.components)])

    def __sub__(self, other):
        self._check(other)
        return Section(self.bundle, [a - b for a, b in
                                     zip(self.components, other.components)])

    def __neg__(self):
        return Section(self.bundle, [-a for a in self.components])

    def __rmul__(self, f):
        # scalar * section
        if isinstance(f, (int, Fraction)):
            f = self.bundle.patch.scalar(f)
        if not isinstance(f, ScalarField):
            return NotImplemented
        return Section(self.bundle, [f * a for a in self.components])

    __mul__ = __rmul__

    def is_zero(self):
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other):
        if isinstance(other, Section):
            return (self.bundle == other.bundle
                    and self.components == other.components)
        return NotImplemented

    def __hash__(self):
        return hash((self.bundle, self.components))

    def __getitem__(self, i):
        return self.components[i]

    def __len__(self):
        return len(self.components)

    def __str__(self):
        return "(%s)" % ", ".join(str(c) for c in self.components)

    def __repr__(self):
        return "Section%s" % (self,)


class Frame:
    """An independent list of sections with a maximal-minor certificate.

    rank_certificate is the tuple of component indices of a maximal minor
    whose determinant is a nonzero rational function (found by elimination
    with lowest-index pivoting, so it is deterministic).
    """

    __slots__ = ("bundle", "sections", "rank_certificate")

    def __init__(self, bundle, sections):
        sections = tuple(sections)
        for s in sections:
            if s.bundle != bundle:
                raise ValueError("frame section from a different bundle")
        rows = [list(s.components) for s in sections]
        _, _, pivots = rref(rows, bundle.patch)
        if len(pivots) != len(sections):
            raise FrameError("frame sections are dependent over the function "
                             "field (rank %d < %d)" % (len(pivots), len(sections)))
        self.bundle = bundle
        self.sections = sections
        self.rank_certificate = tuple(pivots)

    @property
    def rank(self):
        return len(self.sections)

    def certificate_minor(self):
        """Determinant of the certified maximal minor (nonzero by construction)."""
        rows = [[s.components[c] for c in self.rank_certificate]
                for s in self.sections]
        return det(rows, self.bundle.patch)

    def matrix(self):
        return [list(s.components) for s in self.sections]

    def __len__(self):
        return len(self.sections)

    def __iter__(self):
        return iter(self.sections)

    def __getitem__(self, i):
        return self.sections[i]

    def __repr__(self):
        return "Frame(%s, rank=%d)" % (self.bundle.name, self.rank)


class Subbundle:
    """A constant-rank subbundle of a trivialized bundle, given by a frame."""

    __slots__ = ("ambient", "frame")

    def __init__(self, ambient, frame):
        if frame.bundle != ambient:
            raise ValueError("frame does not live in the ambient bundle")
        self.ambient = ambient
        self.frame = frame

    @property
    def rank(self):
        return self.frame.rank

    @property
    def patch(self):
        return self.ambient.patch

    def __repr__(self):
        return "Subbundle(rank %d of %r)" % (self.rank, self.ambient)


# ---------------------------------------------------------------------------
# exact linear algebra over the function field


def rref(rows, patch, track=False):
    """Reduced row echelon form with lowest-index pivoting.

    Returns (R, T, pivots) where R is the echelon matrix, pivots the list
    of pivot column indices, and T (if track) the transform with T*M = R.
    """
    m = [list(r) for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    T = None
    if track:
        T = [[patch.one if i == j else patch.zero for j in range(nrows)]
             for i in range(nrows)]
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = None
        for i in range(r, nrows):
            if not m[i][c].is_zero():
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
            if track:
                T[r], T[piv] = T[piv], T[r]
        inv = 1 / m[r][c]
        m[r] = [inv * v for v in m[r]]
        if track:
            T[r] = [inv * v for v in T[r]]
        for i in range(nrows):
            if i != r and not m[i][c].is_zero():
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
                if track:
                    T[i] = [a - f * b for a, b in zip(T[i], T[r])]
        pivots.append(c)
        r += 1
    return m, T, pivots


def matrix_rank(rows, patch):
    return len(rref(rows, patch)[2])


def nullspace(rows, patch, ncols=None):
    """Basis of the right nullspace {v : M v = 0} as component lists."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows:
        return [[patch.one if i == j else patch.zero for j in range(ncols)]
                for i in range(ncols)]
    R, _, pivots = rref(rows, patch)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [patch.zero] * ncols
        v[free] = patch.one
        for j, c in enumerate(pivots):
            v[c] = -R[j][free]
        basis.append(v)
    return basis


def det(rows, patch):
    """Determinant by elimination (product of pivots, swap signs tracked)."""
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant needs a square matrix")
    if n == 0:
        return patch.one
    m = [list(r) for r in rows]
    sign = 1
    result = patch.one
    for c in range(n):
        piv = None
        for i in range(c, n):
            if not m[i][c].is_zero():
                piv = i
                break
        if piv is None:
            return patch.zero
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        result = result * m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if not m[i][c].is_zero():
                f = m[i][c] * inv
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return result if sign == 1 else -result


def solve_with_witness(columns_matrix, rhs, patch):
    """Solve A x = rhs exactly, or produce a left witness of inconsistency.

    A is given as a list of rows (shape n x k).  Returns ("solution", x)
    with x of length k, or ("witness", w) with w a covector of length n
    satisfying w*A = 0 and w*rhs != 0.
    """
    n = len(columns_matrix)
    k = len(columns_matrix[0]) if n else 0
    aug = [list(row) + [rhs[i]] for i, row in enumerate(columns_matrix)]
    R, T, pivots = rref(aug, patch, track=True)
    if k in pivots:
        row = pivots.index(k)
        return "witness", T[row]
    x = [patch.zero] * k
    for j, c in enumerate(pivots):
        x[c] = R[j][k]
    return "solution", x


# ---------------------------------------------------------------------------
# bundle operations


def direct_sum(b1, b2):
    """Concatenate two bundles over the same patch; components are
    (b1-part, b2-part) in declared order."""
    if b1.patch != b2.patch:
        raise ValueError("direct sum needs bundles over the same patch")
    return TrivialBundle(b1.patch, b1.rank + b2.rank,
                         "%s+%s" % (b1.name, b2.name))


def concat_sections(bundle, s1, s2):
    return Section(bundle, list(s1.components) + list(s2.components))


def split_section(s, r1, b1, b2):
    return (Section(b1, s.components[:r1]), Section(b2, s.components[r1:]))


def canonical_pairing(u, t):
    """Pairing of TM + A* against A + T*M: <(X, alpha), (a, theta)> =
    theta(X) + alpha(a), in the fixed component layout."""
    patch = u.bundle.patch
    if t.bundle.patch != patch or u.bundle.rank != t.bundle.rank:
        raise ValueError("pairing needs matching bundles")
    dim = patch.dim
    ra = u.bundle.rank - dim
    if ra < 0:
        raise ValueError("bundle rank smaller than patch dimension")
    total = patch.zero
    for i in range(dim):
        total = total + u.components[i] * t.components[ra + i]
    for j in range(ra):
        total = total + u.components[dim + j] * t.components[j]
    return total


def apply_matrix(m, comps, patch):
    """Matrix-vector product for bundle maps (column j = image of basis j)."""
    return [sum((row[j] * comps[j] for j in range(len(comps))), patch.zero)
            for row in m]


def degenerate_pairing(t1, t2, rho):
    """Symmetric pairing on A + T*M induced by the anchor:
    <(a1, th1), (a2, th2)> = th2(rho(a1)) + th1(rho(a2))."""
    patch = t1.bundle.patch
    if t2.bundle != t1.bundle:
        raise ValueError("pairing needs sections of the same bundle")
    dim = patch.dim
    ra = t1.bundle.rank - dim
    if ra < 0 or len(rho) != dim or any(len(row) != ra for row in rho):
        raise ValueError("anchor shape must be dim x rank(A)")
    rho_a1 = apply_matrix(rho, t1.components[:ra], patch)
    rho_a2 = apply_matrix(rho, t2.components[:ra], patch)
    total = patch.zero
    for k in range(dim):
        total = total + t2.components[ra + k] * rho_a1[k]
        total = total + t1.components[ra + k] * rho_a2[k]
    return total


def _canonical_gram(patch, rank, side="TM+A*"):
    """Gram matrix of canonical_pairing in the standard bases.

    side names the layout of the row space: "TM+A*" pairs rows of TM + A*
    against columns of A + T*M, "A+T*M" the transpose.  The two differ
    whenever rank(A) != dim.
    """
    dim = patch.dim
    ra = rank - dim
    g = [[patch.zero] * rank for _ in range(rank)]
    if side == "TM+A*":
        for i in range(dim):
            g[i][ra + i] = patch.one
        for j in range(ra):
            g[dim + j][j] = patch.one
    elif side == "A+T*M":
        for j in range(ra):
            g[j][dim + j] = patch.one
        for i in range(dim):
            g[ra + i][i] = patch.one
    else:
        raise ValueError("side must be 'TM+A*' or 'A+T*M'")
    return g


def perp_under_gram(U, gram, twin):
    """Subbundle of `twin` annihilated by U under the bilinear form with the
    given Gram matrix (rows indexed by U's ambient, columns by twin)."""
    patch = U.patch
    rows = []
    for s in U.frame:
        rows.append([
            _dot(patch, s.components, [gram[c][d] for c in range(len(s.components))])
            for d in range(twin.rank)])
    basis = nullspace(rows, patch, ncols=twin.rank)
    sections = [Section(twin, v) for v in basis]
    return Subbundle(twin, Frame(twin, sections))


def _dot(patch, xs, ys):
    total = patch.zero
    for a, b in zip(xs, ys):
        total = total + a * b
    return total


def annihilator(U, twin=None, side="TM+A*"):
    """Annihilator of U under the canonical pairing, as a subbundle of the
    twin bundle (A + T*M for U inside TM + A*, and conversely for
    side="A+T*M").

    rank(U) + rank(annihilator(U)) equals the ambient rank.
    """
    patch = U.patch
    n = U.ambient.rank
    if twin is None:
        twin = TrivialBundle(patch, n, "dual(%s)" % U.ambient.name)
    elif twin.rank != n or twin.patch != patch:
        raise ValueError("twin bundle must match the ambient rank and patch")
    return perp_under_gram(U, _canonical_gram(patch, n, side), twin)


def membership(s, U):
    """Decide s in span(U-frame) over the function field.

    Returns (True, coefficients) with s = sum c_i u_i, or (False, witness)
    where the witness covector annihilates every frame section but not s.
    """
    if s.bundle != U.ambient:
        raise ValueError("section and subbundle have different ambient bundles")
    patch = s.bundle.patch
    n = U.ambient.rank
    cols = [[u.components[i] for u in U.frame] for i in range(n)]
    status, data = solve_with_witness(cols, list(s.components), patch)
    if status == "solution":
        return True, data
    return False, data


def complement(U):
    """Deterministic complement: greedily append standard basis sections in
    index order, keeping those that increase the rank."""
    patch = U.patch
    rows = [list(s.components) for s in U.frame]
    kept = []
    current = len(rows)
    for i in range(U.ambient.rank):
        e = U.ambient.basis_section(i)
        candidate = rows + [list(e.components)]
        if matrix_rank(candidate, patch) > current:
            rows = candidate
            current += 1
            kept.append(e)
        if current == U.ambient.rank:
            break
    return Frame(U.ambient, kept)


def random_section(bundle, rng, max_degree=2):
    return Section(bundle, [random_scalar(bundle.patch, rng, max_degree)
                            for _ in range(bundle.rank)])
