"""Exact scalar arithmetic over a coordinate patch.

Every certification in this package bottoms out here: a geometric identity
holds iff some rational function in the patch coordinates is the zero
function, and zero-testing rational functions over Q is decidable.  So the
coefficient "field of functions" is the field Q(x_1, ..., x_n) of rational
functions, kept in canonical form (reduced fraction, graded-lex monomial
order, positive leading coefficient in the denominator) after every
operation.  No floating point anywhere.

The heavy lifting (gcd cancellation, multivariate polynomial arithmetic) is
delegated to sympy's sparse polynomial fields; this module owns the patch
bookkeeping, the expression grammar, and the printer.

Grammar accepted by parse_scalar (whitespace insignificant)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' integer)?
    base   := integer | identifier | '(' expr ')' | '-' factor | '+' factor

'^' does not chain (x^2^3 is a syntax error) and '-' binds a whole factor,
so -3^2 parses as -(3^2).  Rational literals like 3/4 come out of the
ordinary division rule.
"""

from __future__ import annotations

import itertools
import re
from fractions import Fraction

from sympy import QQ
from sympy.polys.fields import FracField

__all__ = [
    "Patch",
    "ScalarField",
    "ScalarParseError",
    "PoleError",
    "parse_scalar",
    "partial_derivative",
    "evaluate",
    "random_scalar",
]


class ScalarParseError(ValueError):
    """Syntax or identifier error, annotated with the offending position."""

    def __init__(self, message, pos):
        super().__init__("%s (at position %d)" % (message, pos))
        self.pos = pos


class PoleError(ZeroDivisionError):
    """Evaluation hit a zero of the denominator."""


_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*\Z")


class Patch:
    """An ordered coordinate chart.

    Scalars, bundles and sections all point back at the patch that owns
    their coordinate ring.  Patches with the same coordinate names are
    interchangeable (equality is structural).
    """

    __slots__ = ("coords", "field", "_gens")

    def __init__(self, coords):
        coords = tuple(coords)
        if not coords:
            raise ValueError("a patch needs at least one coordinate")
        if len(set(coords)) != len(coords):
            raise ValueError("coordinate names must be distinct")
        for name in coords:
            if not _IDENT.match(name):
                raise ValueError("bad coordinate name %r" % (name,))
        self.coords = coords
        self.field = FracField(list(coords), QQ, order="grlex")
        self._gens = tuple(ScalarField(self, g) for g in self.field.gens)

    @property
    def dim(self):
        return len(self.coords)

    def coordinate(self, i):
        """The i-th coordinate function as a ScalarField."""
        return self._gens[i]

    @property
    def zero(self):
        return ScalarField(self, self.field.zero)

    @property
    def one(self):
        return ScalarField(self, self.field.one)

    def scalar(self, value):
        """Coerce an int, Fraction, str or ScalarField to a ScalarField."""
        if isinstance(value, ScalarField):
            if value.patch != self:
                raise ValueError("scalar belongs to a different patch")
            return value
        if isinstance(value, str):
            return parse_scalar(value, self)
        if isinstance(value, (int, Fraction)):
            return ScalarField(self, self.field.ground_new(QQ(Fraction(value))))
        raise TypeError("cannot coerce %r to a scalar" % (value,))

    def __eq__(self, other):
        if isinstance(other, Patch):
            return self.coords == other.coords
        return NotImplemented

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return "Patch(%s)" % ", ".join(self.coords)


class ScalarField:
    """A rational function of the patch coordinates in canonical form.

    Wraps a sympy FracElement; construction and every arithmetic operation
    re-canonicalize, so is_zero() is just a test on the stored numerator.
    """

    __slots__ = ("patch", "fe")

    def __init__(self, patch, fe):
        self.patch = patch
        self.fe = fe

    # -- arithmetic ---------------------------------------------------

    def _operand(self, other):
        if isinstance(other, ScalarField):
            if other.patch != self.patch:
                raise ValueError("scalars from different patches")
            return other.fe
        if isinstance(other, (int, Fraction)):
            return self.patch.field.ground_new(QQ(Fraction(other)))
        return None

    def __add__(self, other):
        fe = self._operand(other)
        if fe is None:
            return NotImplemented
        return ScalarField(self.patch, self.fe + fe)

    __radd__ = __add__

    def __sub__(self, other):
        fe = self._operand(other)
        if fe is None:
            return NotImplemented
        return ScalarField(self.patch, self.fe - fe)

    def __rsub__(self, other):
        fe = self._operand(other)
        if fe is None:
            return NotImplemented
        return ScalarField(self.patch, fe - self.fe)

    def __mul__(self, other):
        fe = self._operand(other)
        if fe is None:
            return NotImplemented
        return ScalarField(self.patch, self.fe * fe)

    __rmul__ = __mul__

    def __truediv__(self, other):
        fe = self._operand(other)
        if fe is None:
            return NotImplemented
        if not fe:
            raise ZeroDivisionError("division by the zero polynomial")
        return ScalarField(self.patch, self.fe / fe)

    def __rtruediv__(self, other):
        fe = self._operand(other)
        if fe is None:
            return NotImplemented
        if not self.fe:
            raise ZeroDivisionError("division by the zero polynomial")
        return ScalarField(self.patch, fe / self.fe)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n == 0:
            return self.patch.one  # 0^0 = 1, as for Fraction
        if n < 0 and not self.fe:
            raise ZeroDivisionError("division by the zero polynomial")
        return ScalarField(self.patch, self.fe ** n)

    def __neg__(self):
        return ScalarField(self.patch, -self.fe)

    def __pos__(self):
        return self

    # -- predicates ---------------------------------------------------

    def is_zero(self):
        return not self.fe

    def __bool__(self):
        return bool(self.fe)

    def __eq__(self, other):
        if isinstance(other, ScalarField):
            return self.patch == other.patch and self.fe == other.fe
        if isinstance(other, (int, Fraction)):
            return self.fe == self.patch.field.ground_new(QQ(Fraction(other)))
        return NotImplemented

    def __hash__(self):
        return hash((self.patch.coords, self.fe))

    # -- calculus -----------------------------------------------------

    def diff(self, coord):
        """Exact partial derivative with respect to coordinate index."""
        gen = self.patch.field.gens[coord]
        return ScalarField(self.patch, self.fe.diff(gen))

    def evaluate(self, point):
        """Exact value at a point of rationals; raises PoleError on poles."""
        if len(point) != self.patch.dim:
            raise ValueError("point dimension %d, patch dimension %d"
                             % (len(point), self.patch.dim))
        vals = [Fraction(p) for p in point]
        den = _eval_poly(self.fe.denom, vals)
        if den == 0:
            raise PoleError("pole at (%s)" % ", ".join(str(v) for v in vals))
        return _eval_poly(self.fe.numer, vals) / den

    # -- printing -----------------------------------------------------

    def __str__(self):
        return _print_scalar(self)

    def __repr__(self):
        return "ScalarField(%s)" % (self,)


# ---------------------------------------------------------------------------
# parsing


def _tokenize(text):
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("int", text[i:j], i))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[i:j], i))
            i = j
        elif ch in "+-*/^()":
            toks.append((ch, ch, i))
            i += 1
        else:
            raise ScalarParseError("unexpected character %r" % ch, i)
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text, patch):
        self.toks = _tokenize(text)
        self.k = 0
        self.patch = patch
        self.field = patch.field

    def peek(self):
        return self.toks[self.k]

    def advance(self):
        tok = self.toks[self.k]
        self.k += 1
        return tok

    def parse(self):
        fe = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ScalarParseError("unexpected %r" % val, pos)
        return fe

    def expr(self):
        fe = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            rhs = self.term()
            fe = fe + rhs if op == "+" else fe - rhs
        return fe

    def term(self):
        fe = self.factor()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.advance()
            rhs = self.factor()
            if op == "*":
                fe = fe * rhs
            else:
                if not rhs:
                    raise ZeroDivisionError(
                        "division by the zero polynomial (at position %d)" % pos)
                fe = fe / rhs
        return fe

    def factor(self):
        fe = self.base()
        if self.peek()[0] == "^":
            _, _, pos = self.advance()
            n = self.exponent()
            if n == 0:
                return self.field.one  # 0^0 = 1, as for Fraction
            if n < 0 and not fe:
                raise ZeroDivisionError(
                    "division by the zero polynomial (at position %d)" % pos)
            fe = fe ** n
        return fe

    def base(self):
        kind, val, pos = self.advance()
        if kind == "int":
            return self.field.ground_new(QQ(int(val)))
        if kind == "name":
            try:
                i = self.patch.coords.index(val)
            except ValueError:
                raise ScalarParseError("unknown identifier %r" % val, pos) from None
            return self.field.gens[i]
        if kind == "(":
            fe = self.expr()
            k2, _, p2 = self.advance()
            if k2 != ")":
                raise ScalarParseError("expected ')'", p2)
            return fe
        if kind == "-":
            return -self.factor()
        if kind == "+":
            return self.factor()
        what = repr(val) if val else "end of input"
        raise ScalarParseError("unexpected %s" % what, pos)

    def exponent(self):
        kind, val, pos = self.advance()
        sign = 1
        if kind in ("+", "-"):
            sign = -1 if kind == "-" else 1
            kind, val, pos = self.advance()
        if kind != "int":
            raise ScalarParseError("expected an integer exponent", pos)
        return sign * int(val)


def parse_scalar(text, patch):
    """Parse an expression string over the patch coordinates.

    Returns the canonical ScalarField.  Raises ScalarParseError on syntax
    errors and unknown identifiers, ZeroDivisionError on division by a
    polynomial that reduces to zero.
    """
    return ScalarField(patch, _Parser(text, patch).parse())


# ---------------------------------------------------------------------------
# printing


def _coeff_fraction(c):
    return Fraction(int(c.numerator), int(c.denominator))


def _print_poly(poly, coords, scale=Fraction(1)):
    parts = []
    for monom, coeff in poly.terms():
        c = _coeff_fraction(coeff) * scale
        vars_part = "*".join(
            name if e == 1 else "%s^%d" % (name, e)
            for name, e in zip(coords, monom) if e)
        mag = abs(c)
        if vars_part:
            body = vars_part if mag == 1 else "%s*%s" % (mag, vars_part)
        else:
            body = str(mag)
        if not parts:
            parts.append(body if c > 0 else "-" + body)
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts) if parts else "0"


def _print_scalar(f):
    fe = f.fe
    if not fe:
        return "0"
    coords = f.patch.coords
    num, den = fe.numer, fe.denom
    if den.is_ground:
        # fold the constant denominator into the coefficients
        return _print_poly(num, coords, Fraction(1) / _coeff_fraction(den.LC))
    return "(%s)/(%s)" % (_print_poly(num, coords), _print_poly(den, coords))


# ---------------------------------------------------------------------------
# spec'd operation aliases and helpers


def partial_derivative(f, coord):
    return f.diff(coord)


def evaluate(f, point):
    return f.evaluate(point)


def _eval_poly(poly, vals):
    total = Fraction(0)
    for monom, coeff in poly.terms():
        term = _coeff_fraction(coeff)
        for v, e in zip(vals, monom):
            if e:
                term *= v ** e
        total += term
    return total


def _monomials(dim, max_degree):
    exps = itertools.product(range(max_degree + 1), repeat=dim)
    return sorted(e for e in exps if sum(e) <= max_degree)


_COEFF_POOL = (0, 0, 1, -1, 2, -2)


def random_scalar(patch, rng, max_degree=2):
    """Random polynomial with small integer coefficients, degree bounded.

    Deterministic given the rng state; used for randomized identity checks
    (identities are polynomial in the inputs, so polynomial samples are as
    discriminating as rational ones and keep intermediate expressions small).
    """
    ring = patch.field.ring
    d = {}
    for monom in _monomials(patch.dim, max_degree):
        c = rng.choice(_COEFF_POOL)
        if c:
            d[monom] = QQ(c)
    if not d:
        return patch.zero
    return ScalarField(patch, patch.field.new(ring.from_dict(d), ring.one))
