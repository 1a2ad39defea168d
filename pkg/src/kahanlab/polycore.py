"""Exact and floating polynomial arithmetic for the plane.

Two scalar domains are supported and never mixed silently:

* ``EXACT``   -- ``fractions.Fraction`` coefficients, all operations exact;
* ``COMPLEX`` -- machine ``complex`` coefficients, tolerance-based predicates.

The module provides sparse bivariate polynomials (:class:`Poly2`), dense
univariate polynomials (:class:`Poly1`), affine lines, exact single-divisor
multivariate division, Sylvester resultants with degree-drop handling, an
Aberth-Ehrlich simultaneous root finder with root clustering, rational-root
snapping, and a seeded conclusive identity test for rational functions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

EXACT = "exact"
COMPLEX = "complex"

# Clustering defaults used when grouping numerically computed roots.
CLUSTER_REL = 1e-8
CLUSTER_ABS = 1e-10


class DomainError(TypeError):
    """Raised when exact and floating scalars are combined without an
    explicit conversion."""


class DivisionError(ArithmeticError):
    """Raised when an exact polynomial division has a nonzero remainder."""


def _is_exact_scalar(c) -> bool:
    return isinstance(c, (int, Fraction))


def coerce_scalar(c, domain: str):
    """Normalise a raw scalar into the canonical carrier of *domain*."""
    if domain == EXACT:
        if isinstance(c, Fraction):
            return c
        if isinstance(c, int):
            return Fraction(c)
        raise DomainError(f"cannot use {type(c).__name__} in exact domain")
    if domain == COMPLEX:
        if isinstance(c, (int, float, complex, Fraction)):
            return complex(c)
        raise DomainError(f"cannot use {type(c).__name__} in complex domain")
    raise ValueError(f"unknown domain {domain!r}")


def infer_domain(c) -> str:
    if _is_exact_scalar(c):
        return EXACT
    if isinstance(c, (float, complex)):
        return COMPLEX
    raise DomainError(f"unsupported scalar type {type(c).__name__}")


def join_domain(a: str, b: str) -> str:
    if a != b:
        raise DomainError(f"domain mismatch: {a} vs {b}")
    return a


def scalar_is_zero(c, tol: float = 0.0) -> bool:
    if isinstance(c, Fraction) or isinstance(c, int):
        return c == 0
    return abs(c) <= tol


# ---------------------------------------------------------------------------
# Bivariate polynomials
# ---------------------------------------------------------------------------


class Poly2:
    """Sparse polynomial in two variables x, y over one scalar domain.

    Coefficients are stored in a dict keyed by ``(i, j)`` for the monomial
    ``x**i * y**j``.  Instances are treated as immutable.
    """

    __slots__ = ("c", "domain")

    def __init__(self, coeffs: dict, domain: str | None = None):
        if domain is None:
            domain = EXACT
            for v in coeffs.values():
                if not scalar_is_zero(v):
                    domain = infer_domain(v)
                    break
        c = {}
        for (i, j), v in coeffs.items():
            v = coerce_scalar(v, domain)
            if not scalar_is_zero(v):
                c[(int(i), int(j))] = v
        self.c = c
        self.domain = domain

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(domain: str = EXACT) -> "Poly2":
        return Poly2({}, domain)

    @staticmethod
    def const(v, domain: str | None = None) -> "Poly2":
        if domain is None:
            domain = infer_domain(v)
        return Poly2({(0, 0): v}, domain)

    @staticmethod
    def x(domain: str = EXACT) -> "Poly2":
        return Poly2({(1, 0): 1 if domain == EXACT else 1.0}, domain)

    @staticmethod
    def y(domain: str = EXACT) -> "Poly2":
        return Poly2({(0, 1): 1 if domain == EXACT else 1.0}, domain)

    # -- basic structure ---------------------------------------------------

    def is_zero(self, tol: float = 0.0) -> bool:
        if not self.c:
            return True
        if self.domain == EXACT:
            return False
        scale = self.max_abs()
        return scale <= tol

    def total_degree(self) -> int:
        if not self.c:
            return -1
        return max(i + j for i, j in self.c)

    def degree_x(self) -> int:
        if not self.c:
            return -1
        return max(i for i, _ in self.c)

    def degree_y(self) -> int:
        if not self.c:
            return -1
        return max(j for _, j in self.c)

    def coeff(self, i: int, j: int):
        zero = Fraction(0) if self.domain == EXACT else 0j
        return self.c.get((i, j), zero)

    def max_abs(self) -> float:
        if not self.c:
            return 0.0
        return max(abs(v) for v in self.c.values())

    def terms_sorted(self):
        """Terms in graded lexicographic order (largest first, x before y)."""
        return sorted(self.c.items(), key=lambda kv: (kv[0][0] + kv[0][1], kv[0][0]), reverse=True)

    def leading_term(self):
        if not self.c:
            raise ValueError("zero polynomial has no leading term")
        return self.terms_sorted()[0]

    def leading_form(self) -> "Poly2":
        """Top total-degree homogeneous part."""
        d = self.total_degree()
        return Poly2({k: v for k, v in self.c.items() if k[0] + k[1] == d}, self.domain)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = self._lift(other)
        dom = join_domain(self.domain, other.domain)
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = out.get(k, 0) + v if k in out else v
        return Poly2(out, dom)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return Poly2({k: -v for k, v in self.c.items()}, self.domain)

    def __sub__(self, other):
        return self.__add__(self._lift(other).__neg__())

    def __rsub__(self, other):
        return self._lift(other).__sub__(self)

    def __mul__(self, other):
        if _is_exact_scalar(other) or isinstance(other, (float, complex)):
            s = coerce_scalar(other, self.domain)
            return Poly2({k: v * s for k, v in self.c.items()}, self.domain)
        if isinstance(other, Poly2):
            dom = join_domain(self.domain, other.domain)
            out: dict = {}
            for (i1, j1), v1 in self.c.items():
                for (i2, j2), v2 in other.c.items():
                    k = (i1 + i2, j1 + j2)
                    out[k] = out.get(k, 0) + v1 * v2 if k in out else v1 * v2
            return Poly2(out, dom)
        return NotImplemented

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = Poly2.const(1 if self.domain == EXACT else 1.0, self.domain)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def _lift(self, other) -> "Poly2":
        if isinstance(other, Poly2):
            return other
        if _is_exact_scalar(other) or isinstance(other, (float, complex)):
            return Poly2.const(coerce_scalar(other, self.domain), self.domain)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Poly2):
            return NotImplemented
        return self.domain == other.domain and self.c == other.c

    def __hash__(self):
        return hash((self.domain, tuple(self.terms_sorted())))

    # -- calculus and evaluation ------------------------------------------

    def diff_x(self) -> "Poly2":
        out = {}
        for (i, j), v in self.c.items():
            if i > 0:
                out[(i - 1, j)] = v * i
        return Poly2(out, self.domain)

    def diff_y(self) -> "Poly2":
        out = {}
        for (i, j), v in self.c.items():
            if j > 0:
                out[(i, j - 1)] = v * j
        return Poly2(out, self.domain)

    def evaluate(self, x, y):
        """Evaluate at a point; the point scalars drive the output type."""
        acc = None
        for (i, j), v in self.c.items():
            if self.domain == EXACT and not _is_exact_scalar(x):
                v = complex(v) if isinstance(x, complex) or isinstance(y, complex) else float(v)
            term = v * (x ** i) * (y ** j)
            acc = term if acc is None else acc + term
        if acc is None:
            if self.domain == EXACT and _is_exact_scalar(x) and _is_exact_scalar(y):
                return Fraction(0)
            return 0.0
        return acc

    def substitute(self, px: "Poly2", py: "Poly2") -> "Poly2":
        """Polynomial composition self(px(x,y), py(x,y))."""
        dom = join_domain(px.domain, py.domain)
        one = Poly2.const(1 if dom == EXACT else 1.0, dom)
        # cache powers
        dx = self.degree_x()
        dy = self.degree_y()
        powx = [one]
        for _ in range(max(dx, 0)):
            powx.append(powx[-1] * px)
        powy = [one]
        for _ in range(max(dy, 0)):
            powy.append(powy[-1] * py)
        acc = Poly2.zero(dom)
        for (i, j), v in self.c.items():
            vv = coerce_scalar(v, dom) if self.domain == dom else (
                complex(v) if dom == COMPLEX else v)
            acc = acc + powx[i] * powy[j] * vv
        return acc

    def to_complex(self) -> "Poly2":
        if self.domain == COMPLEX:
            return self
        return Poly2({k: complex(v) for k, v in self.c.items()}, COMPLEX)

    # -- univariate views --------------------------------------------------

    def as_poly1_in_y(self) -> list["Poly1"]:
        """Coefficients of powers of y, each a Poly1 in x (index = y-power)."""
        dy = self.degree_y()
        if dy < 0:
            return []
        dx = self.degree_x()
        rows = [[_zero_of(self.domain)] * (dx + 1) for _ in range(dy + 1)]
        for (i, j), v in self.c.items():
            rows[j][i] = v
        return [Poly1(r, self.domain) for r in rows]

    def as_poly1_in_x(self) -> list["Poly1"]:
        dx = self.degree_x()
        if dx < 0:
            return []
        dy = self.degree_y()
        rows = [[_zero_of(self.domain)] * (dy + 1) for _ in range(dx + 1)]
        for (i, j), v in self.c.items():
            rows[i][j] = v
        return [Poly1(r, self.domain) for r in rows]

    def eval_x(self, x0) -> "Poly1":
        """Restrict to the vertical line x = x0; returns a Poly1 in y."""
        dy = self.degree_y()
        dom = self.domain if _is_exact_scalar(x0) and self.domain == EXACT else COMPLEX
        coeffs = [_zero_of(dom)] * (dy + 1) if dy >= 0 else []
        for (i, j), v in self.c.items():
            vv = v if dom == EXACT else complex(v)
            xx = x0 if dom == EXACT else complex(x0)
            coeffs[j] = coeffs[j] + vv * xx ** i
        return Poly1(coeffs, dom)

    def eval_y(self, y0) -> "Poly1":
        dx = self.degree_x()
        dom = self.domain if _is_exact_scalar(y0) and self.domain == EXACT else COMPLEX
        coeffs = [_zero_of(dom)] * (dx + 1) if dx >= 0 else []
        for (i, j), v in self.c.items():
            vv = v if dom == EXACT else complex(v)
            yy = y0 if dom == EXACT else complex(y0)
            coeffs[i] = coeffs[i] + vv * yy ** j
        return Poly1(coeffs, dom)

    # -- normal forms ------------------------------------------------------

    def primitive_normal(self) -> "Poly2":
        """Exact domain: scale so coefficients are coprime integers and the
        graded-lex leading coefficient is positive.  Complex domain: scale so
        the largest-modulus coefficient is 1 with positive real part (or
        positive imaginary part when the real part vanishes)."""
        if not self.c:
            return self
        if self.domain == EXACT:
            from math import gcd
            num_gcd = 0
            den_lcm = 1
            for v in self.c.values():
                num_gcd = gcd(num_gcd, v.numerator)
                den_lcm = den_lcm // gcd(den_lcm, v.denominator) * v.denominator
            scale = Fraction(den_lcm, num_gcd if num_gcd else 1)
            out = {k: v * scale for k, v in self.c.items()}
            lead = sorted(out, key=lambda k: (k[0] + k[1], k[0]), reverse=True)[0]
            if out[lead] < 0:
                out = {k: -v for k, v in out.items()}
            return Poly2(out, EXACT)
        pivot = max(self.c.items(), key=lambda kv: (abs(kv[1]), -(kv[0][0] + kv[0][1]), kv[0]))[1]
        out = {k: v / pivot for k, v in self.c.items()}
        return Poly2(out, COMPLEX)

    def __repr__(self):
        if not self.c:
            return "Poly2(0)"
        bits = []
        for (i, j), v in self.terms_sorted():
            mono = "".join(s for s in (f"x^{i}" if i else "", f"y^{j}" if j else "") if s)
            bits.append(f"{v}{'*' + mono if mono else ''}")
        return "Poly2(" + " + ".join(bits) + ")"


def _zero_of(domain: str):
    return Fraction(0) if domain == EXACT else 0j


def poly2_from_rows(rows: Sequence[Sequence], domain: str = EXACT) -> Poly2:
    """Build from a nested list: rows[i][j] is the coefficient of x**i y**j."""
    out = {}
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            out[(i, j)] = v
    return Poly2(out, domain)


def proportional(p: Poly2, q: Poly2, tol: float = 0.0) -> bool:
    """True when p and q agree up to a nonzero scalar factor."""
    if p.is_zero(tol) or q.is_zero(tol):
        return p.is_zero(tol) and q.is_zero(tol)
    if p.domain == EXACT and q.domain == EXACT:
        return p.primitive_normal() == q.primitive_normal()
    pc = p.to_complex().primitive_normal()
    qc = q.to_complex().primitive_normal()
    diff = pc - qc
    scale = max(pc.max_abs(), qc.max_abs())
    use = tol if tol > 0 else 1e-9
    return diff.max_abs() <= use * scale


# ---------------------------------------------------------------------------
# Exact multivariate division (single divisor) and line restriction
# ---------------------------------------------------------------------------


def divide_exact(num: Poly2, den: Poly2, tol: float = 0.0):
    """Divide num by den; return the quotient, or None when den does not
    divide num.

    Uses single-divisor multivariate division in graded-lex order, which
    decides divisibility exactly: the remainder vanishes iff den | num.
    In the complex domain the remainder is compared against ``tol`` times
    the magnitude of num.
    """
    dom = join_domain(num.domain, den.domain)
    if den.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if num.is_zero():
        return Poly2.zero(dom)
    (li, lj), lc = den.leading_term()
    quot: dict = {}
    rem = num
    scale = num.max_abs() if dom == COMPLEX else None
    guard = 0
    while not rem.is_zero(tol * scale if dom == COMPLEX and scale else 0.0):
        guard += 1
        if guard > 10000:
            raise DivisionError("division did not terminate")
        (ri, rj), rc = rem.leading_term()
        if ri < li or rj < lj:
            # In the complex domain cancellation noise can surface as a tiny
            # leading monomial outside the divisible cone; drop it and go on.
            if dom == COMPLEX and scale and abs(rc) <= tol * scale:
                c2 = dict(rem.c)
                del c2[(ri, rj)]
                rem = Poly2(c2, dom)
                continue
            return None
        k = (ri - li, rj - lj)
        q = rc / lc
        quot[k] = quot.get(k, 0) + q if k in quot else q
        rem = rem - Poly2({k: q}, dom) * den
        # In the complex domain tiny leftovers in the subtracted leading term
        # must be cleared explicitly to guarantee termination.
        if dom == COMPLEX and (ri, rj) in rem.c:
            c2 = dict(rem.c)
            del c2[(ri, rj)]
            rem = Poly2(c2, dom)
    return Poly2(quot, dom)


@dataclass(frozen=True)
class Line:
    """Affine line a*x + b*y + c = 0 with domain-tagged coefficients."""

    a: object
    b: object
    c: object
    domain: str = EXACT

    @staticmethod
    def make(a, b, c, domain: str | None = None) -> "Line":
        if domain is None:
            doms = [infer_domain(v) for v in (a, b, c) if not scalar_is_zero(v)]
            domain = doms[0] if doms else EXACT
            for d in doms:
                join_domain(domain, d)
        return Line(coerce_scalar(a, domain), coerce_scalar(b, domain),
                    coerce_scalar(c, domain), domain)

    @staticmethod
    def slope_intercept(mu, beta, domain: str | None = None) -> "Line":
        """The line y = mu*x + beta, stored as -mu*x + y - beta = 0."""
        if domain is None:
            doms = [infer_domain(v) for v in (mu, beta)
                    if not scalar_is_zero(v)]
            domain = COMPLEX if COMPLEX in doms else EXACT
        return Line.make(-mu, 1 if domain != COMPLEX else 1.0, -beta, domain)

    @staticmethod
    def vertical(x0, domain: str | None = None) -> "Line":
        if domain is None:
            domain = infer_domain(x0) if not scalar_is_zero(x0) else EXACT
        return Line.make(1 if domain != COMPLEX else 1.0, 0, -x0, domain)

    @staticmethod
    def from_points(p, q, domain: str | None = None) -> "Line":
        (x1, y1), (x2, y2) = p, q
        a = y1 - y2
        b = x2 - x1
        c = x1 * y2 - x2 * y1
        return Line.make(a, b, c, domain)

    def is_vertical(self, tol: float = 1e-12) -> bool:
        if self.domain == EXACT:
            return self.b == 0
        scale = max(abs(self.a), abs(self.b))
        return abs(self.b) <= tol * scale

    def slope(self):
        """Slope mu with y = mu*x + beta; None for a vertical line."""
        if self.is_vertical():
            return None
        return -self.a / self.b

    def intercept(self):
        if self.is_vertical():
            return None
        return -self.c / self.b

    def x_offset(self):
        """For a vertical line x = x0, the value x0."""
        return -self.c / self.a

    def canonical(self) -> "Line":
        """Monic in y when not vertical, else monic in x."""
        if self.is_vertical():
            return Line(self.a / self.a, self.b / self.a, self.c / self.a, self.domain)
        return Line(self.a / self.b, self.b / self.b, self.c / self.b, self.domain)

    def as_poly(self) -> Poly2:
        return Poly2({(1, 0): self.a, (0, 1): self.b, (0, 0): self.c}, self.domain)

    def evaluate(self, x, y):
        return self.a * x + self.b * y + self.c

    def to_complex(self) -> "Line":
        return Line(complex(self.a), complex(self.b), complex(self.c), COMPLEX)

    def parametrise(self):
        """Return (x(t), y(t)) as Poly1 pairs tracing the line."""
        if self.is_vertical():
            x0 = -self.c / self.a
            return (Poly1([x0], self.domain), Poly1([_zero_of(self.domain),
                    coerce_scalar(1, EXACT) if self.domain == EXACT else 1 + 0j], self.domain))
        mu = self.slope()
        beta = self.intercept()
        one = Fraction(1) if self.domain == EXACT else 1 + 0j
        return (Poly1([_zero_of(self.domain), one], self.domain),
                Poly1([beta, mu], self.domain))


def intersect_lines(l1: Line, l2: Line):
    """Intersection point of two lines, or None when parallel."""
    dom = join_domain(l1.domain, l2.domain)
    det = l1.a * l2.b - l2.a * l1.b
    if scalar_is_zero(det, 1e-14 * max(1.0, abs(l1.a) + abs(l1.b) + abs(l2.a) + abs(l2.b))
                      if dom == COMPLEX else 0.0):
        return None
    x = (-l1.c * l2.b + l2.c * l1.b) / det
    y = (-l1.a * l2.c + l2.a * l1.c) / det
    return (x, y)


def restrict_to_line(p: Poly2, line: Line) -> "Poly1":
    """Restriction p(x(t), y(t)) along the line's parametrisation."""
    xt, yt = line.parametrise()
    dom = join_domain(p.domain, line.domain) if p.domain == line.domain else COMPLEX
    pc = p if p.domain == dom else p.to_complex()
    acc = Poly1([], dom)
    for (i, j), v in pc.c.items():
        term = Poly1([v], dom)
        for _ in range(i):
            term = term * xt
        for _ in range(j):
            term = term * yt
        acc = acc + term
    return acc


def divide_by_line(p: Poly2, line: Line, tol: float = 0.0):
    """Exact division of p by the line polynomial; None when not a factor."""
    return divide_exact(p if p.domain == line.domain else p.to_complex(),
                        line.as_poly() if p.domain == line.domain else line.to_complex().as_poly(),
                        tol)


# ---------------------------------------------------------------------------
# Univariate polynomials
# ---------------------------------------------------------------------------


class Poly1:
    """Dense univariate polynomial; index = power."""

    __slots__ = ("a", "domain")

    def __init__(self, coeffs: Iterable, domain: str | None = None):
        coeffs = list(coeffs)
        if domain is None:
            domain = EXACT
            for v in coeffs:
                if not scalar_is_zero(v):
                    domain = infer_domain(v)
                    break
        a = [coerce_scalar(v, domain) for v in coeffs]
        while a and scalar_is_zero(a[-1]):
            a.pop()
        self.a = a
        self.domain = domain

    def degree(self) -> int:
        return len(self.a) - 1

    def is_zero(self, tol: float = 0.0) -> bool:
        if not self.a:
            return True
        if self.domain == EXACT:
            return False
        return max(abs(v) for v in self.a) <= tol

    def __add__(self, other):
        if not isinstance(other, Poly1):
            other = Poly1([other], self.domain)
        dom = join_domain(self.domain, other.domain)
        n = max(len(self.a), len(other.a))
        out = [_zero_of(dom)] * n
        for i, v in enumerate(self.a):
            out[i] = out[i] + v
        for i, v in enumerate(other.a):
            out[i] = out[i] + v
        return Poly1(out, dom)

    def __neg__(self):
        return Poly1([-v for v in self.a], self.domain)

    def __sub__(self, other):
        if not isinstance(other, Poly1):
            other = Poly1([other], self.domain)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Poly1):
            s = coerce_scalar(other, self.domain)
            return Poly1([v * s for v in self.a], self.domain)
        dom = join_domain(self.domain, other.domain)
        if not self.a or not other.a:
            return Poly1([], dom)
        out = [_zero_of(dom)] * (len(self.a) + len(other.a) - 1)
        for i, v in enumerate(self.a):
            for j, w in enumerate(other.a):
                out[i + j] = out[i + j] + v * w
        return Poly1(out, dom)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = Poly1([1 if self.domain == EXACT else 1.0], self.domain)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, Poly1):
            return NotImplemented
        return self.domain == other.domain and self.a == other.a

    def evaluate(self, x):
        acc = None
        for v in reversed(self.a):
            vv = v
            if self.domain == EXACT and not _is_exact_scalar(x):
                vv = complex(v) if isinstance(x, complex) else float(v)
            acc = vv if acc is None else acc * x + vv
        if acc is None:
            return _zero_of(self.domain) if _is_exact_scalar(x) else 0.0
        return acc

    def derivative(self) -> "Poly1":
        return Poly1([v * i for i, v in enumerate(self.a) if i > 0], self.domain)

    def monic(self) -> "Poly1":
        if not self.a:
            return self
        lc = self.a[-1]
        return Poly1([v / lc for v in self.a], self.domain)

    def divmod(self, other: "Poly1"):
        dom = join_domain(self.domain, other.domain)
        if other.is_zero():
            raise ZeroDivisionError
        rem = list(self.a)
        d = other.degree()
        lc = other.a[-1]
        if len(rem) - 1 < d:
            return Poly1([], dom), Poly1(rem, dom)
        quot = [_zero_of(dom)] * (len(rem) - d)
        for k in range(len(rem) - 1, d - 1, -1):
            coeff = rem[k] / lc
            quot[k - d] = coeff
            if not scalar_is_zero(coeff):
                for i in range(d + 1):
                    rem[k - d + i] = rem[k - d + i] - coeff * other.a[i]
            rem[k] = _zero_of(dom)
        return Poly1(quot, dom), Poly1(rem, dom)

    def to_complex(self) -> "Poly1":
        if self.domain == COMPLEX:
            return self
        return Poly1([complex(v) for v in self.a], COMPLEX)

    def shift_scale(self) -> float:
        return max((abs(v) for v in self.a), default=0.0)

    def __repr__(self):
        return f"Poly1({self.a})"


def poly1_gcd(p: Poly1, q: Poly1) -> Poly1:
    """Monic gcd over the exact domain."""
    join_domain(p.domain, q.domain)
    if p.domain != EXACT:
        raise DomainError("exact gcd requires exact coefficients")
    a, b = p, q
    while not b.is_zero():
        _, r = a.divmod(b)
        a, b = b, r
    if a.is_zero():
        return a
    return a.monic()


def squarefree_part(p: Poly1) -> Poly1:
    """Exact squarefree part p / gcd(p, p')."""
    if p.domain != EXACT:
        raise DomainError("squarefree reduction requires exact coefficients")
    if p.degree() <= 0:
        return p
    g = poly1_gcd(p, p.derivative())
    if g.degree() <= 0:
        return p
    q, r = p.divmod(g)
    if not r.is_zero():
        raise DivisionError("gcd does not divide its argument")
    return q


# ---------------------------------------------------------------------------
# Root finding: Aberth-Ehrlich with clustering
# ---------------------------------------------------------------------------


def aberth_roots(p: Poly1, maxiter: int = 400, tol: float = 1e-14) -> list[complex]:
    """All complex roots of p by the Aberth-Ehrlich simultaneous method."""
    pc = p.to_complex()
    a = list(pc.a)
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    n = len(a) - 1
    if n <= 0:
        return []
    # factor out roots at the origin
    shift = 0
    while shift < n and abs(a[shift]) == 0.0:
        shift += 1
    roots = [0j] * shift
    a = a[shift:]
    n = len(a) - 1
    if n == 0:
        return roots
    if n == 1:
        return roots + [-a[0] / a[1]]
    lead = a[-1]
    mon = [v / lead for v in a]
    # Cauchy-style radius bound
    r = 1.0 + max(abs(v) for v in mon[:-1])
    z = [r * 0.6 * cmath.exp(2j * cmath.pi * (k + 0.25) / n + 0.4j) for k in range(n)]
    poly = Poly1(mon, COMPLEX)
    dpoly = poly.derivative()
    for _ in range(maxiter):
        converged = True
        newz = list(z)
        for i in range(n):
            zi = z[i]
            pv = poly.evaluate(zi)
            dv = dpoly.evaluate(zi)
            if dv == 0:
                newz[i] = zi * (1 + 1e-8) + 1e-8
                converged = False
                continue
            w = pv / dv
            s = 0j
            for j in range(n):
                if j != i:
                    dz = zi - z[j]
                    if dz == 0:
                        dz = 1e-20
                    s += 1.0 / dz
            denom = 1.0 - w * s
            if denom == 0:
                step = w
            else:
                step = w / denom
            newz[i] = zi - step
            if abs(step) > tol * max(1.0, abs(zi)):
                converged = False
        z = newz
        if converged:
            break
    return roots + z


def cluster_roots(roots: Sequence[complex], rel: float = CLUSTER_REL,
                  abs_tol: float = CLUSTER_ABS) -> list[tuple[complex, int]]:
    """Group nearby roots; returns (representative mean, multiplicity)."""
    roots = list(roots)
    if not roots:
        return []
    scale = max(abs(z) for z in roots)
    tol = max(abs_tol, rel * scale)
    used = [False] * len(roots)
    out = []
    for i, z in enumerate(roots):
        if used[i]:
            continue
        group = [z]
        used[i] = True
        changed = True
        while changed:
            changed = False
            centre = sum(group) / len(group)
            for j, w in enumerate(roots):
                if not used[j] and abs(w - centre) <= tol * 4:
                    group.append(w)
                    used[j] = True
                    changed = True
        out.append((sum(group) / len(group), len(group)))
    out.sort(key=lambda t: (round(t[0].real, 9), round(t[0].imag, 9)))
    return out


def newton_polish_1d(p: Poly1, z: complex, iters: int = 60) -> complex:
    pc = p.to_complex()
    dp = pc.derivative()
    for _ in range(iters):
        pv = pc.evaluate(z)
        dv = dp.evaluate(z)
        if dv == 0:
            break
        step = pv / dv
        z = z - step
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return z


def roots_with_multiplicity(p: Poly1, rel: float = CLUSTER_REL,
                            abs_tol: float = CLUSTER_ABS) -> list[tuple[complex, int]]:
    """Roots of an exact polynomial: squarefree-reduce first for accuracy,
    then recover multiplicities from the original via clustering."""
    if p.domain == EXACT:
        sf = squarefree_part(p)
        simple = [newton_polish_1d(sf, z) for z in aberth_roots(sf)]
        if sf.degree() == p.degree():
            return [(z, 1) for z in sorted(simple, key=lambda z: (round(z.real, 9), round(z.imag, 9)))]
        # multiplicity m: derivatives up to order m-1 vanish at the root
        pc = p.to_complex()
        derivs = [pc]
        for _ in range(p.degree()):
            derivs.append(derivs[-1].derivative())
        out = []
        for z in simple:
            mult = 1
            grow = max(1.0, abs(z))
            for k in range(1, p.degree() + 1):
                scale = derivs[k].shift_scale() * grow ** max(derivs[k].degree(), 0)
                if abs(derivs[k].evaluate(z)) > 1e-6 * max(scale, 1e-30):
                    mult = k
                    break
            out.append((z, mult))
        out.sort(key=lambda t: (round(t[0].real, 9), round(t[0].imag, 9)))
        return out
    return cluster_roots(aberth_roots(p), rel, abs_tol)


def rational_roots(p: Poly1, max_den: int = 10 ** 12) -> list[tuple[Fraction, int]]:
    """Exactly verified rational roots of an exact polynomial.

    Numeric roots are polished, snapped with bounded denominators and then
    verified by exact evaluation; only verified roots are returned.
    """
    if p.domain != EXACT:
        raise DomainError("rational roots require exact coefficients")
    found: list[tuple[Fraction, int]] = []
    for z, mult in roots_with_multiplicity(p):
        if abs(z.imag) > 1e-7 * max(1.0, abs(z)):
            continue
        cand = snap_rational(z.real, max_den)
        if cand is None:
            continue
        if p.evaluate(cand) == 0:
            if all(cand != c for c, _ in found):
                found.append((cand, mult))
    return found


def snap_rational(x: float, max_den: int = 10 ** 12, tol: float = 1e-9) -> Fraction | None:
    """Best rational approximation when it is convincingly close, else None."""
    if isinstance(x, complex):
        if abs(x.imag) > tol * max(1.0, abs(x)):
            return None
        x = x.real
    try:
        cand = Fraction(x).limit_denominator(max_den)
    except (OverflowError, ValueError):
        return None
    if abs(float(cand) - x) <= tol * max(1.0, abs(x)):
        return cand
    return None


# ---------------------------------------------------------------------------
# Determinants and resultants
# ---------------------------------------------------------------------------


def det_exact(rows: list[list[Fraction]]) -> Fraction:
    """Fraction-free style determinant via ordinary elimination over Q."""
    n = len(rows)
    m = [list(map(Fraction, r)) for r in rows]
    det = Fraction(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                f = m[r][col] * inv
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return det


def det_complex(rows: list[list[complex]]) -> complex:
    n = len(rows)
    m = [list(map(complex, r)) for r in rows]
    det = 1 + 0j
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(m[r][col]))
        if abs(m[piv][col]) == 0.0:
            return 0j
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1.0 / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv
            if f != 0:
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return det


def sylvester_matrix(p: Sequence, q: Sequence) -> list[list]:
    """Sylvester matrix from coefficient lists (index = power)."""
    dp = len(p) - 1
    dq = len(q) - 1
    n = dp + dq
    rows = []
    for i in range(dq):
        row = [0] * n
        for k, c in enumerate(reversed(p)):
            row[i + k] = c
        rows.append(row)
    for i in range(dp):
        row = [0] * n
        for k, c in enumerate(reversed(q)):
            row[i + k] = c
        rows.append(row)
    return rows


def resultant_poly1(p: Poly1, q: Poly1):
    """Resultant of two univariate polynomials over either domain."""
    dom = join_domain(p.domain, q.domain)
    if p.is_zero() or q.is_zero():
        return _zero_of(dom)
    if p.degree() == 0:
        return p.a[0] ** q.degree()
    if q.degree() == 0:
        return q.a[0] ** p.degree()
    m = sylvester_matrix(p.a, q.a)
    if dom == EXACT:
        return det_exact(m)
    return det_complex(m)


class DegreeDropError(ValueError):
    """Raised when the nominal y-degree of an eliminand collapses."""


def resultant_y(P: Poly2, Q: Poly2) -> Poly1:
    """Res_y(P, Q) as a Poly1 in x by evaluation and interpolation.

    Sample abscissae skip the roots of either leading y-coefficient so the
    evaluated degrees never drop below the nominal ones.
    """
    dom = join_domain(P.domain, Q.domain)
    dyP, dyQ = P.degree_y(), Q.degree_y()
    if dyP < 0 or dyQ < 0:
        return Poly1([], dom)
    if dyP == 0:
        base = P.as_poly1_in_y()[0]
        out = Poly1([1], dom)
        for _ in range(dyQ):
            out = out * base
        return out
    if dyQ == 0:
        base = Q.as_poly1_in_y()[0]
        out = Poly1([1], dom)
        for _ in range(dyP):
            out = out * base
        return out
    lcP = P.as_poly1_in_y()[dyP]
    lcQ = Q.as_poly1_in_y()[dyQ]
    bound = dyP * max(Q.degree_x(), 0) + dyQ * max(P.degree_x(), 0)
    xs = []
    vals = []
    if dom == EXACT:
        t = Fraction(0)
        while len(xs) < bound + 1:
            if lcP.evaluate(t) != 0 and lcQ.evaluate(t) != 0:
                pv = P.eval_x(t)
                qv = Q.eval_x(t)
                if pv.degree() != dyP or qv.degree() != dyQ:
                    raise DegreeDropError("leading coefficient vanished unexpectedly")
                xs.append(t)
                vals.append(resultant_poly1(pv, qv))
            t += 1
        return _lagrange_interpolate(xs, vals, EXACT)
    t = 0.318309886
    while len(xs) < bound + 1:
        tv = complex(t)
        if abs(lcP.evaluate(tv)) > 1e-12 and abs(lcQ.evaluate(tv)) > 1e-12:
            pv = P.eval_x(tv)
            qv = Q.eval_x(tv)
            xs.append(tv)
            vals.append(resultant_poly1(pv, qv))
        t += 0.7310843
    return _lagrange_interpolate(xs, vals, COMPLEX)


def _lagrange_interpolate(xs, vals, dom) -> Poly1:
    n = len(xs)
    acc = Poly1([], dom)
    for i in range(n):
        num = Poly1([1 if dom == EXACT else 1.0], dom)
        denom = 1 if dom == EXACT else 1.0
        for j in range(n):
            if j == i:
                continue
            num = num * Poly1([-xs[j], 1 if dom == EXACT else 1.0], dom)
            denom = denom * (xs[i] - xs[j])
        acc = acc + num * (vals[i] / denom)
    return acc


# ---------------------------------------------------------------------------
# Rational functions and the identity test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalFn2:
    """Quotient of two bivariate polynomials over a single domain."""

    num: Poly2
    den: Poly2

    def __post_init__(self):
        join_domain(self.num.domain, self.den.domain)
        if self.den.is_zero():
            raise ZeroDivisionError("zero denominator")

    @property
    def domain(self):
        return self.num.domain

    def evaluate(self, x, y):
        d = self.den.evaluate(x, y)
        if scalar_is_zero(d):
            raise ZeroDivisionError("denominator vanishes at the point")
        return self.num.evaluate(x, y) / d

    def normalised(self) -> "RationalFn2":
        if self.domain == EXACT:
            n = self.num.primitive_normal()
            d = self.den.primitive_normal()
            return RationalFn2(n, d)
        return RationalFn2(self.num.primitive_normal(), self.den.primitive_normal())

    def to_complex(self) -> "RationalFn2":
        return RationalFn2(self.num.to_complex(), self.den.to_complex())


@dataclass(frozen=True)
class IdentityResult:
    ok: bool
    residual: float
    mode: str
    detail: str = ""

    def __bool__(self):
        return self.ok


def _cross_difference(f, g) -> Poly2:
    if isinstance(f, Poly2):
        f = RationalFn2(f, Poly2.const(1 if f.domain == EXACT else 1.0, f.domain))
    if isinstance(g, Poly2):
        g = RationalFn2(g, Poly2.const(1 if g.domain == EXACT else 1.0, g.domain))
    return f.num * g.den - g.num * f.den


def identity_test(f, g, seed: int = 0, mode: str = "auto",
                  tol: float = 1e-9) -> IdentityResult:
    """Decide whether two rational functions are identical.

    Exact domain: conclusive.  ``expand`` mode expands the cross-multiplied
    difference; ``grid`` mode evaluates it on a seeded tensor grid large
    enough for the degree bound (also conclusive).  Complex domain: grid
    evaluation with a relative tolerance.
    """
    dom = join_domain(f.domain, g.domain)
    if mode == "auto":
        mode = "expand" if dom == EXACT else "grid"
    if mode == "expand":
        if dom != EXACT:
            raise DomainError("expand mode requires the exact domain")
        E = _cross_difference(f, g)
        return IdentityResult(E.is_zero(), 0.0 if E.is_zero() else float(E.max_abs()),
                              "expand")
    if mode != "grid":
        raise ValueError(f"unknown identity test mode {mode!r}")
    fr = f if isinstance(f, RationalFn2) else RationalFn2(
        f, Poly2.const(1 if dom == EXACT else 1.0, dom))
    gr = g if isinstance(g, RationalFn2) else RationalFn2(
        g, Poly2.const(1 if dom == EXACT else 1.0, dom))
    dx = max(fr.num.degree_x() + gr.den.degree_x(),
             gr.num.degree_x() + fr.den.degree_x(), 0)
    dy = max(fr.num.degree_y() + gr.den.degree_y(),
             gr.num.degree_y() + fr.den.degree_y(), 0)
    base = seed % 1009
    worst = 0.0
    scale = 0.0
    for i in range(dx + 1):
        for j in range(dy + 1):
            if dom == EXACT:
                xv = Fraction(base + 2 * i + 1, 2)
                yv = Fraction(base + 3 * j + 1, 3)
                lhs = fr.num.evaluate(xv, yv) * gr.den.evaluate(xv, yv)
                rhs = gr.num.evaluate(xv, yv) * fr.den.evaluate(xv, yv)
                if lhs != rhs:
                    return IdentityResult(False, float(abs(lhs - rhs)), "grid",
                                          f"mismatch at ({xv},{yv})")
            else:
                xv = complex(base + 2 * i + 1, 0.5 + 0.125 * ((seed + i) % 7))
                yv = complex(base + 3 * j + 1, -0.25 - 0.0625 * ((seed + j) % 5))
                lhs = fr.num.evaluate(xv, yv) * gr.den.evaluate(xv, yv)
                rhs = gr.num.evaluate(xv, yv) * fr.den.evaluate(xv, yv)
                worst = max(worst, abs(lhs - rhs))
                scale = max(scale, abs(lhs), abs(rhs), 1.0)
    if dom == EXACT:
        return IdentityResult(True, 0.0, "grid")
    ok = worst <= tol * scale
    return IdentityResult(ok, worst / scale if scale else worst, "grid")


def compose_rational(P: Poly2, num_x: Poly2, num_y: Poly2, den: Poly2,
                     degree: int | None = None) -> tuple[Poly2, int]:
    """Numerator of P(num_x/den, num_y/den) cleared to a power of den.

    Returns ``(N, d)`` with P(num_x/den, num_y/den) = N / den**d where d is
    the homogenisation degree used (P's total degree unless given).
    """
    if degree is None:
        degree = max(P.total_degree(), 0)
    dom = join_domain(join_domain(P.domain, num_x.domain),
                      join_domain(num_y.domain, den.domain))
    one = Poly2.const(1 if dom == EXACT else 1.0, dom)
    powx = [one]
    powy = [one]
    powd = [one]
    for _ in range(degree):
        powx.append(powx[-1] * num_x)
        powy.append(powy[-1] * num_y)
        powd.append(powd[-1] * den)
    acc = Poly2.zero(dom)
    for (i, j), v in P.c.items():
        if i + j > degree:
            raise ValueError("degree bound too small for composition")
        acc = acc + powx[i] * powy[j] * powd[degree - i - j] * v
    return acc, degree


# ---------------------------------------------------------------------------
# Small linear algebra helpers
# ---------------------------------------------------------------------------


def nullspace_exact(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Basis of the right null space of a rational matrix."""
    if not rows:
        return []
    nrows = len(rows)
    ncols = len(rows[0])
    m = [list(map(Fraction, r)) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for rr in range(r, nrows):
            if m[rr][c] != 0:
                piv = rr
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for rr in range(nrows):
            if rr != r and m[rr][c] != 0:
                f = m[rr][c]
                m[rr] = [a - f * b for a, b in zip(m[rr], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -m[i][fc]
        basis.append(vec)
    return basis


def nullspace_complex(rows: list[list[complex]], tol: float = 1e-9) -> list[list[complex]]:
    """Basis of the right null space with a relative rank tolerance."""
    if not rows:
        return []
    nrows = len(rows)
    ncols = len(rows[0])
    m = [list(map(complex, r)) for r in rows]
    scale = max((abs(v) for row in m for v in row), default=1.0) or 1.0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = max(range(r, nrows), key=lambda rr: abs(m[rr][c]), default=None)
        if piv is None or abs(m[piv][c]) <= tol * scale:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1.0 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for rr in range(nrows):
            if rr != r and abs(m[rr][c]) > 0:
                f = m[rr][c]
                m[rr] = [a - f * b for a, b in zip(m[rr], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [0j] * ncols
        vec[fc] = 1 + 0j
        for i, pc in enumerate(pivots):
            vec[pc] = -m[i][fc]
        basis.append(vec)
    return basis


def solve2(a11, a12, a21, a22, b1, b2):
    """Solve a 2x2 linear system; None when singular."""
    det = a11 * a22 - a12 * a21
    if scalar_is_zero(det, 1e-14 * max(1.0, abs(a11) + abs(a12) + abs(a21) + abs(a22))
                      if not _is_exact_scalar(det) else 0.0):
        return None
    return ((b1 * a22 - b2 * a12) / det, (a11 * b2 - a21 * b1) / det)
