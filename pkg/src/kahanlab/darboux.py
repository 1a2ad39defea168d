"""Darboux polynomials of the discretised maps.

A polynomial P is a Darboux polynomial for a rational map when P composed
with the map equals a rational multiplier (the cofactor) times P.  Two
Darboux polynomials sharing one cofactor have a conserved ratio, which is
how the split pencil members explain the conserved quantity and how the
fully split examples gain extra conserved ratios from diagonal products.

This module composes polynomials with a map, extracts cofactors by exact
division, checks the closed-form cofactor attached to labelled line data,
groups certificates by cofactor, and searches the finite candidate set of
base-point chords for certified products.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .hexagon import HexagonData, HexagonError, factorised_invariant
from .khk import KahanMap, LineData, map_from_line_data
from .polycore import (
    COMPLEX,
    EXACT,
    Line,
    Poly2,
    RationalFn2,
    compose_rational,
    identity_test,
    join_domain,
)

__all__ = [
    "DarbouxError",
    "DarbouxCertificate",
    "CofactorFailure",
    "compose",
    "extract_cofactor",
    "LineDataCofactor",
    "line_data_cofactor",
    "CofactorCheckReport",
    "check_closed_form_cofactor",
    "same_cofactor_invariants",
    "diagonal_lines",
    "base_point_chords",
    "discover_affine_darboux",
]


class DarbouxError(ValueError):
    """Raised when Darboux machinery is applied to invalid data."""


@dataclass(frozen=True)
class DarbouxCertificate:
    """A polynomial with its verified cofactor: P(map) = cofactor * P."""

    polynomial: Poly2
    cofactor: RationalFn2
    verified: bool = True

    def __bool__(self):
        return self.verified


@dataclass(frozen=True)
class CofactorFailure:
    """Witness that a polynomial is not Darboux for the map.

    ``residual`` is the relative magnitude of the division remainder left
    after removing every multiple of the polynomial from the composed
    numerator.
    """

    polynomial: Poly2
    residual: float
    detail: str = ""

    def __bool__(self):
        return False


def _num(v):
    return Fraction(v) if isinstance(v, int) else v


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction))


def _poly_power(p: Poly2, k: int) -> Poly2:
    out = Poly2.const(1 if p.domain == EXACT else 1.0, p.domain)
    for _ in range(k):
        out = out * p
    return out


def _divide_with_remainder(num: Poly2, den: Poly2):
    """Single-divisor graded division: num = quot*den + rem, and rem is
    zero exactly when den divides num."""
    dom = join_domain(num.domain, den.domain)
    if den.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    (li, lj), lc = den.leading_term()
    quot: dict = {}
    rem: dict = {}
    work = num
    guard = 0
    while not work.is_zero():
        guard += 1
        if guard > 20000:
            raise DarbouxError("division did not terminate")
        (ri, rj), rc = work.leading_term()
        if ri < li or rj < lj:
            rem[(ri, rj)] = rem.get((ri, rj), 0) + rc
            c2 = dict(work.c)
            del c2[(ri, rj)]
            work = Poly2(c2, dom)
            continue
        k = (ri - li, rj - lj)
        q = rc / lc
        quot[k] = quot.get(k, 0) + q if k in quot else q
        work = work - Poly2({k: q}, dom) * den
        if dom == COMPLEX and (ri, rj) in work.c:
            c2 = dict(work.c)
            del c2[(ri, rj)]
            work = Poly2(c2, dom)
    return Poly2(quot, dom), Poly2(rem, dom)


def compose(P: Poly2, kmap: KahanMap) -> RationalFn2:
    """P evaluated along the map, as a reduced ratio of polynomials.

    The denominator is a power of the map's common denominator; factors of
    it are cancelled while they divide the numerator exactly.
    """
    nx, ny, dd = kmap.num_x, kmap.num_y, kmap.den
    if P.domain != kmap.domain:
        P, nx, ny, dd = (p.to_complex() for p in (P, nx, ny, dd))
    N, k = compose_rational(P, nx, ny, dd, degree=max(P.total_degree(), 0))
    while k > 0:
        quo, rem = _divide_with_remainder(N, dd)
        if not rem.is_zero():
            break
        N, k = quo, k - 1
    return RationalFn2(N, _poly_power(dd, k))


def extract_cofactor(P: Poly2, kmap: KahanMap, seed: int = 0,
                     tol: float = 1e-9):
    """Divide P(map) by P; a certificate when the division is exact,
    otherwise a failure report with the remainder size."""
    if P.is_zero():
        raise DarbouxError("the zero polynomial has no cofactor")
    comp = compose(P, kmap)
    Pd = P if P.domain == comp.domain else P.to_complex()
    quo, rem = _divide_with_remainder(comp.num, Pd)
    scale = max(float(abs(complex(v))) for v in comp.num.c.values()) \
        if comp.num.c else 1.0
    residual = (max(float(abs(complex(v))) for v in rem.c.values())
                / max(scale, 1.0)) if rem.c else 0.0
    exact = comp.domain == EXACT
    if (not rem.is_zero()) if exact else residual > tol:
        return CofactorFailure(polynomial=P, residual=residual,
                               detail="composition numerator is not a "
                                      "multiple of the polynomial")
    cofactor = RationalFn2(quo, comp.den)
    check = identity_test(comp, RationalFn2(quo * Pd, comp.den),
                          seed=seed, tol=tol)
    return DarbouxCertificate(polynomial=P, cofactor=cofactor,
                              verified=bool(check))


# ---------------------------------------------------------------------------
# Closed-form cofactor from labelled line data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LineDataCofactor:
    """Closed form of the shared cofactor of the two split fibres.

    The cofactor is scalar * F1 * F2 * F3 / Q**3 with three linear factors
    F_i, the quadratic pencil generator Q, and the scalar
    -(b1-b4)(b2-b5)(b3-b6) / ((mu1-mu2)(mu1-mu3)(mu2-mu3)).
    """

    linear_factors: tuple
    quadratic: Poly2
    scalar: object

    def as_rational(self) -> RationalFn2:
        f1, f2, f3 = self.linear_factors
        return RationalFn2(f1 * f2 * f3 * self.scalar,
                           _poly_power(self.quadratic, 3))


def line_data_cofactor(hx: HexagonData) -> LineDataCofactor:
    hx.validate()
    b1, b2, b3, b4, b5, b6 = [_num(v) for v in hx.b]
    m1, m2, m3 = [_num(v) for v in hx.mu]
    b14, b25, b36 = b1 - b4, b2 - b5, b3 - b6
    m12, m13, m23 = m1 - m2, m1 - m3, m2 - m3
    dom = EXACT if hx.is_exact() else COMPLEX
    f1 = Poly2({
        (1, 0): (b4 * m2 - b3 * m3) * m12 + (b5 * m2 - b6 * m1) * m23,
        (0, 1): (b3 - b4) * m12 - (b5 - b6) * m23,
        (0, 0): b4 * b6 * m12 - b3 * b6 * m13 + b3 * b5 * m23,
    }, dom)
    f2 = Poly2({
        (1, 0): (b1 * m1 - b2 * m3) * m23 + (b3 * m3 - b4 * m2) * m13,
        (0, 1): -((b1 - b2) * m23 + (b3 - b4) * m13),
        (0, 0): -b1 * b4 * m12 + b1 * b3 * m13 - b2 * b4 * m23,
    }, dom)
    f3 = Poly2({
        (1, 0): (b1 * m1 - b2 * m3) * m12 + (b5 * m2 - b6 * m1) * m13,
        (0, 1): -((b1 - b2) * m12 + (b5 - b6) * m13),
        (0, 0): b1 * b5 * m12 - b2 * b6 * m13 + b2 * b5 * m23,
    }, dom)
    quad = Poly2({
        (2, 0): b14 * m1 * m2 + b36 * m1 * m3 - b25 * m2 * m3,
        (1, 1): -(b14 * (m1 + m2) - b25 * (m2 + m3) + b36 * (m1 + m3)),
        (0, 2): (b1 - b2) + (b3 - b4) + (b5 - b6),
        (1, 0): ((b1 * b3 - b4 * b6) * m1 + (b1 * b5 - b2 * b4) * m2
                 - (b2 * b6 - b3 * b5) * m3),
        (0, 1): -(b1 * b3 + b1 * b5 - b2 * b4 - b2 * b6 + b3 * b5
                  - b4 * b6),
        (0, 0): b1 * b3 * b5 - b2 * b4 * b6,
    }, dom)
    scalar = -(b14 * b25 * b36) / (m12 * m13 * m23)
    return LineDataCofactor(linear_factors=(f1, f2, f3), quadratic=quad,
                            scalar=scalar)


@dataclass(frozen=True)
class CofactorCheckReport:
    """End-to-end check that both split fibres of a line-data map are
    Darboux with the closed-form cofactor."""

    ok: bool
    numerator_identity: bool
    denominator_identity: bool
    shared: bool
    matches_extraction: bool
    cofactor: RationalFn2
    certificates: tuple
    notes: tuple = ()

    def __bool__(self):
        return self.ok


def check_closed_form_cofactor(b, mu, h=1) -> CofactorCheckReport:
    """Build the map from line data, compose both split fibres, and verify
    they share the closed-form cofactor."""
    data = LineData(b=tuple(b), mu=tuple(mu), h=h)
    data.validate()
    kmap, _H = map_from_line_data(data)
    hx = HexagonData(mu=data.mu, b=data.b)
    fact = factorised_invariant(hx)
    delta = hx.delta()
    fibres = (fact.numerator_poly() * delta,
              fact.denominator_poly() * delta)
    cf = line_data_cofactor(hx).as_rational()
    notes = []
    idents = []
    for label, S in zip(("numerator", "denominator"), fibres):
        comp = compose(S, kmap)
        Sd = S if S.domain == cf.domain else S.to_complex()
        res = identity_test(comp, RationalFn2(cf.num * Sd, cf.den))
        idents.append(bool(res))
        if not res:
            notes.append(f"{label} fibre misses the closed-form cofactor "
                         f"(residual {res.residual})")
    certs = tuple(extract_cofactor(S, kmap) for S in fibres)
    shared = all(isinstance(c, DarbouxCertificate) for c in certs)
    if shared:
        shared = bool(identity_test(certs[0].cofactor, certs[1].cofactor))
    matches = shared and bool(identity_test(certs[0].cofactor, cf))
    ok = idents[0] and idents[1] and shared and matches
    return CofactorCheckReport(
        ok=ok, numerator_identity=idents[0], denominator_identity=idents[1],
        shared=shared, matches_extraction=matches, cofactor=cf,
        certificates=certs, notes=tuple(notes))


# ---------------------------------------------------------------------------
# Invariants from same-cofactor pairs
# ---------------------------------------------------------------------------


def same_cofactor_invariants(certs, kmap: KahanMap | None = None,
                             seed: int = 0, tol: float = 1e-9) -> list:
    """Conserved ratios from every pair of certificates whose cofactors
    agree as rational functions.

    When the map is supplied, each emitted ratio is re-checked to be
    conserved; a failure raises, since it would contradict the
    certificates."""
    certs = [c for c in certs if isinstance(c, DarbouxCertificate)]
    groups: list[list[DarbouxCertificate]] = []
    for cert in certs:
        for group in groups:
            rep = group[0].cofactor
            lhs, rhs = cert.cofactor, rep
            if lhs.domain != rhs.domain:
                lhs, rhs = lhs.to_complex(), rhs.to_complex()
            if identity_test(lhs, rhs, seed=seed, tol=tol):
                group.append(cert)
                break
        else:
            groups.append([cert])
    out = []
    for group in groups:
        for ca, cb in combinations(group, 2):
            pa, pb = ca.polynomial, cb.polynomial
            if pa.domain != pb.domain:
                pa, pb = pa.to_complex(), pb.to_complex()
            ratio = RationalFn2(pa, pb)
            if kmap is not None:
                na = compose(pa, kmap)
                nb = compose(pb, kmap)
                cons = identity_test(
                    RationalFn2(na.num * nb.den, na.den * nb.num),
                    ratio, seed=seed, tol=tol)
                if not cons:
                    raise DarbouxError(
                        "same-cofactor ratio is not conserved "
                        f"(residual {cons.residual})")
            out.append(ratio)
    return out


# ---------------------------------------------------------------------------
# Candidate lines from base-point geometry
# ---------------------------------------------------------------------------


def diagonal_lines(hx: HexagonData) -> tuple:
    """The three chords joining opposite corners of the labelled hexagon."""
    pts = hx.base_points()
    return tuple(Line.from_points(pts[i], pts[i + 3]) for i in range(3))


def base_point_chords(points) -> list:
    """All lines through pairs of the given base points (15 for six
    points): the six sides, the six short chords, and the three
    diagonals."""
    pts = list(points)
    out = []
    for p, q in combinations(pts, 2):
        if p == q:
            raise DarbouxError("coincident base points have no chord")
        out.append(Line.from_points(p, q))
    return out


def discover_affine_darboux(kmap: KahanMap, lines, triples: bool = True,
                            seed: int = 0, tol: float = 1e-9) -> list:
    """Certify candidate lines and their triple products for the map.

    Single lines and products of three distinct candidates are tested
    separately; a triple product can be Darboux while none of its factors
    is.  Returns the certificates in candidate order, singles first.
    """
    polys = [ln.as_poly() for ln in lines]
    if any(p.domain == COMPLEX for p in polys) or kmap.domain == COMPLEX:
        polys = [p.to_complex() for p in polys]
    out = []
    composed = []
    for P in polys:
        cert = extract_cofactor(P, kmap, seed=seed, tol=tol)
        composed.append(compose(P, kmap))
        if isinstance(cert, DarbouxCertificate) and cert.verified:
            out.append(cert)
    if not triples:
        return out
    for i, j, k in combinations(range(len(polys)), 3):
        P = (polys[i] * polys[j]) * polys[k]
        # composition is multiplicative, so reuse the single-line pieces
        ci, cj, ck = composed[i], composed[j], composed[k]
        N = (ci.num * cj.num) * ck.num
        den = (ci.den * cj.den) * ck.den
        quo, rem = _divide_with_remainder(N, P)
        if P.domain == EXACT:
            if not rem.is_zero():
                continue
        else:
            scale = max((float(abs(complex(v))) for v in N.c.values()),
                        default=1.0)
            if rem.c and max(float(abs(complex(v)))
                             for v in rem.c.values()) > tol * max(scale, 1.0):
                continue
        cert = DarbouxCertificate(
            polynomial=P, cofactor=RationalFn2(quo, den),
            verified=bool(identity_test(RationalFn2(N, den),
                                        RationalFn2(quo * P, den),
                                        seed=seed, tol=tol)))
        if cert.verified:
            out.append(cert)
    return out
