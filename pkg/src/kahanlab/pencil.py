"""Pencil analysis for the conserved cubic-over-quadratic invariant.

The conserved quantity C/D spans a pencil of affine cubics e0*C + e1*D.
This module locates the pencil's base points (common zeros of C and D),
finds the degenerate members by two deliberately independent algorithms,
classifies every degenerate member, and assembles the singular-fibre
configuration of the induced elliptic fibration together with an Euler
number completeness check (a rational elliptic surface must total 12).

The two algorithms, kept independent so they can cross-check each other:

* the critical-point route solves the polynomial system

      W1 = C*Dx - Cx*D = 0,    W2 = C*Dy - Cy*D = 0,

  whose solutions away from the base locus are precisely the affine
  singular points of pencil members; the member parameter at a solution
  is -C/D;

* the division route draws the line through each pair of base points,
  restricts C and D to it, and detects proportional restrictions, which
  happen exactly when some member contains the whole line.

Member parameters are always reported against the canonical (primitive,
graded-lex-positive) generators so values are reproducible across runs.
Quadratic pencils (conic over conic, four base points) are supported by
the determinant route and the degenerate-conic splitter at the bottom.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import isqrt

from .polycore import (
    CLUSTER_ABS,
    COMPLEX,
    EXACT,
    Line,
    Poly1,
    Poly2,
    aberth_roots,
    cluster_roots,
    divide_by_line,
    intersect_lines,
    newton_polish_1d,
    poly1_gcd,
    proportional,
    rational_roots,
    resultant_y,
    restrict_to_line,
    scalar_is_zero,
    solve2,
    squarefree_part,
)
from .khk import DegreeError

VERIFY_REL = 1e-6
PARAM_REL = 1e-6

EULER_NUMBER = {"I1": 1, "I2": 2, "I3": 3, "II": 2, "III": 3, "IV": 4}
LATTICE_LABEL = {"I1": "A0", "I2": "A1", "I3": "A2", "II": "A0",
                 "III": "A1", "IV": "A2"}


class PencilDegeneracyError(ValueError):
    """The two generators do not span a genuine pencil."""


# ---------------------------------------------------------------------------
# Small helpers
# ---------------------------------------------------------------------------


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction))


def _close(u, v, rel=PARAM_REL, abs_tol=CLUSTER_ABS) -> bool:
    uu, vv = complex(u), complex(v)
    return abs(uu - vv) <= rel * max(1.0, abs(uu), abs(vv)) + abs_tol


def _point_close(p, q, rel=PARAM_REL) -> bool:
    return _close(p[0], q[0], rel) and _close(p[1], q[1], rel)


def _fraction_sqrt(fr: Fraction):
    """Exact square root of a nonnegative rational, or None."""
    if fr < 0:
        return None
    rn, rd = isqrt(fr.numerator), isqrt(fr.denominator)
    if rn * rn == fr.numerator and rd * rd == fr.denominator:
        return Fraction(rn, rd)
    return None


def _growth(pt, deg) -> float:
    return (1.0 + abs(complex(pt[0])) + abs(complex(pt[1]))) ** deg


def _poly_value_small(p: Poly2, pt, rel=VERIFY_REL) -> bool:
    val = p.evaluate(pt[0], pt[1])
    if _is_exact(val):
        return val == 0
    scale = p.max_abs() * _growth(pt, p.total_degree())
    return abs(val) <= rel * max(scale, 1e-30)


def _newton2d(F: Poly2, G: Poly2, pt, iters: int = 60):
    """Polish a numeric root of the system F = G = 0 by Newton steps."""
    Fx, Fy = F.diff_x(), F.diff_y()
    Gx, Gy = G.diff_x(), G.diff_y()
    x, y = complex(pt[0]), complex(pt[1])
    for _ in range(iters):
        fv = complex(F.evaluate(x, y))
        gv = complex(G.evaluate(x, y))
        sol = solve2(complex(Fx.evaluate(x, y)), complex(Fy.evaluate(x, y)),
                     complex(Gx.evaluate(x, y)), complex(Gy.evaluate(x, y)),
                     -fv, -gv)
        if sol is None:
            break
        dx, dy = sol
        x, y = x + dx, y + dy
        if abs(dx) + abs(dy) < 1e-15 * max(1.0, abs(x) + abs(y)):
            break
    return (x, y)


def _mixed_roots(p: Poly1):
    """Roots of an exact or complex Poly1 as (value, multiplicity) pairs,
    with exactly-verified rational roots kept as Fractions."""
    if p.degree() <= 0:
        return []
    if p.domain == EXACT:
        out: list[tuple[object, int]] = []
        rat = rational_roots(p)
        rest = squarefree_part(p)
        for r, _ in rat:
            q, rem = rest.divmod(Poly1([-r, Fraction(1)], EXACT))
            if rem.is_zero():
                rest = q
        out.extend(rat)
        if rest.degree() > 0:
            sf = rest.to_complex()
            out.extend((newton_polish_1d(sf, z), 1) for z in aberth_roots(rest))
        return out
    return [(z, m) for z, m in cluster_roots(aberth_roots(p))]


# ---------------------------------------------------------------------------
# Canonical generators
# ---------------------------------------------------------------------------


def canonical_pair(C: Poly2, D: Poly2) -> tuple[Poly2, Poly2]:
    """Primitive canonical generators of the pencil spanned by C and D."""
    if C.is_zero() or D.is_zero():
        raise PencilDegeneracyError("pencil generators must be nonzero")
    if C.domain == D.domain and proportional(C, D):
        raise PencilDegeneracyError("pencil generators are proportional")
    return C.primitive_normal(), D.primitive_normal()


def member_poly(Cc: Poly2, Dc: Poly2, lam) -> Poly2:
    """The pencil member C + lam*D (promoting to complex for numeric lam)."""
    if _is_exact(lam) and Cc.domain == EXACT and Dc.domain == EXACT:
        return Cc + Dc * Fraction(lam)
    return Cc.to_complex() + Dc.to_complex() * complex(lam)


def member_coefficients(M: Poly2, Cc: Poly2, Dc: Poly2, tol: float = 1e-9):
    """Write M as e0*C + e1*D; return (e0, e1) or None when M is outside
    the span.  Exact inputs give exact coefficients."""
    exact = all(p.domain == EXACT for p in (M, Cc, Dc))
    keys = sorted(set(M.c) | set(Cc.c) | set(Dc.c))
    zero = Fraction(0) if exact else 0j
    rows = [(Cc.c.get(k, zero), Dc.c.get(k, zero), M.c.get(k, zero))
            for k in keys]
    best = None
    best_mag = zero
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            det = rows[i][0] * rows[j][1] - rows[i][1] * rows[j][0]
            if exact:
                if det != 0:
                    best = (i, j)
                    break
            elif abs(det) > abs(best_mag):
                best, best_mag = (i, j), det
        if exact and best is not None:
            break
    if best is None or (not exact and abs(best_mag) <= tol):
        return None
    i, j = best
    sol = solve2(rows[i][0], rows[i][1], rows[j][0], rows[j][1],
                 rows[i][2], rows[j][2])
    if sol is None:
        return None
    e0, e1 = sol
    scale = max((abs(complex(v)) for r in rows for v in r), default=1.0)
    for a, b, m in rows:
        res = a * e0 + b * e1 - m
        if exact:
            if res != 0:
                return None
        elif abs(res) > tol * max(scale, 1.0):
            return None
    return (e0, e1)


# ---------------------------------------------------------------------------
# Base points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BasePoint:
    x: object
    y: object
    multiplicity: int = 1

    def as_tuple(self):
        return (self.x, self.y)

    def is_exact(self) -> bool:
        return _is_exact(self.x) and _is_exact(self.y)


@dataclass
class BasePointSet:
    points: list
    expected_total: int
    notes: list = dc_field(default_factory=list)

    def total_multiplicity(self) -> int:
        return sum(p.multiplicity for p in self.points)

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def _slope_poly(form: Poly2) -> Poly1:
    """Dehomogenise a leading form to a polynomial in the slope y/x."""
    deg = form.total_degree()
    coeffs = [form.coeff(deg - j, j) for j in range(deg + 1)]
    return Poly1(coeffs, form.domain)


def _infinity_base_multiplicity(Cc: Poly2, Dc: Poly2) -> int:
    """Shared zero count of the leading forms (common points at infinity)."""
    cs = _slope_poly(Cc.leading_form())
    ds = _slope_poly(Dc.leading_form())
    dc_deg = Cc.leading_form().total_degree()
    dd_deg = Dc.leading_form().total_degree()
    inf_mult = min(dc_deg - cs.degree(), dd_deg - ds.degree())
    if cs.domain == EXACT and ds.domain == EXACT:
        g = poly1_gcd(cs, ds)
        shared = g.degree() if g.degree() > 0 else 0
    else:
        shared = 0
        droots = [z for z, m in cluster_roots(aberth_roots(ds)) for _ in range(m)]
        for z, m in cluster_roots(aberth_roots(cs)):
            if any(_close(z, w) for w in droots):
                shared += m
    return shared + max(0, inf_mult)


def base_points(C: Poly2, D: Poly2) -> BasePointSet:
    """Common zeros of the two generators, with contact multiplicities.

    Works for any bidegree pair; cubic-over-conic pencils have up to six
    affine base points, conic pencils up to four.  Shared components raise
    PencilDegeneracyError.
    """
    Cc, Dc = canonical_pair(C, D)
    notes: list[str] = []
    dom = EXACT if Cc.domain == EXACT and Dc.domain == EXACT else COMPLEX
    bezout = Cc.total_degree() * Dc.total_degree()
    expected = bezout - _infinity_base_multiplicity(Cc, Dc)
    G = resultant_y(Cc if dom == EXACT else Cc.to_complex(),
                    Dc if dom == EXACT else Dc.to_complex())
    res_scale = (max(Cc.max_abs(), 1.0) ** max(Dc.degree_y(), 0)
                 * max(Dc.max_abs(), 1.0) ** max(Cc.degree_y(), 0))
    if G.is_zero(1e-10 * res_scale if dom == COMPLEX else 0.0):
        raise PencilDegeneracyError("generators share a common component")

    xs: list[tuple[object, int]] = []
    if dom == EXACT:
        Gs = squarefree_part(G)
        rat = rational_roots(Gs)
        rest = Gs
        for r, _ in rat:
            q, rem = rest.divmod(Poly1([-r, Fraction(1)], EXACT))
            if rem.is_zero():
                rest = q
        xs.extend((r, 1) for r, _ in rat)
        if rest.degree() > 0:
            xs.extend((z, 1) for z in aberth_roots(rest))
    else:
        xs.extend(cluster_roots(aberth_roots(G)))

    points: list[BasePoint] = []
    for x0, _ in xs:
        exact_x = _is_exact(x0) and dom == EXACT
        cy = Cc.eval_x(x0)
        dy = Dc.eval_x(x0)
        ztol_c = 1e-10 * max(Cc.max_abs(), 1.0) * _growth((x0, 0), Cc.total_degree())
        ztol_d = 1e-10 * max(Dc.max_abs(), 1.0) * _growth((x0, 0), Dc.total_degree())
        c_zero = cy.is_zero(0.0 if exact_x else ztol_c)
        d_zero = dy.is_zero(0.0 if exact_x else ztol_d)
        if c_zero and d_zero:
            raise PencilDegeneracyError(
                f"generators share the vertical line x = {x0}")
        if exact_x:
            if c_zero:
                g = dy
            elif d_zero:
                g = cy
            else:
                g = poly1_gcd(cy, dy)
            if g.degree() <= 0:
                notes.append(f"resultant root x = {x0} carries no affine point")
                continue
            for y0, mult in _mixed_roots(g):
                if _is_exact(y0):
                    points.append(BasePoint(x0, y0, mult))
                else:
                    px, py = _newton2d(Cc, Dc, (x0, y0))
                    points.append(BasePoint(px, py, mult))
        else:
            cyn = cy.to_complex()
            dyn = dy.to_complex()
            if cyn.is_zero(ztol_c):
                cands = [z for z, m in cluster_roots(aberth_roots(dyn))]
            elif dyn.is_zero(ztol_d):
                cands = [z for z, m in cluster_roots(aberth_roots(cyn))]
            else:
                ry_c = cluster_roots(aberth_roots(cyn))
                ry_d = cluster_roots(aberth_roots(dyn))
                cands = [z for z, _ in ry_c
                         if any(_close(z, w, 1e-5) for w, _ in ry_d)]
            found_here = False
            for y0 in cands:
                px, py = _newton2d(Cc, Dc, (x0, y0))
                if _poly_value_small(Cc, (px, py)) and _poly_value_small(Dc, (px, py)):
                    points.append(BasePoint(px, py, 1))
                    found_here = True
            if not found_here:
                notes.append(f"resultant root x = {x0} carries no affine point")

    # deduplicate numerically coincident points
    dedup: list[BasePoint] = []
    for p in points:
        merged = False
        for i, q in enumerate(dedup):
            if _point_close(p.as_tuple(), q.as_tuple()):
                keep = p if p.is_exact() and not q.is_exact() else q
                dedup[i] = BasePoint(keep.x, keep.y,
                                     max(p.multiplicity, q.multiplicity))
                merged = True
                break
        if not merged:
            dedup.append(p)
    dedup.sort(key=lambda p: (round(complex(p.x).real, 9),
                              round(complex(p.x).imag, 9),
                              round(complex(p.y).real, 9),
                              round(complex(p.y).imag, 9)))
    result = BasePointSet(dedup, expected, notes)
    if result.total_multiplicity() != expected:
        result.notes.append(
            f"found total multiplicity {result.total_multiplicity()}, "
            f"expected {expected}")
    return result


# ---------------------------------------------------------------------------
# Route one: critical points of the pencil
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingularPoint:
    x: object
    y: object
    lam: object

    def as_tuple(self):
        return (self.x, self.y)


@dataclass
class CriticalRouteResult:
    points: list
    infinity_member_points: list
    notes: list = dc_field(default_factory=list)


def critical_system(Cc: Poly2, Dc: Poly2) -> tuple[Poly2, Poly2]:
    """The two polynomials whose common zeros are base points plus the
    affine singular points of pencil members."""
    W1 = Cc * Dc.diff_x() - Cc.diff_x() * Dc
    W2 = Cc * Dc.diff_y() - Cc.diff_y() * Dc
    return W1, W2


def critical_route(C: Poly2, D: Poly2) -> CriticalRouteResult:
    """Affine singular points of all pencil members, with their parameters.

    Solves W1 = W2 = 0 by a y-resultant, per-abscissa restriction (falling
    back to the other polynomial when one restriction vanishes identically),
    two-dimensional Newton polishing, and base-point filtering.
    """
    Cc, Dc = canonical_pair(C, D)
    W1, W2 = critical_system(Cc, Dc)
    notes: list[str] = []
    if W1.is_zero(1e-12 * max(Cc.max_abs() * Dc.max_abs(), 1.0)) or \
       W2.is_zero(1e-12 * max(Cc.max_abs() * Dc.max_abs(), 1.0)):
        raise PencilDegeneracyError("critical system degenerates identically")
    dom = W1.domain
    G = resultant_y(W1, W2)
    res_scale = (max(W1.max_abs(), 1.0) ** max(W2.degree_y(), 0)
                 * max(W2.max_abs(), 1.0) ** max(W1.degree_y(), 0))
    if G.is_zero(1e-10 * res_scale if dom == COMPLEX else 0.0):
        raise PencilDegeneracyError(
            "critical system has a positive-dimensional solution set "
            "(a non-reduced pencil member)")

    xs: list[object] = []
    if dom == EXACT:
        Gs = squarefree_part(G)
        rat = rational_roots(Gs)
        rest = Gs
        for r, _ in rat:
            q, rem = rest.divmod(Poly1([-r, Fraction(1)], EXACT))
            if rem.is_zero():
                rest = q
        xs.extend(r for r, _ in rat)
        if rest.degree() > 0:
            xs.extend(aberth_roots(rest))
    else:
        xs.extend(z for z, _ in cluster_roots(aberth_roots(G)))

    raw_pts: list[tuple[object, object]] = []
    for x0 in xs:
        exact_x = _is_exact(x0) and dom == EXACT
        w1r = W1.eval_x(x0)
        w2r = W2.eval_x(x0)
        scale1 = 1e-10 * max(W1.max_abs(), 1.0) * _growth((x0, 0), W1.total_degree())
        scale2 = 1e-10 * max(W2.max_abs(), 1.0) * _growth((x0, 0), W2.total_degree())
        z1 = w1r.is_zero(0.0 if exact_x else scale1)
        z2 = w2r.is_zero(0.0 if exact_x else scale2)
        if z1 and z2:
            raise PencilDegeneracyError(
                f"critical system contains the line x = {x0}")
        if exact_x:
            if z1:
                g = w2r
            elif z2:
                g = w1r
            else:
                g = poly1_gcd(w1r, w2r)
            if g.degree() <= 0:
                continue
            for y0, _ in _mixed_roots(g):
                raw_pts.append((x0, y0))
        else:
            w1c, w2c = w1r.to_complex(), w2r.to_complex()
            if z1:
                primary, secondary = w2c, None
            elif z2:
                primary, secondary = w1c, None
            elif w1c.shift_scale() >= w2c.shift_scale():
                primary, secondary = w1c, w2c
            else:
                primary, secondary = w2c, w1c
            for y0, _ in cluster_roots(aberth_roots(primary)):
                if secondary is not None:
                    bound = (secondary.shift_scale()
                             * max(1.0, abs(y0)) ** max(secondary.degree(), 0))
                    if abs(secondary.evaluate(y0)) > 1e-4 * max(bound, 1e-30):
                        continue
                raw_pts.append((x0, y0))

    points: list[SingularPoint] = []
    inf_pts: list[tuple[object, object]] = []
    seen: list[tuple[object, object]] = []
    for (x0, y0) in raw_pts:
        if _is_exact(x0) and _is_exact(y0) and dom == EXACT:
            pt = (x0, y0)
            if W1.evaluate(*pt) != 0 or W2.evaluate(*pt) != 0:
                continue
            cval = Cc.evaluate(*pt)
            dval = Dc.evaluate(*pt)
            if cval == 0 and dval == 0:
                continue  # base point
            if any(_point_close(pt, s) for s in seen):
                continue
            seen.append(pt)
            if dval == 0:
                inf_pts.append(pt)
            else:
                points.append(SingularPoint(x0, y0, -Fraction(cval) / Fraction(dval)))
        else:
            pt = _newton2d(W1, W2, (x0, y0))
            if not (_poly_value_small(W1, pt, 1e-5)
                    and _poly_value_small(W2, pt, 1e-5)):
                continue
            if any(_point_close(pt, s) for s in seen):
                continue
            cval = complex(Cc.evaluate(*pt))
            dval = complex(Dc.evaluate(*pt))
            c_small = abs(cval) <= VERIFY_REL * Cc.max_abs() * _growth(pt, 3)
            d_small = abs(dval) <= VERIFY_REL * Dc.max_abs() * _growth(pt, 2)
            if c_small and d_small:
                continue  # base point
            seen.append(pt)
            if d_small:
                inf_pts.append(pt)
            else:
                points.append(SingularPoint(pt[0], pt[1], -cval / dval))
    return CriticalRouteResult(points, inf_pts, notes)


# ---------------------------------------------------------------------------
# Route two: lines through base-point pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MemberLine:
    lam: object
    line: Line


@dataclass
class DivisionRouteResult:
    member_lines: list
    infinity_lines: list
    notes: list = dc_field(default_factory=list)


def _line_through(p: BasePoint, q: BasePoint) -> Line:
    if p.is_exact() and q.is_exact():
        return Line.from_points(p.as_tuple(), q.as_tuple(), EXACT)
    pc = (complex(p.x), complex(p.y))
    qc = (complex(q.x), complex(q.y))
    return Line.from_points(pc, qc, COMPLEX)


def _line_key(line: Line):
    can = line.canonical()
    return (round(complex(can.a).real, 8), round(complex(can.a).imag, 8),
            round(complex(can.b).real, 8), round(complex(can.b).imag, 8),
            round(complex(can.c).real, 8), round(complex(can.c).imag, 8))


def _restriction_member(rc: Poly1, rd: Poly1, exact: bool):
    """Parameter lam with rc + lam*rd identically zero, or None."""
    if exact:
        n = max(len(rc.a), len(rd.a))
        ca = list(rc.a) + [Fraction(0)] * (n - len(rc.a))
        da = list(rd.a) + [Fraction(0)] * (n - len(rd.a))
        for i in range(n):
            for j in range(i + 1, n):
                if ca[i] * da[j] != ca[j] * da[i]:
                    return None
        k = max(range(n), key=lambda i: abs(da[i]))
        if da[k] == 0:
            return None
        return -ca[k] / da[k]
    rcc, rdc = rc.to_complex(), rd.to_complex()
    n = max(len(rcc.a), len(rdc.a))
    ca = list(rcc.a) + [0.0] * (n - len(rcc.a))
    da = list(rdc.a) + [0.0] * (n - len(rdc.a))
    k = max(range(n), key=lambda i: abs(da[i]))
    if abs(da[k]) < 1e-300:
        return None
    lam = -ca[k] / da[k]
    scale = max(max(abs(v) for v in ca), max(abs(v) for v in da) * max(1.0, abs(lam)))
    resid = max(abs(ca[i] + lam * da[i]) for i in range(n))
    if resid > 1e-7 * max(scale, 1e-30):
        return None
    return lam


def division_route(C: Poly2, D: Poly2,
                   points: BasePointSet | None = None) -> DivisionRouteResult:
    """Member lines found by restricting the generators to candidate lines.

    Candidates are the lines through each pair of base points.  A member
    contains such a line exactly when the two restrictions are linearly
    dependent; the dependency coefficient is the member parameter.
    """
    Cc, Dc = canonical_pair(C, D)
    if points is None:
        points = base_points(Cc, Dc)
    notes = list(points.notes)
    pts = list(points)
    member_lines: list[MemberLine] = []
    infinity_lines: list[Line] = []
    seen_keys = set()
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            p, q = pts[i], pts[j]
            if _point_close(p.as_tuple(), q.as_tuple()):
                continue
            line = _line_through(p, q)
            key = _line_key(line)
            if key in seen_keys:
                continue
            seen_keys.add(key)
            rc = restrict_to_line(Cc, line)
            rd = restrict_to_line(Dc, line)
            exact = rc.domain == EXACT and rd.domain == EXACT
            sc = 1e-9 * max(Cc.max_abs(), 1.0) * (
                1.0 + abs(complex(line.slope() or 0))) ** Cc.total_degree()
            sd = 1e-9 * max(Dc.max_abs(), 1.0) * (
                1.0 + abs(complex(line.slope() or 0))) ** Dc.total_degree()
            c_zero = rc.is_zero(0.0 if exact else sc)
            d_zero = rd.is_zero(0.0 if exact else sd)
            if c_zero and d_zero:
                raise PencilDegeneracyError(
                    "generators share a line through two base points")
            if d_zero:
                infinity_lines.append(line.canonical())
                continue
            if c_zero:
                zero = Fraction(0) if exact else 0.0
                member_lines.append(MemberLine(zero, line.canonical()))
                continue
            lam = _restriction_member(rc, rd, exact)
            if lam is None:
                continue
            member = member_poly(Cc, Dc, lam)
            quot = divide_by_line(member, line,
                                  0.0 if member.domain == EXACT
                                  and line.domain == EXACT else 1e-7)
            if quot is None:
                notes.append(
                    f"restriction dependency at parameter {lam} was not "
                    "confirmed by exact division")
                continue
            member_lines.append(MemberLine(lam, line.canonical()))
    return DivisionRouteResult(member_lines, infinity_lines, notes)


# ---------------------------------------------------------------------------
# Classification and the fibre report
# ---------------------------------------------------------------------------


@dataclass
class PencilMember:
    lam: object
    poly: Poly2
    kodaira: str
    lattice: str | None
    euler: int
    lines: list
    residual: Poly2 | None
    singular_points: list
    verified: bool
    notes: list = dc_field(default_factory=list)


@dataclass
class FibreReport:
    canonical_C: Poly2
    canonical_D: Poly2
    base: BasePointSet
    members: list
    infinity_kodaira: str
    infinity_lattice: str | None
    infinity_euler: int
    config: str
    euler_total: int
    complete: bool
    routes_agree: bool
    notes: list = dc_field(default_factory=list)

    def member_at(self, lam) -> PencilMember | None:
        for m in self.members:
            if _close(m.lam, lam):
                return m
        return None

    def affine_type_counts(self) -> dict:
        counts: dict[str, int] = {}
        for m in self.members:
            if m.lattice is not None:
                counts[m.lattice] = counts.get(m.lattice, 0) + 1
        return counts


def conic_is_irreducible(q: Poly2, tol: float = 1e-8) -> bool:
    """A conic is irreducible exactly when its symmetric matrix has full rank."""
    if q.total_degree() != 2:
        raise DegreeError("irreducibility test expects a conic")
    m = conic_matrix(q)
    det = _sym3_det(m)
    if _is_exact(det):
        return det != 0
    return abs(det) > tol * max(q.max_abs(), 1.0) ** 3


def conic_matrix(q: Poly2):
    """Symmetric 3x3 matrix of a conic in coordinates (x, y, 1)."""
    half = Fraction(1, 2) if q.domain == EXACT else 0.5
    a = q.coeff(2, 0)
    b = q.coeff(1, 1)
    c = q.coeff(0, 2)
    d = q.coeff(1, 0)
    e = q.coeff(0, 1)
    f = q.coeff(0, 0)
    return ((a, b * half, d * half),
            (b * half, c, e * half),
            (d * half, e * half, f))


def _sym3_det(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def split_degenerate_conic(q: Poly2, tol: float = 1e-8):
    """Split a rank-deficient conic into two lines.

    Returns (line1, line2, scale) with q = scale * line1 * line2, or None
    when the conic is irreducible.  Exact input yields exact lines when the
    splitting field is rational and complex lines otherwise (the two lines
    may only exist over a quadratic extension).
    """
    if q.total_degree() != 2:
        raise DegreeError("conic splitter expects a conic")
    if conic_is_irreducible(q, tol):
        return None
    a = q.coeff(2, 0)
    b = q.coeff(1, 1)
    c = q.coeff(0, 2)
    d = q.coeff(1, 0)
    e = q.coeff(0, 1)
    f = q.coeff(0, 0)
    exact = q.domain == EXACT

    def brancher(A, B1, B0, C2, C1, C0, swap):
        # quadratic A t^2 + (B1 s + B0) t + (C2 s^2 + C1 s + C0) in the
        # leading variable t, the other variable s; discriminant in s.
        disc2 = B1 * B1 - 4 * A * C2
        disc1 = 2 * B1 * B0 - 4 * A * C1
        disc0 = B0 * B0 - 4 * A * C0
        if exact:
            s_root = _fraction_sqrt(Fraction(disc2)) if disc2 >= 0 else None
            if disc2 == 0:
                if disc1 != 0:
                    return None
                t_root = _fraction_sqrt(Fraction(disc0)) if disc0 >= 0 else None
                if t_root is None:
                    return _complex_brancher(A, B1, B0, disc2, disc1, disc0, swap)
                sq = (Fraction(0), t_root)
            else:
                if s_root is None or disc1 * disc1 != 4 * disc2 * disc0:
                    return _complex_brancher(A, B1, B0, disc2, disc1, disc0, swap)
                sq = (s_root, disc1 / (2 * s_root))
            s1, t1 = sq
            la = _line_from_branch(A, B1, B0, s1, t1, +1, swap, EXACT)
            lb = _line_from_branch(A, B1, B0, s1, t1, -1, swap, EXACT)
            scale = Fraction(1, 4) / Fraction(A)
            return la, lb, scale
        return _complex_brancher(A, B1, B0, disc2, disc1, disc0, swap)

    def _complex_brancher(A, B1, B0, disc2, disc1, disc0, swap):
        Ac = complex(A)
        d2, d1, d0 = complex(disc2), complex(disc1), complex(disc0)
        scale_mag = max(abs(d2), abs(d1), abs(d0), 1e-30)
        if abs(d2) > 1e-10 * scale_mag:
            s1 = cmath.sqrt(d2)
            t1 = d1 / (2 * s1)
        else:
            if abs(d1) > 1e-8 * scale_mag:
                return None
            s1 = 0.0 + 0.0j
            t1 = cmath.sqrt(d0)
        la = _line_from_branch(Ac, complex(B1), complex(B0), s1, t1, +1, swap, COMPLEX)
        lb = _line_from_branch(Ac, complex(B1), complex(B0), s1, t1, -1, swap, COMPLEX)
        return la, lb, 1.0 / (4.0 * Ac)

    def _line_from_branch(A, B1, B0, s1, t1, sign, swap, dom):
        # 2A t + (B1 s + B0) +/- (s1 s + t1) with t the leading variable
        ct = 2 * A
        cs = B1 + sign * s1
        cc = B0 + sign * t1
        if swap:
            return Line.make(cs, ct, cc, dom)
        return Line.make(ct, cs, cc, dom)

    mags = [abs(complex(v)) for v in (a, c, b)]
    if mags[0] >= max(mags[1], mags[2]) * 0.25 and mags[0] > 0:
        split = brancher(a, b, d, c, e, f, swap=False)
    elif mags[1] > 0:
        split = brancher(c, b, e, a, d, f, swap=True)
    else:
        # pure cross term: q = b x y + d x + e y + f with b f = d e
        if exact:
            la = Line.make(Fraction(b), Fraction(0), Fraction(e), EXACT)
            lb = Line.make(Fraction(0), Fraction(b), Fraction(d), EXACT)
            split = (la, lb, Fraction(1) / Fraction(b))
        else:
            la = Line.make(complex(b), 0.0, complex(e), COMPLEX)
            lb = Line.make(0.0, complex(b), complex(d), COMPLEX)
            split = (la, lb, 1.0 / complex(b))
    if split is None:
        return None
    la, lb, scale = split
    prod = la.as_poly() * lb.as_poly() * scale
    diff = prod - (q if prod.domain == q.domain else q.to_complex())
    if not diff.is_zero(1e-7 * max(q.max_abs(), 1.0)):
        return None
    return la, lb, scale


def _lines_parallel(l1: Line, l2: Line) -> bool:
    det = complex(l1.a) * complex(l2.b) - complex(l2.a) * complex(l1.b)
    scale = max(abs(complex(l1.a)) + abs(complex(l1.b)), 1e-30) * \
        max(abs(complex(l2.a)) + abs(complex(l2.b)), 1e-30)
    if _is_exact(l1.a) and _is_exact(l2.a) and _is_exact(l1.b) and _is_exact(l2.b):
        return l1.a * l2.b - l2.a * l1.b == 0
    return abs(det) <= 1e-9 * scale


def _node_not_cusp(m: Poly2, pt):
    """Decide whether a singular point is a node (nonzero Hessian) or a
    cusp, using the size of the products entering the determinant as the
    cancellation scale."""
    mxx = m.diff_x().diff_x().evaluate(*pt)
    mxy = m.diff_x().diff_y().evaluate(*pt)
    myy = m.diff_y().diff_y().evaluate(*pt)
    det = mxx * myy - mxy * mxy
    if _is_exact(det):
        return det != 0
    scale = max(abs(complex(mxx) * complex(myy)), abs(complex(mxy)) ** 2,
                (m.max_abs() * _growth(pt, 1) * 1e-12) ** 2, 1e-30)
    return abs(det) > 1e-7 * scale


def _classify_member(Cc, Dc, lam, lines, sing_pts) -> PencilMember:
    member = member_poly(Cc, Dc, lam)
    notes: list[str] = []
    verified = True
    for sp in sing_pts:
        pt = sp.as_tuple()
        ok = (_poly_value_small(member, pt)
              and _poly_value_small(member.diff_x(), pt)
              and _poly_value_small(member.diff_y(), pt))
        if not ok:
            verified = False
            notes.append(f"singular point {pt} failed residual verification")

    work = member
    used: list[Line] = []
    for ln in lines:
        tol = 0.0 if work.domain == EXACT and ln.domain == EXACT else 1e-7
        quot = divide_by_line(work, ln, tol)
        if quot is None:
            verified = False
            notes.append("a route-two line does not divide the member")
            continue
        work = quot
        used.append(ln)

    residual = None
    kodaira = None
    if len(used) == 3:
        if work.total_degree() > 0:
            verified = False
            notes.append("residual after three lines is not constant")
        kodaira = _triangle_type(used, sing_pts, notes)
    elif len(used) == 2 and work.total_degree() == 1:
        third = Line.make(work.coeff(1, 0), work.coeff(0, 1), work.coeff(0, 0),
                          work.domain)
        used.append(third.canonical())
        notes.append("third side recovered from the residual line")
        kodaira = _triangle_type(used, sing_pts, notes)
    elif len(used) == 1 and work.total_degree() == 2:
        residual = work
        split = split_degenerate_conic(work)
        if split is None:
            rest = restrict_to_line(work, used[0])
            roots = cluster_roots(aberth_roots(rest.to_complex())) \
                if rest.degree() > 0 else []
            # a double restriction root means the line is tangent to the
            # conic; a plain degree drop only moves one node to infinity
            tangent = any(m > 1 for _, m in roots)
            kodaira = "III" if tangent else "I2"
            if kodaira == "I2" and sing_pts and len(sing_pts) != len(roots):
                notes.append("line-conic member has an unexpected number of "
                             "singular points")
        else:
            la, lb, _ = split
            used.extend([la.canonical(), lb.canonical()])
            notes.append("residual conic splits into two further lines")
            kodaira = _triangle_type(used, sing_pts, notes)
            residual = None
    elif len(used) == 0:
        if len(sing_pts) == 1:
            kodaira = "I1" if _node_not_cusp(member, sing_pts[0].as_tuple()) \
                else "II"
        elif len(sing_pts) == 0:
            kodaira = "I1"
            verified = False
            notes.append("member has no located singular point")
        else:
            kodaira = "I1"
            verified = False
            notes.append("multiple singular points but no member line found")
    else:
        kodaira = "I1"
        verified = False
        notes.append(f"unclassifiable member with {len(used)} lines and "
                     f"residual degree {work.total_degree()}")

    return PencilMember(
        lam=lam, poly=member, kodaira=kodaira,
        lattice=LATTICE_LABEL.get(kodaira), euler=EULER_NUMBER.get(kodaira, 0),
        lines=used, residual=residual, singular_points=list(sing_pts),
        verified=verified, notes=notes)


def _triangle_type(lines, sing_pts, notes) -> str:
    vertices = []
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            li = lines[i] if lines[i].domain == lines[j].domain else lines[i].to_complex()
            lj = lines[j] if lines[i].domain == lines[j].domain else lines[j].to_complex()
            if _lines_parallel(li, lj):
                continue
            pt = intersect_lines(li, lj)
            if pt is not None:
                vertices.append(pt)
    distinct = []
    for v in vertices:
        if not any(_point_close(v, w) for w in distinct):
            distinct.append(v)
    if len(distinct) <= 1:
        return "IV"
    if len(distinct) != len(sing_pts) and sing_pts:
        matched = sum(1 for v in distinct
                      if any(_point_close(v, s.as_tuple()) for s in sing_pts))
        if matched != len(distinct):
            notes.append("triangle vertices do not all match located "
                         "singular points")
    return "I3"


def infinity_fibre(D: Poly2) -> tuple[str, str | None, int, list]:
    """Type of the member at parameter infinity: the conic D joined with
    the line at infinity.  Returns (kodaira, lattice, euler, notes)."""
    notes: list = []
    if D.total_degree() != 2:
        notes.append("denominator is not a conic; infinity member untyped")
        return ("unknown", None, 0, notes)
    a = D.coeff(2, 0)
    b = D.coeff(1, 1)
    c = D.coeff(0, 2)
    disc = b * b - 4 * a * c
    disc_zero = (disc == 0) if _is_exact(disc) else (
        abs(disc) <= 1e-9 * max(D.max_abs(), 1.0) ** 2)
    lead_zero = all(
        scalar_is_zero(v, 1e-12 * max(D.max_abs(), 1.0))
        for v in (a, b, c))
    if lead_zero:
        notes.append("denominator has no quadratic part; infinity member untyped")
        return ("unknown", None, 0, notes)
    if conic_is_irreducible(D):
        if disc_zero:
            return ("III", "A1", 3, notes)
        return ("I2", "A1", 2, notes)
    split = split_degenerate_conic(D)
    if split is None:
        notes.append("denominator rank test and splitter disagree")
        return ("unknown", None, 0, notes)
    la, lb, _ = split
    same = _lines_parallel(la, lb) and _close(
        complex(la.canonical().c), complex(lb.canonical().c))
    if same:
        notes.append("denominator is a double line; infinity member non-reduced")
        return ("unknown", None, 0, notes)
    if _lines_parallel(la, lb):
        return ("IV", "A2", 4, notes)
    return ("I3", "A2", 3, notes)


def _config_string(counts: dict) -> str:
    parts = []
    for label in ("A2", "A1"):
        n = counts.get(label, 0)
        if n == 1:
            parts.append(label)
        elif n > 1:
            parts.append(f"{label}^{n}")
    return "+".join(parts)


def fibre_report(C: Poly2, D: Poly2) -> FibreReport:
    """Full singular-fibre analysis of a cubic-over-conic pencil.

    Runs both routes, cross-checks them, classifies every degenerate
    member, types the member at infinity, and totals the Euler numbers
    against the rational-elliptic-surface value of twelve.
    """
    Cc, Dc = canonical_pair(C, D)
    if Cc.total_degree() != 3 or Dc.total_degree() != 2:
        raise DegreeError("fibre analysis expects a cubic over a conic")
    notes: list[str] = []
    base = base_points(Cc, Dc)
    crit = critical_route(Cc, Dc)
    divr = division_route(Cc, Dc, base)
    notes.extend(crit.notes)
    notes.extend(n for n in divr.notes if n not in notes)

    groups: list[dict] = []

    def _place(lam):
        for g in groups:
            if _close(g["lam"], lam):
                if _is_exact(lam) and not _is_exact(g["lam"]):
                    g["lam"] = lam
                return g
        g = {"lam": lam, "pts": [], "lines": []}
        groups.append(g)
        return g

    for sp in crit.points:
        _place(sp.lam)["pts"].append(sp)
    for ml in divr.member_lines:
        _place(ml.lam)["lines"].append(ml.line)

    routes_agree = True
    for g in groups:
        nlines = len(g["lines"])
        npts = len(g["pts"])
        if nlines > 0 and npts == 0:
            routes_agree = False
            notes.append(f"division route found lines at parameter "
                         f"{g['lam']} but the critical route found no "
                         "singular point")
        if npts >= 2 and nlines == 0:
            routes_agree = False
            notes.append(f"critical route found {npts} singular points at "
                         f"parameter {g['lam']} but the division route "
                         "found no line")

    members = []
    for g in groups:
        m = _classify_member(Cc, Dc, g["lam"], g["lines"], g["pts"])
        if not m.verified:
            routes_agree = False
        members.append(m)
    members.sort(key=lambda m: (round(complex(m.lam).real, 9),
                                round(complex(m.lam).imag, 9)))

    inf_kod, inf_lat, inf_euler, inf_notes = infinity_fibre(Dc)
    notes.extend(inf_notes)
    if divr.infinity_lines and conic_is_irreducible(Dc):
        routes_agree = False
        notes.append("division route found a line inside an irreducible "
                     "denominator")

    counts: dict[str, int] = {}
    for m in members:
        if m.lattice in ("A1", "A2"):
            counts[m.lattice] = counts.get(m.lattice, 0) + 1
    if inf_lat in ("A1", "A2"):
        counts[inf_lat] = counts.get(inf_lat, 0) + 1
    config = _config_string(counts)

    euler_total = sum(m.euler for m in members) + inf_euler
    complete = (euler_total == 12
                and base.total_multiplicity() == base.expected_total)
    if euler_total != 12:
        notes.append(f"Euler numbers total {euler_total}, expected 12")

    return FibreReport(
        canonical_C=Cc, canonical_D=Dc, base=base, members=members,
        infinity_kodaira=inf_kod, infinity_lattice=inf_lat,
        infinity_euler=inf_euler, config=config, euler_total=euler_total,
        complete=complete, routes_agree=routes_agree, notes=notes)


# ---------------------------------------------------------------------------
# Quadratic pencils (the conic-over-conic path)
# ---------------------------------------------------------------------------


def conic_pencil_singular_params(C: Poly2, D: Poly2):
    """Parameters of the degenerate members of a conic pencil.

    The member C + lam*D is degenerate exactly when the determinant of its
    symmetric matrix vanishes; that determinant is a cubic in lam.  Returns
    (params, infinity_singular) where params lists the finite roots and the
    flag reports a degenerate member at infinity (det of D's matrix zero).
    """
    Cc, Dc = canonical_pair(C, D)
    if Cc.total_degree() != 2 or Dc.total_degree() != 2:
        raise DegreeError("conic pencil expects two conics")
    exact = Cc.domain == EXACT and Dc.domain == EXACT
    mc = conic_matrix(Cc)
    md = conic_matrix(Dc)

    def det_at(lam):
        m = tuple(tuple(mc[i][j] + lam * md[i][j] for j in range(3))
                  for i in range(3))
        return _sym3_det(m)

    if exact:
        samples = [Fraction(k) for k in range(4)]
        vals = [det_at(t) for t in samples]
        # cubic interpolation through four exact samples
        poly = _interp_poly1(samples, vals, EXACT)
    else:
        samples = [complex(0.21 + 0.83 * k) for k in range(4)]
        vals = [complex(det_at(t)) for t in samples]
        poly = _interp_poly1(samples, vals, COMPLEX)
    inf_singular = scalar_is_zero(
        _sym3_det(md),
        0.0 if exact else 1e-9 * max(Dc.max_abs(), 1.0) ** 3)
    params = [z for z, _ in _mixed_roots(poly)]
    params.sort(key=lambda z: (round(complex(z).real, 9),
                               round(complex(z).imag, 9)))
    return params, inf_singular


def _interp_poly1(xs, vals, dom) -> Poly1:
    one = Fraction(1) if dom == EXACT else 1.0 + 0.0j
    acc = Poly1([], dom)
    for i in range(len(xs)):
        num = Poly1([one], dom)
        den = one
        for j in range(len(xs)):
            if j == i:
                continue
            num = num * Poly1([-xs[j], one], dom)
            den = den * (xs[i] - xs[j])
        acc = acc + num * Poly1([vals[i] / den], dom)
    return acc
