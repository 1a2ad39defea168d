"""Birational discretisation of planar cubic Hamiltonian systems.

For a planar field with quadratic components f the discretisation replaces
products of coordinates by symmetric bilinear averages over one time step h;
solving the resulting implicit linear system gives the birational map

    Phi(p) = p + h * (I - (h/2) f'(p))^(-1) f(p),

whose inverse is the same construction with -h.  When f is Hamiltonian with
cubic Hamiltonian H, the map conserves a rational modification of H whose
numerator C is again cubic and whose denominator D = det(I - (h/2) f') is
quadratic, and it preserves the measure dx dy / D.

This module builds the map and its exact rational data, iterates orbits with
an exact-arithmetic bit cap, verifies the measure identity, and converts line
data (six intercepts, three slopes) into the corresponding field.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

from .polycore import (
    COMPLEX,
    EXACT,
    DomainError,
    IdentityResult,
    Poly2,
    RationalFn2,
    compose_rational,
    identity_test,
    join_domain,
    scalar_is_zero,
)


class MapIndeterminacyError(ZeroDivisionError):
    """The map denominator vanishes at the requested point."""


class DegreeError(ValueError):
    """A polynomial violated a degree contract."""


# ---------------------------------------------------------------------------
# Hamiltonians and fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorField2:
    """Planar polynomial vector field with components of degree at most two."""

    fx: Poly2
    fy: Poly2

    def __post_init__(self):
        join_domain(self.fx.domain, self.fy.domain)
        if self.fx.total_degree() > 2 or self.fy.total_degree() > 2:
            raise DegreeError("field components must have degree <= 2")

    @property
    def domain(self):
        return self.fx.domain

    def jacobian(self):
        """Entries (J11, J12, J21, J22) of the derivative matrix."""
        return (self.fx.diff_x(), self.fx.diff_y(),
                self.fy.diff_x(), self.fy.diff_y())

    def evaluate(self, x, y):
        return (self.fx.evaluate(x, y), self.fy.evaluate(x, y))


def check_cubic_hamiltonian(H: Poly2) -> Poly2:
    if H.total_degree() > 3:
        raise DegreeError("Hamiltonian must have total degree <= 3")
    return H


def hamiltonian_vector_field(H: Poly2) -> VectorField2:
    """The symplectic gradient (dH/dy, -dH/dx)."""
    check_cubic_hamiltonian(H)
    return VectorField2(H.diff_y(), -H.diff_x())


def hamiltonian_from_structure_coeffs(a: Sequence) -> Poly2:
    """Cubic Hamiltonian from the nine structure coefficients (a1..a9):

    H = a1 x^3/3 + a2 x^2 y + a3 x y^2 + a4 y^3/3
        + a5 x^2 + 2 a6 x y + a7 y^2 + a8 x + a9 y
    """
    a1, a2, a3, a4, a5, a6, a7, a8, a9 = [Fraction(v) if isinstance(v, int) else v
                                          for v in a]
    dom = EXACT if all(isinstance(v, (int, Fraction)) for v in
                       (a1, a2, a3, a4, a5, a6, a7, a8, a9)) else COMPLEX
    third = Fraction(1, 3) if dom == EXACT else 1 / 3
    return Poly2({
        (3, 0): a1 * third, (2, 1): a2, (1, 2): a3, (0, 3): a4 * third,
        (2, 0): a5, (1, 1): 2 * a6, (0, 2): a7, (1, 0): a8, (0, 1): a9,
    }, dom)


def random_cubic_hamiltonian(rng: random.Random, bound: int = 6) -> Poly2:
    """Random exact cubic Hamiltonian with a guaranteed cubic leading form."""
    while True:
        coeffs = {}
        for i in range(4):
            for j in range(4 - i):
                num = rng.randint(-bound, bound)
                den = rng.randint(1, 3)
                coeffs[(i, j)] = Fraction(num, den)
        coeffs[(0, 0)] = Fraction(0)
        H = Poly2(coeffs, EXACT)
        if H.leading_form().total_degree() == 3 and len(H.leading_form().c) >= 2:
            return H


# ---------------------------------------------------------------------------
# The discretisation map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KahanMap:
    """The birational one-step map with common-denominator rational data.

    The map sends (x, y) to (num_x/den, num_y/den); den has degree <= 2 and
    the numerators degree <= 3.
    """

    num_x: Poly2
    num_y: Poly2
    den: Poly2
    h: object
    field: VectorField2

    @property
    def domain(self):
        return self.den.domain

    def components(self) -> tuple[RationalFn2, RationalFn2]:
        return (RationalFn2(self.num_x, self.den),
                RationalFn2(self.num_y, self.den))

    def inverse(self) -> "KahanMap":
        return kahan_map(self.field, -self.h)

    def step(self, point):
        x0, y0 = point
        d = self.den.evaluate(x0, y0)
        if scalar_is_zero(d, 0.0 if isinstance(d, Fraction) else
                          1e-306):
            raise MapIndeterminacyError(f"denominator vanishes at {point}")
        return (self.num_x.evaluate(x0, y0) / d,
                self.num_y.evaluate(x0, y0) / d)

    def displacement_numerators(self) -> tuple[Poly2, Poly2]:
        """Numerators of Phi - id over the common denominator."""
        xP = Poly2.x(self.domain)
        yP = Poly2.y(self.domain)
        return (self.num_x - xP * self.den, self.num_y - yP * self.den)


def kahan_map(field: VectorField2, h) -> KahanMap:
    """Construct the map for step size h (exact h gives exact data)."""
    dom = field.domain
    if dom == EXACT and not isinstance(h, (int, Fraction)):
        raise DomainError("exact field requires an exact step size")
    hh = Fraction(h) if dom == EXACT else complex(h)
    half = hh / 2
    J11, J12, J21, J22 = field.jacobian()
    one = Poly2.const(1 if dom == EXACT else 1.0, dom)
    A11 = one - J11 * half
    A12 = -J12 * half
    A21 = -J21 * half
    A22 = one - J22 * half
    K = A11 * A22 - A12 * A21
    dx_num = (A22 * field.fx - A12 * field.fy) * hh
    dy_num = (A11 * field.fy - A21 * field.fx) * hh
    xP = Poly2.x(dom)
    yP = Poly2.y(dom)
    return KahanMap(num_x=xP * K + dx_num, num_y=yP * K + dy_num,
                    den=K, h=hh, field=field)


# ---------------------------------------------------------------------------
# The conserved rational modification of H
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InvariantPair:
    """Cubic-over-quadratic conserved quantity C/D of the discretised flow."""

    C: Poly2
    D: Poly2
    hamiltonian: Poly2
    h: object

    @property
    def domain(self):
        return self.C.domain

    def ratio(self) -> RationalFn2:
        return RationalFn2(self.C, self.D)

    def evaluate(self, x, y):
        return self.ratio().evaluate(x, y)

    def member(self, e0, e1) -> Poly2:
        """Affine member e0*C + e1*D of the invariant's pencil."""
        return self.C * e0 + self.D * e1


def modified_hamiltonian(H: Poly2, h) -> InvariantPair:
    """The conserved quantity of the discretised Hamiltonian flow.

    C/D restricts to H + O(h^2) as h -> 0; D is the map denominator.  The
    degree-4 and degree-5 parts of the raw numerator cancel identically for
    Hamiltonian fields; this is asserted.
    """
    check_cubic_hamiltonian(H)
    fld = hamiltonian_vector_field(H)
    mp = kahan_map(fld, h)
    dxn, dyn = mp.displacement_numerators()
    Hx = H.diff_x()
    Hy = H.diff_y()
    third = Fraction(1, 3) if H.domain == EXACT else 1 / 3
    C = H * mp.den + (Hx * dxn + Hy * dyn) * third
    if C.total_degree() > 3:
        if C.domain == EXACT:
            raise DegreeError("invariant numerator failed to collapse to a cubic")
        # strip floating noise above the structural degree
        scale = C.max_abs()
        kept = {k: v for k, v in C.c.items() if k[0] + k[1] <= 3}
        noise = {k: v for k, v in C.c.items() if k[0] + k[1] > 3}
        if max((abs(v) for v in noise.values()), default=0.0) > 1e-9 * scale:
            raise DegreeError("invariant numerator failed to collapse to a cubic")
        C = Poly2(kept, COMPLEX)
    return InvariantPair(C=C, D=mp.den, hamiltonian=H, h=mp.h)


# ---------------------------------------------------------------------------
# Measure preservation
# ---------------------------------------------------------------------------


def jacobian_determinant(mp: KahanMap) -> RationalFn2:
    """det DPhi computed from the partial derivatives of the components."""
    K = mp.den
    nx, ny = mp.num_x, mp.num_y
    gxx = nx.diff_x() * K - nx * K.diff_x()
    gxy = nx.diff_y() * K - nx * K.diff_y()
    gyx = ny.diff_x() * K - ny * K.diff_x()
    gyy = ny.diff_y() * K - ny * K.diff_y()
    num = gxx * gyy - gxy * gyx
    return RationalFn2(num, K * K * K * K)


def measure_identity(mp: KahanMap, seed: int = 0) -> IdentityResult:
    """Verify det DPhi * D = D o Phi as an identity of rational functions."""
    det = jacobian_determinant(mp)
    K = mp.den
    comp_num, _ = compose_rational(K, mp.num_x, mp.num_y, K, degree=2)
    lhs = RationalFn2(det.num * K, det.den)
    rhs = RationalFn2(comp_num, K * K)
    return identity_test(lhs, rhs, seed=seed)


def measure_identity_residual(mp: KahanMap, point):
    """Pointwise residual det DPhi(p) * D(p) - D(Phi(p))."""
    det = jacobian_determinant(mp)
    x0, y0 = point
    dv = det.evaluate(x0, y0)
    kv = mp.den.evaluate(x0, y0)
    image = mp.step(point)
    return dv * kv - mp.den.evaluate(*image)


# ---------------------------------------------------------------------------
# Orbits
# ---------------------------------------------------------------------------


@dataclass
class OrbitResult:
    points: list
    modes: list
    notices: list = dc_field(default_factory=list)
    stopped_early: bool = False

    def __len__(self):
        return len(self.points)


def _fraction_bits(v: Fraction) -> int:
    return v.numerator.bit_length() + v.denominator.bit_length()


def iterate_orbit(mp: KahanMap, start, steps: int, mode: str = "float",
                  bit_cap: int = 2 ** 16) -> OrbitResult:
    """Iterate the map from a start point.

    Exact mode keeps Fraction coordinates until either coordinate exceeds
    ``bit_cap`` bits, then degrades to floating point with a notice.  Hitting
    a map indeterminacy stops the orbit with a notice.
    """
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown orbit mode {mode!r}")
    if mode == "exact" and mp.domain != EXACT:
        raise DomainError("exact orbits require an exact map")
    pt = tuple(start)
    if mode == "float":
        pt = (float(pt[0]), float(pt[1]))
    result = OrbitResult(points=[pt], modes=[mode])
    cur_mode = mode
    for k in range(steps):
        try:
            pt = mp.step(pt)
        except MapIndeterminacyError:
            result.notices.append(
                f"orbit stopped at step {k + 1}: map denominator vanished")
            result.stopped_early = True
            break
        if cur_mode == "exact":
            bits = max(_fraction_bits(pt[0]), _fraction_bits(pt[1]))
            if bits > bit_cap:
                result.notices.append(
                    f"exact orbit exceeded {bit_cap} bits at step {k + 1}; "
                    "continuing in floating point (accuracy degrades)")
                cur_mode = "float"
                pt = (float(pt[0]), float(pt[1]))
        if cur_mode == "float" and not (
                abs(pt[0]) < 1e300 and abs(pt[1]) < 1e300):
            result.notices.append(
                f"orbit diverged beyond overflow guard at step {k + 1}")
            result.stopped_early = True
            break
        result.points.append(pt)
        result.modes.append(cur_mode)
    return result


# ---------------------------------------------------------------------------
# Field from line data (six intercepts, three slopes)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LineData:
    """Intercepts b = (b1..b6) and slopes mu = (mu1..mu3) of the hexagon of
    lines through the indeterminacy configuration, plus the step size."""

    b: tuple
    mu: tuple
    h: object

    def __post_init__(self):
        if len(self.b) != 6 or len(self.mu) != 3:
            raise ValueError("need six intercepts and three slopes")

    def delta(self):
        b1, b2, b3, b4, b5, b6 = self.b
        return b2 * b4 * b6 - b1 * b3 * b5

    def validate(self):
        b1, b2, b3, b4, b5, b6 = self.b
        m1, m2, m3 = self.mu
        if m1 == m2 or m1 == m3 or m2 == m3:
            raise ValueError("slopes must be pairwise distinct")
        if b1 == b4 or b2 == b5 or b3 == b6:
            raise ValueError("opposite intercepts must differ (b1!=b4, b2!=b5, b3!=b6)")
        if self.delta() == 0:
            raise ValueError("intercept products must differ (b2*b4*b6 != b1*b3*b5)")
        if self.h == 0:
            raise ValueError("step size must be nonzero")


def structure_coeffs_from_line_data(data: LineData) -> tuple:
    """The nine field structure coefficients realising the given line data."""
    data.validate()
    b1, b2, b3, b4, b5, b6 = [Fraction(v) if isinstance(v, int) else v for v in data.b]
    m1, m2, m3 = [Fraction(v) if isinstance(v, int) else v for v in data.mu]
    h = Fraction(data.h) if isinstance(data.h, int) else data.h
    b14, b25, b36 = b1 - b4, b2 - b5, b3 - b6
    m12, m13, m23 = m1 - m2, m1 - m3, m2 - m3
    Dd = Fraction(1, 2) * b14 * b25 * b36 * m12 * m13 * m23
    a1 = (b25 * b36 * m12 ** 2 * m3 ** 3 - b14 * b36 * m23 ** 2 * m1 ** 3
          + b14 * b25 * m13 ** 2 * m2 ** 3) / (h * Dd)
    a2 = (-b25 * b36 * m12 ** 2 * m3 ** 2 + b14 * b36 * m23 ** 2 * m1 ** 2
          - b14 * b25 * m13 ** 2 * m2 ** 2) / (h * Dd)
    a3 = (b25 * b36 * m12 ** 2 * m3 - b14 * b36 * m23 ** 2 * m1
          + b14 * b25 * m13 ** 2 * m2) / (h * Dd)
    a4 = (-b25 * b36 * m12 ** 2 + b14 * b36 * m23 ** 2 - b14 * b25 * m13 ** 2) / (h * Dd)
    a5 = ((b1 + b4) * b25 * b36 * m3 ** 2 * m12 ** 2
          - (b2 + b5) * b14 * b36 * m1 ** 2 * m23 ** 2
          + (b3 + b6) * b14 * b25 * m2 ** 2 * m13 ** 2) / (2 * h * Dd)
    a6 = (-(b1 + b4) * b25 * b36 * m3 * m12 ** 2
          + (b2 + b5) * b14 * b36 * m1 * m23 ** 2
          - (b3 + b6) * b14 * b25 * m2 * m13 ** 2) / (2 * h * Dd)
    a7 = ((b1 + b4) * b25 * b36 * m12 ** 2 - (b2 + b5) * b14 * b36 * m23 ** 2
          + (b3 + b6) * b14 * b25 * m13 ** 2) / (2 * h * Dd)
    a8 = (b1 * b4 * b25 * b36 * m3 * m12 ** 2 - b2 * b5 * b14 * b36 * m1 * m23 ** 2
          + b3 * b6 * b14 * b25 * m2 * m13 ** 2) / (h * Dd)
    a9 = (-b1 * b4 * b25 * b36 * m12 ** 2 + b2 * b5 * b14 * b36 * m23 ** 2
          - b3 * b6 * b14 * b25 * m13 ** 2) / (h * Dd)
    return (a1, a2, a3, a4, a5, a6, a7, a8, a9)


def map_from_line_data(data: LineData) -> tuple[KahanMap, Poly2]:
    """Map and Hamiltonian whose invariant has the given hexagon of lines."""
    a = structure_coeffs_from_line_data(data)
    H = hamiltonian_from_structure_coeffs(a)
    fld = hamiltonian_vector_field(H)
    return kahan_map(fld, data.h), H
