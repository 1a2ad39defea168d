"""Shared helpers: decode the frozen reference fixtures into package objects.

Fixture scalars are either exact rationals {"q": "p/q"} or high-precision
decimal strings {"re": "...", "im": "..."} (imaginary part omitted when zero).
Polynomials are dicts keyed "i,j" for the x^i y^j coefficient; lines carry
(a, b, c) for a*x + b*y + c = 0; points carry {"x", "y"}.
"""

import json
from fractions import Fraction
from pathlib import Path

import pytest

from kahanlab.polycore import COMPLEX, EXACT, Line, Poly2

FIXTURE_DIR = Path(__file__).parent / "fixtures"


def load_fixture(name):
    with open(FIXTURE_DIR / f"{name}.json") as fh:
        return json.load(fh)


def dec_scalar(obj):
    """Decode a fixture scalar to Fraction (exact) or float/complex."""
    if "q" in obj:
        return Fraction(obj["q"])
    re = float(obj["re"])
    im = float(obj.get("im", "0"))
    if im == 0.0:
        return re
    return complex(re, im)


def dec_poly(obj):
    """Decode a fixture polynomial dict into a Poly2."""
    coeffs = {}
    for key, val in obj.items():
        i, j = key.split(",")
        coeffs[(int(i), int(j))] = dec_scalar(val)
    if all(isinstance(v, Fraction) for v in coeffs.values()):
        return Poly2(coeffs, EXACT)
    return Poly2({k: complex(v) for k, v in coeffs.items()}, COMPLEX)


def dec_point(obj):
    return (dec_scalar(obj["x"]), dec_scalar(obj["y"]))


def dec_line(obj):
    a = dec_scalar(obj["a"])
    b = dec_scalar(obj["b"])
    c = dec_scalar(obj["c"])
    if all(isinstance(v, Fraction) for v in (a, b, c)):
        return Line.make(a, b, c, EXACT)
    return Line.make(complex(a), complex(b), complex(c), COMPLEX)


def scalars_close(u, v, tol=1e-9):
    return abs(complex(u) - complex(v)) <= tol * max(1.0, abs(complex(v)))


def polys_close(p, q, tol=1e-9):
    keys = set(p.c) | set(q.c)
    scale = max(p.max_abs(), q.max_abs(), 1.0)
    return all(abs(complex(p.coeff(*k)) - complex(q.coeff(*k))) <= tol * scale
               for k in keys)


@pytest.fixture(scope="session")
def reference_hexagon():
    return load_fixture("reference_hexagon")


@pytest.fixture(scope="session")
def henon_heiles():
    return load_fixture("henon_heiles")


@pytest.fixture(scope="session")
def factorisable():
    return load_fixture("factorisable")


@pytest.fixture(scope="session")
def nonfactorisable():
    return load_fixture("nonfactorisable")


@pytest.fixture(scope="session")
def nonconvex():
    return load_fixture("nonconvex")


@pytest.fixture(scope="session")
def conic():
    return load_fixture("conic")
