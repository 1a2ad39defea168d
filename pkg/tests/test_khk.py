"""Tests for the discretisation map, its invariant, measure, and orbits."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import random

from kahanlab.khk import (
    DegreeError,
    KahanMap,
    LineData,
    MapIndeterminacyError,
    VectorField2,
    hamiltonian_from_structure_coeffs,
    hamiltonian_vector_field,
    iterate_orbit,
    kahan_map,
    map_from_line_data,
    measure_identity,
    measure_identity_residual,
    modified_hamiltonian,
    random_cubic_hamiltonian,
    structure_coeffs_from_line_data,
)
from kahanlab.polycore import COMPLEX, EXACT, DomainError, Poly2

from conftest import dec_point, dec_poly, dec_scalar, load_fixture

F = Fraction


def henon_heiles_hamiltonian():
    # (x^2 + y^2)/2 + x^2 y - y^3/3
    return Poly2({(2, 0): F(1, 2), (0, 2): F(1, 2), (2, 1): F(1),
                  (0, 3): F(-1, 3)}, EXACT)


CUBIC_FIXTURES = ["henon_heiles", "factorisable", "nonfactorisable", "nonconvex"]


class TestMapConstruction:
    def test_degree_contracts(self):
        H = henon_heiles_hamiltonian()
        mp = kahan_map(hamiltonian_vector_field(H), F(1, 2))
        assert mp.den.total_degree() <= 2
        assert mp.num_x.total_degree() <= 3
        assert mp.num_y.total_degree() <= 3

    def test_field_degree_guard(self):
        with pytest.raises(DegreeError):
            VectorField2(Poly2({(3, 0): F(1)}, EXACT), Poly2.zero(EXACT))

    def test_exact_field_needs_exact_step(self):
        H = henon_heiles_hamiltonian()
        with pytest.raises(DomainError):
            kahan_map(hamiltonian_vector_field(H), 0.5)

    @pytest.mark.parametrize("name", CUBIC_FIXTURES)
    def test_invariant_matches_fixture(self, name):
        fix = load_fixture(name)
        H = dec_poly(fix["hamiltonian"])
        h = dec_scalar(fix["h"])
        inv = modified_hamiltonian(H, h)
        assert inv.C.primitive_normal() == dec_poly(fix["C"])
        assert inv.D.primitive_normal() == dec_poly(fix["D"])

    def test_inverse_roundtrip_exact(self):
        H = henon_heiles_hamiltonian()
        mp = kahan_map(hamiltonian_vector_field(H), F(1, 2))
        back = mp.inverse()
        for pt in [(F(1, 3), F(1, 5)), (F(-2, 7), F(3, 4)), (F(0), F(1))]:
            img = mp.step(pt)
            assert back.step(img) == pt

    def test_indeterminacy_raises(self):
        # 4 x^2 + 4 y^2 - 17 vanishes at (2, 1/2)
        H = henon_heiles_hamiltonian()
        mp = kahan_map(hamiltonian_vector_field(H), F(1, 2))
        assert mp.den.evaluate(F(2), F(1, 2)) == 0
        with pytest.raises(MapIndeterminacyError):
            mp.step((F(2), F(1, 2)))

    def test_float_path_matches_exact(self):
        H = henon_heiles_hamiltonian()
        mpx = kahan_map(hamiltonian_vector_field(H), F(1, 2))
        Hf = H.to_complex()
        mpf = kahan_map(hamiltonian_vector_field(Hf), 0.5)
        pt = (F(1, 3), F(1, 5))
        ex = mpx.step(pt)
        fl = mpf.step((1 / 3, 1 / 5))
        assert abs(complex(fl[0]) - float(ex[0])) < 1e-12
        assert abs(complex(fl[1]) - float(ex[1])) < 1e-12

    def test_displacement_numerators(self):
        H = henon_heiles_hamiltonian()
        mp = kahan_map(hamiltonian_vector_field(H), F(1, 2))
        dxn, dyn = mp.displacement_numerators()
        # vanish where the field vanishes: origin is an equilibrium
        assert dxn.evaluate(F(0), F(0)) == 0
        assert dyn.evaluate(F(0), F(0)) == 0


class TestInvariant:
    def test_conserved_along_exact_orbit(self):
        H = henon_heiles_hamiltonian()
        inv = modified_hamiltonian(H, F(1, 2))
        mp = kahan_map(hamiltonian_vector_field(H), F(1, 2))
        pt = (F(1, 3), F(1, 5))
        val = inv.evaluate(*pt)
        for _ in range(8):
            pt = mp.step(pt)
            assert inv.evaluate(*pt) == val

    @pytest.mark.parametrize("name", CUBIC_FIXTURES)
    def test_conserved_for_each_fixture(self, name):
        fix = load_fixture(name)
        H = dec_poly(fix["hamiltonian"])
        h = dec_scalar(fix["h"])
        inv = modified_hamiltonian(H, h)
        mp = kahan_map(hamiltonian_vector_field(H), h)
        pt = dec_point(fix["orbit_start"]) if "orbit_start" in fix else (F(1, 7), F(1, 9))
        val = inv.evaluate(*pt)
        for _ in range(6):
            pt = mp.step(pt)
            assert inv.evaluate(*pt) == val

    def test_restricts_to_hamiltonian_at_small_step(self):
        # (C/D - H) at a fixed point decays like h^2
        H = henon_heiles_hamiltonian()
        pt = (F(1, 3), F(1, 5))
        errs = []
        for k in (3, 4, 5, 6):
            h = F(1, 2 ** k)
            inv = modified_hamiltonian(H, h)
            errs.append(inv.evaluate(*pt) - H.evaluate(*pt))
        for a, b in zip(errs, errs[1:]):
            ratio = a / b
            assert F(7, 2) < ratio < F(9, 2)

    def test_member_combination(self):
        H = henon_heiles_hamiltonian()
        inv = modified_hamiltonian(H, F(1, 2))
        m = inv.member(F(2), F(-3))
        assert m == inv.C * F(2) - inv.D * F(3)

    def test_numerator_is_cubic_for_random_draws(self):
        rng = random.Random(7)
        for _ in range(12):
            H = random_cubic_hamiltonian(rng)
            inv = modified_hamiltonian(H, F(1, 3))
            assert inv.C.total_degree() <= 3
            assert inv.D.total_degree() <= 2


class TestMeasure:
    def test_measure_identity_exact(self):
        H = henon_heiles_hamiltonian()
        mp = kahan_map(hamiltonian_vector_field(H), F(1, 2))
        res = measure_identity(mp)
        assert res.ok
        assert res.mode == "expand"

    def test_measure_residual_pointwise(self):
        H = henon_heiles_hamiltonian()
        mp = kahan_map(hamiltonian_vector_field(H), F(1, 2))
        assert measure_identity_residual(mp, (F(1, 3), F(1, 5))) == 0

    @given(st.integers(min_value=0, max_value=10 ** 6))
    @settings(max_examples=20, deadline=None)
    def test_measure_identity_random_hamiltonians(self, seed):
        rng = random.Random(seed)
        H = random_cubic_hamiltonian(rng)
        h = F(rng.randint(1, 5), rng.randint(6, 11))
        mp = kahan_map(hamiltonian_vector_field(H), h)
        assert measure_identity(mp).ok


class TestOrbit:
    def test_exact_orbit_bit_cap_degrades(self):
        H = henon_heiles_hamiltonian()
        mp = kahan_map(hamiltonian_vector_field(H), F(1, 2))
        orb = iterate_orbit(mp, (F(1, 3), F(1, 5)), 12, mode="exact", bit_cap=64)
        assert any("bits" in n for n in orb.notices)
        assert "float" in orb.modes
        assert orb.modes[0] == "exact"

    def test_exact_orbit_values(self):
        H = henon_heiles_hamiltonian()
        mp = kahan_map(hamiltonian_vector_field(H), F(1, 2))
        orb = iterate_orbit(mp, (F(1, 3), F(1, 5)), 5, mode="exact")
        assert len(orb) == 6
        assert all(m == "exact" for m in orb.modes)
        assert orb.points[1] == mp.step((F(1, 3), F(1, 5)))

    def test_orbit_stops_at_indeterminacy(self):
        H = henon_heiles_hamiltonian()
        mp = kahan_map(hamiltonian_vector_field(H), F(1, 2))
        orb = iterate_orbit(mp, (F(2), F(1, 2)), 4, mode="exact")
        assert orb.stopped_early
        assert len(orb) == 1

    def test_float_orbit_tracks_exact(self):
        H = henon_heiles_hamiltonian()
        mp = kahan_map(hamiltonian_vector_field(H), F(1, 2))
        ex = iterate_orbit(mp, (F(1, 3), F(1, 5)), 6, mode="exact")
        fl = iterate_orbit(mp, (F(1, 3), F(1, 5)), 6, mode="float")
        for pe, pf in zip(ex.points, fl.points):
            assert abs(float(pe[0]) - pf[0]) < 1e-9
            assert abs(float(pe[1]) - pf[1]) < 1e-9

    def test_unknown_mode_rejected(self):
        H = henon_heiles_hamiltonian()
        mp = kahan_map(hamiltonian_vector_field(H), F(1, 2))
        with pytest.raises(ValueError):
            iterate_orbit(mp, (F(0), F(0)), 1, mode="adaptive")


class TestLineData:
    def reference(self, fix):
        b = tuple(dec_scalar(v) for v in fix["b"])
        mu = tuple(dec_scalar(v) for v in fix["mu"])
        return LineData(b=b, mu=mu, h=dec_scalar(fix["h"]))

    def test_validation_errors(self):
        good = LineData(b=(F(2), F(1), F(1), F(-2), F(-1), F(-1)),
                        mu=(F(0), F(1), F(-1)), h=F(1))
        good.validate()
        with pytest.raises(ValueError):
            LineData(b=(F(1),) * 6, mu=(F(0), F(1), F(-1)), h=F(1)).validate()
        with pytest.raises(ValueError):
            LineData(b=(F(2), F(1), F(1), F(-2), F(-1), F(-1)),
                     mu=(F(0), F(0), F(-1)), h=F(1)).validate()
        with pytest.raises(ValueError):
            LineData(b=(F(2), F(1), F(1), F(-2), F(-1), F(-1)),
                     mu=(F(0), F(1), F(-1)), h=F(0)).validate()
        with pytest.raises(ValueError):
            # b2 b4 b6 = b1 b3 b5 makes the intercept products collide
            LineData(b=(F(1), F(1), F(1), F(2), F(1), F(2)),
                     mu=(F(0), F(1), F(-1)), h=F(1)).validate()

    def test_structure_coeffs_match_fixture(self, reference_hexagon):
        data = self.reference(reference_hexagon)
        coeffs = structure_coeffs_from_line_data(data)
        expected = [dec_scalar(v) for v in reference_hexagon["structure_coeffs"]]
        assert list(coeffs) == expected

    def test_delta_matches_fixture(self, reference_hexagon):
        data = self.reference(reference_hexagon)
        assert data.delta() == dec_scalar(reference_hexagon["delta"])

    def test_map_from_line_data_reproduces_invariant(self, reference_hexagon):
        data = self.reference(reference_hexagon)
        mp, H = map_from_line_data(data)
        assert H == dec_poly(reference_hexagon["hamiltonian"])
        inv = modified_hamiltonian(H, data.h)
        assert inv.C.primitive_normal() == dec_poly(reference_hexagon["C"])
        assert inv.D.primitive_normal() == dec_poly(reference_hexagon["D"])
        assert inv.D == mp.den


class TestStructureCoefficients:
    def test_hamiltonian_from_structure_coeffs(self):
        a = (F(3), F(0), F(0), F(3), F(1), F(2), F(1), F(4), F(5))
        H = hamiltonian_from_structure_coeffs(a)
        assert H.coeff(3, 0) == F(1)
        assert H.coeff(0, 3) == F(1)
        assert H.coeff(1, 1) == F(4)
        assert H.coeff(1, 0) == F(4)
        assert H.coeff(0, 1) == F(5)

    def test_random_hamiltonian_contract(self):
        rng = random.Random(3)
        for _ in range(20):
            H = random_cubic_hamiltonian(rng)
            assert H.domain == EXACT
            assert H.total_degree() == 3
            assert H.coeff(0, 0) == 0
