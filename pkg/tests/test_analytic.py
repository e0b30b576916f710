import math

import pytest

from models import PhysParams, SpectrumModel
from services import analytic
from services.params import derive
from utils.errors import IllPosed, InvalidField, InvalidRequest, MissingPartner, NotAtCriticalPoint


class TestLandau:
    def test_ground_level(self, landau_phys):
        assert analytic.landau_nc_e_squared(landau_phys, 0, 0, 1) == pytest.approx(1 + 2 * 0.525 / 1.1 - 1 + 0.05)
        assert analytic.landau_nc_e_squared(landau_phys, 0, 0, 1) == pytest.approx(1.0045454545)
        assert analytic.landau_nc_e_squared(landau_phys, 0, 0, -1) == pytest.approx(0.9045454545)

    def test_table_is_sorted_and_complete(self, landau_phys):
        table = analytic.landau_nc_levels(landau_phys, 2, 3)
        assert len(table.lines) == 3 * 4 * 2
        energies = [line.E_squared for line in table.lines]
        assert energies == sorted(energies)
        line = table.line(0, 0, 1)
        assert line.E == pytest.approx(math.sqrt(line.E_squared))
        assert line.E_nonrel == pytest.approx((line.E_squared - 1) / 2)

    def test_ill_posed(self):
        with pytest.raises(IllPosed):
            analytic.landau_nc_levels(PhysParams(m=1, e=1, B=2, theta=-2))

    def test_negative_bound(self, landau_phys):
        with pytest.raises(InvalidRequest):
            analytic.landau_nc_levels(landau_phys, -1, 0)

    def test_splitting_is_uniform(self, landau_phys):
        gaps = analytic.zeeman_splitting(analytic.landau_nc_levels(landau_phys, 2, 2))
        assert len(gaps) == 9
        assert all(gap.gap == pytest.approx(0.1) for gap in gaps)

    @pytest.mark.parametrize("n1", [0, 1, 3])
    @pytest.mark.parametrize("sigma", [1, -1])
    def test_energy_increases_with_n2(self, landau_phys, n1, sigma):
        table = analytic.landau_nc_levels(landau_phys, 3, 5)
        energies = [table.line(n1, n2, sigma).E_squared for n2 in range(6)]
        assert all(later > earlier for earlier, later in zip(energies, energies[1:]))

    def test_commutative_degeneracy(self):
        gaps = analytic.zeeman_splitting(analytic.landau_nc_levels(PhysParams(m=1, e=1, B=1), 2, 2))
        assert all(gap.gap == 0 for gap in gaps)

    def test_ladder_form_differs_by_constant(self, landau_phys):
        derived = derive(landau_phys)
        closed = analytic.e_bar_of(landau_phys, analytic.landau_nc_e_squared(landau_phys, 1, 2, 1))
        ladder = analytic.landau_ladder_e_bar(landau_phys, 1, 2, 1)
        assert ladder - closed == pytest.approx(landau_phys.e * derived.B_tilde / landau_phys.m)


class TestLandauCritical:
    def test_ground_pair(self):
        table = analytic.landau_critical_levels(PhysParams(m=1, e=1, B=1), 0)
        assert sorted(line.E_squared for line in table.lines) == pytest.approx([0, 2])
        assert table.phys.theta == pytest.approx(-4)
        assert table.notes

    def test_values(self):
        assert analytic.landau_critical_e_squared(PhysParams(m=1, e=1, B=2), 0, 1) == pytest.approx(3)
        table = analytic.landau_critical_levels(PhysParams(m=1, e=1, B=1), 1)
        assert table.line(0, 1, 1).E_nonrel == pytest.approx(1.5)

    def test_negative_energy_squared_has_no_energy(self):
        table = analytic.landau_critical_levels(PhysParams(m=1, e=1, B=4), 0)
        line = table.line(0, 0, -1)
        assert line.E_squared == pytest.approx(-3)
        assert line.E is None

    def test_needs_field(self):
        with pytest.raises(InvalidField):
            analytic.landau_critical_levels(PhysParams(m=1, e=1, B=0))


class TestOscillator:
    def test_nc_ground_level(self, oscillator_phys):
        assert analytic.oscillator_nc_e_squared(oscillator_phys, 0, 0, 1) == pytest.approx(1.2863196, abs=1e-7)

    def test_nc_splitting(self, oscillator_phys):
        gaps = analytic.zeeman_splitting(analytic.oscillator_nc_levels(oscillator_phys, 1, 1))
        assert all(gap.gap == pytest.approx(0.0297561, abs=1e-7) for gap in gaps)

    def test_nc_reduces_to_field_free_oscillator(self):
        phys = PhysParams(m=1, e=1, omega=0.7)
        for n1, n2 in [(0, 0), (1, 0), (2, 3)]:
            expected = 1 + 2 * 0.7 * (n1 + n2 + 1)
            assert analytic.oscillator_nc_e_squared(phys, n1, n2, 1) == pytest.approx(expected)
            assert analytic.oscillator_commutative_e_squared(phys, n1, n2) == pytest.approx(expected)

    def test_commutative_limit_matches_commutative_spectrum(self):
        phys = PhysParams(m=1, e=1, B=0.7, omega=0.4, theta=0)
        nc = sorted(line.E_squared for line in analytic.oscillator_nc_levels(phys, 5, 5).lines)
        commutative = sorted(line.E_squared for line in analytic.oscillator_commutative_levels(phys, 5, 5).lines)
        assert nc == pytest.approx(commutative, rel=1e-12)

    def test_commutative_needs_confinement(self):
        with pytest.raises(InvalidField):
            analytic.oscillator_commutative_levels(PhysParams(m=1, e=1))

    def test_mass_variants_differ_by_angular_term(self, oscillator_phys):
        difference = (analytic.oscillator_lz_coefficient(oscillator_phys, "m_tilde")
                      - analytic.oscillator_lz_coefficient(oscillator_phys, "m"))
        assert difference == pytest.approx(1.8597e-4, rel=1e-3)


class TestOscillatorCritical:
    def test_ground_pair(self):
        phys = PhysParams(m=1, e=1, omega=1, theta=-0.2, B=0.1)
        assert analytic.oscillator_critical_e_squared(phys, 0, 1) == pytest.approx(2.7019984, abs=1e-7)
        assert analytic.oscillator_critical_e_squared(phys, 0, -1) == pytest.approx(3.1029984, abs=1e-7)

    def test_refuses_off_critical_field(self):
        with pytest.raises(NotAtCriticalPoint):
            analytic.oscillator_critical_levels(PhysParams(m=1, e=1, omega=1, theta=-0.2, B=0.3))

    def test_substitutes_critical_field(self):
        table = analytic.oscillator_critical_levels(PhysParams(m=1, e=1, omega=1, theta=-0.2, B=0.3), 0, substitute=True)
        assert table.phys.B == pytest.approx(0.1)
        assert table.line(0, 0, 1).E_squared == pytest.approx(2.7019984, abs=1e-7)

    def test_field_free_limit(self):
        table = analytic.oscillator_critical_levels(PhysParams(m=1, e=1, omega=0.5), 2)
        assert table.line(2, 2, 1).E_squared == pytest.approx(2 * 0.5 * 5 + 1)

    def test_needs_frequency(self):
        with pytest.raises(InvalidField):
            analytic.oscillator_critical_levels(PhysParams(m=1, e=1))


class TestCriticalValues:
    @pytest.mark.parametrize("e, B, expected", [(1, 4, -1), (1, 1, -4), (2, 0.5, -4)])
    def test_critical_theta_landau(self, e, B, expected):
        assert analytic.critical_theta_landau(PhysParams(m=1, e=e, B=B)) == pytest.approx(expected)

    def test_critical_theta_landau_without_field(self):
        with pytest.raises(InvalidField):
            analytic.critical_theta_landau(PhysParams(m=1, e=1))

    @pytest.mark.parametrize("m, theta, expected", [(1, -0.2, 0.1), (1, 0, 0), (2, -0.5, 1)])
    def test_critical_field_oscillator(self, m, theta, expected):
        assert analytic.critical_field_oscillator(PhysParams(m=m, e=1, omega=1, theta=theta)) == pytest.approx(expected)

    def test_landau_coefficient_vanishes_at_critical_theta(self):
        phys = PhysParams(m=1, e=1, B=3)
        theta_c = analytic.critical_theta_landau(phys)
        assert abs(phys.e * phys.B / 2 * (1 + phys.e * phys.B * theta_c / 4)) <= 1e-10


class TestConsistency:
    def test_missing_partner(self, landau_phys):
        table = analytic.landau_nc_levels(landau_phys, 0, 0)
        table.lines.pop()
        with pytest.raises(MissingPartner):
            analytic.zeeman_splitting(table)

    @pytest.mark.parametrize("model", [SpectrumModel.LANDAU_NC, SpectrumModel.LANDAU_CRITICAL])
    def test_nonrel_residual_vanishes(self, model):
        table = analytic.spectrum(model, PhysParams(m=1, e=1, B=1, theta=0.2), 2, 2, 2)
        assert all(abs(residual.residual) < 1e-12 for residual in analytic.nonrel_consistency(table))

    def test_literal_oscillator_variant_is_flagged(self):
        table = analytic.oscillator_nc_levels(PhysParams(m=2, e=1, B=0.5, omega=0.3, theta=0.1), 1, 1)
        residuals = analytic.nonrel_consistency(table)
        assert all(residual.flagged for residual in residuals)
        assert all(abs(residual.residual) < 1e-12 for residual in residuals)
