import numpy as np
import pytest

from models import HamiltonianModel, PhysParams
from services import fock
from services.oracle import assemble, natural_l_ref
from utils.errors import CutoffTooSmall, DimensionMismatch, IllPosed, InvalidField, InvalidMargin, InvalidScale


class TestLadders:
    def test_three_levels(self):
        a = fock.ladder(3)
        expected = np.zeros((3, 3))
        expected[0, 1] = 1
        expected[1, 2] = np.sqrt(2)
        assert np.allclose(a, expected)

    def test_two_levels(self):
        assert np.array_equal(fock.ladder(2), np.array([[0, 1], [0, 0]]))

    def test_too_small(self):
        with pytest.raises(CutoffTooSmall):
            fock.ladder(1)

    def test_truncated_commutator_corner(self):
        a = fock.ladder(3)
        assert np.allclose(a @ a.T - a.T @ a, np.diag([1, 1, -2]))

    def test_embedding(self):
        N = 4
        a_x = fock.embed_two_modes(fock.ladder(N), "x", N)
        one_zero = np.zeros(N * N)
        one_zero[1 * N + 0] = 1
        vacuum = np.zeros(N * N)
        vacuum[0] = 1
        assert np.allclose(a_x.entries @ one_zero, vacuum)
        assert np.allclose(fock.embed_two_modes(np.eye(N), "y", N).entries, np.eye(N * N))

    def test_embedding_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            fock.embed_two_modes(fock.ladder(3), "x", 4)

    def test_mode_swap_permutation(self):
        N = 5
        swap = np.arange(N * N).reshape(N, N).T.ravel()
        a_x = fock.embed_two_modes(fock.ladder(N), "x", N).entries
        a_y = fock.embed_two_modes(fock.ladder(N), "y", N).entries
        assert np.array_equal(a_x[np.ix_(swap, swap)], a_y)
        assert np.array_equal(a_x[np.ix_(swap, swap)][np.ix_(swap, swap)], a_x)


class TestCoordinates:
    def setup_method(self):
        self.N = 8
        self.coords = fock.complex_coords(fock.position_momentum(self.N, 1.0))

    def test_invalid_scale(self):
        with pytest.raises(InvalidScale):
            fock.position_momentum(4, 0.0)

    def test_adjoint_pairs(self):
        assert np.allclose(self.coords["z_bar"].entries, self.coords["z"].adjoint().entries)
        assert np.allclose(self.coords["p_z_bar"].entries, self.coords["p_z"].adjoint().entries)

    def test_vacuum_has_no_angular_momentum(self):
        l_z = fock.angular_momentum(self.coords)
        assert np.allclose(l_z.entries[:, 0], 0)

    def test_zero_shift_is_identity(self):
        shifted = fock.bopp_shift(self.coords, 0.0)
        assert np.array_equal(shifted["z_hat"].entries, self.coords["z"].entries)

    def test_mixed_bases_are_rejected(self):
        other = fock.complex_coords(fock.position_momentum(self.N, 2.0))
        with pytest.raises(DimensionMismatch):
            self.coords["z"] @ other["z_bar"]

    def test_canonical_commutators_on_interior(self):
        N, l_ref = 12, 0.7
        quadratures = fock.position_momentum(N, l_ref)
        coords = fock.complex_coords(quadratures)
        shifted = fock.bopp_shift(coords, 0.3)
        interior = np.flatnonzero(np.diag(fock.interior_projector(N, 2).entries).real > 0.5)
        unit = 1j * np.eye(len(interior))
        assert np.allclose(fock.compress(fock.commutator(quadratures["x"], quadratures["p_x"]), interior), unit)
        assert np.allclose(fock.compress(fock.commutator(coords["z"], coords["p_z"]), interior), unit)
        assert np.allclose(fock.compress(fock.commutator(shifted["z_hat"], coords["p_z"]), interior), unit)

    def test_vacuum_position_spread(self):
        l_ref = 0.7
        x = fock.position_momentum(6, l_ref)["x"]
        assert (x @ x).entries[0, 0] == pytest.approx(l_ref ** 2 / 2, rel=1e-12)

    def test_l_z_eigenvalues_are_integer_on_complete_shells(self):
        N = 8
        l_z = fock.angular_momentum(fock.complex_coords(fock.position_momentum(N, 1.3)))
        eigenvalues = np.linalg.eigvalsh(fock.compress(l_z, fock.shell_indices(N)))
        assert np.max(np.abs(eigenvalues - np.rint(eigenvalues))) < 1e-9

    def test_shifted_dual_form(self):
        theta = 0.3
        quadratures = fock.position_momentum(8, 1.0)
        shifted = fock.bopp_shift(self.coords, theta)
        shifted_coords = {**self.coords, "z": shifted["z_hat"], "z_bar": shifted["z_bar_hat"]}
        x, y, p_x, p_y = (quadratures[name] for name in ("x", "y", "p_x", "p_y"))
        residual = (fock.angular_momentum(shifted_coords) - (x @ p_y - y @ p_x)
                    + (2 * theta) * (self.coords["p_z"] @ self.coords["p_z_bar"]))
        assert residual.max_abs() < 1e-10

    def test_l_z_sectors_are_integer(self):
        space = fock.FockSpace(6, 1.0)
        sectors = space.l_z_sectors
        assert sorted(sectors) == list(range(-4, 5))
        assert sum(vectors.shape[1] for vectors in sectors.values()) == len(space.shell)


class TestProjectors:
    def test_interior_rank(self):
        projector = fock.interior_projector(10, 2)
        assert int(round(np.trace(projector.entries).real)) == 64

    @pytest.mark.parametrize("margin", [0, 10])
    def test_invalid_margin(self, margin):
        with pytest.raises(InvalidMargin):
            fock.interior_projector(10, margin)

    def test_shell_size(self):
        assert len(fock.shell_indices(6)) == 15
        assert len(fock.shell_indices(6, 0)) == 1

    def test_shell_projector_commutes_with_l_z(self):
        l_z = fock.angular_momentum(fock.complex_coords(fock.position_momentum(6, 1.0)))
        projector = fock.shell_projector(6, 3)
        assert int(round(np.trace(projector.entries).real)) == 10
        assert fock.commutator(projector, l_z).max_abs() < 1e-12


class TestAlgebraChecks:
    def test_interior_passes(self):
        result = fock.algebra_checks(24, theta=0.2)
        assert result.passed
        assert result.margin == 5

    def test_truncation_corner_fails_without_margin(self):
        result = fock.algebra_checks(3, margin=0)
        check = next(check for check in result.checks if check.name == "[a,a+]=I")
        assert not check.passed
        assert check.residual == pytest.approx(3)
        assert not result.passed
        assert any("truncation corner" in note for note in result.notes)

    def test_interior_has_no_notes(self):
        assert fock.algebra_checks(10, theta=0.1).notes == []

    def test_shifted_dual_form_check(self):
        result = fock.algebra_checks(12, theta=0.3)
        check = next(check for check in result.checks if check.name == "shifted L_z dual form")
        assert check.residual < 1e-10

    def test_landau_checks_need_positive_field(self):
        with pytest.raises(InvalidField):
            fock.algebra_checks(8, theta=0.2, phys=PhysParams(m=1, e=1, B=0, theta=0.2))

    def test_commutative_coordinates(self):
        result = fock.algebra_checks(10, theta=0.0)
        check = next(check for check in result.checks if check.name == "[z_hat,z_bar_hat]=2theta")
        assert check.residual < 1e-12

    def test_landau_ladders(self):
        result = fock.algebra_checks(12, theta=0.2, phys=PhysParams(m=1, e=1, B=1, theta=0.2))
        names = [check.name for check in result.checks]
        assert "landau [a,b+]=0" in names
        assert result.passed


class TestNumberStates:
    def setup_method(self):
        self.phys = PhysParams(m=1, e=1, B=1, theta=0.2)
        self.N = 10
        self.l_ref = natural_l_ref(HamiltonianModel.LANDAU_NC_EXPANDED, self.phys)
        self.ladders = fock.model_ladders(self.phys, "landau", fock.fock_space(self.N, self.l_ref).coords)

    def test_vacuum_is_basis_vector(self):
        state = fock.build_number_state(self.N, 0, 0, self.ladders)
        expected = np.zeros(self.N * self.N)
        expected[0] = 1
        assert np.allclose(state.amplitudes, expected)

    @pytest.mark.parametrize("n1, n2", [(1, 0), (0, 1), (2, 1)])
    def test_states_diagonalize_the_hamiltonian(self, n1, n2):
        hamiltonian = assemble(HamiltonianModel.LANDAU_NC_EXPANDED, self.phys, self.N, self.l_ref).entries
        state = fock.build_number_state(self.N, n1, n2, self.ladders).amplitudes
        assert np.linalg.norm(state) == pytest.approx(1)
        value = np.vdot(state, hamiltonian @ state).real
        assert np.linalg.norm(hamiltonian @ state - value * state) < 1e-8

    def test_unrepresentable_state(self):
        with pytest.raises(CutoffTooSmall):
            fock.build_number_state(self.N, 5, 4, self.ladders)

    def test_ill_posed_ladders(self):
        coords = fock.fock_space(self.N, 1.0).coords
        with pytest.raises(IllPosed):
            fock.model_ladders(PhysParams(m=1, e=1, B=4, theta=-1), "landau", coords)
