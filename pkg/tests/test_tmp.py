import numpy as np
import pytest

from qworkstats import (
    DensityOperator,
    HermitianOperator,
    characteristic_function,
    cyclic_qubit_unitary,
    dephase,
    discretize,
    pure_state_density,
    random_density,
    random_ramp_protocol,
    spectral_decomposition,
    symmetric_grid,
    tmp_average,
    tmp_characteristic,
    tmp_distribution,
    tmp_moment,
)
from qworkstats import moment as fcs_moment
from qworkstats.fcs import moment_fd, fd_stencil_grid, default_fd_step

from conftest import PAULI_Z, cyclic_fixture, make_static_drive, random_diagonal_state


class TestDistribution:
    def test_identity_drive_eigenstate_single_outcome(self):
        drive = make_static_drive(PAULI_Z, generator=np.zeros((2, 2)))
        rho = pure_state_density(np.array([0.0, 1.0]))
        outcomes = tmp_distribution(rho, drive)
        assert len(outcomes) == 1
        assert outcomes[0].probability == pytest.approx(1.0, abs=1e-12)
        assert outcomes[0].work == pytest.approx(0.0, abs=1e-12)

    def test_probabilities_nonnegative_and_normalized(self, rng):
        for dim in (2, 3, 5):
            drive = discretize(random_ramp_protocol(dim, 1.0, rng), 12)
            outcomes = tmp_distribution(random_density(dim, rng), drive)
            assert all(o.probability >= 0.0 for o in outcomes)
            assert sum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-12)

    def test_cyclic_example_against_printed_matrix(self):
        alpha, xi, gap = np.pi / 3, np.pi / 4, 1.0
        drive, rho = cyclic_fixture(alpha, xi, gap)
        outcomes = tmp_distribution(rho, drive)
        assert len(outcomes) == 4
        u = cyclic_qubit_unitary(alpha, xi).matrix
        w_up = abs(u[1, 0]) ** 2  # ground -> excited
        w_down = abs(u[0, 1]) ** 2
        expected = gap * (np.cos(alpha) ** 2 * w_up - np.sin(alpha) ** 2 * w_down)
        assert tmp_average(outcomes) == pytest.approx(expected, abs=1e-12)

    def test_maximally_mixed_average(self, rng):
        drive = discretize(random_ramp_protocol(2, 1.0, rng), 16)
        rho = DensityOperator(np.eye(2) / 2)
        expected = 0.5 * np.trace(drive.h_end.matrix - drive.h_start.matrix).real
        assert tmp_average(tmp_distribution(rho, drive)) == pytest.approx(expected, abs=1e-12)

    def test_dephasing_invariance(self, rng, random_qubit_drive):
        rho = random_density(2, rng)
        rho_dephased = dephase(rho, random_qubit_drive.h_start)
        a = tmp_distribution(rho, random_qubit_drive)
        b = tmp_distribution(rho_dephased, random_qubit_drive)
        assert len(a) == len(b)
        for oa, ob in zip(a, b):
            assert oa.probability == pytest.approx(ob.probability, abs=1e-12)
            assert oa.work == pytest.approx(ob.work, abs=1e-12)

    def test_degenerate_initial_levels_grouped(self, rng):
        h0 = HermitianOperator(np.diag([1.0, 1.0, 2.0]).astype(complex))
        drive = make_static_drive(h0, generator=np.zeros((3, 3)))
        rho = random_density(3, rng)
        outcomes = tmp_distribution(rho, drive)
        # two distinct initial eigenvalues, identity evolution keeps them
        assert {o.i for o in outcomes} == {0, 1}
        assert all(o.i == o.k for o in outcomes)
        p_low = sum(o.probability for o in outcomes if o.i == 0)
        assert p_low == pytest.approx(rho.matrix[0, 0].real + rho.matrix[1, 1].real, abs=1e-12)


class TestAverages:
    @pytest.mark.parametrize("alpha,xi", [(0.0, 0.8), (np.pi / 2, 0.8), (np.pi / 4, 0.8), (0.7, 0.0)])
    def test_exception_set_vanishes(self, alpha, xi):
        drive, rho = cyclic_fixture(alpha, xi)
        assert abs(tmp_average(tmp_distribution(rho, drive))) <= 1e-12

    def test_generic_angles_nonzero(self):
        alpha, xi, gap = np.pi / 3, np.pi / 5, 1.0
        drive, rho = cyclic_fixture(alpha, xi, gap)
        value = tmp_average(tmp_distribution(rho, drive))
        expected = gap * np.cos(2 * alpha) * np.sin(2 * alpha) ** 2 * np.sin(xi) ** 2
        assert value == pytest.approx(expected, abs=1e-12)
        assert abs(value) > 1e-3

    def test_moments_match_fcs_for_diagonal_states(self, rng):
        for dim in (2, 4):
            drive = discretize(random_ramp_protocol(dim, 1.0, rng), 12)
            rho = random_diagonal_state(drive.h_start, rng)
            outcomes = tmp_distribution(rho, drive)
            terms = spectral_decomposition(rho, drive)
            for n in range(1, 5):
                assert tmp_moment(outcomes, n) == pytest.approx(fcs_moment(terms, n), abs=1e-9)


class TestCharacteristic:
    def test_single_outcome_pure_phase(self):
        drive = make_static_drive(PAULI_Z, generator=np.zeros((2, 2)))
        rho = pure_state_density(np.array([1.0, 0.0]))
        grid = symmetric_grid(2.0, 11)
        samples = tmp_characteristic(tmp_distribution(rho, drive), grid)
        assert np.max(np.abs(samples.values - 1.0)) <= 1e-12

    def test_matches_fcs_for_diagonal_state(self, rng, random_qubit_drive):
        rho = random_diagonal_state(random_qubit_drive.h_start, rng)
        grid = symmetric_grid(4.0, 25)
        a = tmp_characteristic(tmp_distribution(rho, random_qubit_drive), grid)
        b = characteristic_function(rho, random_qubit_drive, grid)
        assert np.max(np.abs(a.values - b.values)) <= 1e-10

    def test_coherent_state_differs_at_first_order(self):
        # minimal counting-field window: the slopes at lam = 0 disagree by
        # the coherent part of the first moment
        drive, rho = cyclic_fixture(np.pi / 3, np.pi / 4)
        terms = spectral_decomposition(rho, drive)
        h = default_fd_step(terms)
        grid = fd_stencil_grid(h, order=1, richardson=True)
        fcs_samples = characteristic_function(rho, drive, grid)
        tmp_samples = tmp_characteristic(tmp_distribution(rho, drive), grid)
        fcs_slope = moment_fd(fcs_samples, 1, h=h)
        tmp_slope = moment_fd(tmp_samples, 1, h=h)
        assert abs(fcs_slope - tmp_slope) > 0.1
        assert fcs_slope == pytest.approx(0.0, abs=1e-8)
        assert tmp_slope == pytest.approx(-0.1875, abs=1e-8)
