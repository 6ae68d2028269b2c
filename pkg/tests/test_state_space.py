import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from errors import (InvalidSpectrumError, NotDecreasingError, NotPositiveError,
                    TraceNotOneError, DimensionTooSmallError, NotHermitianError,
                    NotPSDError, ShapeMismatchError, FiberViolationError,
                    NotInGaugeAlgebraError, SpectrumMismatchError, NotTangentError)
from geometry.state_space import (validate_spectrum, density_from_matrix,
                                  purification_from_matrix, standard_purification,
                                  gauge_element, gauge_algebra_basis, random_spectrum,
                                  random_density, random_purification, random_tangent,
                                  random_gauge_element, tangent_vector, distinguishable,
                                  random_gauge_unitary, require_same_spectrum,
                                  spectrum_of_purification)
from geometry.linalg_utils import haar_unitary


def test_spectrum_blocks_and_rank():
    spectrum = validate_spectrum([0.7, 0.3], 2)
    assert spectrum.rank == 2
    assert spectrum.num_blocks == 2
    assert str(spectrum) == "σ=(0.7, 0.3)"


def test_degenerate_values_are_clustered():
    spectrum = validate_spectrum([0.4, 0.4 - 1e-12, 0.2], 3)
    assert spectrum.multiplicities[0][1] == 2
    assert spectrum.values[0] == spectrum.values[1]
    assert [s.stop - s.start for s in spectrum.block_slices] == [2, 1]


@pytest.mark.parametrize("values, n, error", [
    ([], 2, InvalidSpectrumError),
    ([1.1, -0.1], 2, NotPositiveError),
    ([0.3, 0.7], 2, NotDecreasingError),
    ([0.6, 0.3], 2, TraceNotOneError),
    ([0.5, 0.5], 1, DimensionTooSmallError),
])
def test_invalid_spectra(values, n, error):
    with pytest.raises(error):
        validate_spectrum(values, n)


def test_spectrum_errors_share_a_parent():
    with pytest.raises(InvalidSpectrumError):
        validate_spectrum([0.3, 0.7], 2)


@pytest.mark.parametrize("matrix, error", [
    ([[0.5, 0.1], [0.0, 0.5]], NotHermitianError),
    ([[1.2, 0.0], [0.0, -0.2]], NotPSDError),
    ([[0.5, 0.0], [0.0, 0.4]], TraceNotOneError),
    ([[0.5, 0.0, 0.0], [0.0, 0.5, 0.0]], ShapeMismatchError),
])
def test_invalid_density_operators(matrix, error):
    with pytest.raises(error):
        density_from_matrix(np.array(matrix))


def test_rank_deficient_density():
    rho = density_from_matrix(np.diag([0.6, 0.4, 0.0, 0.0]))
    assert rho.spectrum.rank == 2
    assert rho.spectrum.hilbert_dim == 4


def test_purification_fiber_violation():
    a, b = np.sqrt(0.7), np.sqrt(0.15)
    Psi = np.array([[a, b], [0.0, b]])
    with pytest.raises(FiberViolationError):
        purification_from_matrix(Psi)


def test_spectrum_read_from_purification():
    Psi = np.diag([np.sqrt(0.7), np.sqrt(0.3)])
    assert_allclose(spectrum_of_purification(Psi).values, [0.7, 0.3])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 5))
def test_standard_purification_lies_over_rho(seed, n):
    k = 1 + seed % n
    spectrum = random_spectrum(n, k, seed, degenerate=seed % 2 == 0)
    rho = random_density(spectrum, seed)
    Psi = standard_purification(rho)
    assert Psi.fiber_residual() < 1e-10
    assert_allclose(Psi.matrix @ Psi.matrix.conj().T, rho.matrix, atol=1e-10)


def test_random_density_has_requested_spectrum():
    spectrum = validate_spectrum([0.5, 0.3, 0.2], 4)
    rho = random_density(spectrum, seed=3)
    eigenvalues = np.sort(np.linalg.eigvalsh(rho.matrix))[::-1]
    assert_allclose(eigenvalues, [0.5, 0.3, 0.2, 0.0], atol=1e-12)


def test_random_tangent_is_tangent():
    spectrum = random_spectrum(4, 3, seed=1)
    Psi = random_purification(spectrum, seed=2)
    X = random_tangent(Psi, seed=5)
    assert X.tangency_residual() < 1e-10
    tangent_vector(Psi, X.matrix)


def test_non_tangent_vector_rejected():
    Psi = purification_from_matrix(np.diag([np.sqrt(0.7), np.sqrt(0.3)]))
    with pytest.raises(NotTangentError):
        tangent_vector(Psi, Psi.matrix)


def test_gauge_element_must_commute_with_P():
    spectrum = validate_spectrum([0.7, 0.3], 2)
    with pytest.raises(NotInGaugeAlgebraError):
        gauge_element(np.array([[0.0, 1.0], [-1.0, 0.0]]), spectrum)
    with pytest.raises(NotInGaugeAlgebraError):
        gauge_element(np.eye(2), spectrum)


def test_gauge_algebra_dimension():
    spectrum = validate_spectrum([0.4, 0.4, 0.2], 3)
    basis = gauge_algebra_basis(spectrum)
    assert len(basis) == 5
    for xi in basis:
        gauge_element(xi.matrix, spectrum)


def test_random_gauge_element_eigenvalues_are_real():
    spectrum = validate_spectrum([0.4, 0.4, 0.2], 3)
    xi = random_gauge_element(spectrum, seed=4)
    assert xi.eigenvalues().dtype.kind == 'f'


def test_distinguishable(transfer_pair):
    rho0, rho1 = transfer_pair
    assert distinguishable(rho0, rho1)
    assert not distinguishable(rho0, rho0)


def test_spectrum_mismatch(qubit_rho):
    other = density_from_matrix(np.diag([0.6, 0.4]))
    with pytest.raises(SpectrumMismatchError):
        require_same_spectrum(qubit_rho.spectrum, other.spectrum)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_haar_unitary_is_unitary_and_seeded(n):
    U = haar_unitary(n, np.random.default_rng(7))
    assert U.shape == (n, n)
    assert_allclose(U.conj().T @ U, np.eye(n), atol=1e-12)
    assert_allclose(U, haar_unitary(n, np.random.default_rng(7)))


def test_random_gauge_unitary_commutes_with_P():
    spectrum = validate_spectrum([0.4, 0.4, 0.2], 3)
    U = random_gauge_unitary(spectrum, seed=2)
    assert_allclose(U.conj().T @ U, np.eye(3), atol=1e-12)
    assert_allclose(U @ spectrum.P @ U.conj().T, spectrum.P, atol=1e-12)
