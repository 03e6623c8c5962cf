import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cvmaps.core.exceptions import InvalidDensityMatrixError, NonHermitianError, StructureError
from cvmaps.quantum.densmat import (
    DensityMatrix,
    hermitian_eigenvalues,
    partial_trace,
    partial_transpose,
    partial_transpose_matrix,
    pure_state,
    random_density_matrix,
    tensor_product,
)

BELL = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)


def bell_state():
    return pure_state(BELL, ("bipartite", 2, 2))


@pytest.mark.parametrize(
    "mat,expected",
    [
        (np.eye(2) / 2.0, [0.5, 0.5]),
        (np.diag([0.3, 0.7]), [0.7, 0.3]),
        (np.full((2, 2), 0.5), [1.0, 0.0]),
    ],
)
def test_hermitian_eigenvalues_examples(mat, expected):
    spectrum = hermitian_eigenvalues(DensityMatrix(mat))
    np.testing.assert_allclose(spectrum.eigenvalues, expected, atol=1e-14)
    assert spectrum.dim == 2


def test_hermitian_eigenvalues_rejects_asymmetric_input():
    with pytest.raises(NonHermitianError) as info:
        hermitian_eigenvalues(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert info.value.max_asymmetry == pytest.approx(1.0)


def test_spectrum_reconstructs_matrix(rng):
    rho = random_density_matrix(rng, 12)
    spectrum = rho.spectrum()
    assert np.all(np.diff(spectrum.eigenvalues) <= 0)
    assert spectrum.total == pytest.approx(1.0, abs=1e-12)


def test_density_matrix_validation():
    with pytest.raises(InvalidDensityMatrixError):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(InvalidDensityMatrixError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(NonHermitianError):
        DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(StructureError):
        DensityMatrix(np.eye(4) / 4.0, ("bipartite", 2, 3))
    with pytest.raises(StructureError):
        DensityMatrix(np.ones((2, 3)))


def test_density_matrix_is_read_only():
    rho = DensityMatrix(np.eye(2) / 2.0)
    with pytest.raises(ValueError):
        rho.mat[0, 0] = 1.0


def test_partial_trace_of_product_state(rng):
    rho_a = random_density_matrix(rng, 3)
    rho_b = random_density_matrix(rng, 4)
    joint = tensor_product(rho_a, rho_b)
    np.testing.assert_allclose(partial_trace(joint, 1).mat, rho_a.mat, atol=1e-14)
    np.testing.assert_allclose(partial_trace(joint, 2).mat, rho_b.mat, atol=1e-14)
    assert partial_trace(joint, 1).structure == ("single_mode", 3)


def test_partial_trace_of_bell_state_is_maximally_mixed():
    reduced = partial_trace(bell_state(), 1)
    np.testing.assert_allclose(reduced.mat, np.eye(2) / 2.0, atol=1e-15)


def test_partial_trace_needs_bipartite_input():
    with pytest.raises(StructureError):
        partial_trace(DensityMatrix(np.eye(2) / 2.0), 1)


def test_partial_trace_commutes_with_mixing(rng):
    rho1 = random_density_matrix(rng, 6)
    rho2 = random_density_matrix(rng, 6)
    lam = 0.3
    mixed = DensityMatrix(lam * rho1.mat + (1 - lam) * rho2.mat, ("bipartite", 2, 3))
    parts = [DensityMatrix(r.mat, ("bipartite", 2, 3)) for r in (rho1, rho2)]
    for mode in (1, 2):
        expected = lam * partial_trace(parts[0], mode).mat + (1 - lam) * partial_trace(parts[1], mode).mat
        np.testing.assert_allclose(partial_trace(mixed, mode).mat, expected, atol=1e-15)


def test_partial_transpose_of_bell_state_has_negative_eigenvalue():
    values = hermitian_eigenvalues(partial_transpose(bell_state(), 2)).eigenvalues
    assert values[-1] == pytest.approx(-0.5)


def test_partial_transpose_of_product_state_stays_positive(rng):
    joint = tensor_product(random_density_matrix(rng, 3), random_density_matrix(rng, 3))
    values = hermitian_eigenvalues(partial_transpose(joint, 2)).eigenvalues
    assert values[-1] > -1e-12
    np.testing.assert_allclose(
        partial_transpose(joint, 2), np.kron(partial_trace(joint, 1).mat, partial_trace(joint, 2).mat.T), atol=1e-14
    )


@settings(max_examples=50, derandomize=True, deadline=None)
@given(
    n1=st.integers(min_value=1, max_value=5),
    n2=st.integers(min_value=1, max_value=5),
    mode=st.sampled_from([1, 2]),
    data=st.data(),
)
def test_partial_transpose_is_an_involution(n1, n2, mode, data):
    dim = n1 * n2
    real = data.draw(arrays(np.float64, (dim, dim), elements=st.floats(-1, 1)))
    imag = data.draw(arrays(np.float64, (dim, dim), elements=st.floats(-1, 1)))
    mat = real + 1j * imag
    twice = partial_transpose_matrix(partial_transpose_matrix(mat, (n1, n2), mode), (n1, n2), mode)
    assert np.array_equal(twice, mat)


def test_schmidt_symmetry_of_reduced_spectra(rng):
    vector = rng.normal(size=12) + 1j * rng.normal(size=12)
    rho = pure_state(vector, ("bipartite", 3, 4))
    spec1 = partial_trace(rho, 1).spectrum().eigenvalues
    spec2 = partial_trace(rho, 2).spectrum().eigenvalues
    np.testing.assert_allclose(spec1, spec2[:3], atol=1e-12)
    assert abs(spec2[3]) < 1e-12


def test_clamping_sets_round_off_to_zero():
    rho = DensityMatrix(np.diag([1.0 + 5e-10, -5e-10]))
    clamped = rho.spectrum().clamped()
    assert clamped[-1] == 0.0
