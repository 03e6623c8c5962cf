import itertools
import logging
import math

import numpy as np
import pytest
from pydantic import ValidationError

from cvmaps.core.exceptions import CutDegenerateError, MeasureError, StructureError
from cvmaps.quantum.cutmap import (
    CutSpec,
    cut,
    cut_bipartite,
    even_map,
    odd_map,
    preservation_report,
    projector_form,
)
from cvmaps.quantum.densmat import DensityMatrix, partial_trace, pure_state, random_density_matrix
from cvmaps.quantum.discretizer import auto_grid, reduced_density_matrix
from cvmaps.quantum.gaussian_state import TwoModeSqueezedVacuum, eta_at
from cvmaps.quantum.measures import log_negativity, von_neumann_entropy
from cvmaps.services.demo_service import demo_service, qubit_closed_form, sample_qutrits


@pytest.mark.parametrize(
    "dim,removed",
    [(3, ()), (3, (0, 1, 2)), (3, (2, 1)), (3, (1, 1)), (3, (3,)), (1, (0,))],
)
def test_cut_spec_rejects_invalid(dim, removed):
    with pytest.raises(ValidationError):
        CutSpec(dim=dim, removed_indices=removed)


def test_cut_spec_removing_sorts_indices():
    spec = CutSpec.removing(5, [3, 0, 3])
    assert spec.removed_indices == (0, 3)
    assert spec.keep_count == 3
    np.testing.assert_array_equal(spec.keep_mask, [False, True, True, False, True])


def test_qutrit_to_qubit_closed_form(rng):
    rho = random_density_matrix(rng, 3)
    qubit = cut(rho, CutSpec(dim=3, removed_indices=(0,)))
    m = rho.mat
    expected = np.array([[m[1, 1], m[1, 2]], [m[2, 1], m[2, 2]]]) / (m[1, 1].real + m[2, 2].real)
    np.testing.assert_allclose(qubit.mat, expected, atol=1e-15)
    assert qubit.structure == ("single_mode", 2)


def test_remove_two_of_three_non_compact():
    rho = DensityMatrix(np.diag([0.5, 0.3, 0.2]))
    result = cut(rho, CutSpec(dim=3, removed_indices=(1, 2)), compact=False)
    np.testing.assert_allclose(result.mat, np.diag([1.0, 0.0, 0.0]), atol=0.0)


@pytest.mark.parametrize("n,m", [(4, 1), (6, 3), (9, 8)])
def test_maximally_mixed_stays_maximally_mixed(n, m):
    rho = DensityMatrix(np.eye(n) / n)
    result = cut(rho, CutSpec.removing(n, range(m)))
    np.testing.assert_allclose(result.mat, np.eye(n - m) / (n - m), atol=1e-15)


def test_cut_preserves_density_matrix_properties(rng):
    for _ in range(50):
        dim = int(rng.integers(2, 9))
        rho = random_density_matrix(rng, dim, rank=int(rng.integers(1, dim + 1)))
        size = int(rng.integers(1, dim))
        removed = rng.choice(dim, size=size, replace=False)
        result = cut(rho, CutSpec.removing(dim, removed), compact=bool(rng.integers(2)))
        assert np.array_equal(result.mat, result.mat.conj().T)
        assert abs(np.trace(result.mat) - 1.0) < 1e-12
        assert result.spectrum().eigenvalues[-1] >= -1e-9


def test_projector_form_is_bit_exact(rng):
    for dim in (3, 5):
        rho = random_density_matrix(rng, dim)
        for size in (1, 2):
            for removed in itertools.combinations(range(dim), size):
                spec = CutSpec(dim=dim, removed_indices=removed)
                assert np.array_equal(cut(rho, spec, compact=False).mat, projector_form(rho, spec).mat)


def test_degenerate_cut():
    rho = DensityMatrix(np.diag([1.0, 0.0, 0.0]))
    with pytest.raises(CutDegenerateError):
        cut(rho, CutSpec(dim=3, removed_indices=(0,)))


def test_cut_dimension_mismatch():
    with pytest.raises(StructureError):
        cut(DensityMatrix(np.eye(2) / 2.0), CutSpec(dim=3, removed_indices=(0,)))


def test_cut_is_nonlinear():
    rho1 = DensityMatrix(np.diag([0.8, 0.1, 0.1]))
    rho2 = DensityMatrix(np.diag([0.2, 0.6, 0.2]))
    spec = CutSpec(dim=3, removed_indices=(0,))
    mixture = cut(DensityMatrix(0.5 * rho1.mat + 0.5 * rho2.mat), spec)
    combination = 0.5 * cut(rho1, spec).mat + 0.5 * cut(rho2, spec).mat
    np.testing.assert_allclose(np.diag(mixture.mat).real, [0.7, 0.3], atol=1e-15)
    np.testing.assert_allclose(np.diag(combination).real, [0.625, 0.375], atol=1e-15)


def test_odd_and_even_maps_on_diagonal_state():
    rho = DensityMatrix(np.diag([0.4, 0.3, 0.2, 0.1]))
    np.testing.assert_allclose(odd_map(rho).mat, np.diag([0.75, 0.25]), atol=1e-15)
    np.testing.assert_allclose(even_map(rho).mat, np.diag([2.0 / 3.0, 1.0 / 3.0]), atol=1e-15)
    qutrit = DensityMatrix(np.diag([0.5, 0.25, 0.25]))
    np.testing.assert_allclose(odd_map(qutrit).mat, [[1.0]], atol=1e-15)
    np.testing.assert_allclose(cut(qutrit, CutSpec(dim=3, removed_indices=(0,))).mat, np.diag([0.5, 0.5]), atol=1e-15)


def test_odd_map_equals_cut_of_even_indices(rng):
    for _ in range(50):
        dim = int(rng.integers(2, 10))
        rho = random_density_matrix(rng, dim)
        evens = CutSpec.removing(dim, range(0, dim, 2))
        odds = CutSpec.removing(dim, range(1, dim, 2))
        assert np.array_equal(odd_map(rho).mat, cut(rho, evens).mat)
        assert np.array_equal(even_map(rho).mat, cut(rho, odds).mat)


def test_parity_maps_act_per_mode_on_bipartite_input(rng):
    rho = DensityMatrix(random_density_matrix(rng, 12).mat, ("bipartite", 3, 4))
    result = odd_map(rho)
    assert result.structure == ("bipartite", 1, 2)
    expected = cut_bipartite(rho, (0, 2), (0, 2))
    assert np.array_equal(result.mat, expected.mat)


def test_odd_map_preserves_entropy_of_squeezed_vacuum(baseline_params, baseline_squeeze):
    grid = auto_grid(baseline_params, baseline_squeeze, baseline_params.period, 65)
    state = TwoModeSqueezedVacuum(eta_at(baseline_params, baseline_squeeze, 0.0), baseline_params.omega_b)
    rho = reduced_density_matrix(state.kernel, grid)
    assert abs(von_neumann_entropy(rho.spectrum()) - von_neumann_entropy(odd_map(rho).spectrum())) < 0.01


def test_bipartite_cut_keeps_subsystem_structure(rng):
    rho_a = random_density_matrix(rng, 4)
    rho_b = random_density_matrix(rng, 3)
    joint = DensityMatrix(np.kron(rho_a.mat, rho_b.mat), ("bipartite", 4, 3))
    result = cut_bipartite(joint, removed_mode1=(1,), removed_mode2=(2,))
    assert result.structure == ("bipartite", 3, 2)
    spec_a = CutSpec(dim=4, removed_indices=(1,))
    spec_b = CutSpec(dim=3, removed_indices=(2,))
    np.testing.assert_allclose(partial_trace(result, 1).mat, cut(rho_a, spec_a).mat, atol=1e-14)
    np.testing.assert_allclose(partial_trace(result, 2).mat, cut(rho_b, spec_b).mat, atol=1e-14)


def test_arbitrary_cut_of_bipartite_matrix_warns(rng, caplog):
    caplog.set_level(logging.WARNING, logger="cvmaps")
    rho = DensityMatrix(random_density_matrix(rng, 4).mat, ("bipartite", 2, 2))
    result = cut(rho, CutSpec(dim=4, removed_indices=(1,)))
    assert result.structure == ("single_mode", 3)
    assert "breaks the subsystem structure" in caplog.text


def test_log_negativity_recovers_as_removed_fraction_shrinks():
    dim, a = 16, 0.5
    vector = np.zeros(dim * dim)
    for i in range(dim):
        vector[i * dim + i] = a ** i
    rho = pure_state(vector, ("bipartite", dim, dim))
    full = log_negativity(rho)
    gaps = []
    for fraction in (1 / 2, 1 / 4, 1 / 8):
        m = int(dim * fraction)
        tail = range(dim - m, dim)
        gaps.append(abs(full - log_negativity(cut_bipartite(rho, tail, tail))))
    assert gaps[0] >= gaps[1] >= gaps[2]
    assert gaps[2] < 1e-3


def test_preservation_report_for_identical_matrices():
    rho = DensityMatrix(np.diag([0.5, 0.5, 0.0]))
    report = preservation_report(rho, cut(rho, CutSpec(dim=3, removed_indices=(2,)), compact=False), q=5.0)
    assert report.delta_vn == pytest.approx(0.0, abs=1e-14)
    assert report.delta_tsallis == pytest.approx(0.0, abs=1e-14)
    assert report.relative_vn == pytest.approx(0.0, abs=1e-12)
    assert report.relative_q_entropy == pytest.approx(-0.25, abs=1e-12)
    assert report.supports_compatible


def test_preservation_report_of_maximally_mixed_state():
    rho = DensityMatrix(np.eye(4) / 4.0)
    report = preservation_report(rho, cut(rho, CutSpec(dim=4, removed_indices=(0, 1)), compact=False))
    assert report.delta_vn == pytest.approx(math.log(2.0), abs=1e-12)
    assert not report.supports_compatible
    assert report.relative_vn == math.inf


def test_relative_entropy_is_non_negative(rng):
    for _ in range(100):
        dim = int(rng.integers(2, 7))
        spec = CutSpec.removing(dim, rng.choice(dim, size=int(rng.integers(1, dim)), replace=False))
        rho = cut(random_density_matrix(rng, dim), spec, compact=False)
        sigma = random_density_matrix(rng, dim)
        assert preservation_report(rho, sigma).relative_vn >= -1e-10
        assert preservation_report(rho, cut(rho, spec, compact=False)).relative_vn >= -1e-10


@pytest.mark.parametrize("q", [1.0, 0.0, -2.0])
def test_preservation_report_rejects_invalid_q(q):
    rho = DensityMatrix(np.eye(2) / 2.0)
    with pytest.raises(MeasureError):
        preservation_report(rho, rho, q=q)


def test_preservation_report_needs_non_compact_cut():
    rho = DensityMatrix(np.eye(3) / 3.0)
    with pytest.raises(StructureError):
        preservation_report(rho, cut(rho, CutSpec(dim=3, removed_indices=(0,))))


def test_qutrit_demo_matches_closed_form():
    report = demo_service.run_qutrit_demo()
    assert len(report.cases) == 9
    assert all(case.matches_closed_form for case in report.cases)
    diagonal = sample_qutrits()["diagonal"]
    np.testing.assert_allclose(qubit_closed_form(diagonal, 2), np.diag([0.625, 0.375]), atol=1e-15)
    text = demo_service.format_report(report)
    assert "MISMATCH" not in text
