"""
covariance.py - Quadrature moments of discretized states.

Momentum moments come from finite-difference operators acting on the grid
index: with R_ij = rho(z_i, z_j) dz / norm, <p^2> is minus the second
difference of R along its first index, divided by dz^2. All estimators are
traces Tr(R A) for a banded operator A and carry an O(dz^2) error for the
central stencil.

``covariance_oracle`` is the independent reference: midpoint quadrature of the
analytic wavefunction with momentum moments taken from the exact gradient of
its Gaussian exponent.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Tuple

import numpy as np
from numpy.typing import NDArray

from cvmaps.core.exceptions import StructureError
from cvmaps.quantum.densmat import DensityMatrix, partial_trace
from cvmaps.quantum.discretizer import DEFAULT_COVERAGE_SIGMAS, GridSpec, require_single_mode
from cvmaps.quantum.gaussian_state import (
    AmplifierParams,
    SqueezeParams,
    TwoModeSqueezedVacuum,
    squeezed_vacuum_at,
)

logger = logging.getLogger(__name__)

Stencil = Literal["central", "forward"]

BASIS = ("p1", "p2", "q1", "q2")
IMAGINARY_RESIDUE = 1e-10
ORACLE_CELLS_PER_AXIS = 8 * 33
ORACLE_EXTENT_FACTOR = 1.5
ORACLE_TOLERANCE = 1e-8


@dataclass(frozen=True)
class CovarianceMatrix:
    """Real symmetric 4x4 sigma over (p1, p2, q1, q2) with the first moments."""

    matrix: NDArray[np.float64]
    means: NDArray[np.float64]
    converged: bool = True

    def element(self, x: str, y: str) -> float:
        return float(self.matrix[BASIS.index(x), BASIS.index(y)])

    def uncertainty_product(self, mode: int) -> float:
        """sigma_qq sigma_pp - sigma_qp^2 for one mode; at least 1/4 for physical states."""
        q, p = f"q{mode}", f"p{mode}"
        return self.element(q, q) * self.element(p, p) - self.element(q, p) ** 2


def _grid_axis(rho: DensityMatrix, grid: GridSpec, mode: int) -> Tuple[NDArray[np.float64], float]:
    require_single_mode(rho, grid)
    if rho.dim < 3:
        raise StructureError(f"Finite-difference estimators need at least 3 grid points, got {rho.dim}")
    return grid.axis(mode), grid.step(mode)


def _derivative(n: int, step: float, stencil: Stencil) -> NDArray[np.float64]:
    """d/dz on the grid with zero values beyond the boundary."""
    if stencil == "central":
        return (np.eye(n, k=1) - np.eye(n, k=-1)) / (2.0 * step)
    if stencil == "forward":
        return (np.eye(n, k=1) - np.eye(n)) / step
    raise ValueError(f"Unknown stencil {stencil!r}")


def momentum_operator(n: int, step: float, stencil: Stencil = "central") -> NDArray[np.complex128]:
    return -1j * _derivative(n, step, stencil)


def _second_difference(n: int) -> NDArray[np.float64]:
    return np.eye(n, k=1) - 2.0 * np.eye(n) + np.eye(n, k=-1)


def _real_expectation(mat: NDArray, operator: NDArray, stencil: Stencil, name: str) -> float:
    value = complex(np.trace(mat @ operator))
    if stencil == "central" and abs(value.imag) > IMAGINARY_RESIDUE:
        raise ArithmeticError(f"{name} has imaginary part {value.imag:.3e}; operator is not hermitian on this state")
    return value.real


def mean_q(rho_reduced: DensityMatrix, grid: GridSpec, mode: int = 1) -> float:
    z, _ = _grid_axis(rho_reduced, grid, mode)
    return float(np.sum(np.real(np.diagonal(rho_reduced.mat)) * z))


def mean_p(rho_reduced: DensityMatrix, grid: GridSpec, mode: int = 1, stencil: Stencil = "central") -> float:
    z, step = _grid_axis(rho_reduced, grid, mode)
    return _real_expectation(rho_reduced.mat, momentum_operator(z.size, step, stencil), stencil, "<p>")


def sigma_qq(rho_reduced: DensityMatrix, grid: GridSpec, mode: int = 1) -> float:
    # R_ii already carries one dz, so no further grid factor appears
    z, _ = _grid_axis(rho_reduced, grid, mode)
    weights = np.real(np.diagonal(rho_reduced.mat))
    first = float(np.sum(weights * z))
    return float(np.sum(weights * z * z)) - first * first


def sigma_pp(rho_reduced: DensityMatrix, grid: GridSpec, mode: int = 1, stencil: Stencil = "central") -> float:
    """<p^2> from the second difference, <p> from ``stencil``."""
    z, step = _grid_axis(rho_reduced, grid, mode)
    second = -_real_expectation(rho_reduced.mat, _second_difference(z.size), "central", "<p^2>") / (step * step)
    first = mean_p(rho_reduced, grid, mode, stencil)
    return second - first * first


def sigma_qp(rho_reduced: DensityMatrix, grid: GridSpec, mode: int = 1, stencil: Stencil = "central") -> float:
    """Symmetrized 1/2 <qp + pq> - <q><p>."""
    z, step = _grid_axis(rho_reduced, grid, mode)
    Q = np.diag(z)
    P = momentum_operator(z.size, step, stencil)
    symmetric = _real_expectation(rho_reduced.mat, (Q @ P + P @ Q) / 2.0, stencil, "<{q,p}>/2")
    return symmetric - mean_q(rho_reduced, grid, mode) * mean_p(rho_reduced, grid, mode, stencil)


def sigma_p1p2(rho: DensityMatrix, grid: GridSpec, stencil: Stencil = "central") -> float:
    """<p1 p2> - <p1><p2> from mixed first differences of the bipartite matrix."""
    if not rho.is_bipartite:
        raise StructureError("sigma_p1p2 needs the bipartite density matrix")
    n1, n2 = rho.mode_dims
    if n1 != grid.points_per_mode or n2 != grid.points_per_mode:
        raise StructureError(f"Mode dimensions {(n1, n2)} do not match grid with {grid.points_per_mode} points")
    if min(n1, n2) < 3:
        raise StructureError(f"Finite-difference estimators need at least 3 grid points, got {(n1, n2)}")
    P1 = momentum_operator(n1, grid.step(1), stencil)
    P2 = momentum_operator(n2, grid.step(2), stencil)
    tensor = rho.mat.reshape(n1, n2, n1, n2)
    joint = complex(np.einsum("ijkl,ki,lj->", tensor, P1, P2))
    if stencil == "central" and abs(joint.imag) > IMAGINARY_RESIDUE:
        raise ArithmeticError(f"<p1 p2> has imaginary part {joint.imag:.3e}")
    p1 = mean_p(partial_trace(rho, 1), grid, 1, stencil)
    p2 = mean_p(partial_trace(rho, 2), grid, 2, stencil)
    return joint.real - p1 * p2


def _quadrature_moments(state: TwoModeSqueezedVacuum, extents: Tuple[float, float], cells: int) -> CovarianceMatrix:
    axes = [(-extent + (np.arange(cells) + 0.5) * (2.0 * extent / cells)) for extent in extents]
    x1, x2 = np.meshgrid(axes[0], axes[1], indexing="ij")
    weights = np.abs(state.wavefunction(x1, x2)) ** 2
    weights = weights / np.sum(weights)
    g1, g2 = state.gradient_log(x1, x2)

    # BASIS order: momenta first, then positions
    momenta = (np.imag(g1), np.imag(g2))
    positions = (x1, x2)
    gradients = (g1, g2)
    means = np.array([np.sum(weights * f) for f in momenta + positions])

    second = np.zeros((4, 4))
    for k in range(2):
        for l in range(k, 2):
            second[k, l] = np.sum(weights * np.real(np.conj(gradients[k]) * gradients[l]))
            second[2 + k, 2 + l] = np.sum(weights * positions[k] * positions[l])
        for l in range(2):
            # row p_k, column q_l: 1/2 <q_l p_k + p_k q_l>
            second[k, 2 + l] = np.sum(weights * positions[l] * momenta[k])
    upper = np.triu(second) - np.triu(np.outer(means, means))
    matrix = upper + np.triu(upper, k=1).T
    return CovarianceMatrix(matrix=matrix, means=means)


def covariance_of_state(state: TwoModeSqueezedVacuum, cells: int = ORACLE_CELLS_PER_AXIS) -> CovarianceMatrix:
    """Quadrature covariance of ``state``, refined once by doubling the cell count."""
    sigmas = np.sqrt(np.diag(state.marginal_covariance()))
    extents = tuple(float(ORACLE_EXTENT_FACTOR * DEFAULT_COVERAGE_SIGMAS * s) for s in sigmas)
    coarse = _quadrature_moments(state, extents, cells)
    fine = _quadrature_moments(state, extents, 2 * cells)
    change = float(np.max(np.abs(fine.matrix - coarse.matrix)))
    converged = change < ORACLE_TOLERANCE
    if not converged:
        logger.warning(f"Covariance quadrature changed by {change:.3e} on refinement (tolerance {ORACLE_TOLERANCE:g})")
    return CovarianceMatrix(matrix=fine.matrix, means=fine.means, converged=converged)


def covariance_oracle(params: AmplifierParams, squeeze: SqueezeParams, t: float) -> CovarianceMatrix:
    return covariance_of_state(squeezed_vacuum_at(params, squeeze, t))
