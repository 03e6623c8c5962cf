"""
discretizer.py - Discretization of continuous two-mode kernels onto finite grids.

The map samples rho(x, y; x', y') at grid nodes x_i = i*dx, y_j = j*dy
(i, j = -M..M) and divides by the sampled diagonal sum, so that
sum_ij rho_ij,ij dx dy = 1 becomes Tr R = 1 with R = rho dx dy. The division
makes the map nonlinear: any positive rescaling of the kernel gives the same
matrix.
"""

import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from cvmaps.core.exceptions import DiscretizationError, StructureError
from cvmaps.quantum.densmat import DensityMatrix, hermitian_asymmetry, TAU_HERM
from cvmaps.quantum.gaussian_state import AmplifierParams, SqueezeParams, TwoModeSqueezedVacuum, squeezed_vacuum_at

logger = logging.getLogger(__name__)

Kernel = Callable[..., NDArray[np.complex128]]

DEFAULT_EPSILON = 1e-8
DEFAULT_COVERAGE_SIGMAS = 6.0
SYMMETRIZATION_WARN = 1e-12
# sampled times per period when scanning the marginal widths
AUTO_GRID_SAMPLES = 256


class GridSpec(BaseModel):
    """Uniform grid with ``points_per_mode`` = 2M+1 nodes on [-L, L] per mode.

    ``half_width_y`` gives mode 2 its own extent (and step); it defaults to
    ``half_width``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    points_per_mode: int = Field(ge=1)
    half_width: float = Field(gt=0)
    half_width_y: Optional[float] = Field(default=None, gt=0)

    @field_validator("points_per_mode")
    @classmethod
    def check_odd(cls, value: int) -> int:
        if value % 2 != 1:
            raise ValueError(f"points_per_mode must be odd so that 0 is a grid node, got {value}")
        return value

    @model_validator(mode="after")
    def check_finite(self) -> "GridSpec":
        if not math.isfinite(self.half_width) or (self.half_width_y is not None and not math.isfinite(self.half_width_y)):
            raise ValueError("grid half widths must be finite")
        return self

    @property
    def M(self) -> int:
        return (self.points_per_mode - 1) // 2

    def extent(self, mode: int = 1) -> float:
        if mode == 2 and self.half_width_y is not None:
            return self.half_width_y
        return self.half_width

    def step(self, mode: int = 1) -> float:
        if self.points_per_mode == 1:
            return 2.0 * self.extent(mode)
        return 2.0 * self.extent(mode) / (self.points_per_mode - 1)

    def axis(self, mode: int = 1) -> NDArray[np.float64]:
        indices = np.arange(-self.M, self.M + 1, dtype=np.float64)
        return indices * self.step(mode)

    def with_points(self, points_per_mode: int) -> "GridSpec":
        return self.model_copy(update={"points_per_mode": points_per_mode})


class IslandReport(BaseModel):
    """Truncation check of a discretized matrix.

    ``tail_converged`` is the boundary-shell test against ``epsilon``;
    ``resolved`` holds when the grid step is no wider than the narrowest
    marginal width of the state (always true when no width is supplied).
    """

    model_config = ConfigDict(frozen=True)

    epsilon: float
    max_boundary_magnitude: float
    tail_converged: bool
    grid_step: Optional[float] = None
    narrowest_sigma: Optional[float] = None
    resolved: bool = True
    converged: bool


def _shell_mask(rho: DensityMatrix) -> NDArray[np.bool_]:
    """Combined indices lying on the outermost grid shell."""
    if rho.is_bipartite:
        n1, n2 = rho.mode_dims
        alpha, beta = np.divmod(np.arange(n1 * n2), n2)
        return (alpha == 0) | (alpha == n1 - 1) | (beta == 0) | (beta == n2 - 1)
    mask = np.zeros(rho.dim, dtype=bool)
    mask[[0, -1]] = True
    return mask


def check_island(
    rho: DensityMatrix,
    epsilon: float = DEFAULT_EPSILON,
    grid: Optional[GridSpec] = None,
    narrowest_sigma: Optional[float] = None,
) -> IslandReport:
    """Whether the matrix block spanned by boundary-shell rows and columns is below ``epsilon``.

    Both indices are taken on the shell, reading the truncation condition
    |rho_ij| < epsilon for i, j beyond the island literally. With ``grid`` and
    ``narrowest_sigma`` the island also needs the widest grid step to be at
    most ``narrowest_sigma``: a grid that cannot resolve the state has not
    converged however small its tails are.
    """
    shell = _shell_mask(rho)
    block = rho.mat[np.ix_(shell, shell)]
    magnitude = float(np.max(np.abs(block))) if block.size else 0.0
    tail_converged = magnitude < epsilon
    step = None
    resolved = True
    if grid is not None and narrowest_sigma is not None:
        step = max(grid.step(1), grid.step(2))
        resolved = step <= narrowest_sigma
    return IslandReport(
        epsilon=epsilon,
        max_boundary_magnitude=magnitude,
        tail_converged=tail_converged,
        grid_step=step,
        narrowest_sigma=narrowest_sigma,
        resolved=resolved,
        converged=tail_converged and resolved,
    )


def _normalize(samples: NDArray, diagonal_sum: float, offending: Tuple) -> NDArray:
    if not math.isfinite(diagonal_sum) or diagonal_sum <= 0.0:
        raise DiscretizationError(f"Sampled diagonal sum {diagonal_sum!r} is not positive", offending)
    return samples / diagonal_sum


def _hermitize(mat: NDArray) -> NDArray:
    deviation = hermitian_asymmetry(mat)
    logger.debug(f"Relative hermiticity deviation before symmetrization: {deviation:.3e}")
    if deviation > TAU_HERM:
        raise DiscretizationError(f"Kernel samples are not hermitian (relative deviation {deviation:.3e})")
    if deviation > SYMMETRIZATION_WARN:
        logger.warning(f"Kernel samples deviate from hermiticity by {deviation:.3e} before symmetrization")
    return (mat + mat.conj().T) / 2.0


def _first_non_finite(samples: NDArray, x: NDArray, y: NDArray) -> Optional[Tuple]:
    bad = ~np.isfinite(samples)
    if not np.any(bad):
        return None
    index = np.unravel_index(int(np.argmax(bad)), samples.shape)
    i, j, k, l = index
    return (float(x[i]), float(y[j]), float(x[k]), float(y[l]))


def discretize(kernel: Kernel, grid: GridSpec) -> Tuple[DensityMatrix, IslandReport]:
    """Sample ``kernel(x1, x2, x1p, x2p)`` on the grid into a bipartite(n, n) density matrix."""
    x = grid.axis(1)
    y = grid.axis(2)
    n = grid.points_per_mode
    samples = np.asarray(
        kernel(x[:, None, None, None], y[None, :, None, None], x[None, None, :, None], y[None, None, None, :]),
        dtype=np.complex128,
    )
    samples = np.broadcast_to(samples, (n, n, n, n))
    offending = _first_non_finite(samples, x, y)
    if offending is not None:
        raise DiscretizationError("Kernel sample is not finite", offending)
    flat = samples.reshape(n * n, n * n)
    diagonal_sum = float(np.sum(np.real(np.diagonal(flat))))
    mat = _hermitize(_normalize(flat, diagonal_sum, (float(x[0]), float(y[0]))))
    rho = DensityMatrix(mat, ("bipartite", n, n))
    return rho, check_island(rho)


def reduced_density_matrix(kernel: Kernel, grid: GridSpec, mode: int = 1) -> DensityMatrix:
    """Discretize and trace out the other mode in one pass.

    The traced axis is accumulated slab by slab in index order, so memory
    stays O(n^2) and the result does not depend on scheduling.
    """
    if mode not in (1, 2):
        raise ValueError(f"mode must be 1 or 2, got {mode!r}")
    x = grid.axis(1)
    y = grid.axis(2)
    kept, traced = (x, y) if mode == 1 else (y, x)
    n = kept.size
    reduced = np.zeros((n, n), dtype=np.complex128)
    diagonal_sum = 0.0
    for value in traced:
        if mode == 1:
            slab = kernel(kept[:, None], value, kept[None, :], value)
        else:
            slab = kernel(value, kept[:, None], value, kept[None, :])
        slab = np.broadcast_to(np.asarray(slab, dtype=np.complex128), (n, n))
        if not np.all(np.isfinite(slab)):
            i, k = np.unravel_index(int(np.argmax(~np.isfinite(slab))), slab.shape)
            point = (float(kept[i]), float(value), float(kept[k]), float(value))
            if mode == 2:
                point = (float(value), float(kept[i]), float(value), float(kept[k]))
            raise DiscretizationError("Kernel sample is not finite", point)
        reduced += slab
        diagonal_sum += float(np.sum(np.real(np.diagonal(slab))))
    mat = _hermitize(_normalize(reduced, diagonal_sum, (float(x[0]), float(y[0]))))
    return DensityMatrix(mat, ("single_mode", n))


def marginal_sigmas(params: AmplifierParams, squeeze: SqueezeParams, times: NDArray) -> NDArray[np.float64]:
    """Per-time marginal standard deviations (sigma_x1, sigma_x2) of |psi|^2."""
    sigmas = []
    for t in times:
        cov = squeezed_vacuum_at(params, squeeze, float(t)).marginal_covariance()
        sigmas.append(np.sqrt(np.diag(cov)))
    return np.array(sigmas)


def narrowest_marginal_sigma(state: TwoModeSqueezedVacuum) -> float:
    """Smaller of the two marginal standard deviations of |psi|^2."""
    return float(np.min(np.sqrt(np.diag(state.marginal_covariance()))))


def auto_grid(
    params: AmplifierParams,
    squeeze: SqueezeParams,
    t_max: float,
    n: int,
    coverage_sigmas: float = DEFAULT_COVERAGE_SIGMAS,
) -> GridSpec:
    """Grid whose half width covers ``coverage_sigmas`` of the widest marginal over [0, t_max]."""
    if coverage_sigmas <= 0:
        raise ValueError(f"coverage_sigmas must be positive, got {coverage_sigmas!r}")
    if t_max < 0:
        raise ValueError(f"t_max must be non-negative, got {t_max!r}")
    samples = max(2, int(math.ceil(AUTO_GRID_SAMPLES * max(t_max, 0.0) / params.period)) + 1)
    times = np.linspace(0.0, t_max, samples)
    # the analytic maxima of |eta| sit at odd multiples of period/2
    half_periods = np.arange(0.5, t_max / params.period + 0.5, 1.0) * params.period
    times = np.concatenate([times, half_periods[half_periods <= t_max]])
    widest = float(np.max(marginal_sigmas(params, squeeze, times)))
    half_width = coverage_sigmas * widest
    logger.debug(f"auto_grid: widest marginal sigma {widest:.6g} -> L = {half_width:.6g}")
    return GridSpec(points_per_mode=n, half_width=half_width)


def require_single_mode(rho: DensityMatrix, grid: GridSpec) -> None:
    if rho.is_bipartite:
        raise StructureError("Expected a reduced (single-mode) density matrix")
    if rho.dim != grid.points_per_mode:
        raise StructureError(f"Matrix dimension {rho.dim} does not match grid with {grid.points_per_mode} points")
