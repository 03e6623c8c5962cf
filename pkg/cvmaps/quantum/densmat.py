"""
densmat.py - Finite density matrices with bipartite combined indexing.

Bipartite matrices use a mode-1 major combined index: row ``alpha * n2 + beta``
holds mode-1 index ``alpha`` and mode-2 index ``beta``, which is exactly the
layout produced by ``numpy.kron(A, B)`` and by ``reshape(n1, n2, n1, n2)``.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from cvmaps.core.exceptions import (
    InvalidDensityMatrixError,
    NonHermitianError,
    StructureError,
)

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]

TAU_HERM = 1e-10
TAU_TRACE = 1e-8
TAU_PSD = 1e-9


def hermitian_asymmetry(mat: NDArray) -> float:
    """Largest |m_jk - conj(m_kj)| relative to the largest |entry|."""
    scale = float(np.max(np.abs(mat))) if mat.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(mat - mat.conj().T))) / scale


def _check_square(mat: NDArray) -> None:
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise StructureError(f"Expected a square matrix, got shape {mat.shape}")


def _check_hermitian(mat: NDArray) -> None:
    asym = hermitian_asymmetry(mat)
    if asym > TAU_HERM:
        raise NonHermitianError(asym, TAU_HERM)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: NDArray[np.float64]
    dim: int

    @property
    def total(self) -> float:
        return float(np.sum(self.eigenvalues))

    def clamped(self) -> NDArray[np.float64]:
        """Eigenvalues with round-off negatives in [-TAU_PSD, 0) set to zero."""
        values = self.eigenvalues
        noise = (values < 0.0) & (values >= -TAU_PSD)
        if np.any(noise):
            logger.debug(
                f"Clamping {int(np.count_nonzero(noise))} eigenvalues in [-{TAU_PSD:g}, 0), "
                f"most negative {float(values[noise].min()):.3e}"
            )
            values = np.where(noise, 0.0, values)
        return values


class DensityMatrix:
    """Hermitian, unit-trace, positive semi-definite matrix.

    ``structure`` is ``("single_mode", n)`` or ``("bipartite", n1, n2)``.
    Instances are immutable; the backing array is read-only.
    """

    __slots__ = ("_mat", "_structure", "_spectrum")

    def __init__(self, mat: NDArray, structure: Optional[Tuple] = None, validate: bool = True):
        arr = np.array(mat, dtype=np.complex128, copy=True)
        _check_square(arr)
        dim = arr.shape[0]
        if structure is None:
            structure = ("single_mode", dim)
        structure = tuple(structure)
        if structure[0] == "single_mode":
            if len(structure) != 2 or structure[1] != dim:
                raise StructureError(f"single_mode structure {structure} does not match dim {dim}")
        elif structure[0] == "bipartite":
            if len(structure) != 3 or structure[1] * structure[2] != dim:
                raise StructureError(f"bipartite structure {structure} does not match dim {dim}")
        else:
            raise StructureError(f"Unknown structure {structure[0]!r}")
        arr.setflags(write=False)
        self._mat = arr
        self._structure = structure
        self._spectrum = None
        if validate:
            self._validate()

    def _validate(self) -> None:
        _check_hermitian(self._mat)
        trace = complex(np.trace(self._mat))
        if abs(trace - 1.0) > TAU_TRACE:
            raise InvalidDensityMatrixError(f"Trace {trace:.12g} differs from 1 by more than {TAU_TRACE:g}", trace)
        lowest = float(self.spectrum().eigenvalues[-1])
        if lowest < -TAU_PSD:
            raise InvalidDensityMatrixError(
                f"Matrix is not positive semi-definite: eigenvalue {lowest:.3e} < -{TAU_PSD:g}", lowest
            )

    @property
    def mat(self) -> ComplexMatrix:
        return self._mat

    @property
    def structure(self) -> Tuple:
        return self._structure

    @property
    def dim(self) -> int:
        return self._mat.shape[0]

    @property
    def is_bipartite(self) -> bool:
        return self._structure[0] == "bipartite"

    @property
    def mode_dims(self) -> Tuple[int, int]:
        if not self.is_bipartite:
            raise StructureError("Single-mode density matrix has no mode dimensions")
        return self._structure[1], self._structure[2]

    def spectrum(self) -> Spectrum:
        if self._spectrum is None:
            self._spectrum = hermitian_eigenvalues(self._mat)
        return self._spectrum

    def __repr__(self) -> str:
        return f"DensityMatrix(structure={self._structure})"


def hermitian_eigenvalues(m: Union[DensityMatrix, NDArray]) -> Spectrum:
    """Real eigenvalues of a hermitian matrix, in descending order."""
    if isinstance(m, DensityMatrix):
        if m._spectrum is not None:
            return m._spectrum
        mat = m.mat
    else:
        mat = np.asarray(m)
        _check_square(mat)
        _check_hermitian(mat)
    values = linalg.eigvalsh(mat, check_finite=True)
    return Spectrum(eigenvalues=values[::-1].copy(), dim=mat.shape[0])


def hermitian_eigh(m: Union[DensityMatrix, NDArray]) -> Tuple[NDArray[np.float64], ComplexMatrix]:
    """Eigenvalues (descending) and matching eigenvector columns."""
    mat = m.mat if isinstance(m, DensityMatrix) else np.asarray(m)
    if not isinstance(m, DensityMatrix):
        _check_square(mat)
        _check_hermitian(mat)
    values, vectors = linalg.eigh(mat)
    return values[::-1].copy(), vectors[:, ::-1].copy()


def _as_tensor(rho: DensityMatrix) -> NDArray:
    if not rho.is_bipartite:
        raise StructureError(f"Operation needs a bipartite density matrix, got {rho.structure}")
    n1, n2 = rho.mode_dims
    return rho.mat.reshape(n1, n2, n1, n2)


def partial_trace(rho: DensityMatrix, mode: int) -> DensityMatrix:
    """Reduced density matrix of the kept ``mode`` (1 or 2)."""
    tensor = _as_tensor(rho)
    if mode == 1:
        reduced = np.einsum("ijkj->ik", tensor)
    elif mode == 2:
        reduced = np.einsum("ijil->jl", tensor)
    else:
        raise ValueError(f"mode must be 1 or 2, got {mode!r}")
    return DensityMatrix(reduced, ("single_mode", reduced.shape[0]))


def partial_transpose(rho: DensityMatrix, mode: int) -> ComplexMatrix:
    """Transpose the indices of one mode: mode 2 gives rho_{il,kj}, mode 1 gives rho_{kj,il}."""
    tensor = _as_tensor(rho)
    n1, n2 = rho.mode_dims
    if mode == 2:
        swapped = tensor.transpose(0, 3, 2, 1)
    elif mode == 1:
        swapped = tensor.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"mode must be 1 or 2, got {mode!r}")
    return np.ascontiguousarray(swapped).reshape(n1 * n2, n1 * n2)


def partial_transpose_matrix(mat: ComplexMatrix, dims: Tuple[int, int], mode: int) -> ComplexMatrix:
    """``partial_transpose`` on a raw combined-index array (no density-matrix checks)."""
    n1, n2 = dims
    tensor = np.asarray(mat).reshape(n1, n2, n1, n2)
    axes = (0, 3, 2, 1) if mode == 2 else (2, 1, 0, 3)
    return np.ascontiguousarray(tensor.transpose(axes)).reshape(n1 * n2, n1 * n2)


def tensor_product(rho_a: DensityMatrix, rho_b: DensityMatrix) -> DensityMatrix:
    mat = np.kron(rho_a.mat, rho_b.mat)
    return DensityMatrix(mat, ("bipartite", rho_a.dim, rho_b.dim))


def pure_state(vector: NDArray, structure: Optional[Tuple] = None) -> DensityMatrix:
    """|v><v| for a normalized copy of ``vector``."""
    v = np.asarray(vector, dtype=np.complex128).ravel()
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise InvalidDensityMatrixError("Cannot build a pure state from the zero vector")
    v = v / norm
    return DensityMatrix(np.outer(v, v.conj()), structure)


def random_density_matrix(rng: np.random.Generator, dim: int, rank: Optional[int] = None) -> DensityMatrix:
    """Ginibre-distributed density matrix of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}], got {rank}")
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    mat = g @ g.conj().T
    mat = (mat + mat.conj().T) / 2.0
    return DensityMatrix(mat / np.trace(mat).real)
