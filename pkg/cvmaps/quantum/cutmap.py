"""
cutmap.py - Cut maps: diagonal projection with trace renormalization.

A cut zeroes the selected rows and columns of a density matrix and divides by
the remaining trace, rho'' = P rho P / Tr(P rho P). Every principal minor of
rho'' is a (rescaled) principal minor of rho, so positivity survives; the
renormalization makes the map nonlinear.
"""

import logging
from typing import Iterable, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from cvmaps.core.exceptions import CutDegenerateError, MeasureError, StructureError
from cvmaps.quantum.densmat import DensityMatrix, hermitian_eigh
from cvmaps.quantum.measures import von_neumann_entropy, tsallis_entropy

logger = logging.getLogger(__name__)

DEGENERATE_TRACE = 1e-14
SUPPORT_THRESHOLD = 1e-12
SUPPORT_LEAKAGE = 1e-10


class CutSpec(BaseModel):
    """Indices of the rows and columns removed from an N x N matrix."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dim: int = Field(ge=2)
    removed_indices: Tuple[int, ...]

    @model_validator(mode="after")
    def check_removed(self) -> "CutSpec":
        removed = self.removed_indices
        if not removed:
            raise ValueError("removed_indices must not be empty")
        if len(removed) >= self.dim:
            raise ValueError(f"cannot remove {len(removed)} of {self.dim} indices")
        if any(b <= a for a, b in zip(removed, removed[1:])):
            raise ValueError(f"removed_indices must be strictly increasing, got {removed}")
        if removed[0] < 0 or removed[-1] >= self.dim:
            raise ValueError(f"removed_indices {removed} out of range for dim {self.dim}")
        return self

    @classmethod
    def removing(cls, dim: int, indices: Iterable[int]) -> "CutSpec":
        return cls(dim=dim, removed_indices=tuple(sorted(set(int(i) for i in indices))))

    @property
    def keep_count(self) -> int:
        return self.dim - len(self.removed_indices)

    @property
    def keep_mask(self) -> NDArray[np.bool_]:
        mask = np.ones(self.dim, dtype=bool)
        mask[list(self.removed_indices)] = False
        return mask

    @property
    def projector(self) -> NDArray[np.complex128]:
        return np.diag(self.keep_mask.astype(np.complex128))


class PreservationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    q: float
    delta_vn: float
    delta_tsallis: float
    relative_q_entropy: float
    relative_vn: float
    supports_compatible: bool


def _project(mat: NDArray, keep: NDArray[np.bool_]) -> Tuple[NDArray, float]:
    projected = np.where(np.outer(keep, keep), mat, 0.0)
    trace = float(np.trace(projected).real)
    if abs(trace) <= DEGENERATE_TRACE:
        raise CutDegenerateError(trace)
    return projected, trace


def _cut_mask(rho: DensityMatrix, keep: NDArray[np.bool_], compact: bool, structure: Optional[Tuple]) -> DensityMatrix:
    projected, trace = _project(rho.mat, keep)
    if compact:
        block = projected[np.ix_(keep, keep)] / trace
        return DensityMatrix(block, structure or ("single_mode", int(np.count_nonzero(keep))))
    return DensityMatrix(projected / trace, rho.structure)


def cut(rho: DensityMatrix, spec: CutSpec, compact: bool = True) -> DensityMatrix:
    """Remove ``spec.removed_indices`` from ``rho`` and renormalize.

    ``compact=False`` keeps the N x N shape with zero rows and columns;
    ``compact=True`` drops them. On bipartite input an arbitrary removal of
    combined indices no longer factors over the modes, so the compact result
    is returned as single mode.
    """
    if spec.dim != rho.dim:
        raise StructureError(f"CutSpec for dim {spec.dim} applied to a {rho.dim}x{rho.dim} matrix")
    if rho.is_bipartite:
        logger.warning(
            f"Cut of {len(spec.removed_indices)} combined indices on {rho.structure} breaks the subsystem "
            "structure; use cut_bipartite for per-mode removal"
        )
    return _cut_mask(rho, spec.keep_mask, compact, None)


def projector_form(rho: DensityMatrix, spec: CutSpec) -> DensityMatrix:
    """P rho P / Tr(P rho P) with an explicit diagonal 0/1 projector."""
    if spec.dim != rho.dim:
        raise StructureError(f"CutSpec for dim {spec.dim} applied to a {rho.dim}x{rho.dim} matrix")
    P = spec.projector
    projected = P @ rho.mat @ P
    trace = float(np.trace(projected).real)
    if abs(trace) <= DEGENERATE_TRACE:
        raise CutDegenerateError(trace)
    return DensityMatrix(projected / trace, rho.structure)


def _mode_keep(dim: int, removed: Iterable[int]) -> NDArray[np.bool_]:
    keep = np.ones(dim, dtype=bool)
    removed = list(removed)
    if removed:
        if min(removed) < 0 or max(removed) >= dim:
            raise StructureError(f"removed indices {removed} out of range for mode dimension {dim}")
        keep[removed] = False
    return keep


def cut_bipartite(
    rho: DensityMatrix,
    removed_mode1: Iterable[int] = (),
    removed_mode2: Iterable[int] = (),
    compact: bool = True,
) -> DensityMatrix:
    """Product-structured cut: remove per-mode indices from each mode.

    The kept combined indices are the tensor product of the kept per-mode
    sets, so the compact result stays bipartite and its partial traces are
    cuts of the subsystem matrices.
    """
    if not rho.is_bipartite:
        raise StructureError(f"cut_bipartite needs a bipartite density matrix, got {rho.structure}")
    n1, n2 = rho.mode_dims
    keep1 = _mode_keep(n1, removed_mode1)
    keep2 = _mode_keep(n2, removed_mode2)
    if not keep1.any() or not keep2.any():
        raise CutDegenerateError(0.0)
    keep = np.outer(keep1, keep2).ravel()
    structure = ("bipartite", int(keep1.sum()), int(keep2.sum()))
    return _cut_mask(rho, keep, compact, structure)


def _parity_removed(dim: int, keep_parity: int) -> Tuple[int, ...]:
    return tuple(range(1 - keep_parity, dim, 2))


def _parity_map(rho: DensityMatrix, keep_parity: int) -> DensityMatrix:
    if rho.is_bipartite:
        n1, n2 = rho.mode_dims
        return cut_bipartite(rho, _parity_removed(n1, keep_parity), _parity_removed(n2, keep_parity), compact=True)
    removed = _parity_removed(rho.dim, keep_parity)
    if not removed:
        return DensityMatrix(rho.mat, rho.structure, validate=False)
    if len(removed) >= rho.dim:
        raise CutDegenerateError(0.0)
    return _cut_mask(rho, CutSpec(dim=rho.dim, removed_indices=removed).keep_mask, True, None)


def odd_map(rho: DensityMatrix) -> DensityMatrix:
    """Keep indices 1, 3, 5, ... (per mode for bipartite input)."""
    return _parity_map(rho, 1)


def even_map(rho: DensityMatrix) -> DensityMatrix:
    """Keep indices 0, 2, 4, ... (per mode for bipartite input)."""
    return _parity_map(rho, 0)


def _overlaps(u: NDArray, v: NDArray) -> NDArray[np.float64]:
    return np.abs(u.conj().T @ v) ** 2


def preservation_report(rho: DensityMatrix, rho_cut_noncompact: DensityMatrix, q: float = 5.0) -> PreservationReport:
    """Entropy differences and relative entropies between rho and its non-compact cut.

    The relative q-entropy is Tr(rho^q rho''^(1-q)) / (1 - q), with the
    negative powers of rho'' taken on its support only; it does not vanish
    at rho'' = rho. The relative von Neumann entropy is +inf when rho has
    weight outside the support of rho''.
    """
    if q <= 0 or q == 1.0:
        raise MeasureError(f"q must be positive and != 1 (got {q!r}); for q=1 use the von Neumann quantities")
    if rho.dim != rho_cut_noncompact.dim:
        raise StructureError(
            f"preservation_report needs the non-compact cut: dims {rho.dim} and {rho_cut_noncompact.dim} differ"
        )
    spec_rho = rho.spectrum()
    spec_cut = rho_cut_noncompact.spectrum()
    delta_vn = von_neumann_entropy(spec_rho) - von_neumann_entropy(spec_cut)
    delta_tsallis = tsallis_entropy(spec_rho, q) - tsallis_entropy(spec_cut, q)

    e, u = hermitian_eigh(rho)
    f, v = hermitian_eigh(rho_cut_noncompact)
    e = np.clip(e, 0.0, None)
    overlaps = _overlaps(u, v)
    support = f > SUPPORT_THRESHOLD
    f_support = f[support]

    weights = (e ** q)[:, None] * overlaps[:, support] * (f_support ** (1.0 - q))[None, :]
    relative_q = float(np.sum(weights)) / (1.0 - q)

    leakage = float(np.sum(e[:, None] * overlaps[:, ~support]))
    supports_compatible = leakage <= SUPPORT_LEAKAGE
    if supports_compatible:
        e_log_e = float(np.sum(e[e > 0] * np.log(e[e > 0])))
        cross = float(np.sum(e[:, None] * overlaps[:, support] * np.log(f_support)[None, :]))
        relative_vn = e_log_e - cross
    else:
        logger.debug(f"rho leaks {leakage:.3e} outside the support of the cut; relative entropy is infinite")
        relative_vn = float("inf")

    return PreservationReport(
        q=q,
        delta_vn=delta_vn,
        delta_tsallis=delta_tsallis,
        relative_q_entropy=relative_q,
        relative_vn=relative_vn,
        supports_compatible=supports_compatible,
    )
