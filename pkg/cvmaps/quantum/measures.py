"""
measures.py - Entanglement measures: numeric path from finite density matrices
and closed forms for the two-mode squeezed vacuum.

The reduced spectrum of the squeezed vacuum is geometric,
e_i = (1 - |eta|^2) |eta|^(2i), so every entropy is a function of |eta| alone.
"""

import logging
import math
from typing import Literal, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.special import entr

from cvmaps.core.exceptions import MeasureError, StateDomainError, StructureError
from cvmaps.quantum.densmat import (
    DensityMatrix,
    Spectrum,
    TAU_PSD,
    TAU_TRACE,
    hermitian_eigenvalues,
    partial_trace,
    partial_transpose,
)

logger = logging.getLogger(__name__)

DEFAULT_Q = 5.0
NEGATIVITY_CUTOFF = 1e-12
SPECTRUM_CUTOFF = 1e-18
MAX_SPECTRUM_TERMS = 1_000_000

MeasureName = Literal["tsallis", "von_neumann", "linear", "log_negativity", "negativity"]


class MeasureKind(BaseModel):
    """A measure and, for Tsallis, its entropic index q (default 5)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: MeasureName
    q: Optional[float] = None

    @model_validator(mode="before")
    @classmethod
    def default_q(cls, data):
        if isinstance(data, dict) and data.get("kind") == "tsallis" and data.get("q") is None:
            data = {**data, "q": DEFAULT_Q}
        return data

    @model_validator(mode="after")
    def check_q(self) -> "MeasureKind":
        if self.kind == "tsallis":
            if not self.q > 0 or self.q == 1.0:
                raise ValueError(f"Tsallis q must be positive and != 1, got {self.q!r}; q=1 is von_neumann")
        elif self.q is not None:
            raise ValueError(f"q only applies to tsallis, not {self.kind}")
        return self

    @property
    def label(self) -> str:
        if self.kind == "tsallis":
            return f"tsallis_q{self.q:g}"
        return self.kind

    @property
    def needs_bipartite(self) -> bool:
        return self.kind in ("log_negativity", "negativity")


class MeasureReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: float
    grid_n: int
    kind: MeasureKind
    numeric: float
    analytic: float
    abs_error: float

    @classmethod
    def compare(cls, t: float, grid_n: int, kind: MeasureKind, numeric: float, analytic: float) -> "MeasureReport":
        return cls(t=t, grid_n=grid_n, kind=kind, numeric=numeric, analytic=analytic, abs_error=abs(numeric - analytic))


def _eigenvalues(spec: Union[Spectrum, ArrayLike]) -> NDArray[np.float64]:
    if isinstance(spec, Spectrum):
        values = spec.clamped()
    else:
        values = np.asarray(spec, dtype=np.float64)
        values = np.where((values < 0.0) & (values >= -TAU_PSD), 0.0, values)
    if values.size and values.min() < 0.0:
        raise MeasureError(f"Spectrum has a negative eigenvalue {values.min():.3e} below -{TAU_PSD:g}")
    total = float(np.sum(values))
    if abs(total - 1.0) > TAU_TRACE:
        raise MeasureError(f"Spectrum sums to {total:.12g}, not 1 within {TAU_TRACE:g}")
    return values


def _check_q(q: float) -> None:
    if q == 1.0:
        raise MeasureError("Tsallis entropy at q=1 is the von Neumann entropy; use von_neumann_entropy")
    if not q > 0:
        raise MeasureError(f"q must be positive, got {q!r}")


def tsallis_entropy(spec: Union[Spectrum, ArrayLike], q: float = DEFAULT_Q) -> float:
    _check_q(q)
    e = _eigenvalues(spec)
    e = e[e > 0.0]
    return (float(np.sum(e ** q)) - 1.0) / (1.0 - q)


def von_neumann_entropy(spec: Union[Spectrum, ArrayLike]) -> float:
    """-sum e ln e with 0 ln 0 = 0."""
    e = _eigenvalues(spec)
    return float(np.sum(entr(e)))


def linear_entropy(spec: Union[Spectrum, ArrayLike]) -> float:
    e = _eigenvalues(spec)
    return 1.0 - float(np.sum(e * e))


def _negative_part(rho: DensityMatrix, mode: int) -> NDArray[np.float64]:
    if not rho.is_bipartite:
        raise StructureError(f"Negativity needs a bipartite density matrix, got {rho.structure}")
    values = hermitian_eigenvalues(partial_transpose(rho, mode)).eigenvalues
    negative = values[values < -NEGATIVITY_CUTOFF]
    logger.debug(f"Partial transpose has {negative.size} negative eigenvalues beyond {NEGATIVITY_CUTOFF:g}")
    return negative


def negativity(rho: DensityMatrix, mode: int = 2) -> float:
    """Sum of |negative eigenvalues| of the partial transpose."""
    return float(np.sum(np.abs(_negative_part(rho, mode))))


def log_negativity(rho: DensityMatrix, mode: int = 2) -> float:
    return float(np.log2(2.0 * negativity(rho, mode) + 1.0))


def _check_eta_abs(eta_abs: float) -> float:
    eta_abs = float(eta_abs)
    if not 0.0 <= eta_abs < 1.0:
        raise StateDomainError(f"eta_abs must lie in [0, 1), got {eta_abs!r}")
    return eta_abs


def analytic_spectrum(eta_abs: float) -> Spectrum:
    """(1 - |eta|^2) |eta|^(2i), truncated where the terms drop below 1e-18."""
    eta_abs = _check_eta_abs(eta_abs)
    x = eta_abs * eta_abs
    if x == 0.0:
        return Spectrum(eigenvalues=np.array([1.0]), dim=1)
    terms = int(math.floor(math.log(SPECTRUM_CUTOFF / (1.0 - x)) / math.log(x))) + 1
    terms = min(max(terms, 1), MAX_SPECTRUM_TERMS)
    values = (1.0 - x) * x ** np.arange(terms, dtype=np.float64)
    return Spectrum(eigenvalues=values, dim=terms)


def analytic_measure(kind: MeasureKind, eta_abs: float) -> float:
    """Closed-form value of ``kind`` for a squeezed vacuum of amplitude |eta|."""
    a = _check_eta_abs(eta_abs)
    x = a * a
    if x == 0.0:
        return 0.0
    if kind.kind == "linear":
        return 2.0 * x / (1.0 + x)
    if kind.kind == "von_neumann":
        return -math.log1p(-x) - x * math.log(x) / (1.0 - x)
    if kind.kind == "tsallis":
        q = kind.q
        return ((1.0 - x) ** q / (1.0 - x ** q) - 1.0) / (1.0 - q)
    if kind.kind == "log_negativity":
        return math.log2((1.0 + a) / (1.0 - a))
    if kind.kind == "negativity":
        return a / (1.0 - a)
    raise MeasureError(f"Unknown measure {kind.kind!r}")


def numeric_measure(kind: MeasureKind, rho: DensityMatrix, mode: int = 1) -> float:
    """Evaluate ``kind`` on a discretized matrix.

    Entropies use the reduced spectrum of ``mode`` (or the matrix itself when
    it is already single mode); negativity measures need the bipartite matrix.
    """
    if kind.needs_bipartite:
        if kind.kind == "log_negativity":
            return log_negativity(rho, mode)
        return negativity(rho, mode)
    reduced = partial_trace(rho, mode) if rho.is_bipartite else rho
    spectrum = reduced.spectrum()
    if kind.kind == "tsallis":
        return tsallis_entropy(spectrum, kind.q)
    if kind.kind == "von_neumann":
        return von_neumann_entropy(spectrum)
    return linear_entropy(spectrum)
