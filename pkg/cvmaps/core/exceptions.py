"""
exceptions.py - Error hierarchy for cvmaps.

Every error carries a ``detail`` message and the process ``exit_code`` the CLI
maps it to, so command handlers can report and exit without inspecting types.
"""

from typing import Any, Optional

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG_ERROR = 2


class CvMapsError(Exception):
    exit_code: int = EXIT_FAILURE

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class ConfigError(CvMapsError, ValueError):
    exit_code = EXIT_CONFIG_ERROR


class StructureError(CvMapsError, ValueError):
    """Operation needs a different matrix structure (bipartite vs single mode)."""


class NonHermitianError(CvMapsError, ValueError):
    def __init__(self, max_asymmetry: float, tolerance: float):
        super().__init__(
            f"Matrix is not hermitian: max relative asymmetry {max_asymmetry:.3e} exceeds {tolerance:.1e}"
        )
        self.max_asymmetry = max_asymmetry


class InvalidDensityMatrixError(CvMapsError, ValueError):
    def __init__(self, detail: str, observed: Any = None):
        super().__init__(detail)
        self.observed = observed


class SingularityError(CvMapsError, ArithmeticError):
    def __init__(self, t: float, magnitude: float):
        super().__init__(f"eta(t) denominator vanishes at t={t!r} (|denominator|={magnitude:.3e})")
        self.t = t


class DegenerateGaussianError(CvMapsError, ArithmeticError):
    pass


class StateDomainError(CvMapsError, ValueError):
    pass


class DiscretizationError(CvMapsError, ArithmeticError):
    def __init__(self, detail: str, grid_point: Optional[tuple] = None):
        if grid_point is not None:
            detail = f"{detail} at grid point {grid_point}"
        super().__init__(detail)
        self.grid_point = grid_point


class CutDegenerateError(CvMapsError, ArithmeticError):
    def __init__(self, projected_trace: float):
        super().__init__(
            f"Projected trace {projected_trace:.3e} is zero: the state lives on the removed indices"
        )
        self.projected_trace = projected_trace


class MeasureError(CvMapsError, ValueError):
    pass
