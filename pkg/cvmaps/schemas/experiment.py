from pathlib import Path
from typing import List, Literal, Optional, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from cvmaps.quantum.gaussian_state import AmplifierParams, SqueezeParams
from cvmaps.quantum.measures import MeasureKind


def _default_measures() -> List[MeasureKind]:
    return [
        MeasureKind(kind="tsallis", q=5.0),
        MeasureKind(kind="von_neumann"),
        MeasureKind(kind="linear"),
        MeasureKind(kind="log_negativity"),
    ]


class ConfigModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ComplexValue(ConfigModel):
    re: float
    im: float = 0.0

    def to_complex(self) -> complex:
        return complex(self.re, self.im)


class SqueezeConfig(ConfigModel):
    """Either ``beta`` or ``r`` (with optional ``phi``)."""

    beta: Optional[Union[float, ComplexValue]] = None
    r: Optional[float] = None
    phi: Optional[float] = None

    @model_validator(mode="after")
    def check_one_form(self) -> "SqueezeConfig":
        if (self.beta is None) == (self.r is None):
            raise ValueError("give exactly one of 'beta' or 'r'")
        if self.beta is not None and self.phi is not None:
            raise ValueError("'phi' only applies together with 'r'")
        if self.beta is not None and not abs(self._beta_value()) < 1.0:
            raise ValueError(f"|beta| must be < 1, got {abs(self._beta_value())!r}")
        return self

    def _beta_value(self) -> complex:
        if isinstance(self.beta, ComplexValue):
            return self.beta.to_complex()
        return complex(self.beta)

    def to_params(self) -> SqueezeParams:
        if self.beta is not None:
            return SqueezeParams.from_beta(self._beta_value())
        return SqueezeParams(r=self.r, phi=self.phi or 0.0)


class TimeConfig(ConfigModel):
    start: float = Field(default=0.0, ge=0)
    stop: Optional[float] = None
    samples: int = Field(ge=2)

    @model_validator(mode="after")
    def check_order(self) -> "TimeConfig":
        if self.stop is not None and self.stop <= self.start:
            raise ValueError(f"stop ({self.stop}) must be after start ({self.start})")
        return self

    def times(self, amplifier: AmplifierParams) -> NDArray[np.float64]:
        """``samples`` equally spaced times; ``stop`` defaults to one period after ``start``."""
        stop = self.stop if self.stop is not None else self.start + amplifier.period
        return np.linspace(self.start, stop, self.samples)


class ExperimentConfig(ConfigModel):
    schema_version: Literal[1]
    amplifier: AmplifierParams
    squeeze: SqueezeConfig
    time: TimeConfig
    grids: List[int] = Field(min_length=1)
    measures: List[MeasureKind] = Field(default_factory=_default_measures)
    negativity_grids: List[int] = Field(default_factory=list)
    coverage_sigmas: float = Field(default=6.0, gt=0)
    epsilon_island: float = Field(default=1e-8, gt=0)
    covariance_stencil: Literal["central", "forward"] = "central"
    output_dir: Optional[Path] = None

    @field_validator("grids", "negativity_grids")
    @classmethod
    def check_odd_grids(cls, value: List[int]) -> List[int]:
        for n in value:
            if n < 1 or n % 2 != 1:
                raise ValueError(f"points per mode must be odd and positive, got {n}")
        return value

    @field_validator("measures")
    @classmethod
    def check_unique_measures(cls, value: List[MeasureKind]) -> List[MeasureKind]:
        labels = [kind.label for kind in value]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate measures in {labels}")
        return value

    @property
    def entropy_measures(self) -> List[MeasureKind]:
        return [kind for kind in self.measures if not kind.needs_bipartite]

    @property
    def negativity_measures(self) -> List[MeasureKind]:
        return [kind for kind in self.measures if kind.needs_bipartite]
