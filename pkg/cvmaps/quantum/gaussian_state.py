"""
gaussian_state.py - Two-mode squeezed vacuum evolving in a parametric amplifier.

The state stays a two-mode squeezed vacuum for all t; its complex amplitude
eta(t) carries the whole dynamics and the position representation is the
Gaussian psi_eta(x1, x2) built from it.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from cvmaps.core.exceptions import (
    DegenerateGaussianError,
    SingularityError,
    StateDomainError,
)

logger = logging.getLogger(__name__)

SINGULAR_DENOMINATOR = 1e-12
BRANCH_JUMP = 0.1


class AmplifierParams(BaseModel):
    """Signal, idler and pump frequencies plus the coupling constant.

    ``Omega`` defaults to omega_pump - omega_a - omega_b and ``nu`` to
    sqrt(Omega^2/4 - kappa^2); either can be overridden explicitly.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    omega_a: float
    omega_b: float = Field(gt=0)
    omega_pump: float
    kappa: float = Field(gt=0)
    Omega_override: Optional[float] = None
    nu_override: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def check_nu_is_real(self) -> "AmplifierParams":
        if self.nu_override is None:
            nu_squared = self.Omega ** 2 / 4.0 - self.kappa ** 2
            if nu_squared <= 0.0:
                raise ValueError(
                    f"nu^2 = Omega^2/4 - kappa^2 = {nu_squared:g} is not positive for Omega={self.Omega:g}; "
                    "set Omega_override or nu_override"
                )
        return self

    @property
    def Omega(self) -> float:
        if self.Omega_override is not None:
            return float(self.Omega_override)
        return self.omega_pump - self.omega_a - self.omega_b

    @property
    def nu(self) -> float:
        if self.nu_override is not None:
            return float(self.nu_override)
        return math.sqrt(self.Omega ** 2 / 4.0 - self.kappa ** 2)

    @property
    def gamma(self) -> complex:
        # Omega/(2 nu) > 1 for any real nu, so gamma sits on the principal complex branch
        return complex(np.arctanh(complex(self.Omega / (2.0 * self.nu))))

    @property
    def period(self) -> float:
        return math.pi / self.nu


class SqueezeParams(BaseModel):
    """Input squeezing; beta = -exp(i phi) tanh r."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    r: float = Field(ge=0)
    phi: float = 0.0

    @field_validator("r")
    @classmethod
    def check_finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("r must be finite")
        return value

    @classmethod
    def from_beta(cls, beta: complex) -> "SqueezeParams":
        beta = complex(beta)
        if abs(beta) >= 1.0:
            raise ValueError(f"|beta| must be < 1, got {abs(beta)!r}")
        phi = float(np.angle(-beta)) if beta != 0 else 0.0
        return cls(r=float(np.arctanh(abs(beta))), phi=phi)

    @property
    def beta(self) -> complex:
        return complex(-np.exp(1j * self.phi) * np.tanh(self.r))


@dataclass(frozen=True)
class EtaTrajectory:
    times: NDArray[np.float64]
    eta_values: NDArray[np.complex128]
    continuity_ok: bool = True

    @property
    def eta_abs(self) -> NDArray[np.float64]:
        return np.abs(self.eta_values)


def eta_at(params: AmplifierParams, squeeze: SqueezeParams, t: float) -> complex:
    """Complex amplitude eta(t) of the evolved two-mode squeezed vacuum."""
    nu, Omega, kappa = params.nu, params.Omega, params.kappa
    gamma = params.gamma
    tan_term = np.tan(nu * t + 1j * gamma)
    if squeeze.r == 0.0:
        # coth r -> infinity removes the first term entirely
        inner = -2j * nu * tan_term - Omega
    else:
        denominator = Omega - 2.0 * kappa / math.tanh(squeeze.r) + 2j * nu * tan_term
        if abs(denominator) < SINGULAR_DENOMINATOR:
            raise SingularityError(t, abs(denominator))
        c = np.cos(nu * t) - 1j * np.sin(nu * t) * np.tanh(gamma)
        inner = 4.0 * kappa ** 2 * np.exp(-2.0 * np.log(c)) / denominator - 2j * nu * tan_term - Omega
    eta = complex(np.exp(-1j * params.omega_pump * t) / (2.0 * kappa) * inner)
    if not abs(eta) < 1.0:
        raise StateDomainError(f"|eta(t={t!r})| = {abs(eta)!r} is not below 1; state is not normalizable")
    return eta


def eta_trajectory(params: AmplifierParams, squeeze: SqueezeParams, times: ArrayLike) -> EtaTrajectory:
    times = np.asarray(times, dtype=np.float64)
    values = np.array([eta_at(params, squeeze, float(t)) for t in times], dtype=np.complex128)
    continuity_ok = True
    if times.size > 1:
        steps = np.diff(times)
        jumps = np.abs(np.diff(np.abs(values)))
        fine = np.abs(steps) <= params.period / 1000.0
        suspicious = fine & (jumps > BRANCH_JUMP)
        if np.any(suspicious):
            index = int(np.argmax(suspicious))
            logger.warning(
                f"|eta| jumps by {jumps[index]:.3f} between t={times[index]:.6g} and t={times[index + 1]:.6g}; "
                "possible branch jump in the complex logarithm"
            )
            continuity_ok = False
    return EtaTrajectory(times=times, eta_values=values, continuity_ok=continuity_ok)


class TwoModeSqueezedVacuum:
    """sqrt(1-|eta|^2) sum_i eta^i |i,i> in the quadrature representation.

    Mode 1 has unit frequency, mode 2 frequency ``omega_b``.
    """

    def __init__(self, eta: complex, omega_b: float = 1.0):
        eta = complex(eta)
        if abs(eta) >= 1.0:
            raise StateDomainError(f"|eta| must be < 1, got {abs(eta)!r}")
        if omega_b <= 0:
            raise StateDomainError(f"omega_b must be positive, got {omega_b!r}")
        if abs(1.0 - eta * eta) < 1e-12:
            raise DegenerateGaussianError(f"eta^2 = 1 (eta={eta!r}) gives a degenerate Gaussian")
        self.eta = eta
        self.omega_b = float(omega_b)

    @cached_property
    def exponent_coefficients(self) -> tuple:
        """(a, b, c) with psi ~ exp(a x1 x2 - b x1^2 - c x2^2)."""
        eta, wb = self.eta, self.omega_b
        scale = 1.0 / (1.0 - eta * eta)
        a = 2.0 * math.sqrt(wb) * eta * scale
        b = 0.5 * (1.0 + eta * eta) * scale
        c = 0.5 * (1.0 + eta * eta) * wb * scale
        return a, b, c

    @cached_property
    def prefactor(self) -> complex:
        eta = self.eta
        return complex(self.omega_b ** 0.25 / math.sqrt(math.pi) * np.sqrt((1.0 - abs(eta) ** 2) / (1.0 - eta * eta)))

    def wavefunction(self, x1: ArrayLike, x2: ArrayLike) -> NDArray[np.complex128]:
        x1 = np.asarray(x1, dtype=np.float64)
        x2 = np.asarray(x2, dtype=np.float64)
        a, b, c = self.exponent_coefficients
        return self.prefactor * np.exp(a * x1 * x2 - b * x1 ** 2 - c * x2 ** 2)

    def gradient_log(self, x1: ArrayLike, x2: ArrayLike) -> tuple:
        """(d/dx1, d/dx2) of the exponent; d psi/dx_k = psi * gradient_log[k]."""
        a, b, c = self.exponent_coefficients
        x1 = np.asarray(x1, dtype=np.float64)
        x2 = np.asarray(x2, dtype=np.float64)
        return a * x2 - 2.0 * b * x1, a * x1 - 2.0 * c * x2

    def kernel(self, x1: ArrayLike, x2: ArrayLike, x1p: ArrayLike, x2p: ArrayLike) -> NDArray[np.complex128]:
        """rho(x1, x2; x1p, x2p) = psi(x1, x2) conj(psi(x1p, x2p)).

        Arguments broadcast. The product is always formed with the
        lexicographically smaller point first so that swapping the two
        points returns the exact complex conjugate.
        """
        x1, x2, x1p, x2p = np.broadcast_arrays(
            *(np.asarray(v, dtype=np.float64) for v in (x1, x2, x1p, x2p))
        )
        left = self.wavefunction(x1, x2)
        right = self.wavefunction(x1p, x2p)
        swapped = (x1 > x1p) | ((x1 == x1p) & (x2 > x2p))
        same = (x1 == x1p) & (x2 == x2p)
        forward = left * right.conj()
        backward = (right * left.conj()).conj()
        values = np.where(swapped, backward, forward)
        return np.where(same, np.abs(left) ** 2 + 0j, values)

    def marginal_covariance(self) -> NDArray[np.float64]:
        """2x2 covariance of the position density |psi|^2."""
        a, b, c = self.exponent_coefficients
        # |psi|^2 ~ exp(-x^T M x)
        precision = np.array([[2.0 * b.real, -a.real], [-a.real, 2.0 * c.real]])
        return np.linalg.inv(precision) / 2.0


def squeezed_vacuum_at(params: AmplifierParams, squeeze: SqueezeParams, t: float) -> TwoModeSqueezedVacuum:
    return TwoModeSqueezedVacuum(eta_at(params, squeeze, t), params.omega_b)


def wavefunction(params: AmplifierParams, squeeze: SqueezeParams, t: float, x1: ArrayLike, x2: ArrayLike):
    return squeezed_vacuum_at(params, squeeze, t).wavefunction(x1, x2)


def kernel(params: AmplifierParams, squeeze: SqueezeParams, t: float, x1, x2, x1p, x2p):
    return squeezed_vacuum_at(params, squeeze, t).kernel(x1, x2, x1p, x2p)
