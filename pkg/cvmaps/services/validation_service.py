"""
validation_service.py - Invariant suite and acceptance checks behind ``validate``.

Each suite returns ``CheckResult`` items; a suite that raises is recorded as
one failed check so the remaining suites still run. Checks flagged
``required=False`` are reported but do not fail the run.
"""

import itertools
import logging
import math
from typing import Callable, Dict, List, Sequence

import numpy as np

from cvmaps.core.exceptions import CvMapsError
from cvmaps.quantum.covariance import covariance_of_state, sigma_pp, sigma_qq
from cvmaps.quantum.cutmap import CutSpec, cut, even_map, odd_map, preservation_report, projector_form
from cvmaps.quantum.densmat import DensityMatrix, hermitian_asymmetry, partial_trace, random_density_matrix
from cvmaps.quantum.discretizer import GridSpec, auto_grid, discretize, reduced_density_matrix
from cvmaps.quantum.gaussian_state import TwoModeSqueezedVacuum, eta_at, eta_trajectory
from cvmaps.quantum.measures import MeasureKind, analytic_measure, linear_entropy, von_neumann_entropy
from cvmaps.schemas.experiment import ExperimentConfig
from cvmaps.schemas.report import CheckResult, ValidationReport
from cvmaps.services.covariance_service import covariance_service
from cvmaps.services.demo_service import demo_service
from cvmaps.services.sweep_service import sweep_service

logger = logging.getLogger(__name__)

DEFAULT_SEED = 1234
ORDERING_SLACK = 1e-9
ENTROPY_TOLERANCE = 5e-3
NEGATIVITY_TOLERANCE = 1e-2
ANALYTIC_PERIODICITY = 1e-6
PRESERVATION_POINTS = 65
PRESERVATION_TOLERANCE = 1e-2
CUT_MATRICES = 200
CUT_TOLERANCE = 1e-12
PSD_TOLERANCE = 1e-9
RELATIVE_ENTROPY_DRAWS = 100
DISCRETIZATION_DRAWS = 50
VACUUM_GRIDS = (25, 49, 97)
VACUUM_HALF_WIDTH = 6.0
ORDER_RANGE = (1.7, 2.3)
COVARIANCE_SAMPLES = 9

# |eta| = 0.05 reference values
SPOT_VALUES = (
    (MeasureKind(kind="linear"), 4.9875e-3, 1e-6),
    (MeasureKind(kind="von_neumann"), 1.752e-2, 1e-5),
    (MeasureKind(kind="tsallis", q=5.0), 3.110e-3, 1e-6),
    (MeasureKind(kind="log_negativity"), 0.14439, 1e-5),
)


def _check(module: str, prop: str, passed: bool, observed, expected, required: bool = True) -> CheckResult:
    return CheckResult(
        module=module, property=prop, passed=bool(passed), observed=str(observed), expected=str(expected), required=required
    )


def _non_increasing(values: Sequence[float]) -> bool:
    return all(b <= a + ORDERING_SLACK for a, b in zip(values, values[1:]))


def _within_one_sample(t: float, targets: np.ndarray, dt: float) -> bool:
    return bool(np.min(np.abs(targets - t)) <= dt * (1.0 + 1e-9))


class ValidationService:
    def __init__(self, seed: int = DEFAULT_SEED):
        self.seed = seed

    def run(self, config: ExperimentConfig) -> ValidationReport:
        suites: Dict[str, Callable[[ExperimentConfig], List[CheckResult]]] = {
            "measures": self.spot_values,
            "sweep": self.sweep_checks,
            "cutmap": self.cut_map_suite,
            "cutmap-preservation": self.parity_preservation,
            "covariance": self.covariance_checks,
            "discretizer": self.discretization_checks,
        }
        checks: List[CheckResult] = []
        for name, suite in suites.items():
            logger.info(f"Running {name} checks")
            try:
                checks.extend(suite(config))
            except (CvMapsError, ArithmeticError, ValueError) as e:
                logger.error(f"{name} checks aborted: {e}")
                checks.append(_check(name, "suite completed", False, f"{type(e).__name__}: {e}", "no error"))
        for check in checks:
            level = logging.INFO if check.passed or not check.required else logging.WARNING
            logger.log(level, f"[{'PASS' if check.passed else 'FAIL'}] {check.module}: {check.property} "
                              f"(observed {check.observed}, expected {check.expected})")
        return ValidationReport(checks=checks)

    def spot_values(self, config: ExperimentConfig) -> List[CheckResult]:
        checks = []
        for kind, expected, tolerance in SPOT_VALUES:
            value = analytic_measure(kind, 0.05)
            checks.append(_check("measures", f"{kind.label} at |eta|=0.05", abs(value - expected) <= tolerance,
                                 f"{value:.6e}", f"{expected:.6e} +- {tolerance:g}"))
        squeeze = config.squeeze.to_params()
        eta0 = abs(eta_at(config.amplifier, squeeze, 0.0))
        expected = math.tanh(squeeze.r)
        checks.append(_check("gaussian_state", "|eta(0)| = tanh r", abs(eta0 - expected) <= 1e-12, eta0, expected))
        return checks

    def sweep_checks(self, config: ExperimentConfig) -> List[CheckResult]:
        reports, summary = sweep_service.evaluate(config)
        checks = []
        times = config.time.times(config.amplifier)
        dt = float(times[1] - times[0])
        period = config.amplifier.period
        spans_period = config.time.stop is None
        squeeze = config.squeeze.to_params()

        for label in dict.fromkeys(row.measure for row in summary):
            rows = sorted((row for row in summary if row.measure == label), key=lambda row: row.grid_n)
            finest = rows[-1]
            kind = next(r.kind for r in reports if r.kind.label == label)
            tolerance = NEGATIVITY_TOLERANCE if kind.needs_bipartite else ENTROPY_TOLERANCE
            checks.append(_check("measures", f"{label} max error at n={finest.grid_n}",
                                 finest.max_abs_error <= tolerance, f"{finest.max_abs_error:.3e}", f"<= {tolerance:g}"))
            errors = [row.max_abs_error for row in rows]
            checks.append(_check("measures", f"{label} error non-increasing over grids {[r.grid_n for r in rows]}",
                                 _non_increasing(errors), [f"{e:.3e}" for e in errors], "non-increasing"))

            mine = [r for r in reports if r.kind.label == label]
            by_time: Dict[float, set] = {}
            for r in mine:
                by_time.setdefault(r.t, set()).add(r.analytic)
            checks.append(_check("cli", f"{label} analytic column independent of grid",
                                 all(len(values) == 1 for values in by_time.values()), "", "one value per t"))

            shifted = max(
                abs(analytic_measure(kind, abs(eta_at(config.amplifier, squeeze, float(t))))
                    - analytic_measure(kind, abs(eta_at(config.amplifier, squeeze, float(t) + period))))
                for t in times
            )
            checks.append(_check("measures", f"{label} analytic periodicity", shifted <= ANALYTIC_PERIODICITY,
                                 f"{shifted:.3e}", f"<= {ANALYTIC_PERIODICITY:g}"))

            analytic_series = np.array([r.analytic for r in mine if r.grid_n == finest.grid_n])
            if spans_period:
                series = [r.numeric for r in mine if r.grid_n == finest.grid_n]
                drift = abs(series[-1] - series[0])
                checks.append(_check("measures", f"{label} numeric periodicity at n={finest.grid_n}",
                                     drift <= tolerance, f"{drift:.3e}", f"<= {tolerance:g}"))
            if np.ptp(analytic_series) > 1e-12:
                for row in rows:
                    series = np.array([r.numeric for r in mine if r.grid_n == row.grid_n])
                    checks.extend(self._extrema(label, row.grid_n, times, series, dt, period,
                                                maxima_required=row.grid_n == finest.grid_n))
        return checks

    @staticmethod
    def _extrema(label: str, n: int, times: np.ndarray, series: np.ndarray, dt: float, period: float,
                 maxima_required: bool) -> List[CheckResult]:
        """Minima are required on every grid; maxima only where ``maxima_required``."""
        m_max = int(math.ceil(times[-1] / period)) + 1
        minima = np.arange(0, m_max + 1) * period
        maxima = (np.arange(0, m_max + 1) + 0.5) * period
        t_min = float(times[int(np.argmin(series))])
        t_max = float(times[int(np.argmax(series))])
        return [
            _check("measures", f"{label} minimum at a multiple of the period (n={n})",
                   _within_one_sample(t_min, minima, dt), f"t={t_min:.6g}", f"m*{period:.6g}"),
            _check("measures", f"{label} maximum at an odd half period (n={n})",
                   _within_one_sample(t_max, maxima, dt), f"t={t_max:.6g}", f"(m+1/2)*{period:.6g}", maxima_required),
        ]

    def cut_map_suite(self, config: ExperimentConfig) -> List[CheckResult]:
        rng = np.random.default_rng(self.seed)
        worst_herm = worst_trace = 0.0
        lowest = np.inf
        projector_mismatches = odd_mismatches = cuts = 0
        for _ in range(CUT_MATRICES):
            dim = int(rng.integers(3, 33))
            rho = random_density_matrix(rng, dim, rank=int(rng.integers(1, dim + 1)))
            specs = itertools.chain(itertools.combinations(range(dim), 1), itertools.combinations(range(dim), 2))
            for removed in specs:
                spec = CutSpec(dim=dim, removed_indices=removed)
                out = cut(rho, spec, compact=False)
                compact = cut(rho, spec, compact=True)
                cuts += 1
                worst_herm = max(worst_herm, hermitian_asymmetry(compact.mat))
                worst_trace = max(worst_trace, abs(np.trace(compact.mat).real - 1.0))
                lowest = min(lowest, float(compact.spectrum().eigenvalues[-1]))
                if not np.array_equal(out.mat, projector_form(rho, spec).mat):
                    projector_mismatches += 1
            even_removed = CutSpec(dim=dim, removed_indices=tuple(range(0, dim, 2)))
            if not np.array_equal(odd_map(rho).mat, cut(rho, even_removed, compact=True).mat):
                odd_mismatches += 1

        demo = demo_service.run_qutrit_demo()
        rho1 = DensityMatrix(np.diag([0.6, 0.3, 0.1]))
        rho2 = DensityMatrix(np.diag([0.1, 0.2, 0.7]))
        spec = CutSpec(dim=3, removed_indices=(0,))
        mixed = DensityMatrix(0.5 * rho1.mat + 0.5 * rho2.mat)
        gap = float(np.max(np.abs(cut(mixed, spec).mat - (0.5 * cut(rho1, spec).mat + 0.5 * cut(rho2, spec).mat))))

        # rho already cut to the kept indices so that the relative entropy is finite
        relative_min = np.inf
        for _ in range(RELATIVE_ENTROPY_DRAWS):
            dim = int(rng.integers(3, 17))
            removed = tuple(sorted(rng.choice(dim, size=int(rng.integers(1, dim)), replace=False).tolist()))
            spec = CutSpec(dim=dim, removed_indices=removed)
            rho = cut(random_density_matrix(rng, dim), spec, compact=False)
            other = cut(random_density_matrix(rng, dim), spec, compact=False)
            report = preservation_report(rho, other)
            if math.isfinite(report.relative_vn):
                relative_min = min(relative_min, report.relative_vn)

        return [
            _check("cutmap", f"hermitian output over {cuts} cuts", worst_herm <= CUT_TOLERANCE, f"{worst_herm:.3e}", f"<= {CUT_TOLERANCE:g}"),
            _check("cutmap", "unit trace output", worst_trace <= CUT_TOLERANCE, f"{worst_trace:.3e}", f"<= {CUT_TOLERANCE:g}"),
            _check("cutmap", "positive semi-definite output", lowest >= -PSD_TOLERANCE, f"{lowest:.3e}", f">= -{PSD_TOLERANCE:g}"),
            _check("cutmap", "projector form equals cut bit-exactly", projector_mismatches == 0, projector_mismatches, 0),
            _check("cutmap", "odd_map equals cut of even indices bit-exactly", odd_mismatches == 0, odd_mismatches, 0),
            _check("cutmap", "qutrit cuts match the closed forms bit-exactly", demo.passed,
                   sum(not c.matches_closed_form for c in demo.cases), 0),
            _check("cutmap", "cut is nonlinear on mixtures", gap > 1e-6, f"{gap:.3e}", "> 1e-6"),
            _check("cutmap", "relative entropy non-negative", relative_min >= -PSD_TOLERANCE, f"{relative_min:.3e}", ">= 0"),
        ]

    def parity_preservation(self, config: ExperimentConfig) -> List[CheckResult]:
        params = config.amplifier
        squeeze = config.squeeze.to_params()
        times = config.time.times(params)
        trajectory = eta_trajectory(params, squeeze, times)
        grid = auto_grid(params, squeeze, float(times[-1]), PRESERVATION_POINTS, config.coverage_sigmas)
        checks = []
        for t in (float(times[0]), float(times[int(np.argmax(trajectory.eta_abs))])):
            state = TwoModeSqueezedVacuum(eta_at(params, squeeze, t), params.omega_b)
            reduced = reduced_density_matrix(state.kernel, grid, 1)
            for name, parity in (("odd", odd_map), ("even", even_map)):
                mapped = parity(reduced)
                for entropy in (von_neumann_entropy, linear_entropy):
                    diff = abs(entropy(reduced.spectrum()) - entropy(mapped.spectrum()))
                    checks.append(_check("cutmap", f"{entropy.__name__} preserved by {name} map at t={t:.4g}",
                                         diff < PRESERVATION_TOLERANCE, f"{diff:.3e}", f"< {PRESERVATION_TOLERANCE:g}"))
        return checks

    def covariance_checks(self, config: ExperimentConfig) -> List[CheckResult]:
        checks = []
        vacuum = TwoModeSqueezedVacuum(0.0, 1.0)
        qq_errors, pp_errors = [], []
        for n in VACUUM_GRIDS:
            grid = GridSpec(points_per_mode=n, half_width=VACUUM_HALF_WIDTH)
            reduced = reduced_density_matrix(vacuum.kernel, grid, 1)
            qq_errors.append(abs(sigma_qq(reduced, grid) - 0.5))
            pp_errors.append(abs(sigma_pp(reduced, grid) - 0.5))
        orders = [math.log2(a / b) for a, b in zip(pp_errors, pp_errors[1:])]
        checks.append(_check("covariance", "sigma_pp converges at second order",
                             all(ORDER_RANGE[0] <= o <= ORDER_RANGE[1] for o in orders),
                             [f"{o:.3f}" for o in orders], f"in {ORDER_RANGE}"))
        checks.append(_check("covariance", "sigma_qq error below sigma_pp error on the vacuum",
                             all(q < p for q, p in zip(qq_errors, pp_errors)),
                             [f"{e:.2e}" for e in qq_errors], [f"{e:.2e}" for e in pp_errors]))
        vacuum_oracle = covariance_of_state(vacuum)
        deviation = float(np.max(np.abs(vacuum_oracle.matrix - 0.5 * np.eye(4))))
        checks.append(_check("covariance", "oracle gives diag(1/2) for the vacuum", deviation <= 1e-10,
                             f"{deviation:.3e}", "<= 1e-10"))

        sampled = config.model_copy(update={"time": config.time.model_copy(update={"samples": COVARIANCE_SAMPLES})})
        reports, summary, oracle_converged = covariance_service.evaluate(sampled)
        checks.append(_check("covariance", "oracle quadrature converged", oracle_converged, oracle_converged, True))
        for n in sorted({row.grid_n for row in summary}):
            errors = {row.measure: row.max_abs_error for row in summary if row.grid_n == n}
            # below 9 points the position sum itself is off by more than the stencil error
            checks.append(_check("covariance", f"sigma_p1p1 error exceeds sigma_q1q1 error at n={n}",
                                 errors["sigma_p1p1"] > errors["sigma_q1q1"],
                                 f"{errors['sigma_p1p1']:.3e} vs {errors['sigma_q1q1']:.3e}", "pp > qq",
                                 required=n >= 9))

        params = config.amplifier
        squeeze = config.squeeze.to_params()
        lowest = min(
            covariance_of_state(TwoModeSqueezedVacuum(eta_at(params, squeeze, float(t)), params.omega_b)).uncertainty_product(mode)
            for t in sampled.time.times(params)
            for mode in (1, 2)
        )
        checks.append(_check("covariance", "uncertainty bound", lowest >= 0.25 - 1e-9, f"{lowest:.12f}", ">= 0.25"))
        return checks

    def discretization_checks(self, config: ExperimentConfig) -> List[CheckResult]:
        rng = np.random.default_rng(self.seed + 1)
        params = config.amplifier
        squeeze = config.squeeze.to_params()
        base = auto_grid(params, squeeze, params.period, 1, config.coverage_sigmas)
        failures = 0
        for _ in range(DISCRETIZATION_DRAWS):
            t = float(rng.uniform(0.0, params.period))
            n = int(rng.choice([3, 5, 7, 9, 11]))
            try:
                discretize(TwoModeSqueezedVacuum(eta_at(params, squeeze, t), params.omega_b).kernel, base.with_points(n))
            except CvMapsError as e:
                logger.warning(f"Discretization at t={t:.6g}, n={n} failed: {e}")
                failures += 1

        state = TwoModeSqueezedVacuum(eta_at(params, squeeze, 0.3 * params.period), params.omega_b)
        grid = base.with_points(9)
        rho, _ = discretize(state.kernel, grid)
        exact = all(
            np.array_equal(discretize(lambda *x, s=scale: s * state.kernel(*x), grid)[0].mat, rho.mat)
            for scale in (0.5, 2.0)
        )
        scaled = discretize(lambda *x: 10.0 * state.kernel(*x), grid)[0].mat
        near = bool(np.allclose(scaled, rho.mat, rtol=1e-14, atol=1e-17))
        fast = reduced_density_matrix(state.kernel, grid, 1).mat
        slow = partial_trace(rho, 1).mat
        fast_gap = float(np.max(np.abs(fast - slow)))
        return [
            _check("discretizer", f"{DISCRETIZATION_DRAWS} random discretizations are density matrices", failures == 0, failures, 0),
            _check("discretizer", "scale invariance (lambda 0.5, 2) bit-exact", exact, exact, True),
            _check("discretizer", "scale invariance (lambda 10) to rounding", near, near, True),
            _check("discretizer", "slab partial trace matches full partial trace", fast_gap <= 1e-14, f"{fast_gap:.3e}", "<= 1e-14"),
        ]


validation_service = ValidationService()
