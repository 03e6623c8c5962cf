import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from cvmaps.core.config import settings
from cvmaps.quantum.covariance import (
    CovarianceMatrix,
    Stencil,
    covariance_of_state,
    sigma_p1p2,
    sigma_pp,
    sigma_qp,
    sigma_qq,
)
from cvmaps.quantum.densmat import partial_trace
from cvmaps.quantum.discretizer import GridSpec, IslandReport, auto_grid, check_island, discretize, narrowest_marginal_sigma
from cvmaps.quantum.gaussian_state import TwoModeSqueezedVacuum, eta_trajectory
from cvmaps.schemas.experiment import ExperimentConfig
from cvmaps.schemas.report import CovarianceReport, CovarianceResult, SummaryRow
from cvmaps.services.sweep_service import summarize, warn_island, write_tables

logger = logging.getLogger(__name__)

# CSV label -> oracle element (row, column) in (p1, p2, q1, q2)
ELEMENTS = {
    "sigma_q1q1": ("q1", "q1"),
    "sigma_p1p1": ("p1", "p1"),
    "sigma_q1p1": ("p1", "q1"),
    "sigma_p1p2": ("p1", "p2"),
}


def _estimate_task(state: TwoModeSqueezedVacuum, grid: GridSpec, stencil: Stencil, epsilon: float) -> Tuple[Dict[str, float], IslandReport]:
    rho, _ = discretize(state.kernel, grid)
    reduced = partial_trace(rho, 1)
    values = {
        "sigma_q1q1": sigma_qq(reduced, grid, 1),
        "sigma_p1p1": sigma_pp(reduced, grid, 1, stencil),
        "sigma_q1p1": sigma_qp(reduced, grid, 1, stencil),
        "sigma_p1p2": sigma_p1p2(rho, grid, stencil),
    }
    return values, check_island(rho, epsilon, grid, narrowest_marginal_sigma(state))


class CovarianceService:
    """Finite-difference covariance estimates over time against the quadrature oracle."""

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers

    def evaluate(self, config: ExperimentConfig) -> Tuple[List[CovarianceReport], List[SummaryRow], bool]:
        params = config.amplifier
        squeeze = config.squeeze.to_params()
        times = config.time.times(params)
        trajectory = eta_trajectory(params, squeeze, times)
        base = auto_grid(params, squeeze, float(times[-1]), 1, config.coverage_sigmas)
        grids = [n for n in config.grids if n >= 3]
        for n in config.grids:
            if n < 3:
                logger.warning(f"Skipping grid with {n} points per mode: finite differences need at least 3")
        states = [TwoModeSqueezedVacuum(eta, params.omega_b) for eta in trajectory.eta_values]
        logger.info(f"Covariance sweep over {times.size} times, grids {grids}, stencil {config.covariance_stencil}")

        workers = self.workers or settings.WORKERS
        with ThreadPoolExecutor(max_workers=workers) as pool:
            oracle_futures = [pool.submit(covariance_of_state, state) for state in states]
            futures = {
                (n, i): pool.submit(_estimate_task, state, base.with_points(n), config.covariance_stencil, config.epsilon_island)
                for n in grids
                for i, state in enumerate(states)
            }
            oracles: List[CovarianceMatrix] = [future.result() for future in oracle_futures]
            results = {key: future.result() for key, future in futures.items()}

        oracle_converged = all(oracle.converged for oracle in oracles)
        islands = {}
        for n in grids:
            converged = warn_island(n, [results[(n, i)][1] for i in range(len(states))])
            for label in ELEMENTS:
                islands[(label, n)] = converged

        reports = []
        for label, (row, column) in ELEMENTS.items():
            for i, t in enumerate(times):
                analytic = oracles[i].element(row, column)
                for n in grids:
                    numeric = results[(n, i)][0][label]
                    reports.append(
                        CovarianceReport(
                            t=float(t), grid_n=n, element=label, numeric=numeric,
                            analytic=analytic, abs_error=abs(numeric - analytic),
                        )
                    )
        summary = summarize(reports, islands, list(ELEMENTS), {label: grids for label in ELEMENTS})
        return reports, summary, oracle_converged

    def run(self, config: ExperimentConfig, output_dir: Path) -> CovarianceResult:
        reports, summary, oracle_converged = self.evaluate(config)
        files = write_tables(reports, list(ELEMENTS), summary, output_dir)
        return CovarianceResult(
            output_dir=output_dir, files=files, summary=summary, reports=reports, oracle_converged=oracle_converged
        )


covariance_service = CovarianceService()
