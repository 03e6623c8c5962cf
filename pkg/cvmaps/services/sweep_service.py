import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from cvmaps.core.config import settings
from cvmaps.db.csv_store import SUMMARY_HEADER, csv_store
from cvmaps.quantum.densmat import DensityMatrix
from cvmaps.quantum.discretizer import (
    GridSpec,
    IslandReport,
    auto_grid,
    check_island,
    discretize,
    narrowest_marginal_sigma,
    reduced_density_matrix,
)
from cvmaps.quantum.gaussian_state import TwoModeSqueezedVacuum, eta_trajectory
from cvmaps.quantum.measures import MeasureKind, MeasureReport, analytic_measure, numeric_measure
from cvmaps.schemas.experiment import ExperimentConfig
from cvmaps.schemas.report import SummaryRow, SweepResult

logger = logging.getLogger(__name__)

# (kind group, grid_n, time index)
TaskKey = Tuple[str, int, int]
TaskResult = Tuple[Dict[str, float], IslandReport]


def _measure_all(rho: DensityMatrix, kinds: Sequence[MeasureKind]) -> Dict[str, float]:
    return {kind.label: numeric_measure(kind, rho) for kind in kinds}


def _entropy_task(state: TwoModeSqueezedVacuum, grid: GridSpec, kinds: Sequence[MeasureKind], epsilon: float) -> TaskResult:
    reduced = reduced_density_matrix(state.kernel, grid, mode=1)
    return _measure_all(reduced, kinds), check_island(reduced, epsilon, grid, narrowest_marginal_sigma(state))


def _negativity_task(state: TwoModeSqueezedVacuum, grid: GridSpec, kinds: Sequence[MeasureKind], epsilon: float) -> TaskResult:
    rho, _ = discretize(state.kernel, grid)
    return _measure_all(rho, kinds), check_island(rho, epsilon, grid, narrowest_marginal_sigma(state))


def summarize(reports: Sequence, islands: Dict[Tuple[str, int], bool], labels: Sequence[str], grids_by_label: Dict[str, Sequence[int]]) -> List[SummaryRow]:
    """Max abs error per (measure, grid) in measure order, then grid order."""
    rows = []
    for label in labels:
        for n in grids_by_label[label]:
            errors = [r.abs_error for r in reports if r.grid_n == n and _label(r) == label]
            if not errors:
                continue
            rows.append(SummaryRow(grid_n=n, measure=label, max_abs_error=max(errors), island_converged=islands[(label, n)]))
    return rows


def _label(report) -> str:
    return report.kind.label if isinstance(report, MeasureReport) else report.element


def warn_island(n: int, islands: Sequence[IslandReport]) -> bool:
    converged = all(island.converged for island in islands)
    if converged:
        return converged
    if not all(island.tail_converged for island in islands):
        worst = max(island.max_boundary_magnitude for island in islands)
        logger.warning(
            f"Grid with {n} points per mode has boundary entries up to {worst:.3e} "
            f"(epsilon {islands[0].epsilon:g}); the island has not converged"
        )
    unresolved = [island for island in islands if not island.resolved]
    if unresolved:
        narrowest = min(island.narrowest_sigma for island in unresolved)
        logger.warning(
            f"Grid with {n} points per mode has step {unresolved[0].grid_step:.3g} wider than the "
            f"narrowest marginal width {narrowest:.3g}; the island has not converged"
        )
    return converged


def write_tables(reports: Sequence, labels: Sequence[str], summary: Sequence[SummaryRow], output_dir: Path) -> List[Path]:
    csv_store.open(output_dir)
    try:
        for label in labels:
            rows = [
                (r.t, r.grid_n, label, r.numeric, r.analytic, r.abs_error)
                for r in reports
                if _label(r) == label
            ]
            csv_store.get_table(label).write(rows)
        csv_store.get_table("summary", SUMMARY_HEADER).write(
            (row.grid_n, row.measure, row.max_abs_error, row.island_converged) for row in summary
        )
    finally:
        files = csv_store.close()
    return files


class SweepService:
    """Time sweep of entropies and negativity against their closed forms.

    Entropies use the reduced matrix of mode 1 on ``grids``; negativity
    measures use the full bipartite matrix on ``negativity_grids``.
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers

    def evaluate(self, config: ExperimentConfig) -> Tuple[List[MeasureReport], List[SummaryRow]]:
        params = config.amplifier
        squeeze = config.squeeze.to_params()
        times = config.time.times(params)
        trajectory = eta_trajectory(params, squeeze, times)
        base = auto_grid(params, squeeze, float(times[-1]), 1, config.coverage_sigmas)
        logger.info(
            f"Sweep over {times.size} times in [{times[0]:.6g}, {times[-1]:.6g}], "
            f"half width {base.half_width:.6g}, grids {config.grids}, negativity grids {config.negativity_grids}"
        )

        groups = []
        if config.entropy_measures:
            groups.append(("reduced", config.grids, config.entropy_measures, _entropy_task))
        if config.negativity_measures:
            if not config.negativity_grids:
                logger.warning("Negativity measures requested but negativity_grids is empty; skipping them")
            else:
                groups.append(("bipartite", config.negativity_grids, config.negativity_measures, _negativity_task))

        states = [TwoModeSqueezedVacuum(eta, params.omega_b) for eta in trajectory.eta_values]
        workers = self.workers or settings.WORKERS
        results: Dict[TaskKey, TaskResult] = {}
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {}
            for group, grids, kinds, task in groups:
                for n in grids:
                    grid = base.with_points(n)
                    for i, state in enumerate(states):
                        futures[(group, n, i)] = pool.submit(task, state, grid, kinds, config.epsilon_island)
            for key, future in futures.items():
                results[key] = future.result()
                logger.debug(f"Finished task {key}")

        reports: List[MeasureReport] = []
        islands: Dict[Tuple[str, int], bool] = {}
        grids_by_label: Dict[str, Sequence[int]] = {}
        for group, grids, kinds, _ in groups:
            for n in grids:
                converged = warn_island(n, [results[(group, n, i)][1] for i in range(len(states))])
                for kind in kinds:
                    islands[(kind.label, n)] = converged
            for kind in kinds:
                grids_by_label[kind.label] = grids

        ordered = [kind for kind in config.measures if kind.label in grids_by_label]
        for kind in ordered:
            group = "bipartite" if kind.needs_bipartite else "reduced"
            for i, t in enumerate(times):
                analytic = analytic_measure(kind, float(trajectory.eta_abs[i]))
                for n in grids_by_label[kind.label]:
                    numeric = results[(group, n, i)][0][kind.label]
                    reports.append(MeasureReport.compare(float(t), n, kind, numeric, analytic))

        summary = summarize(reports, islands, [kind.label for kind in ordered], grids_by_label)
        return reports, summary

    def run(self, config: ExperimentConfig, output_dir: Path) -> SweepResult:
        reports, summary = self.evaluate(config)
        labels = list(dict.fromkeys(row.measure for row in summary))
        files = write_tables(reports, labels, summary, output_dir)
        for row in summary:
            logger.info(f"{row.measure} n={row.grid_n}: max abs error {row.max_abs_error:.3e}")
        return SweepResult(output_dir=output_dir, files=files, summary=summary, reports=reports)


sweep_service = SweepService()
