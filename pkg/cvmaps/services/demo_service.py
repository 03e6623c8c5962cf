import logging
from typing import Dict, List, Optional

import numpy as np
from numpy.typing import NDArray

from cvmaps.quantum.cutmap import CutSpec, cut
from cvmaps.quantum.densmat import DensityMatrix, random_density_matrix
from cvmaps.schemas.report import QutritCase, QutritDemoReport

logger = logging.getLogger(__name__)

SAMPLE_SEED = 20


def qubit_closed_form(rho: DensityMatrix, removed: int) -> NDArray[np.complex128]:
    """The kept 2x2 block divided by its own diagonal sum."""
    keep = [i for i in range(3) if i != removed]
    block = rho.mat[np.ix_(keep, keep)]
    return block / (rho.mat[keep[0], keep[0]].real + rho.mat[keep[1], keep[1]].real)


def sample_qutrits(seed: int = SAMPLE_SEED) -> Dict[str, DensityMatrix]:
    rng = np.random.default_rng(seed)
    return {
        "maximally_mixed": DensityMatrix(np.eye(3) / 3.0),
        "diagonal": DensityMatrix(np.diag([0.5, 0.3, 0.2])),
        "random": random_density_matrix(rng, 3),
    }


class DemoService:
    def run_qutrit_demo(self, qutrits: Optional[Dict[str, DensityMatrix]] = None) -> QutritDemoReport:
        """Cut each sample qutrit down to the three possible qubits."""
        qutrits = qutrits if qutrits is not None else sample_qutrits()
        cases: List[QutritCase] = []
        for name, rho in qutrits.items():
            for removed in range(3):
                qubit = cut(rho, CutSpec(dim=3, removed_indices=(removed,)), compact=True)
                matches = bool(np.array_equal(qubit.mat, qubit_closed_form(rho, removed)))
                if not matches:
                    logger.error(f"Qutrit {name}: cut without index {removed} differs from the closed form")
                cases.append(
                    QutritCase(
                        name=name,
                        removed_index=removed,
                        result=[[complex(v) for v in row] for row in qubit.mat],
                        matches_closed_form=matches,
                    )
                )
        return QutritDemoReport(cases=cases)

    @staticmethod
    def format_report(report: QutritDemoReport) -> str:
        lines = []
        for case in report.cases:
            status = "ok" if case.matches_closed_form else "MISMATCH"
            lines.append(f"{case.name}: remove index {case.removed_index} [{status}]")
            for row in case.result:
                lines.append("  " + "  ".join(f"{v.real:+.6f}{v.imag:+.6f}j" for v in row))
        return "\n".join(lines)


demo_service = DemoService()
