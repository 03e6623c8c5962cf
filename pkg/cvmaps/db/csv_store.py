import csv
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from cvmaps.core.exceptions import CvMapsError

logger = logging.getLogger(__name__)

MEASURE_HEADER = ("t", "grid_n", "measure", "numeric", "analytic", "abs_error")
SUMMARY_HEADER = ("grid_n", "measure", "max_abs_error", "island_converged")


def format_cell(value) -> str:
    """17 significant digits for floats; everything else via str."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


class CsvTable:
    def __init__(self, path: Path, header: Sequence[str]):
        self.path = path
        self.header = tuple(header)

    def write(self, rows: Iterable[Sequence]) -> int:
        """Write the header and ``rows`` in the given order, replacing any previous file."""
        count = 0
        with self.path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(self.header)
            for row in rows:
                if len(row) != len(self.header):
                    raise CvMapsError(f"Row {row!r} does not match header {self.header} of {self.path.name}")
                writer.writerow([format_cell(cell) for cell in row])
                count += 1
        logger.debug(f"Wrote {count} rows to {self.path}")
        return count


class CsvStore:
    directory: Optional[Path] = None

    def __init__(self):
        self.written: List[Path] = []

    def open(self, directory: Path) -> None:
        """Bind the store to an output directory, creating it if needed."""
        try:
            directory = Path(directory)
            directory.mkdir(parents=True, exist_ok=True)
            self.directory = directory
            self.written = []
            logger.info(f"Writing results to {directory}")
        except OSError as e:
            logger.error(f"Failed to create output directory {directory}: {e}")
            raise CvMapsError(f"Cannot create output directory {directory}: {e}") from e

    def close(self) -> List[Path]:
        """Release the directory and return the files written since ``open``."""
        written = list(self.written)
        if self.directory is not None:
            logger.info(f"Wrote {len(written)} files to {self.directory}")
        self.directory = None
        self.written = []
        return written

    def get_table(self, name: str, header: Sequence[str] = MEASURE_HEADER) -> CsvTable:
        if self.directory is None:
            raise CvMapsError("Output directory not opened")
        path = self.directory / f"{name}.csv"
        if path not in self.written:
            self.written.append(path)
        return CsvTable(path, header)


csv_store = CsvStore()
