import csv
import json
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Union

from pydantic import BaseModel

from src.core.logging import logger
from src.schemas.evaluation_schema import SweepReport

PathLike = Union[str, Path]

SWEEP_COLUMNS = ["r", "dy_um", "wavenumber_cm1", "mse", "ssim"]
AGGREGATE_COLUMNS = ["r", "dy_um", "n", "mse_mean", "mse_std", "ssim_mean", "ssim_std"]

class ReportRepository:
    """Writes CSV/JSON reports; formatting is fixed so repeated runs are byte-identical."""

    def write_json(self, payload: Union[BaseModel, Any], path: PathLike) -> Path:
        path = self._prepare(path)
        if isinstance(payload, BaseModel):
            text = payload.model_dump_json(indent=2)
        else:
            text = json.dumps(payload, indent=2, sort_keys=True)
        path.write_text(text + "\n")
        return path

    def write_sweep_csv(self, report: SweepReport, path: PathLike) -> Path:
        """
        Per-band rows with columns ``r,dy_um,wavenumber_cm1,mse,ssim``, then a blank
        line and the aggregate section with its own header.
        """
        path = self._prepare(path)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(SWEEP_COLUMNS)
            for row in report.rows:
                writer.writerow([row.r, _fmt(row.dy_um), _fmt(row.wavenumber_cm1), _fmt(row.mse), _fmt(row.ssim)])
            writer.writerow([])
            writer.writerow(AGGREGATE_COLUMNS)
            for agg in report.aggregates:
                writer.writerow([
                    agg.r, _fmt(agg.dy_um), agg.n,
                    _fmt(agg.mse_mean), _fmt(agg.mse_std), _fmt(agg.ssim_mean), _fmt(agg.ssim_std),
                ])
        logger.info(f"Wrote sweep report with {len(report.rows)} rows to {path}")
        return path

    def write_table_csv(self, header: Sequence[str], rows: Iterable[Sequence[Any]], path: PathLike) -> Path:
        path = self._prepare(path)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(list(header))
            for row in rows:
                writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
        return path

    def read_sweep_rows(self, path: PathLike) -> List[dict]:
        """Per-band rows of a sweep CSV (the aggregate section is skipped)."""
        rows = []
        with Path(path).open(newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader)
            for values in reader:
                if not values:
                    break
                rows.append(dict(zip(header, values)))
        return rows

    def _prepare(self, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

def _fmt(value: float) -> str:
    return repr(float(value))
