"""Run records: manifest, serialised failures, CSV writers and the discrepancy plot."""

import csv
import dataclasses
import hashlib
import json
import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .const import CSV_FLOAT_FORMAT

UTC = timezone.utc

_LOGGER = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def serialize_exception(exc: Exception) -> dict[str, Any]:
    return {
        "type": type(exc).__qualname__,
        "message": str(exc),
        "args": [_jsonable(arg) for arg in exc.args],
    }


def _jsonable(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return repr(value)


def config_digest(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode()
    return hashlib.sha256(data).hexdigest()


def _now() -> str:
    return datetime.now(UTC).isoformat(timespec="seconds")


@dataclasses.dataclass(slots=True, kw_only=True)
class RunManifest:
    """What produced a set of outputs.

    Timestamps live here only, so reruns with the same command, config, seed and
    version give byte-identical CSVs.
    """

    command: str
    config_digest: str
    seed: int | None
    tool_version: str
    started_at: str = dataclasses.field(default_factory=_now)
    finished_at: str | None = None
    outputs: list[str] = dataclasses.field(default_factory=list)
    row_errors: list[dict[str, Any]] = dataclasses.field(default_factory=list)
    extra: dict[str, Any] = dataclasses.field(default_factory=dict)

    def finish(self) -> None:
        self.finished_at = _now()

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def write(self, directory: str | Path) -> Path:
        path = Path(directory) / MANIFEST_NAME
        if self.finished_at is None:
            self.finish()
        path.write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        _LOGGER.debug("wrote manifest %s", path)
        return path


def format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, CSV_FLOAT_FORMAT)
    if value is None:
        return ""
    return str(value)


def write_rows(path: str | Path, fieldnames: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
    """CSV with a header row and full-precision floats."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(fieldnames)
        count = 0
        for row in rows:
            writer.writerow([format_cell(row[name]) for name in fieldnames])
            count += 1
    _LOGGER.info("wrote %d rows to %s", count, path)
    return path


def write_dataclass_rows(path: str | Path, rows: Sequence[Any], fieldnames: Sequence[str] | None = None) -> Path:
    if fieldnames is None:
        if not rows:
            raise ValueError("cannot infer columns from an empty row list")
        fieldnames = [field.name for field in dataclasses.fields(rows[0])]
    return write_rows(path, fieldnames, (dataclasses.asdict(row) for row in rows))


def read_rows(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fp:
        return list(csv.DictReader(fp))


def plot_discrepancy(csv_path: str | Path, svg_path: str | Path) -> Path:
    """Discrepancy against k, drawn from an already written theorem2.csv."""
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    rows = read_rows(csv_path)
    ks = [int(row["k"]) for row in rows]
    left = [float(row["discrepancy_left"]) for row in rows]
    right = [float(row["discrepancy_right"]) for row in rows]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        ax.semilogy(ks, left, "o-", label="left limit (m at a_k)")
        ax.semilogy(ks, right, "s--", label="right limit (v'/v at b_k)")
        ax.set_xlabel("k")
        ax.set_ylabel("discrepancy")
        ax.set_xticks(ks)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.tight_layout()
        svg_path = Path(svg_path)
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    _LOGGER.info("wrote plot %s", svg_path)
    return svg_path
