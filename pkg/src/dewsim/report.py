"""CSV/JSON output of per-configuration results and per-forest instrumentation."""
from __future__ import annotations

import csv
import os
import json
import sys
from dataclasses import asdict, dataclass, fields
from typing import IO, Iterable, Union

from .errors import ConfigError

Destination = Union[str, os.PathLike, IO[str], None]


@dataclass(frozen=True)
class ResultRow:
    block_bytes: int
    assoc: int
    sets: int
    accesses: int
    misses: int
    hits: int
    miss_rate: float

    @classmethod
    def from_counts(cls, block: int, assoc: int, sets: int, accesses: int, misses: int) -> "ResultRow":
        return cls(block, assoc, sets, accesses, misses, accesses - misses,
                   misses / accesses if accesses else 0.0)


@dataclass(frozen=True)
class InstrumentationRow:
    block_bytes: int
    assoc: int
    unoptimized_evals: int
    node_evals: int
    mra_count: int
    searches: int
    wave_count: int
    mre_count: int
    tag_comparisons: int


RESULT_FIELDS = [f.name for f in fields(ResultRow)]
INSTRUMENTATION_FIELDS = [f.name for f in fields(InstrumentationRow)]


def _format_value(name: str, value):
    return f"{value:.6f}" if name == "miss_rate" else value


def _emit(rows, names, sort_key, format: str, destination: Destination) -> None:
    if format not in ("csv", "json"):
        raise ConfigError(f"unknown output format {format!r}; expected csv or json")
    rows = sorted(rows, key=sort_key)
    if destination is None:
        _write(rows, names, format, sys.stdout)
    elif hasattr(destination, "write"):
        _write(rows, names, format, destination)
    else:
        with open(destination, "w", encoding="ascii", newline="") as fh:
            _write(rows, names, format, fh)


def _write(rows, names, format, fh: IO[str]) -> None:
    if format == "csv":
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in rows:
            writer.writerow([_format_value(n, getattr(row, n)) for n in names])
    else:
        records = [asdict(r) for r in rows]
        for rec in records:
            if "miss_rate" in rec:
                rec["miss_rate"] = round(rec["miss_rate"], 6)
        json.dump(records, fh, indent=1)
        fh.write("\n")


def emit_results(rows: Iterable[ResultRow], format: str = "csv", destination: Destination = None) -> None:
    """Write result rows sorted by (block_bytes, assoc, sets)."""
    _emit(rows, RESULT_FIELDS, lambda r: (r.block_bytes, r.assoc, r.sets), format, destination)


def emit_instrumentation(rows: Iterable[InstrumentationRow], format: str = "csv",
                         destination: Destination = None) -> None:
    _emit(rows, INSTRUMENTATION_FIELDS, lambda r: (r.block_bytes, r.assoc), format, destination)


def read_results(source: IO[str]) -> list[ResultRow]:
    reader = csv.DictReader(source)
    if reader.fieldnames != RESULT_FIELDS:
        raise ConfigError(f"unexpected header {reader.fieldnames}")
    return [ResultRow(int(r["block_bytes"]), int(r["assoc"]), int(r["sets"]), int(r["accesses"]),
                      int(r["misses"]), int(r["hits"]), float(r["miss_rate"])) for r in reader]


def read_instrumentation(source: IO[str]) -> list[InstrumentationRow]:
    reader = csv.DictReader(source)
    if reader.fieldnames != INSTRUMENTATION_FIELDS:
        raise ConfigError(f"unexpected header {reader.fieldnames}")
    return [InstrumentationRow(**{k: int(v) for k, v in r.items()}) for r in reader]


def comparison_reduction(dew_comparisons: int, oracle_comparisons: int) -> float:
    """Fraction of the oracle's tag comparisons that the single pass avoided."""
    if oracle_comparisons == 0:
        return 0.0
    return 1.0 - dew_comparisons / oracle_comparisons
