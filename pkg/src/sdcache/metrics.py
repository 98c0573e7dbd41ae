"""Per-slot metrics records and their CSV round-trip.

The trace CSV contains only seed-deterministic columns so identical runs are
byte-identical; solver wall times go to a sidecar timings file.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

from .types import DomainError

TRACE_COLUMNS = [
    "t",
    "value",
    "energy",
    "backlog",
    "max_delay",
    "cache_hit_ratio",
    "fitness",
    "infeasible",
]


@dataclass
class SlotRecord:
    t: int
    value: float
    energy: float
    backlog: float  # Q(t), measured at the start of the slot
    max_delay: float
    cache_hit_ratio: float  # NaN on zero-demand slots
    fitness: float
    infeasible: bool
    wall_time_s: float = 0.0


@dataclass
class MetricsTrace:
    records: List[SlotRecord] = field(default_factory=list)
    final_backlog: float = 0.0

    def append(self, record: SlotRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    # --- column accessors ---------------------------------------------------

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]

    @property
    def backlogs(self) -> list[float]:
        """Q(0..T): the per-slot backlogs plus the post-horizon one."""
        return [r.backlog for r in self.records] + [self.final_backlog]

    # --- aggregates -----------------------------------------------------------

    def mean(self, name: str) -> float:
        vals = self.column(name)
        return sum(vals) / len(vals) if vals else math.nan

    def mean_hit_ratio(self) -> float:
        """Mean cache-hit ratio over slots with demand."""
        vals = [v for v in self.column("cache_hit_ratio") if not math.isnan(v)]
        return sum(vals) / len(vals) if vals else math.nan

    def delay_violation_slots(self, tolerance: float) -> int:
        return sum(1 for r in self.records if r.max_delay > tolerance)

    def aggregates(self, delay_tolerance: float | None = None) -> dict:
        out = {
            "mean_value": self.mean("value"),
            "mean_energy": self.mean("energy"),
            "mean_backlog": self.mean("backlog"),
            "mean_max_delay": self.mean("max_delay"),
            "max_max_delay": max(self.column("max_delay"), default=math.nan),
            "mean_hit_ratio": self.mean_hit_ratio(),
            "total_value": sum(self.column("value")),
            "final_backlog_per_slot": self.final_backlog / max(len(self), 1),
            "infeasible_slots": sum(self.column("infeasible")),
            "mean_wall_time_s": self.mean("wall_time_s"),
        }
        if delay_tolerance is not None:
            out["delay_violation_slots"] = self.delay_violation_slots(delay_tolerance)
        return out

    # --- CSV ------------------------------------------------------------------

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for r in self.records:
            writer.writerow([
                r.t,
                repr(r.value),
                repr(r.energy),
                repr(r.backlog),
                repr(r.max_delay),
                repr(r.cache_hit_ratio),
                repr(r.fitness),
                int(r.infeasible),
            ])
        writer.writerow(["final_backlog", repr(self.final_backlog), "", "", "", "", "", ""])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @staticmethod
    def from_csv(source: str | Path) -> "MetricsTrace":
        if isinstance(source, Path) or "\n" not in source:
            text = Path(source).read_text()
        else:
            text = source
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != TRACE_COLUMNS:
            raise DomainError("unrecognized trace CSV header")
        trace = MetricsTrace()
        for row in rows[1:]:
            if row[0] == "final_backlog":
                trace.final_backlog = float(row[1])
                continue
            trace.append(
                SlotRecord(
                    t=int(row[0]),
                    value=float(row[1]),
                    energy=float(row[2]),
                    backlog=float(row[3]),
                    max_delay=float(row[4]),
                    cache_hit_ratio=float(row[5]),
                    fitness=float(row[6]),
                    infeasible=bool(int(row[7])),
                )
            )
        return trace

    def timings_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "solver_wall_time_s"])
        for r in self.records:
            writer.writerow([r.t, repr(r.wall_time_s)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text
