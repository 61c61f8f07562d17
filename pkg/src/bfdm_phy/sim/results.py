"""Long-format result rows and their CSV serialization."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

__all__ = ["SCHEMA_VERSION", "SWEEP_KEYS", "COLUMNS", "ResultRow", "write_rows", "rows_to_csv"]

SCHEMA_VERSION = 1
SWEEP_KEYS = (
    "offset_us",
    "cfo_hz",
    "snr_db",
    "guard_band",
    "n_dprach",
    "dft_spread",
    "alpha",
    "freq_offset",
    "time_offset_us",
    "distance",
    "freq_hz",
    "index",
)
COLUMNS = ("schema_version", "experiment", "waveform", *SWEEP_KEYS, "metric", "value", "n_events", "n_total", "trials", "seed")


@dataclass(frozen=True)
class ResultRow:
    """One metric value at one sweep point.

    ``n_events`` and ``n_total`` carry the counts behind a rate (errors and
    symbols for an error rate), so binomial confidence intervals can be
    computed from the rows alone.
    """

    experiment: str
    waveform: str
    sweep: dict
    metric: str
    value: float
    trials: int
    seed: int
    n_events: int | None = None
    n_total: int | None = None

    def __post_init__(self):
        unknown = set(self.sweep) - set(SWEEP_KEYS)
        if unknown:
            raise ValueError(f"unknown sweep keys {sorted(unknown)}")

    def as_record(self) -> dict:
        rec = {k: "" for k in COLUMNS}
        rec.update(
            schema_version=SCHEMA_VERSION,
            experiment=self.experiment,
            waveform=self.waveform,
            metric=self.metric,
            value=_fmt(self.value),
            n_events="" if self.n_events is None else self.n_events,
            n_total="" if self.n_total is None else self.n_total,
            trials=self.trials,
            seed=self.seed,
        )
        for k, v in self.sweep.items():
            rec[k] = _fmt(v)
        return rec


def _fmt(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return v


def write_rows(rows, fh) -> None:
    w = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r.as_record())


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    write_rows(rows, buf)
    return buf.getvalue()
