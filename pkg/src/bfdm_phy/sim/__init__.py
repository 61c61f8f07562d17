"""Scenario configuration, link chains and experiment sweeps."""

from .config import PRESETS, WAVEFORMS, ScenarioConfig, load_config
from .experiments import (
    THREADS_ENV,
    chanest_report,
    detection_report,
    psd_report,
    pulse_report,
    run_scenario,
    sweep_bounds,
    sweep_ici,
    sweep_pusch_ser_vs_dprach,
    sweep_ser_vs_offset,
    sweep_ser_vs_snr,
)
from .psd import band_mean_db, compute_psd
from .results import COLUMNS, SCHEMA_VERSION, ResultRow, rows_to_csv, write_rows

__all__ = [
    "PRESETS",
    "WAVEFORMS",
    "ScenarioConfig",
    "load_config",
    "THREADS_ENV",
    "run_scenario",
    "sweep_ser_vs_offset",
    "sweep_ser_vs_snr",
    "sweep_pusch_ser_vs_dprach",
    "sweep_ici",
    "sweep_bounds",
    "pulse_report",
    "psd_report",
    "detection_report",
    "chanest_report",
    "compute_psd",
    "band_mean_db",
    "COLUMNS",
    "SCHEMA_VERSION",
    "ResultRow",
    "rows_to_csv",
    "write_rows",
]
