from .compare import CompareReport, compare
from .config import ExperimentConfig, load_config, parse_config
from .runner import run_experiment
from .traces import TRACE_COLUMNS, TraceRow, parse_rows, read_trace, write_trace

__all__ = [
    "CompareReport", "ExperimentConfig", "TRACE_COLUMNS", "TraceRow", "compare",
    "load_config", "parse_config", "parse_rows", "read_trace", "run_experiment",
    "write_trace",
]
