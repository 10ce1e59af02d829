from .reports import (
    config_hash,
    environment_versions,
    write_csv_table,
    write_json,
    write_manifest,
    write_report,
)
from .utils import Histogram, get_logs, log, log_report, prefix_dict

__all__ = [
    "Histogram",
    "log",
    "get_logs",
    "prefix_dict",
    "log_report",
    "config_hash",
    "environment_versions",
    "write_json",
    "write_csv_table",
    "write_report",
    "write_manifest",
]
