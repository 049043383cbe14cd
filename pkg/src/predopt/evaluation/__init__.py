from .experiment import (ConfigError, ExperimentConfig, ExperimentReport, InstanceRecord, aggregate, format_table,
                         read_instance_csv, report_from_csv, run_experiment, write_instance_csv, write_report)
from .metrics import MetricError, accuracy, opt_gap, time_improvement
from .stats import WilcoxonResult, wilcoxon_one_sided

__all__ = [
    "ConfigError", "ExperimentConfig", "ExperimentReport", "InstanceRecord", "MetricError", "WilcoxonResult",
    "accuracy", "aggregate", "format_table", "opt_gap", "read_instance_csv", "report_from_csv", "run_experiment",
    "time_improvement", "wilcoxon_one_sided", "write_instance_csv", "write_report",
]
