"""Run planning, seeded trial execution, rescoring and reporting."""

from .plan import ConfigError, RunPlan, TaskEntry, Trial, full_matrix_plan, load_plan
from .runner import rescore, run_plan, write_report
from .seeds import derive_seed

__all__ = ["ConfigError", "RunPlan", "TaskEntry", "Trial", "full_matrix_plan", "load_plan",
           "rescore", "run_plan", "write_report", "derive_seed"]
