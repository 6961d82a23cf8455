"""Experiment pipelines: configured runs that emit inequality ledgers.

Each runner takes an :class:`ExperimentConfig`, generates its ground set,
walks one inequality chain with exact hard assertions and measured log-only
slacks, and returns a :class:`Report` ready for :func:`emit_report`.
"""

from .config import (
    MODES,
    ConfigError,
    ExperimentConfig,
    HypothesisError,
    default_generator,
)
from .content_check import run_elekes_content
from .diffprod import run_difference_product
from .energy_check import run_energy_bound_check, run_incidence_ratio
from .ledger import InequalityLedger, LedgerEntry
from .report import Report, emit_report, grid_digest
from .sumprod import run_sum_product

__all__ = [
    "MODES",
    "ConfigError",
    "ExperimentConfig",
    "HypothesisError",
    "InequalityLedger",
    "LedgerEntry",
    "Report",
    "default_generator",
    "emit_report",
    "grid_digest",
    "run_difference_product",
    "run_elekes_content",
    "run_energy_bound_check",
    "run_incidence_ratio",
    "run_sum_product",
]

RUNNERS = {
    "difference_product": run_difference_product,
    "sum_product": run_sum_product,
    "elekes_content": run_elekes_content,
    "energy_bounds": run_energy_bound_check,
    "incidence_ratio": run_incidence_ratio,
}
