"""Deterministic function-block runtime with an online diagnostic agent."""

from fbdiag._core import (
    OperationError,
    ParseError,
    ValidationError,
    __version__,
    builtin_scenario_names,
    canonical_application,
    canonical_fb_type,
    explain,
    fixture_files,
    run_batch,
)

__all__ = [
    "OperationError",
    "ParseError",
    "ValidationError",
    "__version__",
    "builtin_scenario_names",
    "canonical_application",
    "canonical_fb_type",
    "explain",
    "fixture_files",
    "run_batch",
]
