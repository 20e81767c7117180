"""Fully nonlinear parabolic flows on structured grids."""

from ._core import (
    ConeViolation,
    InvalidConfiguration,
    OperatorSpec,
    StepFailure,
    check_structure,
    eval_f,
    grad_f,
    hess_f,
    parse_csv,
    read_snapshot,
    render_svg_report,
    run_command,
    sigma_k,
    solve,
    verify_concavity_gap,
    write_snapshot,
)

EXIT_SUCCESS = 0
EXIT_VALIDATION_ERROR = 1
EXIT_RUN_FAILURE = 2
EXIT_CERTIFICATION_VIOLATION = 3

__all__ = [
    "ConeViolation",
    "InvalidConfiguration",
    "OperatorSpec",
    "StepFailure",
    "check_structure",
    "eval_f",
    "grad_f",
    "hess_f",
    "parse_csv",
    "read_snapshot",
    "render_svg_report",
    "run_command",
    "sigma_k",
    "solve",
    "verify_concavity_gap",
    "write_snapshot",
    "EXIT_SUCCESS",
    "EXIT_VALIDATION_ERROR",
    "EXIT_RUN_FAILURE",
    "EXIT_CERTIFICATION_VIOLATION",
]
