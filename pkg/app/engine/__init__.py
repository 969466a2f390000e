# app/engine/__init__.py
from app.engine.checks import DerivativeReport, check_derivatives
from app.engine.fields import (
    CoefficientField,
    constant_field,
    extended_state_field,
    lift_driver_values,
    lift_tensor,
    linear_field,
    linear_operator_field,
    sine_field,
)
from app.engine.solvers import (
    BatchSolution,
    CorrectionPath,
    correction_field,
    solve_limit,
    solve_limit_batch,
    solve_pathwise,
    solve_pathwise_batch,
)

__all__ = [
    "BatchSolution",
    "CoefficientField",
    "CorrectionPath",
    "DerivativeReport",
    "check_derivatives",
    "constant_field",
    "correction_field",
    "extended_state_field",
    "lift_driver_values",
    "lift_tensor",
    "linear_field",
    "linear_operator_field",
    "sine_field",
    "solve_limit",
    "solve_limit_batch",
    "solve_pathwise",
    "solve_pathwise_batch",
]
