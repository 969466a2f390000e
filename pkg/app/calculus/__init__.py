# app/calculus/__init__.py
from app.calculus.approximation import (
    SplitPaths,
    closed_form_H,
    forward_step_split,
    interpolation_increments,
    linear_interpolation,
)
from app.calculus.tensor import (
    RULES,
    adjoint_path,
    contract_integral,
    operator_covariation,
    operator_integral,
    scalar_covariation,
    tensor_covariation,
    tensor_integral_left,
    tensor_integral_right,
    total_variation,
    trace_path,
)

__all__ = [
    "RULES",
    "SplitPaths",
    "adjoint_path",
    "closed_form_H",
    "contract_integral",
    "forward_step_split",
    "interpolation_increments",
    "linear_interpolation",
    "operator_covariation",
    "operator_integral",
    "scalar_covariation",
    "tensor_covariation",
    "tensor_integral_left",
    "tensor_integral_right",
    "total_variation",
    "trace_path",
]
