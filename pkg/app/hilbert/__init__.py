# app/hilbert/__init__.py
from app.hilbert.core import (
    HSTensor,
    HVector,
    TruncationSpec,
    adjoint,
    apply,
    hs_inner,
    hs_norm,
    op_norm,
    tensor_product,
    trace,
)
from app.hilbert.maps import bar, bar_apply, compose, tilde

__all__ = [
    "HSTensor",
    "HVector",
    "TruncationSpec",
    "adjoint",
    "apply",
    "bar",
    "bar_apply",
    "compose",
    "hs_inner",
    "hs_norm",
    "op_norm",
    "tensor_product",
    "tilde",
    "trace",
]
