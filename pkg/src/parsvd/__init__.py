"""Parallel Gram-based SVD, baseline solvers, latency model, MIMO harness."""

from .gram_svd import (
    DcConfig,
    DcDiagnostics,
    EigenDecomposition,
    HermitianMatrix,
    SvdResult,
    TridiagonalReal,
    dc_eigen,
    gram,
    householder_vector,
    recover_svd,
    secular_solve,
    split,
    svd_4step,
    tridiagonalize,
    truncated_dc_eigen,
)
from .matrix_core import adjoint, fro_norm, matmul

__all__ = [
    "DcConfig",
    "DcDiagnostics",
    "EigenDecomposition",
    "HermitianMatrix",
    "SvdResult",
    "TridiagonalReal",
    "adjoint",
    "dc_eigen",
    "fro_norm",
    "gram",
    "householder_vector",
    "matmul",
    "recover_svd",
    "secular_solve",
    "split",
    "svd_4step",
    "tridiagonalize",
    "truncated_dc_eigen",
]
