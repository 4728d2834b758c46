"""Closed-form per-stage costs of one Householder tridiagonalization step.

For step k of a K x K reduction (1-based, 1 <= k <= K-1) the reflector
length is i = K - k. Stage numbering follows the update sequence:

1. column norm            5. p = 2 B v
2. pivot phase            6. w = p - (p^H v) v
3. reflector numerator    7. trailing-block update
4. reflector normalize    8. transform accumulation

Computational counts cover every expanded real operation; time counts are
the per-stage contribution to the dependency chain. Stage 2 overlaps with
stage 1 and stage 8 feeds nothing downstream inside the loop, so both
carry zero time. Adder-tree depths use ceil(log2(n)) with the empty and
single-element trees defined as depth zero; at i = 1 the partial-sum
reuse terms vanish, which removes one addition from stages 1 and 4
relative to a literal reading of the i >= 2 expressions.
"""

from __future__ import annotations

from ..errors import DimensionError
from .dfg import OpCount


def ceil_log2(n: int) -> int:
    """ceil(log2 n) for n >= 1; zero for n <= 1 (empty/degenerate trees)."""
    if n <= 1:
        return 0
    return int(n - 1).bit_length()


def householder_step_counts(k_dim: int, k: int) -> list[tuple[OpCount, OpCount]]:
    """(computational, time) cost pairs for stages 1..8 of step k.

    ``k_dim`` is the matrix dimension K, ``k`` the 1-based step index.
    """
    if k_dim < 2:
        raise DimensionError(f"matrix dimension must be >= 2, got {k_dim}")
    if not 1 <= k <= k_dim - 1:
        raise DimensionError(f"step k must lie in [1, {k_dim - 1}], got {k}")
    i = k_dim - k
    kk = k_dim
    zero = OpCount()
    stage1 = (
        OpCount(add=2 * i - 1, mul=2 * i, sqrt=1),
        OpCount(add=(ceil_log2(i - 1) + 2) if i >= 2 else 1, mul=1, sqrt=1),
    )
    stage2 = (OpCount(div=2, sqrt=1), zero)
    stage3 = (OpCount(add=2, mul=2), OpCount(add=1, mul=1))
    stage4 = (
        OpCount(add=2 if i >= 2 else 1, mul=2, div=2 * i, sqrt=1),
        OpCount(add=2 if i >= 2 else 1, mul=1, div=1, sqrt=1),
    )
    stage5 = (
        OpCount(add=4 * i * i - 2 * i, mul=4 * i * i),
        OpCount(add=1 + ceil_log2(i), mul=1),
    )
    stage6 = (
        OpCount(add=8 * i - 2, mul=8 * i),
        OpCount(add=3 + ceil_log2(i), mul=2),
    )
    stage7 = (OpCount(add=4 * i * i, mul=4 * i * i), OpCount(add=3, mul=1))
    stage8 = (OpCount(add=10 * i * kk - 2 * kk, mul=12 * i * kk), zero)
    return [stage1, stage2, stage3, stage4, stage5, stage6, stage7, stage8]
