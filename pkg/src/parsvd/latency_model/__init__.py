"""Hardware-profiled time and computational complexity model.

Builds dataflow graphs from instrumented solver schedules, expands complex
arithmetic into real operations, and evaluates profile-weighted critical
paths; closed-form mirrors cover sizes beyond the explicit trace limit.
"""

from .analytic import ALGORITHMS, analytic_latency, total_ops
from .dfg import Dfg, DfgNode, LatencyEstimate, OpCount, critical_path
from .profiles import BUILTIN_PROFILES, OP_KINDS, HardwareProfile, load_profile
from .table_counts import ceil_log2, householder_step_counts
from .trace import EXPLICIT_TRACE_LIMIT, TraceBuilder, trace_run

__all__ = [
    "ALGORITHMS",
    "BUILTIN_PROFILES",
    "Dfg",
    "DfgNode",
    "EXPLICIT_TRACE_LIMIT",
    "HardwareProfile",
    "LatencyEstimate",
    "OpCount",
    "OP_KINDS",
    "TraceBuilder",
    "analytic_latency",
    "ceil_log2",
    "critical_path",
    "householder_step_counts",
    "load_profile",
    "total_ops",
    "trace_run",
]


def expand_complex(op: str, context: str = "generic") -> tuple[OpCount, OpCount]:
    """Real-operation expansion of one complex operation.

    Returns (computational, time) counts. ``op`` is one of "mul", "add",
    "mul2n" (multiplication by a power of two, realized with shifters and
    therefore free); ``context`` selects "generic" or "conjugate-self"
    for multiplications.
    """
    from ..errors import ValidationError

    if op == "mul2n":
        return OpCount(), OpCount()
    if op == "add":
        return OpCount(add=2), OpCount(add=1)
    if op == "mul":
        if context == "conjugate-self":
            return OpCount(add=1, mul=2), OpCount(add=1, mul=1)
        if context == "generic":
            return OpCount(add=2, mul=4), OpCount(add=1, mul=1)
        raise ValidationError(f"unknown context {context!r}")
    raise ValidationError(f"unknown complex op {op!r}")
