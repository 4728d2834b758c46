"""MIMO evaluation harness: dimension-reduction capacity, achievable rate
under inexact decompositions, and iteration/latency sweeps over matrix size.

Channels are i.i.d. circularly-symmetric complex Gaussian with unit
variance per entry, drawn from independent streams keyed by
(seed, panel, trial), so every result is reproducible bit for bit. Trials
are aggregated in fixed index order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, DimensionError, ValidationError
from .gram_svd import DcConfig, SvdResult, gram, recover_svd, svd_4step, tridiagonalize, truncated_dc_eigen
from .latency_model import analytic_latency, ceil_log2, total_ops
from .matrix_core import as_matrix
from .reference_solvers import (
    gk_bidiagonalize,
    gk_fixed_sweeps,
    gk_singular_value_history,
    qr_eigenvalue_history,
    qr_fixed_sweeps,
)

MIMO_ALGORITHMS = ("4step-dc", "4step-qr", "gk")


@dataclass(frozen=True)
class ChannelConfig:
    """Scenario description for the Monte Carlo runs."""

    m: int
    k: int
    panels: int = 1
    snr_per_link: float = 1.0
    seed: int = 0
    trials: int = 100

    def __post_init__(self):
        if not self.m >= self.k >= 1:
            raise DimensionError(f"need m >= k >= 1, got m={self.m}, k={self.k}")
        if self.panels < 1 or self.trials < 1:
            raise ValidationError("panels and trials must be >= 1")
        if not self.snr_per_link > 0:
            raise ValidationError("snr_per_link must be positive")


@dataclass
class SweepResult:
    """One sweep: an x axis, one series per algorithm, optional reference."""

    x: list
    series: dict = field(default_factory=dict)
    reference: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, vals in self.series.items():
            if len(vals) != len(self.x):
                raise ValidationError(f"series {name!r} length != x length")


class ReducedChannel(NamedTuple):
    w: np.ndarray
    h_reduced: np.ndarray


class CapacityPoint(NamedTuple):
    value: float
    trials_ok: int
    trials_failed: int


class IterationSearch(NamedTuple):
    budget: int
    reported: int


def gen_iid_channel(cfg: ChannelConfig, panel: int, trial: int = 0) -> np.ndarray:
    """M x K channel draw, deterministic per (seed, panel, trial)."""
    rng = np.random.default_rng([cfg.seed, panel, trial])
    re = rng.standard_normal((cfg.m, cfg.k))
    im = rng.standard_normal((cfg.m, cfg.k))
    return (re + 1j * im) / np.sqrt(2.0)


def _chol_logdet(a: np.ndarray) -> float:
    """log det of a Hermitian positive-definite matrix via Cholesky."""
    n = a.shape[0]
    low = np.zeros_like(a)
    logdet = 0.0
    for i in range(n):
        s = a[i, i].real - np.sum((low[i, :i] * low[i, :i].conj()).real)
        if s <= 0.0:
            raise ValidationError("matrix is not positive definite")
        low[i, i] = math.sqrt(s)
        logdet += math.log(s)
        if i + 1 < n:
            low[i + 1 :, i] = (a[i + 1 :, i] - low[i + 1 :, :i] @ low[i, :i].conj()) / low[i, i]
    return logdet


def capacity_logdet(h_eff: np.ndarray, rho: float) -> float:
    """Equal-power log-det capacity log2 det(I + rho H^H H), in bits."""
    h_eff = as_matrix(h_eff)
    k = h_eff.shape[1]
    gramm = np.eye(k, dtype=np.complex128) + rho * (h_eff.conj().T @ h_eff)
    return _chol_logdet(gramm) / math.log(2.0)


def dimension_reduce(h, t: int, svd: SvdResult) -> ReducedChannel:
    """Project onto the t dominant left singular vectors of h.

    Returns the t x M semi-unitary map W (rows orthonormal) and the
    reduced channel W h. Requires t valid U columns in the decomposition.
    """
    h = as_matrix(h)
    m, k = h.shape
    if not 1 <= t <= k:
        raise DimensionError(f"t must lie in [1, {k}], got {t}")
    n_valid = int(np.sum(svd.valid))
    if t > n_valid:
        raise ValidationError(
            f"requested {t} dominant directions but only {n_valid} U columns are valid"
        )
    w = svd.u[:, :t].conj().T
    return ReducedChannel(w=w, h_reduced=w @ h)


def _truncated_svd(h, algorithm: str, budget: int | None, cfg_dc: DcConfig) -> SvdResult:
    """Decompose h with the given algorithm and iteration budget.

    Budget semantics: rational-model steps per secular root (4step-dc) or
    plain sweeps (4step-qr, gk); None runs to convergence with the default
    production solver.
    """
    if budget is None:
        return svd_4step(h, cfg_dc)
    if algorithm == "4step-dc":
        return svd_4step(h, cfg_dc, iter_budget=budget)
    if algorithm == "4step-qr":
        b = gram(h)
        t, q_t = tridiagonalize(b)
        eig = qr_fixed_sweeps(t, budget, shift=False)
        return recover_svd(h, eig, q_t, cfg_dc)
    if algorithm == "gk":
        bd = gk_bidiagonalize(h)
        return gk_fixed_sweeps(bd, budget, shift=False)
    raise ValidationError(f"unknown algorithm {algorithm!r}")


def dmimo_capacity(
    cfg: ChannelConfig,
    t: int,
    eig_budget: int | str = "exact",
    algorithm: str = "4step-dc",
    dc_config: DcConfig | None = None,
) -> CapacityPoint:
    """Mean capacity of the stacked dimension-reduced multi-panel channel.

    Per trial: draw one channel per panel, decompose it (possibly with a
    truncated iteration budget), keep the T dominant left directions per
    panel, stack the reduced channels, and evaluate the log-det capacity.
    Failed trials are skipped and counted.
    """
    dc_config = dc_config or DcConfig()
    budget = None if eig_budget == "exact" else int(eig_budget)
    values = []
    failed = 0
    for trial in range(cfg.trials):
        try:
            blocks = []
            for panel in range(cfg.panels):
                h = gen_iid_channel(cfg, panel, trial)
                svd = _truncated_svd(h, algorithm, budget, dc_config)
                blocks.append(dimension_reduce(h, t, svd).h_reduced)
            h_eff = np.vstack(blocks)
            values.append(capacity_logdet(h_eff, cfg.snr_per_link))
        except (ConvergenceError, ValidationError):
            failed += 1
    if not values:
        raise ConvergenceError("every trial failed in dmimo_capacity")
    return CapacityPoint(value=float(np.mean(values)), trials_ok=len(values), trials_failed=failed)


def achievable_rate(h, u_est, v_est, rho: float) -> float:
    """Sum rate with per-stream decoding after diagonalizing by estimates.

    G = U^H H V; each stream's SINR is rho |G_kk|^2 over the off-diagonal
    leakage power plus unit noise, with equal per-stream transmit power.
    """
    h = as_matrix(h)
    u_est = as_matrix(u_est)
    v_est = as_matrix(v_est)
    g = u_est.conj().T @ h @ v_est
    k = min(g.shape)
    rate = 0.0
    for i in range(k):
        sig = rho * abs(g[i, i]) ** 2
        leak = rho * (np.sum(np.abs(g[i, :]) ** 2) - abs(g[i, i]) ** 2)
        rate += math.log2(1.0 + sig / (leak + 1.0))
    return float(rate)


def mmimo_rate(
    cfg: ChannelConfig,
    eig_budget: int | str = "exact",
    algorithm: str = "4step-dc",
    dc_config: DcConfig | None = None,
) -> CapacityPoint:
    """Mean achievable rate over trials with possibly-truncated factors."""
    dc_config = dc_config or DcConfig()
    budget = None if eig_budget == "exact" else int(eig_budget)
    values = []
    failed = 0
    for trial in range(cfg.trials):
        try:
            h = gen_iid_channel(cfg, 0, trial)
            svd = _truncated_svd(h, algorithm, budget, dc_config)
            values.append(achievable_rate(h, svd.u, svd.v, cfg.snr_per_link))
        except (ConvergenceError, ValidationError):
            failed += 1
    if not values:
        raise ConvergenceError("every trial failed in mmimo_rate")
    return CapacityPoint(value=float(np.mean(values)), trials_ok=len(values), trials_failed=failed)


def sv_mse(estimate, reference) -> float:
    """Mean squared difference of two descending singular-value arrays."""
    est = np.asarray(estimate, dtype=np.float64)
    ref = np.asarray(reference, dtype=np.float64)
    if est.shape != ref.shape:
        raise DimensionError(f"length mismatch: {est.shape} vs {ref.shape}")
    return float(np.mean((est - ref) ** 2))


def _dc_sigma(t, budget, cfg_dc):
    lam = truncated_dc_eigen(t, cfg_dc, budget).lam
    return np.sqrt(np.maximum(lam[::-1], 0.0))


def iterations_to_mse(
    algorithm: str,
    cfg: ChannelConfig,
    mse_target: float,
    budget_cap: int = 64,
    sweep_cap: int = 800,
    dc_config: DcConfig | None = None,
) -> IterationSearch:
    """Smallest iteration budget whose mean singular-value MSE meets the
    target, measured against converged decompositions over cfg.trials
    channels.

    The returned ``reported`` count multiplies the per-root budget by the
    recursion depth for the divide-and-conquer solver, so counts are
    comparable across algorithms; ``budget`` is the raw knob. Sweeps are
    counted in the plain (unshifted) iteration mode that the latency model
    prices.
    """
    if mse_target <= 0:
        raise ValidationError("mse_target must be positive")
    dc_config = dc_config or DcConfig()
    channels = [gen_iid_channel(cfg, 0, trial) for trial in range(cfg.trials)]
    refs = [svd_4step(h, dc_config).sigma for h in channels]

    if algorithm in ("4step-dc", "4step"):
        tris = [tridiagonalize(gram(h))[0] for h in channels]
        depth = ceil_log2(cfg.k)
        achieved = math.inf
        for budget in range(1, budget_cap + 1):
            mses = [sv_mse(_dc_sigma(t, budget, dc_config), r) for t, r in zip(tris, refs)]
            achieved = float(np.mean(mses))
            if achieved <= mse_target:
                return IterationSearch(budget=budget, reported=budget * max(depth, 1))
        raise ConvergenceError(
            f"dc budget cap {budget_cap} reached; achieved mean MSE {achieved:.3e}"
        )

    if algorithm == "4step-qr":
        hists = [
            qr_eigenvalue_history(tridiagonalize(gram(h))[0], sweep_cap, shift=False)
            for h in channels
        ]
        to_sigma = lambda lam: np.sqrt(np.maximum(lam[::-1], 0.0))
    elif algorithm == "gk":
        hists = [
            gk_singular_value_history(gk_bidiagonalize(h), sweep_cap, shift=False)
            for h in channels
        ]
        to_sigma = lambda sig: sig
    else:
        raise ValidationError(f"unknown algorithm {algorithm!r}")

    achieved = math.inf
    for sweep in range(sweep_cap):
        mses = [sv_mse(to_sigma(h[sweep]), r) for h, r in zip(hists, refs)]
        achieved = float(np.mean(mses))
        if achieved <= mse_target:
            return IterationSearch(budget=sweep + 1, reported=sweep + 1)
    raise ConvergenceError(
        f"sweep cap {sweep_cap} reached; achieved mean MSE {achieved:.3e}"
    )


def sweep_latency_vs_size(
    algorithms,
    sizes,
    mse_target: float,
    profile,
    trials: int = 5,
    seed: int = 0,
    snr_per_link: float = 1.0,
    budget_cap: int = 64,
    sweep_cap: int = 800,
) -> SweepResult:
    """Latency and op-count comparison across matrix sizes.

    For each (M, K) size: measure the iteration count each algorithm needs
    to hit the singular-value MSE target, then evaluate the closed-form
    latency (normalized adders) and total operation count at that count.
    """
    sizes = list(sizes)
    if not sizes:
        raise ValidationError("sizes must be nonempty")
    series: dict = {}
    meta = {"mse_target": mse_target, "iterations": {}, "trials": trials, "seed": seed}
    for alg in algorithms:
        series[alg] = []
        series[f"{alg}:ops"] = []
    for m_dim, k_dim in sizes:
        cfg = ChannelConfig(
            m=m_dim, k=k_dim, panels=1, snr_per_link=snr_per_link, seed=seed, trials=trials
        )
        for alg in algorithms:
            found = iterations_to_mse(
                alg, cfg, mse_target, budget_cap=budget_cap, sweep_cap=sweep_cap
            )
            est = analytic_latency(alg, (m_dim, k_dim), found.budget, profile)
            ops = total_ops(alg, (m_dim, k_dim), found.budget)
            series[alg].append(est.normalized_adders)
            series[f"{alg}:ops"].append(ops.total())
            meta["iterations"][f"{alg}@{m_dim}x{k_dim}"] = {
                "budget": found.budget,
                "reported": found.reported,
            }
    return SweepResult(x=[f"{m}x{k}" for m, k in sizes], series=series, meta=meta)


def capacity_vs_iterations(
    cfg: ChannelConfig,
    t: int,
    budgets,
    algorithms=MIMO_ALGORITHMS,
    dc_config: DcConfig | None = None,
) -> SweepResult:
    """Dimension-reduction capacity as the iteration budget grows.

    The x axis carries the raw budgets; reported-iteration counts per
    algorithm (budget times recursion depth for the divide-and-conquer
    path) are recorded in the metadata. The reference is the perfect-SVD
    capacity.
    """
    budgets = list(budgets)
    ref = dmimo_capacity(cfg, t, "exact", dc_config=dc_config).value
    series: dict = {alg: [] for alg in algorithms}
    depth = max(ceil_log2(cfg.k), 1)
    meta = {"t": t, "reported": {}}
    for alg in algorithms:
        rep = []
        for b in budgets:
            series[alg].append(dmimo_capacity(cfg, t, b, algorithm=alg, dc_config=dc_config).value)
            rep.append(b * depth if alg == "4step-dc" else b)
        meta["reported"][alg] = rep
    return SweepResult(x=budgets, series=series, reference=ref, meta=meta)


def rate_vs_iterations(
    cfg: ChannelConfig,
    budgets,
    algorithms=MIMO_ALGORITHMS,
    dc_config: DcConfig | None = None,
) -> SweepResult:
    """Massive-MIMO achievable rate as the iteration budget grows."""
    budgets = list(budgets)
    ref = mmimo_rate(cfg, "exact", dc_config=dc_config).value
    series: dict = {alg: [] for alg in algorithms}
    depth = max(ceil_log2(cfg.k), 1)
    meta = {"reported": {}}
    for alg in algorithms:
        rep = []
        for b in budgets:
            series[alg].append(mmimo_rate(cfg, b, algorithm=alg, dc_config=dc_config).value)
            rep.append(b * depth if alg == "4step-dc" else b)
        meta["reported"][alg] = rep
    return SweepResult(x=budgets, series=series, reference=ref, meta=meta)
