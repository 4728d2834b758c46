"""Baseline decompositions: Golub-Kahan SVD, QR tridiagonal eigensolver,
and a cyclic complex Jacobi eigensolver used as a brute-force test oracle.

The Golub-Kahan path works directly on the rectangular matrix A
(bidiagonalize, then Givens sweeps); the QR path diagonalizes the
tridiagonal matrix produced by the Gram pipeline. Both expose per-sweep
singular-value histories so iteration-versus-accuracy trade-offs can be
measured without re-running from scratch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DimensionError, ValidationError
from .gram_svd import (
    EigenDecomposition,
    HermitianMatrix,
    SvdResult,
    TridiagonalReal,
    householder_vector,
)
from .matrix_core import as_matrix, fro_norm

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class Bidiagonal:
    """Real upper bidiagonal factor with its accumulated unitary factors.

    u0^H A v0 equals the (M x K) matrix holding diag/superdiag in its top
    K x K block and zeros below.
    """

    diag: np.ndarray
    superdiag: np.ndarray
    u0: np.ndarray
    v0: np.ndarray

    @property
    def dim(self) -> int:
        return self.diag.size

    def to_dense(self, rows: int | None = None) -> np.ndarray:
        k = self.dim
        rows = k if rows is None else rows
        b = np.zeros((rows, k))
        for j in range(k):
            b[j, j] = self.diag[j]
            if j + 1 < k:
                b[j, j + 1] = self.superdiag[j]
        return b


@dataclass(frozen=True)
class GivensRotation:
    """Plane rotation with cosine c and sine s acting on indices (i, j)."""

    c: float
    s: float
    i: int
    j: int


@dataclass
class SweepReport:
    """Iteration bookkeeping for the sweep-based solvers.

    ``offdiag_norm_history`` records the convergence metric before the
    first sweep and after each one. ``effective_pipeline_iterations``
    counts the rotations left on the critical path once successive sweeps
    are overlapped: each extra sweep costs four rotations on a bidiagonal
    chase and two on a tridiagonal one, because a new sweep only waits
    for the first couple of updates of the previous one.
    ``trivial_mul_skips`` counts scalar multiplications avoided in the
    eigenvector accumulation thanks to structural zeros and ones.
    """

    sweeps: int = 0
    offdiag_norm_history: list[float] = field(default_factory=list)
    effective_pipeline_iterations: int = 0
    trivial_mul_skips: int = 0


def _givens(a: float, b: float) -> tuple[float, float, float]:
    """c, s, r with [c s; -s c]^T applied to (a, b) giving (r, 0)."""
    r = math.hypot(a, b)
    if r == 0.0:
        return 1.0, 0.0, 0.0
    return a / r, b / r, r


def make_givens(a: float, b: float, i: int, j: int) -> GivensRotation:
    """Plane rotation annihilating b against a, acting on indices (i, j)."""
    c, s, _ = _givens(a, b)
    return GivensRotation(c=c, s=s, i=i, j=j)


# ---------------------------------------------------------------------------
# Golub-Kahan


def gk_bidiagonalize(a) -> Bidiagonal:
    """Reduce an M x K matrix (M >= K) to real upper bidiagonal form.

    Alternating left and right Householder reflections with a unit-phase
    factor that keeps the produced diagonal and superdiagonal real and
    nonnegative. Zero columns/rows take the skip path.
    """
    a = as_matrix(a)
    m, k = a.shape
    if m < k:
        raise DimensionError(f"gk_bidiagonalize expects rows >= cols, got {m}x{k}")
    work = a.copy()
    u0 = np.eye(m, dtype=np.complex128)
    v0 = np.eye(k, dtype=np.complex128)

    def _already_reduced(vec):
        # pivot real nonnegative with exact zeros below: nothing to do
        return (
            np.all(vec[1:] == 0.0)
            and vec[0].imag == 0.0
            and vec[0].real >= 0.0
        )

    for j in range(k):
        x = work[j:, j]
        if x.size > 1 and _already_reduced(x):
            pass
        elif x.size > 1:
            step = householder_vector(x, k=j)
            if not step.skip:
                v = step.v
                block = work[j:, j:]
                # P = -conj(phase) (I - 2 v v^H) applied from the left
                work[j:, j:] = -np.conj(step.phase) * (
                    block - 2.0 * np.outer(v, v.conj() @ block)
                )
                work[j:, j] = 0.0
                work[j, j] = step.xnorm
                ub = u0[:, j:]
                u0[:, j:] = -step.phase * (ub - 2.0 * np.outer(ub @ v, v.conj()))
        else:
            piv = work[j, j]
            ap = abs(piv)
            if ap > 0.0:
                ph = piv / ap
                work[j, j:] = np.conj(ph) * work[j, j:]
                work[j, j] = ap
                u0[:, j] = ph * u0[:, j]
        if j < k - 2:
            xr = work[j, j + 1 :]
            if _already_reduced(xr):
                continue
            step = householder_vector(np.conj(xr), k=j)
            if not step.skip:
                v = step.v
                block = work[j:, j + 1 :]
                # right-multiply by P^H built from the conjugated row
                work[j:, j + 1 :] = -step.phase * (
                    block - 2.0 * np.outer(block @ v, v.conj())
                )
                work[j, j + 1 :] = 0.0
                work[j, j + 1] = step.xnorm
                vb = v0[:, j + 1 :]
                v0[:, j + 1 :] = -step.phase * (vb - 2.0 * np.outer(vb @ v, v.conj()))
        elif j == k - 2:
            piv = work[j, j + 1]
            ap = abs(piv)
            if ap > 0.0:
                ph = piv / ap
                work[:, j + 1] = np.conj(ph) * work[:, j + 1]
                v0[:, j + 1] = np.conj(ph) * v0[:, j + 1]

    diag = work[range(k), range(k)]
    if k > 1:
        sup = work[range(k - 1), range(1, k)]
    else:
        sup = np.zeros(0, dtype=np.complex128)
    bound = 1e-10 * max(fro_norm(a), 1.0)
    if np.max(np.abs(diag.imag), initial=0.0) > bound or np.max(
        np.abs(sup.imag), initial=0.0
    ) > bound:
        raise ValidationError("bidiagonalization left complex band entries")
    return Bidiagonal(diag=diag.real.copy(), superdiag=sup.real.copy(), u0=u0, v0=v0)


def _gk_step(d, e, lo, hi, mu, urot, vrot):
    """One implicit-shift bulge chase over the block [lo, hi] of a bidiagonal.

    Rotations are appended to urot/vrot as (j, c, s) when provided.
    """
    f = d[lo] * d[lo] - mu
    g = d[lo] * e[lo]
    for j in range(lo, hi):
        c, s, r = _givens(f, g)
        if j > lo:
            e[j - 1] = r
        f = c * d[j] + s * e[j]
        e[j] = c * e[j] - s * d[j]
        g = s * d[j + 1]
        d[j + 1] = c * d[j + 1]
        if vrot is not None:
            vrot.append((j, c, s))
        c2, s2, r2 = _givens(f, g)
        d[j] = r2
        f = c2 * e[j] + s2 * d[j + 1]
        d[j + 1] = c2 * d[j + 1] - s2 * e[j]
        if j < hi - 1:
            g = s2 * e[j + 1]
            e[j + 1] = c2 * e[j + 1]
        if urot is not None:
            urot.append((j, c2, s2))
    e[hi - 1] = f


def _gk_shift(d, e, lo, hi):
    """Shift: smallest eigenvalue of the trailing 2x2 of B^T B."""
    if hi == lo:
        return 0.0
    dm, em = d[hi - 1], e[hi - 1]
    dn = d[hi]
    a11 = dm * dm + (e[hi - 2] * e[hi - 2] if hi - 1 > lo else 0.0)
    a12 = dm * em
    a22 = dn * dn + em * em
    tr = 0.5 * (a11 + a22)
    det = a11 * a22 - a12 * a12
    disc = max(tr * tr - det, 0.0)
    root = math.sqrt(disc)
    lam = tr - root if tr >= 0 else tr + root
    return lam


def _apply_col_rotations(mat, rots, base):
    for j, c, s in rots:
        p = base + j
        cp = mat[:, p].copy()
        cq = mat[:, p + 1]
        mat[:, p] = c * cp + s * cq
        mat[:, p + 1] = -s * cp + c * cq


def _gk_sweep_all_blocks(d, e, shift, urot, vrot):
    """Run one chase over every unreduced block; returns True if any ran."""
    k = d.size
    ran = False
    lo = 0
    while lo < k - 1:
        if abs(e[lo]) <= _EPS * (abs(d[lo]) + abs(d[lo + 1])):
            e[lo] = 0.0
            lo += 1
            continue
        hi = lo
        while hi < k - 1 and abs(e[hi]) > _EPS * (abs(d[hi]) + abs(d[hi + 1])):
            hi += 1
        mu = _gk_shift(d, e, lo, hi) if shift else 0.0
        _gk_step(d, e, lo, hi, mu, urot, vrot)
        ran = True
        lo = hi + 1
    return ran


def gk_singular_value_history(bd: Bidiagonal, max_sweeps: int, shift: bool = True):
    """Descending singular-value estimates after each of ``max_sweeps`` sweeps.

    Runs without accumulating U/V, so it is cheap enough for Monte Carlo
    iteration-count measurements.
    """
    d = bd.diag.copy()
    e = bd.superdiag.copy()
    out = []
    for _ in range(max_sweeps):
        _gk_sweep_all_blocks(d, e, shift, None, None)
        out.append(np.sort(np.abs(d))[::-1].copy())
    return out


def gk_diagonalize(
    bd: Bidiagonal,
    tol: float = 1e-12,
    max_sweeps: int = 500,
    shift: bool = True,
    accumulate: bool = True,
) -> tuple[SvdResult, SweepReport]:
    """Diagonalize a bidiagonal factor with implicit QR sweeps.

    One sweep chases a bulge across every unreduced block. Iterates until
    the largest superdiagonal magnitude drops below tol times the largest
    diagonal magnitude. Returns the economy SVD (sigma descending, signs
    absorbed into U) together with a SweepReport.
    """
    d = bd.diag.copy()
    e = bd.superdiag.copy()
    k = d.size
    m = bd.u0.shape[0]
    u = bd.u0[:, :k].copy() if accumulate else None
    v = bd.v0.copy() if accumulate else None

    def metric():
        dmax = np.max(np.abs(d))
        emax = np.max(np.abs(e)) if e.size else 0.0
        return emax / dmax if dmax > 0 else 0.0

    report = SweepReport(offdiag_norm_history=[metric()])
    while metric() > tol:
        if report.sweeps >= max_sweeps:
            raise ConvergenceError(
                f"gk_diagonalize did not converge in {max_sweeps} sweeps",
                history=report.offdiag_norm_history,
            )
        urot: list = [] if accumulate else None
        vrot: list = [] if accumulate else None
        _gk_sweep_all_blocks(d, e, shift, urot, vrot)
        if accumulate:
            _apply_col_rotations(u, urot, 0)
            _apply_col_rotations(v, vrot, 0)
        report.sweeps += 1
        report.offdiag_norm_history.append(metric())

    offset = 2 * min(2, max(k - 1, 1))
    if report.sweeps == 0:
        report.effective_pipeline_iterations = 0
    else:
        report.effective_pipeline_iterations = 2 * (k - 1) + offset * (report.sweeps - 1)

    sigma = np.abs(d)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    if accumulate:
        signs = np.where(d < 0, -1.0, 1.0)
        u = u * signs
        u = u[:, order]
        v = v[:, order]
    else:
        u = np.zeros((m, k), dtype=np.complex128)
        v = np.zeros((k, k), dtype=np.complex128)
    valid = sigma > 0 if sigma.size and sigma[0] > 0 else np.zeros(k, dtype=bool)
    result = SvdResult(u=u, sigma=sigma, v=v, valid=valid, diagnostics=None)
    return result, report


def gk_svd(a, tol: float = 1e-12, max_sweeps: int = 500) -> tuple[SvdResult, SweepReport]:
    """Convenience wrapper: bidiagonalize then diagonalize."""
    return gk_diagonalize(gk_bidiagonalize(a), tol=tol, max_sweeps=max_sweeps)


def gk_fixed_sweeps(bd: Bidiagonal, sweeps: int, shift: bool = False) -> SvdResult:
    """Run exactly ``sweeps`` sweeps and return the (possibly unconverged)
    decomposition; used for accuracy-versus-iterations studies."""
    d = bd.diag.copy()
    e = bd.superdiag.copy()
    k = d.size
    u = bd.u0[:, :k].copy()
    v = bd.v0.copy()
    for _ in range(sweeps):
        urot: list = []
        vrot: list = []
        _gk_sweep_all_blocks(d, e, shift, urot, vrot)
        _apply_col_rotations(u, urot, 0)
        _apply_col_rotations(v, vrot, 0)
    sigma = np.abs(d)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    signs = np.where(d < 0, -1.0, 1.0)
    u = (u * signs)[:, order]
    v = v[:, order]
    valid = sigma > 0 if sigma.size and sigma[0] > 0 else np.zeros(k, dtype=bool)
    return SvdResult(u=u, sigma=sigma, v=v, valid=valid, diagnostics=None)


# ---------------------------------------------------------------------------
# QR iteration for the symmetric tridiagonal eigenproblem


def _wilkinson_shift(d, e, lo, hi):
    a = d[hi - 1]
    b = e[hi - 1]
    c = d[hi]
    delta = 0.5 * (a - c)
    if delta == 0.0 and b == 0.0:
        return c
    sgn = 1.0 if delta >= 0 else -1.0
    return c - b * b / (delta + sgn * math.hypot(delta, b))


class _BandAccumulator:
    """Eigenvector accumulation that skips structurally zero/one entries.

    Columns of Q start as identity basis vectors; each rotation widens the
    row-support interval of the two columns it touches. Rows outside the
    union of supports are untouched and the corresponding multiplications
    are counted as skipped relative to a dense column update.
    """

    def __init__(self, n: int):
        self.q = np.eye(n)
        self.lo = np.arange(n)
        self.hi = np.arange(n)
        self.n = n
        self.skipped = 0

    def rotate(self, j: int, c: float, s: float):
        lo = min(self.lo[j], self.lo[j + 1])
        hi = max(self.hi[j], self.hi[j + 1])
        rows = slice(lo, hi + 1)
        span = hi - lo + 1
        # dense cost is 4n multiplications; identity-start structure leaves
        # 4*span genuine ones minus the two pure basis entries
        self.skipped += 4 * (self.n - span)
        cp = self.q[rows, j].copy()
        cq = self.q[rows, j + 1]
        self.q[rows, j] = c * cp + s * cq
        self.q[rows, j + 1] = -s * cp + c * cq
        self.lo[j] = self.lo[j + 1] = lo
        self.hi[j] = self.hi[j + 1] = hi


def _qr_tridiag_step(d, e, lo, hi, mu, acc: _BandAccumulator | None):
    x = d[lo] - mu
    z = e[lo]
    for j in range(lo, hi):
        c, s, r = _givens(x, z)
        if j > lo:
            e[j - 1] = r
        a, b, d1 = d[j], e[j], d[j + 1]
        d[j] = c * c * a + 2.0 * c * s * b + s * s * d1
        d[j + 1] = s * s * a - 2.0 * c * s * b + c * c * d1
        e[j] = (c * c - s * s) * b + c * s * (d1 - a)
        if j < hi - 1:
            z = s * e[j + 1]
            e[j + 1] = c * e[j + 1]
            x = e[j]
        if acc is not None:
            acc.rotate(j, c, s)


def _qr_sweep_all_blocks(d, e, shift, acc):
    k = d.size
    lo = 0
    while lo < k - 1:
        if abs(e[lo]) <= _EPS * (abs(d[lo]) + abs(d[lo + 1])):
            e[lo] = 0.0
            lo += 1
            continue
        hi = lo
        while hi < k - 1 and abs(e[hi]) > _EPS * (abs(d[hi]) + abs(d[hi + 1])):
            hi += 1
        mu = _wilkinson_shift(d, e, lo, hi) if shift else 0.0
        _qr_tridiag_step(d, e, lo, hi, mu, acc)
        lo = hi + 1


def qr_fixed_sweeps(t: TridiagonalReal, sweeps: int, shift: bool = False) -> EigenDecomposition:
    """Run exactly ``sweeps`` QR iterations and return the (possibly
    unconverged) eigendecomposition with accumulated eigenvectors."""
    d = t.diag.copy()
    e = t.offdiag.copy()
    k = d.size
    acc = _BandAccumulator(k)
    for _ in range(sweeps):
        _qr_sweep_all_blocks(d, e, shift, acc)
    order = np.argsort(d, kind="stable")
    return EigenDecomposition(lam=d[order], q=acc.q[:, order].astype(np.complex128), diagnostics=None)


def qr_eigenvalue_history(t: TridiagonalReal, max_iters: int, shift: bool = True):
    """Ascending eigenvalue estimates after each QR iteration."""
    d = t.diag.copy()
    e = t.offdiag.copy()
    out = []
    for _ in range(max_iters):
        _qr_sweep_all_blocks(d, e, shift, None)
        out.append(np.sort(d).copy())
    return out


def qr_tridiag_eigen(
    t: TridiagonalReal,
    tol: float = 1e-12,
    max_iters: int = 500,
    shift: bool = True,
    accumulate: bool = True,
) -> tuple[EigenDecomposition, SweepReport]:
    """Symmetric tridiagonal eigensolver by implicit QR iteration.

    Wilkinson-shifted by default; pass shift=False for the plain sweeps
    used in per-iteration cost studies. The eigenvector matrix exploits
    its identity start: rotations only touch the filled band and the
    skipped multiplications are reported.
    """
    d = t.diag.copy()
    e = t.offdiag.copy()
    k = d.size
    acc = _BandAccumulator(k) if accumulate else None

    def metric():
        dmax = np.max(np.abs(d))
        emax = np.max(np.abs(e)) if e.size else 0.0
        return emax / dmax if dmax > 0 else 0.0

    report = SweepReport(offdiag_norm_history=[metric()])
    while metric() > tol:
        if report.sweeps >= max_iters:
            raise ConvergenceError(
                f"qr_tridiag_eigen did not converge in {max_iters} iterations",
                history=report.offdiag_norm_history,
            )
        _qr_sweep_all_blocks(d, e, shift, acc)
        report.sweeps += 1
        report.offdiag_norm_history.append(metric())
    offset = min(2, max(k - 1, 1))
    if report.sweeps == 0:
        report.effective_pipeline_iterations = 0
    else:
        report.effective_pipeline_iterations = (k - 1) + offset * (report.sweeps - 1)

    order = np.argsort(d, kind="stable")
    lam = d[order]
    if accumulate:
        report.trivial_mul_skips = acc.skipped
        q = acc.q[:, order].astype(np.complex128)
    else:
        q = np.zeros((k, k), dtype=np.complex128)
    return EigenDecomposition(lam=lam, q=q, diagnostics=None), report


# ---------------------------------------------------------------------------
# Jacobi oracle


def jacobi_eigen_oracle(b, tol: float = 1e-13, max_sweeps: int = 30) -> EigenDecomposition:
    """Cyclic two-sided complex Jacobi eigensolver for Hermitian matrices.

    Used as an independent oracle in tests: it shares no code with the
    tridiagonal pipeline. Sweeps rotate away each off-diagonal entry in
    turn until the off-diagonal Frobenius mass is below tol relative to
    the matrix norm.
    """
    if isinstance(b, HermitianMatrix):
        work = b.mat.copy()
    else:
        work = HermitianMatrix.from_matrix(b).mat.copy()
    n = work.shape[0]
    vec = np.eye(n, dtype=np.complex128)
    scale = fro_norm(work)
    if scale == 0.0:
        return EigenDecomposition(lam=np.zeros(n), q=vec, diagnostics=None)

    def offnorm():
        o = work - np.diag(np.diag(work))
        return fro_norm(o)

    for _ in range(max_sweeps):
        if offnorm() <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                m = abs(apq)
                if m <= 1e-300:
                    continue
                phase = apq / m
                app = work[p, p].real
                aqq = work[q, q].real
                tau = (aqq - app) / (2.0 * m)
                tsign = 1.0 if tau >= 0 else -1.0
                tt = tsign / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + tt * tt)
                s = tt * c
                # J = diag(1, conj(phase)) rotation in the (p, q) plane
                jp = np.array([c, -s * np.conj(phase)], dtype=np.complex128)
                jq = np.array([s, c * np.conj(phase)], dtype=np.complex128)
                colp = work[:, p].copy()
                colq = work[:, q].copy()
                work[:, p] = jp[0] * colp + jp[1] * colq
                work[:, q] = jq[0] * colp + jq[1] * colq
                rowp = work[p, :].copy()
                rowq = work[q, :].copy()
                work[p, :] = np.conj(jp[0]) * rowp + np.conj(jp[1]) * rowq
                work[q, :] = np.conj(jq[0]) * rowp + np.conj(jq[1]) * rowq
                work[p, q] = 0.0
                work[q, p] = 0.0
                vp = vec[:, p].copy()
                vq = vec[:, q].copy()
                vec[:, p] = jp[0] * vp + jp[1] * vq
                vec[:, q] = jq[0] * vp + jq[1] * vq
    else:
        raise ConvergenceError(
            f"jacobi oracle did not converge in {max_sweeps} sweeps",
            history=[offnorm() / scale],
        )

    lam = np.real(np.diag(work))
    order = np.argsort(lam, kind="stable")
    return EigenDecomposition(lam=lam[order], q=vec[:, order], diagnostics=None)
