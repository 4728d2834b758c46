"""Four-step SVD of a complex matrix via its Gram matrix.

Pipeline: form B = A^H A, reduce B to real symmetric tridiagonal form with
Householder reflections, diagonalize the tridiagonal matrix with a
divide-and-conquer rank-1 eigensolver, then recover U, sigma, V.

Everything operates on numpy arrays; all functions are pure and the merge
step of the eigensolver treats its inputs as read-only, so subproblems of
one merge could run concurrently under any schedule without changing the
result. Single-threaded execution is used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionError, ValidationError
from .matrix_core import as_matrix, as_vector, fro_norm

_EPS = np.finfo(np.float64).eps


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class HermitianMatrix:
    """A K x K Hermitian matrix, validated on construction."""

    mat: np.ndarray

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def from_matrix(cls, mat, tol: float = 1e-12) -> "HermitianMatrix":
        m = as_matrix(mat)
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"Hermitian matrix must be square, got {m.shape}")
        scale = fro_norm(m)
        dev = fro_norm(m - m.conj().T)
        if dev > tol * max(scale, 1.0):
            raise ValidationError(
                f"matrix is not Hermitian: deviation {dev:.3e} exceeds {tol:.1e} * norm"
            )
        return cls(mat=m)


@dataclass(frozen=True)
class TridiagonalReal:
    """Real symmetric tridiagonal matrix as (diag, offdiag) arrays."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=np.float64)
        e = np.asarray(self.offdiag, dtype=np.float64)
        if d.ndim != 1 or d.size < 1:
            raise DimensionError("diag must be a 1-D array of length >= 1")
        if e.shape != (d.size - 1,):
            raise DimensionError(
                f"offdiag must have length {d.size - 1}, got {e.shape}"
            )
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValidationError("tridiagonal entries must be finite")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def dim(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        t = np.diag(self.diag).astype(np.float64)
        k = self.dim
        for j in range(k - 1):
            t[j, j + 1] = self.offdiag[j]
            t[j + 1, j] = self.offdiag[j]
        return t


@dataclass(frozen=True)
class HouseholderStep:
    """One Householder reflection P = -e^{-j theta} (I - 2 v v^H).

    ``skip`` marks the degenerate zero-column case where P is the identity.
    """

    k: int
    v: np.ndarray | None
    phase: complex
    xnorm: float
    skip: bool = False

    def apply(self, y) -> np.ndarray:
        """Apply P to a vector of matching length."""
        y = as_vector(y)
        if self.skip:
            return y.copy()
        proj = 2.0 * np.vdot(self.v, y)
        return -np.conj(self.phase) * (y - proj * self.v)


@dataclass(frozen=True)
class SecularSystem:
    """Rank-1 modified diagonal eigenproblem diag(d) + alpha * u u^T."""

    d: np.ndarray
    alpha: float
    u: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        u = np.asarray(self.u, dtype=np.float64)
        if d.shape != u.shape or d.ndim != 1:
            raise DimensionError("d and u must be 1-D arrays of equal length")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "u", u)

    @property
    def size(self) -> int:
        return self.d.size


@dataclass
class DcDiagnostics:
    """Counters collected while running the divide-and-conquer eigensolver."""

    newton_iterations_total: int = 0
    newton_iterations_max_per_root: int = 0
    recursion_depth: int = 0
    deflation_count: int = 0
    interlacing_violations: int = 0


@dataclass(frozen=True)
class DcConfig:
    """Tolerances and budgets for the divide-and-conquer eigensolver."""

    secular_tol: float = 1e-13
    max_newton_iters: int = 50
    deflation_tol: float = 1e-14
    sv_threshold: float = 1e-10

    def __post_init__(self):
        if self.secular_tol <= 0 or self.deflation_tol <= 0:
            raise ValidationError("tolerances must be positive")
        if self.max_newton_iters < 1:
            raise ValidationError("max_newton_iters must be >= 1")
        if not 0 < self.sv_threshold < 1:
            raise ValidationError("sv_threshold must lie in (0, 1)")


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) and eigenvector columns of a Hermitian matrix."""

    lam: np.ndarray
    q: np.ndarray
    diagnostics: DcDiagnostics | None = None


@dataclass(frozen=True)
class SvdResult:
    """Economy SVD A = U diag(sigma) V^H with sigma descending.

    ``valid[i]`` is False where sigma_i fell below the relative threshold;
    those U columns are zero and must not be used.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    valid: np.ndarray
    diagnostics: DcDiagnostics | None = None

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.conj().T


@dataclass(frozen=True)
class SecularRoot:
    value: float
    iterations: int


# ---------------------------------------------------------------------------
# step 1: Gram matrix


def gram(a) -> HermitianMatrix:
    """Form B = A^H A for an M x K matrix with M >= K.

    Only the upper triangle is computed explicitly; the lower triangle is
    mirrored and the diagonal forced real, so the result is Hermitian by
    construction.
    """
    a = as_matrix(a)
    m, k = a.shape
    if m < k:
        raise DimensionError(
            f"gram expects rows >= cols, got {m}x{k}; adjoint the input first"
        )
    b = a.conj().T @ a
    upper = np.triu(b, 1)
    bh = upper + upper.conj().T + np.diag(np.real(np.diag(b)))
    return HermitianMatrix(mat=bh)


# ---------------------------------------------------------------------------
# step 2: Householder tridiagonalization


def householder_vector(x, k: int = 0) -> HouseholderStep:
    """Build the unit reflector v for a column x.

    With phase = x_1/|x_1| (phase = 1 when x_1 = 0), the reflection
    P = -conj(phase) (I - 2 v v^H) maps x onto ||x|| e_1 with a real
    nonnegative leading entry. A zero column yields a skip step.
    """
    x = as_vector(x)
    xnorm = float(np.sqrt(np.sum(x.real**2 + x.imag**2)))
    if xnorm == 0.0:
        return HouseholderStep(k=k, v=None, phase=1.0 + 0.0j, xnorm=0.0, skip=True)
    a1 = np.abs(x[0])
    phase = x[0] / a1 if a1 > 0.0 else complex(1.0)
    w = x.copy()
    w[0] = x[0] + phase * xnorm
    wnorm = float(np.sqrt(np.sum(w.real**2 + w.imag**2)))
    v = w / wnorm
    return HouseholderStep(k=k, v=v, phase=complex(phase), xnorm=xnorm, skip=False)


def tridiagonalize(b) -> tuple[TridiagonalReal, np.ndarray]:
    """Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Returns (T, Q_T) with Q_T^H B Q_T = T. The trailing submatrix is
    updated in vector form, B' = B - v w^H - w v^H with p = 2 B v and
    w = p - (p^H v) v; only one triangle is formed and then mirrored.
    """
    if isinstance(b, HermitianMatrix):
        bh = b
    else:
        bh = HermitianMatrix.from_matrix(b)
    k = bh.dim
    work = bh.mat.copy()
    q = np.eye(k, dtype=np.complex128)
    diag = np.empty(k, dtype=np.float64)
    off = np.empty(max(k - 1, 0), dtype=np.float64)
    imag_bound = 1e-10 * max(fro_norm(bh.mat), 1.0)

    for j in range(k - 1):
        x = work[j + 1 :, j].copy()
        step = householder_vector(x, k=j)
        off[j] = step.xnorm
        if step.skip:
            continue
        v = step.v
        sub = work[j + 1 :, j + 1 :]
        p = 2.0 * (sub @ v)
        w = p - (np.vdot(v, p)) * v
        sub = sub - np.outer(v, w.conj()) - np.outer(w, v.conj())
        # retain one triangle, mirror, and force the diagonal real
        upper = np.triu(sub, 1)
        dvals = np.diag(sub)
        if np.max(np.abs(dvals.imag)) > imag_bound:
            raise ValidationError("tridiagonalization produced a complex diagonal")
        work[j + 1 :, j + 1 :] = upper + upper.conj().T + np.diag(dvals.real)
        work[j + 1, j] = step.xnorm
        work[j, j + 1] = step.xnorm
        if j + 2 < k:
            work[j + 2 :, j] = 0.0
            work[j, j + 2 :] = 0.0
        # Q_T' = Q_T P^H, P = -conj(phase) (I - 2 v v^H)
        block = q[:, j + 1 :]
        q[:, j + 1 :] = -step.phase * (block - 2.0 * np.outer(block @ v, v.conj()))

    dw = np.diag(work)
    if np.max(np.abs(dw.imag)) > imag_bound:
        raise ValidationError("tridiagonalization produced a complex diagonal")
    diag[:] = dw.real
    return TridiagonalReal(diag=diag, offdiag=off), q


# ---------------------------------------------------------------------------
# step 3: divide and conquer diagonalization


def split(t: TridiagonalReal, cut: int) -> tuple[TridiagonalReal, TridiagonalReal, float]:
    """Split T at position ``cut`` into T1, T2 plus a rank-1 coupling.

    T = blockdiag(T1, T2) + alpha * v v^T with v = e_{cut-1} + e_{cut}
    (0-based rows cut-1 and cut) and alpha = offdiag[cut-1].
    """
    k = t.dim
    if not 1 <= cut < k:
        raise DimensionError(f"cut must lie in [1, {k - 1}], got {cut}")
    alpha = float(t.offdiag[cut - 1])
    d1 = t.diag[:cut].copy()
    d2 = t.diag[cut:].copy()
    d1[-1] -= alpha
    d2[0] -= alpha
    t1 = TridiagonalReal(diag=d1, offdiag=t.offdiag[: cut - 1].copy())
    t2 = TridiagonalReal(diag=d2, offdiag=t.offdiag[cut:].copy())
    return t1, t2, alpha


def _stable_quadratic(aq: float, bq: float, cq: float) -> tuple[float, float]:
    """Roots of aq*x^2 - bq*x + cq = 0, computed without cancellation."""
    if aq == 0.0:
        if bq == 0.0:
            return math.nan, math.nan
        r = cq / bq
        return r, r
    disc = bq * bq - 4.0 * aq * cq
    if disc < 0.0:
        return math.nan, math.nan
    sq = math.sqrt(disc)
    if bq >= 0.0:
        big = (bq + sq) / (2.0 * aq)
    else:
        big = (bq - sq) / (2.0 * aq)
    if big == 0.0:
        return 0.0, 0.0
    other = cq / (aq * big)
    return big, other


def _secular_root_shifted(
    dd: np.ndarray,
    asq: np.ndarray,
    p1: int,
    p2: int,
    lo: float,
    hi: float,
    tol: float,
    max_iters: int,
    cap: int | None,
) -> tuple[float, int]:
    """Root of 1 + sum(asq_j / (dd_j - tau)) in the open interval (lo, hi).

    ``dd`` holds pole offsets relative to the chosen origin, ``p1``/``p2``
    index the poles of the local two-pole rational model. The iterate starts
    at the interval midpoint and every step is clamped to the current
    bisection bracket, so the search cannot escape. Returns (tau, iterations).
    """

    blo, bhi = lo, hi
    tau = 0.5 * (lo + hi)
    iters = 0
    limit = max_iters if cap is None else min(max_iters, cap)
    converged = False
    while iters < limit:
        iters += 1
        delta = dd - tau
        t = asq / delta
        fval = 1.0 + t.sum()
        weight = 1.0 + np.abs(t).sum()
        if abs(fval) <= tol * weight:
            converged = True
            break
        if fval < 0.0:
            blo = tau
        else:
            bhi = tau
        if (bhi - blo) <= 2.0 * _EPS * (abs(blo) + abs(bhi)):
            converged = True
            break
        # two-pole rational model: the local poles keep their exact
        # weights scaled by beta to match f'; the rest is the constant c3
        s = t / delta
        fder = s.sum()
        d1 = delta[p1]
        d2 = delta[p2]
        sp = s[p1] + s[p2]
        beta = fder / sp if sp != 0.0 else 0.0
        c1 = beta * asq[p1]
        c2 = beta * asq[p2]
        c3 = fval - beta * (t[p1] + t[p2])
        aq = c3
        bq = c3 * (d1 + d2) + c1 + c2
        cq = c3 * d1 * d2 + c1 * d2 + c2 * d1
        r1, r2 = _stable_quadratic(aq, bq, cq)
        tau_new = math.nan
        for eta in (r1, r2):
            cand = tau + eta
            if math.isfinite(cand) and blo < cand < bhi:
                if not math.isfinite(tau_new) or abs(cand - tau) < abs(tau_new - tau):
                    tau_new = cand
        if not math.isfinite(tau_new):
            tau_new = 0.5 * (blo + bhi)
        tau = tau_new
    else:
        converged = cap is not None
    if not converged and cap is None:
        raise ConvergenceError(
            f"secular root did not converge in {max_iters} iterations",
            bracket=(blo, bhi),
        )
    return tau, iters


def _solve_one_root(
    d: np.ndarray,
    asq: np.ndarray,
    i: int,
    tol: float,
    max_iters: int,
    cap: int | None,
) -> tuple[int, float, int]:
    """Solve root i of the deflated system; returns (origin, tau, iters).

    Interior roots probe the secular function at the bracket midpoint and
    anchor the shifted representation at the nearer pole, so the pole
    difference that dominates the eigenvector stays fully accurate. The
    last root keeps its left pole as origin (its upper bound is not a
    pole). The probe counts as one iteration.
    """
    n = d.size
    if n == 1:
        return 0, float(asq[0]), 0
    if i == n - 1:
        dd = d - d[n - 1]
        lo, hi = 0.0, float(asq.sum())
        ti, it = _secular_root_shifted(dd, asq, n - 2, n - 1, lo, hi, tol, max_iters, cap)
        return n - 1, ti, it
    gap = float(d[i + 1] - d[i])
    dd_left = d - d[i]
    tau_mid = 0.5 * gap
    fmid = 1.0 + float(np.sum(asq / (dd_left - tau_mid)))
    if cap is not None and cap <= 1:
        return i, tau_mid, 1
    remaining = None if cap is None else cap - 1
    if fmid >= 0.0:
        dd, lo, hi = dd_left, 0.0, tau_mid
        o = i
    else:
        dd = d - d[i + 1]
        lo, hi = -0.5 * gap, 0.0
        o = i + 1
    ti, it = _secular_root_shifted(dd, asq, i, i + 1, lo, hi, tol, max_iters, remaining)
    return o, ti, it + 1


def _solve_all_roots(
    d: np.ndarray,
    asq: np.ndarray,
    tol: float,
    max_iters: int,
    cap: int | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Solve every root of the deflated secular system (alpha folded into asq).

    Returns (lam, origin, tau, iters) where lam_i = d[origin_i] + tau_i; the
    shifted representation keeps pole differences accurate for the
    eigenvector formulas.
    """
    n = d.size
    lam = np.empty(n)
    origin = np.empty(n, dtype=np.int64)
    tau = np.empty(n)
    iters = np.empty(n, dtype=np.int64)
    for i in range(n):
        o, ti, it = _solve_one_root(d, asq, i, tol, max_iters, cap)
        origin[i] = o
        tau[i] = ti
        lam[i] = d[o] + ti
        iters[i] = it
    return lam, origin, tau, iters


def _recomputed_weights(
    d: np.ndarray, origin: np.ndarray, tau: np.ndarray, u_sign: np.ndarray
) -> np.ndarray:
    """Modified rank-1 weights that make the eigenvectors mutually orthogonal.

    Uses the product formula linking the computed roots back to consistent
    weights; magnitudes come from the roots, signs from the original u.
    """
    n = d.size
    uhat = np.empty(n)
    for i in range(n):
        # lam_j - d_i evaluated through each root's shifted representation
        diffs = (d[origin] - d[i]) + tau
        num_left = diffs[:i]
        num_right = diffs[i + 1 :]
        den_left = d[:i] - d[i]
        den_right = d[i + 1 :] - d[i]
        prod = diffs[i]
        if i > 0:
            prod *= np.prod(num_left / den_left)
        if i < n - 1:
            prod *= np.prod(num_right / den_right)
        uhat[i] = math.sqrt(max(prod, 0.0))
    return uhat * u_sign


def secular_solve(sys: SecularSystem, interval: int, cfg: DcConfig | None = None) -> SecularRoot:
    """Solve for the ``interval``-th root (0-based) of the secular equation.

    The system must already be deflated: d strictly ascending, every u
    component nonzero beyond the deflation tolerance, and alpha > 0.
    """
    cfg = cfg or DcConfig()
    d = sys.d
    u = sys.u
    n = sys.size
    if not 0 <= interval < n:
        raise DimensionError(f"interval must lie in [0, {n - 1}], got {interval}")
    if sys.alpha <= 0.0:
        raise ValidationError("secular_solve requires alpha > 0; mirror the system first")
    unorm = float(np.sqrt(np.sum(u * u)))
    if n > 1:
        gaps = np.diff(d)
        scale = max(abs(d[0]), abs(d[-1]), 1e-300)
        if np.any(gaps <= cfg.deflation_tol * scale):
            raise ValidationError("secular system is not deflated: poles too close")
    if np.any(np.abs(u) <= cfg.deflation_tol * unorm):
        raise ValidationError("secular system is not deflated: tiny u component")
    asq = sys.alpha * u * u
    o, tau, iters = _solve_one_root(
        d, asq, interval, cfg.secular_tol, cfg.max_newton_iters, None
    )
    return SecularRoot(value=float(d[o] + tau), iterations=iters)


def _rank1_eigen(
    d: np.ndarray,
    u: np.ndarray,
    rho: float,
    cfg: DcConfig,
    cap: int | None,
    diag: DcDiagnostics,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigen decomposition of diag(d) + rho * u u^T (d in any order)."""
    n = d.size
    if rho < 0.0:
        lam_m, s_m = _rank1_eigen(-d[::-1], u[::-1], -rho, cfg, cap, diag)
        return -lam_m[::-1], s_m[::-1, ::-1]

    p = np.argsort(d, kind="stable")
    ds = d[p].copy()
    us = u[p].copy()
    scale = max(abs(ds[0]), abs(ds[-1]), 1e-300)
    unorm = float(np.sqrt(np.sum(us * us)))

    deflated = np.zeros(n, dtype=bool)
    if rho == 0.0 or unorm == 0.0 or rho * unorm * unorm <= cfg.deflation_tol * scale:
        deflated[:] = True
    else:
        deflated = np.abs(us) <= cfg.deflation_tol * unorm

    rots: list[tuple[int, int, float, float]] = []
    prev = -1
    for j in range(n):
        if deflated[j]:
            continue
        if prev >= 0 and ds[j] - ds[prev] <= cfg.deflation_tol * scale:
            r = math.hypot(us[prev], us[j])
            cs = us[j] / r
            sn = us[prev] / r
            rots.append((prev, j, cs, sn))
            dc_, dj_ = ds[prev], ds[j]
            ds[prev] = cs * cs * dc_ + sn * sn * dj_
            ds[j] = sn * sn * dc_ + cs * cs * dj_
            us[j] = r
            us[prev] = 0.0
            deflated[prev] = True
        prev = j

    keep = np.nonzero(~deflated)[0]
    drop = np.nonzero(deflated)[0]
    diag.deflation_count += int(drop.size)

    n_keep = keep.size
    s_hat = np.zeros((n, n))
    lam_all = np.empty(n)
    if n_keep > 0:
        dk = ds[keep]
        asq = rho * us[keep] * us[keep]
        lam_k, origin, tau, iters = _solve_all_roots(
            dk, asq, cfg.secular_tol, cfg.max_newton_iters, cap
        )
        diag.newton_iterations_total += int(iters.sum())
        if iters.size:
            diag.newton_iterations_max_per_root = max(
                diag.newton_iterations_max_per_root, int(iters.max())
            )
        # strict interlacing, verified on the shifted (origin, tau) values
        # where pole differences are exact; a single surviving component is
        # the closed-form case whose root sits exactly on the upper bound
        if n_keep > 1:
            for i in range(n_keep):
                if origin[i] == i:
                    hi_i = (dk[i + 1] - dk[i]) if i + 1 < n_keep else float(asq.sum())
                    ok = 0.0 < tau[i] < hi_i
                else:
                    ok = -(dk[i + 1] - dk[i]) < tau[i] < 0.0
                if not ok:
                    diag.interlacing_violations += 1
        uhat = _recomputed_weights(dk, origin, tau, np.sign(us[keep]))
        for i in range(n_keep):
            delta = (dk - dk[origin[i]]) - tau[i]
            w = uhat / (-delta)
            w /= math.sqrt(float(np.sum(w * w)))
            s_hat[keep, i] = w
        lam_all[:n_keep] = lam_k
    lam_all[n_keep:] = ds[drop]
    for idx, j in enumerate(drop):
        s_hat[j, n_keep + idx] = 1.0

    # map eigenvectors back through the deflation rotations (apply R, the
    # inverse of the R^T that zeroed the duplicate-pole weights)
    s_rot = s_hat
    for c, j, cs, sn in reversed(rots):
        row_c = s_rot[c, :].copy()
        row_j = s_rot[j, :].copy()
        s_rot[c, :] = cs * row_c + sn * row_j
        s_rot[j, :] = -sn * row_c + cs * row_j

    s_orig = np.empty_like(s_rot)
    s_orig[p, :] = s_rot
    order = np.argsort(lam_all, kind="stable")
    return lam_all[order], s_orig[:, order]


def _dc_recurse(
    t: TridiagonalReal, cfg: DcConfig, cap: int | None, diag: DcDiagnostics
) -> tuple[np.ndarray, np.ndarray, int]:
    k = t.dim
    if k == 1:
        return t.diag.copy(), np.ones((1, 1)), 0
    cut = (k + 1) // 2
    t1, t2, alpha = split(t, cut)
    lam1, q1, dep1 = _dc_recurse(t1, cfg, cap, diag)
    lam2, q2, dep2 = _dc_recurse(t2, cfg, cap, diag)
    depth = 1 + max(dep1, dep2)

    d0 = np.concatenate([lam1, lam2])
    u0 = np.concatenate([q1[-1, :], q2[0, :]])
    if alpha == 0.0:
        order = np.argsort(d0, kind="stable")
        qq = np.zeros((k, k))
        qq[: t1.dim, : t1.dim] = q1
        qq[t1.dim :, t1.dim :] = q2
        return d0[order], qq[:, order], depth

    lam, s = _rank1_eigen(d0, u0, alpha, cfg, cap, diag)
    q = np.zeros((k, k))
    q[: t1.dim, :] = q1 @ s[: t1.dim, :]
    q[t1.dim :, :] = q2 @ s[t1.dim :, :]
    return lam, q, depth


def dc_eigen(t: TridiagonalReal, cfg: DcConfig | None = None) -> EigenDecomposition:
    """Divide-and-conquer eigendecomposition of a real symmetric tridiagonal.

    Splits at the middle recursively, solves the secular equation of each
    rank-1 merge (with deflation of negligible components and coincident
    poles), and accumulates eigenvectors level by level. Eigenvalues come
    out ascending; the eigenvector matrix is real-valued but returned with
    complex dtype for uniformity with the rest of the pipeline.
    """
    cfg = cfg or DcConfig()
    diag = DcDiagnostics()
    lam, q, depth = _dc_recurse(t, cfg, None, diag)
    diag.recursion_depth = depth
    return EigenDecomposition(
        lam=lam, q=q.astype(np.complex128), diagnostics=diag
    )


def truncated_dc_eigen(
    t: TridiagonalReal, cfg: DcConfig | None = None, iter_budget: int = 1
) -> EigenDecomposition:
    """dc_eigen with each secular root capped at ``iter_budget`` Newton steps.

    With a budget at or above the convergence limit the output is identical
    to dc_eigen; small budgets trade accuracy for fewer sequential steps.
    """
    if iter_budget < 1:
        raise ValidationError("iter_budget must be >= 1")
    cfg = cfg or DcConfig()
    diag = DcDiagnostics()
    lam, q, depth = _dc_recurse(t, cfg, iter_budget, diag)
    diag.recursion_depth = depth
    return EigenDecomposition(
        lam=lam, q=q.astype(np.complex128), diagnostics=diag
    )


# ---------------------------------------------------------------------------
# step 4: SVD recovery


def recover_svd(a, eig: EigenDecomposition, q_t, cfg: DcConfig | None = None) -> SvdResult:
    """Recover U, sigma, V from the eigendecomposition of the Gram matrix.

    sigma_i = sqrt(max(lambda_i, 0)) sorted descending, V = Q_T Q_D with
    columns permuted to match, and U columns A v_i / sigma_i computed only
    where sigma_i stays above the relative threshold; the rest are flagged
    invalid. A zero matrix yields a rank-zero result rather than an error.
    """
    cfg = cfg or DcConfig()
    a = as_matrix(a)
    q_t = as_matrix(q_t)
    v0 = q_t @ eig.q
    lam = np.maximum(eig.lam, 0.0)
    sig_asc = np.sqrt(lam)
    order = np.argsort(-sig_asc, kind="stable")
    sigma = sig_asc[order]
    v = v0[:, order]
    k = sigma.size
    m = a.shape[0]
    sig_max = sigma[0] if k else 0.0
    if sig_max > 0.0:
        valid = sigma > cfg.sv_threshold * sig_max
    else:
        valid = np.zeros(k, dtype=bool)
    u = np.zeros((m, k), dtype=np.complex128)
    if np.any(valid):
        u[:, valid] = (a @ v[:, valid]) / sigma[valid]
    return SvdResult(u=u, sigma=sigma, v=v, valid=valid, diagnostics=eig.diagnostics)


def svd_4step(a, cfg: DcConfig | None = None, iter_budget: int | None = None) -> SvdResult:
    """Full pipeline: Gram matrix, tridiagonalization, divide-and-conquer
    diagonalization, and SVD recovery.

    ``iter_budget`` caps the Newton iterations per secular root (used for
    accuracy-versus-latency sweeps); None means run to convergence.
    """
    cfg = cfg or DcConfig()
    a = as_matrix(a)
    b = gram(a)
    t, q_t = tridiagonalize(b)
    if iter_budget is None:
        eig = dc_eigen(t, cfg)
    else:
        eig = truncated_dc_eigen(t, cfg, iter_budget)
    return recover_svd(a, eig, q_t, cfg)
