import numpy as np
import pytest

from parsvd.errors import DimensionError, ValidationError
from parsvd.gram_svd import (
    DcConfig,
    HermitianMatrix,
    SecularSystem,
    TridiagonalReal,
    dc_eigen,
    gram,
    householder_vector,
    secular_solve,
    split,
    svd_4step,
    tridiagonalize,
    truncated_dc_eigen,
)
from parsvd.matrix_core import adjoint, fro_norm, matmul
from parsvd.reference_solvers import gk_svd, jacobi_eigen_oracle

from conftest import rand_complex, rand_hermitian


# ---------------------------------------------------------------------------
# gram


def test_gram_identity():
    b = gram(np.eye(2))
    np.testing.assert_allclose(b.mat, np.eye(2), atol=0)


def test_gram_single_column():
    b = gram(np.array([[1.0], [1j]]))
    np.testing.assert_allclose(b.mat, np.array([[2.0]]), atol=1e-15)


def test_gram_matches_matmul_oracle(rng):
    a = rand_complex(rng, 8, 4)
    want = matmul(adjoint(a), a)
    assert fro_norm(gram(a).mat - want) <= 1e-13 * fro_norm(want)


def test_gram_wide_rejected():
    with pytest.raises(DimensionError) as err:
        gram(np.ones((2, 4)))
    assert "adjoint" in str(err.value)


def test_gram_is_exactly_hermitian(rng):
    b = gram(rand_complex(rng, 6, 5)).mat
    np.testing.assert_array_equal(b, b.conj().T)


# ---------------------------------------------------------------------------
# householder


def test_householder_already_aligned():
    step = householder_vector(np.array([1.0, 0.0]))
    np.testing.assert_allclose(step.apply([1.0, 0.0]), [1.0, 0.0], atol=1e-15)


def test_householder_3_4():
    step = householder_vector(np.array([3.0, 4.0]))
    assert step.xnorm == pytest.approx(5.0)
    np.testing.assert_allclose(step.v, np.array([8.0, 4.0]) / np.sqrt(80.0), atol=1e-15)
    np.testing.assert_allclose(step.apply([3.0, 4.0]), [5.0, 0.0], atol=1e-14)


def test_householder_scalar_phase():
    step = householder_vector(np.array([1j]))
    assert step.phase == pytest.approx(1j)
    np.testing.assert_allclose(step.apply([1j]), [1.0], atol=1e-15)


def test_householder_zero_is_skip():
    step = householder_vector(np.zeros(3, dtype=complex))
    assert step.skip
    y = np.array([1.0, 2j, 3.0])
    np.testing.assert_array_equal(step.apply(y), y)


def test_householder_zero_pivot_unit_phase(rng):
    x = np.array([0.0, 3.0 + 4j])
    step = householder_vector(x)
    assert step.phase == 1.0 + 0.0j
    out = step.apply(x)
    np.testing.assert_allclose(out, [5.0, 0.0], atol=1e-14)


def test_householder_random_maps_to_e1(rng):
    # real nonnegative leading entry on arbitrary complex inputs
    for _ in range(200):
        n = int(rng.integers(1, 9))
        x = rand_complex(rng, n, 1)[:, 0]
        step = householder_vector(x)
        out = step.apply(x)
        nrm = np.sqrt(np.sum(np.abs(x) ** 2))
        assert abs(out[0] - nrm) <= 1e-12 * max(nrm, 1.0)
        assert abs(out[0].imag) <= 1e-12 * max(nrm, 1.0)
        if n > 1:
            assert np.max(np.abs(out[1:])) <= 1e-12 * max(nrm, 1.0)
        assert np.sqrt(np.sum(np.abs(step.v) ** 2)) == pytest.approx(1.0, abs=1e-12)
        assert abs(step.phase) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# tridiagonalization


def test_tridiagonalize_k1():
    t, q = tridiagonalize(HermitianMatrix.from_matrix([[4.0]]))
    np.testing.assert_array_equal(t.diag, [4.0])
    assert t.offdiag.size == 0
    np.testing.assert_array_equal(q, np.eye(1))


def test_tridiagonalize_diagonal_skips():
    b = np.diag([3.0, 1.0, 2.0]).astype(complex)
    t, q = tridiagonalize(HermitianMatrix.from_matrix(b))
    np.testing.assert_array_equal(t.diag, [3.0, 1.0, 2.0])
    np.testing.assert_array_equal(t.offdiag, [0.0, 0.0])
    np.testing.assert_array_equal(q, np.eye(3))


def test_tridiagonalize_similarity_and_unitarity(rng):
    for k in (2, 3, 4, 8, 16):
        b = rand_hermitian(rng, k)
        t, q = tridiagonalize(HermitianMatrix.from_matrix(b))
        scale = fro_norm(b)
        assert fro_norm(q.conj().T @ b @ q - t.to_dense()) <= 1e-11 * scale
        assert fro_norm(q.conj().T @ q - np.eye(k)) <= 1e-11
        assert np.all(t.offdiag >= 0.0)


def test_tridiagonalize_eigenvalues_match_jacobi(rng):
    b = rand_hermitian(rng, 4)
    t, _ = tridiagonalize(HermitianMatrix.from_matrix(b))
    lam_t = jacobi_eigen_oracle(HermitianMatrix.from_matrix(t.to_dense().astype(complex))).lam
    lam_b = jacobi_eigen_oracle(HermitianMatrix.from_matrix(b)).lam
    assert np.max(np.abs(lam_t - lam_b)) <= 1e-10 * np.max(np.abs(lam_b))


def test_tridiagonalize_rejects_non_hermitian(rng):
    with pytest.raises(ValidationError):
        tridiagonalize(rand_complex(rng, 3, 3))


def test_vector_update_equals_explicit_reflection(rng):
    # B' = B - v w^H - w v^H must equal P B P^H with P = -e^{-jt}(I - 2vv^H)
    for _ in range(20):
        b = rand_hermitian(rng, 6)
        x = rand_complex(rng, 6, 1)[:, 0]
        step = householder_vector(x)
        v = step.v
        p_mat = -np.conj(step.phase) * (np.eye(6) - 2.0 * np.outer(v, v.conj()))
        explicit = p_mat @ b @ p_mat.conj().T
        p_vec = 2.0 * (b @ v)
        w = p_vec - np.vdot(v, p_vec) * v
        vector_form = b - np.outer(v, w.conj()) - np.outer(w, v.conj())
        assert fro_norm(vector_form - explicit) <= 1e-12 * fro_norm(b)


# ---------------------------------------------------------------------------
# split / secular


def test_split_2x2():
    t = TridiagonalReal(diag=[2.0, 2.0], offdiag=[1.0])
    t1, t2, alpha = split(t, 1)
    assert alpha == 1.0
    np.testing.assert_array_equal(t1.diag, [1.0])
    np.testing.assert_array_equal(t2.diag, [1.0])
    recon = np.zeros((2, 2))
    recon[0, 0] = t1.diag[0]
    recon[1, 1] = t2.diag[0]
    recon += alpha * np.outer([1.0, 1.0], [1.0, 1.0])
    np.testing.assert_array_equal(recon, t.to_dense())


def test_split_zero_coupling():
    t = TridiagonalReal(diag=[1.0, 2.0, 3.0], offdiag=[0.5, 0.0])
    t1, t2, alpha = split(t, 2)
    assert alpha == 0.0
    np.testing.assert_array_equal(t1.diag, [1.0, 2.0])
    np.testing.assert_array_equal(t2.diag, [3.0])


def test_split_reconstruction_8(rng):
    d = rng.standard_normal(8)
    e = rng.standard_normal(7)
    t = TridiagonalReal(diag=d, offdiag=e)
    t1, t2, alpha = split(t, 4)
    recon = np.zeros((8, 8))
    recon[:4, :4] = t1.to_dense()
    recon[4:, 4:] = t2.to_dense()
    vv = np.zeros(8)
    vv[3] = vv[4] = 1.0
    recon += alpha * np.outer(vv, vv)
    assert np.max(np.abs(recon - t.to_dense())) <= 1e-14 * max(np.max(np.abs(d)), 1.0)


def test_split_range_check():
    t = TridiagonalReal(diag=[1.0, 2.0], offdiag=[1.0])
    with pytest.raises(DimensionError):
        split(t, 0)
    with pytest.raises(DimensionError):
        split(t, 2)


def test_secular_scalar():
    sys = SecularSystem(d=[2.0], alpha=0.5, u=[3.0])
    root = secular_solve(sys, 0)
    assert root.value == pytest.approx(2.0 + 0.5 * 9.0, rel=1e-14)
    assert root.iterations == 0


def test_secular_2x2_closed_form():
    # eigenvalues of [[1.5, 0.5], [0.5, 2.5]]
    sys = SecularSystem(d=[1.0, 2.0], alpha=1.0, u=[1.0 / np.sqrt(2), 1.0 / np.sqrt(2)])
    lo = secular_solve(sys, 0).value
    hi = secular_solve(sys, 1).value
    assert lo == pytest.approx(2.0 - np.sqrt(0.5), rel=1e-12)
    assert hi == pytest.approx(2.0 + np.sqrt(0.5), rel=1e-12)


def test_secular_interlacing(rng):
    d = np.sort(rng.standard_normal(6))
    u = rng.standard_normal(6) + np.sign(rng.standard_normal(6)) * 0.2
    sys = SecularSystem(d=d, alpha=0.7, u=u)
    rho_sum = 0.7 * np.sum(u * u)
    for i in range(6):
        lam = secular_solve(sys, i).value
        lo = d[i]
        hi = d[i + 1] if i < 5 else d[5] + rho_sum
        assert lo < lam < hi


def test_secular_rejects_undeflated():
    sys = SecularSystem(d=[1.0, 1.0], alpha=1.0, u=[1.0, 1.0])
    with pytest.raises(ValidationError):
        secular_solve(sys, 0)
    sys2 = SecularSystem(d=[1.0, 2.0], alpha=1.0, u=[1.0, 0.0])
    with pytest.raises(ValidationError):
        secular_solve(sys2, 0)
    sys3 = SecularSystem(d=[1.0, 2.0], alpha=-1.0, u=[1.0, 1.0])
    with pytest.raises(ValidationError):
        secular_solve(sys3, 0)


# ---------------------------------------------------------------------------
# divide and conquer


def residual(t: TridiagonalReal, eig):
    dense = t.to_dense()
    return np.max(np.abs(dense @ eig.q - eig.q * eig.lam))


def test_dc_diagonal_full_deflation():
    t = TridiagonalReal(diag=[3.0, 1.0, 2.0], offdiag=[0.0, 0.0])
    eig = dc_eigen(t)
    np.testing.assert_array_equal(eig.lam, [1.0, 2.0, 3.0])
    # permutation matrix columns
    q = np.abs(eig.q)
    assert np.all(np.isin(q.round(12), [0.0, 1.0]))


def test_dc_2x2_analytic():
    t = TridiagonalReal(diag=[2.0, 2.0], offdiag=[1.0])
    eig = dc_eigen(t)
    np.testing.assert_allclose(eig.lam, [1.0, 3.0], rtol=1e-13)
    want = np.array([1.0, 1.0]) / np.sqrt(2.0)
    for col, pattern in ((0, np.array([1.0, -1.0]) / np.sqrt(2)), (1, want)):
        v = eig.q[:, col].real
        assert min(np.max(np.abs(v - pattern)), np.max(np.abs(v + pattern))) < 1e-12


def test_dc_matches_jacobi_8x8(rng):
    d = rng.standard_normal(8)
    e = rng.standard_normal(7)
    t = TridiagonalReal(diag=d, offdiag=e)
    eig = dc_eigen(t)
    oracle = jacobi_eigen_oracle(HermitianMatrix.from_matrix(t.to_dense().astype(complex)))
    assert np.max(np.abs(eig.lam - oracle.lam)) <= 1e-10 * np.max(np.abs(oracle.lam))
    assert eig.diagnostics.recursion_depth == 3
    assert eig.diagnostics.interlacing_violations == 0


def test_dc_negative_couplings(rng):
    # general tridiagonals have signed off-diagonals; the mirrored path
    # must handle them
    t = TridiagonalReal(diag=[1.0, -2.0, 0.5, 3.0], offdiag=[-1.0, 2.0, -0.3])
    eig = dc_eigen(t)
    oracle = jacobi_eigen_oracle(HermitianMatrix.from_matrix(t.to_dense().astype(complex)))
    np.testing.assert_allclose(eig.lam, oracle.lam, atol=1e-10 * np.max(np.abs(oracle.lam)))
    assert residual(t, eig) <= 1e-10 * np.max(np.abs(eig.lam))


def test_dc_orthonormality_and_residual(rng):
    for k in (2, 5, 16, 33, 64):
        d = rng.standard_normal(k)
        e = rng.standard_normal(max(k - 1, 0))
        t = TridiagonalReal(diag=d, offdiag=e)
        eig = dc_eigen(t)
        assert np.all(np.diff(eig.lam) >= 0)
        dev = fro_norm(eig.q.conj().T @ eig.q - np.eye(k))
        assert dev <= 1e-10 * np.sqrt(k)
        assert residual(t, eig) <= 1e-10 * np.max(np.abs(eig.lam))
        assert eig.diagnostics.recursion_depth == int(np.ceil(np.log2(k)))


def test_dc_deflation_paths():
    # coincident poles trigger the rotation-based deflation
    t = TridiagonalReal(diag=[1.0, 1.0], offdiag=[0.5])
    eig = dc_eigen(t)
    np.testing.assert_allclose(eig.lam, [0.5, 1.5], rtol=1e-13)
    assert eig.diagnostics.deflation_count >= 1
    # negligible coupling deflates everything
    t2 = TridiagonalReal(diag=[2.0, 5.0], offdiag=[1e-300])
    eig2 = dc_eigen(t2)
    np.testing.assert_allclose(eig2.lam, [2.0, 5.0], atol=1e-12)


def test_truncated_budget_not_binding(rng):
    d = rng.standard_normal(8)
    e = rng.standard_normal(7)
    t = TridiagonalReal(diag=d, offdiag=e)
    full = dc_eigen(t)
    capped = truncated_dc_eigen(t, DcConfig(), iter_budget=60)
    np.testing.assert_array_equal(full.lam, capped.lam)
    np.testing.assert_array_equal(full.q, capped.q)


def test_truncated_single_step_2x2():
    t = TridiagonalReal(diag=[1.0, 2.0], offdiag=[1.0])
    one = truncated_dc_eigen(t, DcConfig(), iter_budget=1)
    full = dc_eigen(t)
    # a single midpoint-probe step lands inside the bracket, not converged
    assert np.max(np.abs(one.lam - full.lam)) < 0.7
    assert one.diagnostics.newton_iterations_max_per_root == 1
    assert full.diagnostics.newton_iterations_max_per_root > 1


def test_truncated_mse_trend(rng):
    errs = []
    d = rng.standard_normal(16) * 3
    e = rng.standard_normal(15)
    t = TridiagonalReal(diag=d, offdiag=e)
    ref = dc_eigen(t).lam
    for budget in range(1, 11):
        lam = truncated_dc_eigen(t, DcConfig(), budget).lam
        errs.append(np.mean((lam - ref) ** 2))
    assert errs[-1] <= 1e-18 or errs[-1] < errs[0] * 1e-6
    assert errs[5] <= errs[0]


# ---------------------------------------------------------------------------
# recovery and full pipeline


def test_recover_diag_matrix():
    a = np.diag([3.0, 2.0]).astype(complex)
    res = svd_4step(a)
    np.testing.assert_allclose(res.sigma, [3.0, 2.0], rtol=1e-12)
    assert fro_norm(a - res.reconstruct()) <= 1e-12
    assert fro_norm(res.u.conj().T @ res.u - np.eye(2)) <= 1e-12
    assert fro_norm(res.v.conj().T @ res.v - np.eye(2)) <= 1e-12


def test_recover_zero_matrix_rank_zero():
    res = svd_4step(np.zeros((3, 2)))
    np.testing.assert_array_equal(res.sigma, [0.0, 0.0])
    assert not np.any(res.valid)
    np.testing.assert_array_equal(res.u, np.zeros((3, 2)))


def test_identity_sigma():
    res = svd_4step(np.eye(4))
    np.testing.assert_allclose(res.sigma, np.ones(4), rtol=1e-12)


def test_sigma_matches_gk(rng):
    for m, k in ((8, 4), (32, 32)):
        a = rand_complex(rng, m, k)
        mine = svd_4step(a).sigma
        ref = gk_svd(a)[0].sigma
        assert np.max(np.abs(mine - ref)) <= 1e-9 * mine[0]


def test_large_reconstruction(rng):
    a = rand_complex(rng, 128, 16)
    res = svd_4step(a)
    assert fro_norm(a - res.reconstruct()) <= 1e-9 * fro_norm(a)


def test_unitarity_across_sizes(rng):
    for k in (2, 3, 7, 16, 64):
        a = rand_complex(rng, k + 5, k)
        res = svd_4step(a)
        bound = 1e-10 * np.sqrt(k)
        assert fro_norm(res.v.conj().T @ res.v - np.eye(k)) <= bound
        assert fro_norm(res.u.conj().T @ res.u - np.eye(k)) <= bound
        assert np.all(np.diff(res.sigma) <= 1e-12)


def test_gram_spectral_map(rng):
    a = rand_complex(rng, 12, 6)
    b = gram(a)
    lam = jacobi_eigen_oracle(b).lam
    sig = svd_4step(a).sigma
    np.testing.assert_allclose(np.sort(sig**2), lam, rtol=1e-9)


def test_unitary_preserves_fro_norm(rng):
    a = rand_complex(rng, 6, 6)
    res = svd_4step(a)
    x = rand_complex(rng, 6, 3)
    assert fro_norm(res.v @ x) == pytest.approx(fro_norm(x), rel=1e-10)


def test_determinism(rng):
    a = rand_complex(rng, 12, 5)
    r1 = svd_4step(a)
    r2 = svd_4step(a)
    np.testing.assert_array_equal(r1.sigma, r2.sigma)
    np.testing.assert_array_equal(r1.u, r2.u)
    np.testing.assert_array_equal(r1.v, r2.v)


def test_dc_config_validation():
    with pytest.raises(ValidationError):
        DcConfig(secular_tol=0.0)
    with pytest.raises(ValidationError):
        DcConfig(sv_threshold=2.0)
    with pytest.raises(ValidationError):
        DcConfig(max_newton_iters=0)
