import numpy as np
import pytest
from scipy import optimize

from ordifun.eigen import cca_residual, cca_svd, gsym_eig, jittered_cholesky
from ordifun.errors import ConditioningError, ValidationError


def spd(gen, p, cond=10.0):
    Q, _ = np.linalg.qr(gen.normal(size=(p, p)))
    return Q @ np.diag(np.geomspace(1.0, cond, p)) @ Q.T


def whitened_svd_oracle(C12, S1, S2):
    """Symmetric inverse square roots (eigh) rather than Cholesky factors."""
    def inv_sqrt(S):
        w, V = np.linalg.eigh(S)
        return V @ np.diag(w**-0.5) @ V.T

    R1, R2 = inv_sqrt(S1), inv_sqrt(S2)
    U, s, Vt = np.linalg.svd(R1 @ C12 @ R2)
    return s, R1 @ U, R2 @ Vt.T


def cca_ratio(b, theta, C12, S1, S2):
    num = np.einsum("ij,ik,jk->i", b, theta, C12) ** 2 if b.ndim == 2 else (b @ C12 @ theta) ** 2
    if b.ndim == 2:
        return num / (np.einsum("ij,jk,ik->i", b, S1, b) * np.einsum("ij,jk,ik->i", theta, S2, theta))
    return num / ((b @ S1 @ b) * (theta @ S2 @ theta))


def test_diagonal_case():
    out = cca_svd(np.diag([0.9, 0.3]), np.eye(2), np.eye(2), 2)
    assert [t.rho for t in out] == pytest.approx([0.9, 0.3], abs=1e-15)
    np.testing.assert_allclose(out[0].b, [1, 0], atol=1e-15)
    np.testing.assert_allclose(out[0].theta, [1, 0], atol=1e-15)


def test_scaling_cross_matrix_doubles_rho():
    gen = np.random.default_rng(0)
    C, S1, S2 = gen.normal(size=(5, 3)), spd(gen, 5), spd(gen, 3)
    a, b = cca_svd(C, S1, S2, 3), cca_svd(2 * C, S1, S2, 3)
    for x, y in zip(a, b):
        assert y.rho == pytest.approx(2 * x.rho, rel=1e-12)
        np.testing.assert_allclose(y.b, x.b, atol=1e-10)
        np.testing.assert_allclose(y.theta, x.theta, atol=1e-10)


def test_random_instance_against_oracles():
    gen = np.random.default_rng(1)
    C, S1, S2 = gen.normal(size=(5, 3)), spd(gen, 5), spd(gen, 3)
    top = cca_svd(C, S1, S2, 1)[0]
    s, U, V = whitened_svd_oracle(C, S1, S2)
    assert top.rho == pytest.approx(s[0], abs=1e-10)
    sign = np.sign(U[:, 0] @ top.b)
    np.testing.assert_allclose(top.b, sign * U[:, 0], atol=1e-10)
    np.testing.assert_allclose(top.theta, sign * V[:, 0], atol=1e-10)

    # brute force: 1e6 random direction pairs, then polish the best one
    b = gen.normal(size=(10**6, 5))
    th = gen.normal(size=(10**6, 3))
    ratios = cca_ratio(b, th, C, S1, S2)
    assert ratios.max() <= top.rho**2 * (1 + 1e-12)
    start = np.concatenate([b[ratios.argmax()], th[ratios.argmax()]])
    res = optimize.minimize(lambda z: -cca_ratio(z[:5], z[5:], C, S1, S2), start, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000, "maxfev": 40000})
    assert np.sqrt(-res.fun) == pytest.approx(top.rho, abs=1e-3)


def test_cca_residual_and_orthonormality():
    gen = np.random.default_rng(2)
    for _ in range(20):
        p, q = gen.integers(2, 9, 2)
        C, S1, S2 = gen.normal(size=(p, q)), spd(gen, p, 1e3), spd(gen, q, 1e3)
        out = cca_svd(C, S1, S2, min(p, q))
        scale = np.linalg.norm(C) + np.linalg.norm(S1) + np.linalg.norm(S2)
        B = np.column_stack([t.b for t in out])
        T = np.column_stack([t.theta for t in out])
        for t in out:
            assert cca_residual(C, S1, S2, t) <= 1e-8 * scale
        np.testing.assert_allclose(B.T @ S1 @ B, np.eye(len(out)), atol=1e-8)
        np.testing.assert_allclose(T.T @ S2 @ T, np.eye(len(out)), atol=1e-8)
        # cross-covariance is diagonal with the canonical values
        np.testing.assert_allclose(B.T @ C @ T, np.diag([t.rho for t in out]), atol=1e-8)
        rhos = [t.rho for t in out]
        assert rhos == sorted(rhos, reverse=True)


def test_sign_convention():
    gen = np.random.default_rng(3)
    for _ in range(10):
        out = cca_svd(gen.normal(size=(4, 3)), spd(gen, 4), spd(gen, 3), 3)
        for t in out:
            first = t.b[np.abs(t.b) > 1e-12][0]
            assert first > 0
        for pair in gsym_eig(spd(gen, 5), spd(gen, 5), 5):
            assert pair.vector[np.abs(pair.vector) > 1e-12][0] > 0


def test_congruence_invariance():
    gen = np.random.default_rng(4)
    C, S1, S2 = gen.normal(size=(5, 3)), spd(gen, 5), spd(gen, 3)
    G = gen.normal(size=(5, 5)) + 3 * np.eye(5)
    a = [t.rho for t in cca_svd(C, S1, S2, 3)]
    b = [t.rho for t in cca_svd(G.T @ C, G.T @ S1 @ G, S2, 3)]
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_returns_min_of_m_p_q():
    gen = np.random.default_rng(5)
    assert len(cca_svd(gen.normal(size=(6, 2)), np.eye(6), np.eye(2), 5)) == 2


def test_jitter_rescues_singular_metric():
    # an empty level makes V22 singular
    S2 = np.diag([0.2, 0.1, 0.0])
    L, eps = jittered_cholesky(S2)
    assert eps > 0
    out = cca_svd(np.ones((3, 3)), np.eye(3), S2, 2)
    assert np.isfinite(out[0].rho)


def test_conditioning_error_for_indefinite_metric():
    with pytest.raises(ConditioningError):
        cca_svd(np.ones((2, 2)), np.diag([1.0, -1.0]), np.eye(2), 1)
    with pytest.raises(ConditioningError):
        gsym_eig(np.eye(2), np.diag([1.0, -1.0]), 1)


def test_input_checks():
    with pytest.raises(ValidationError):
        gsym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]), np.eye(2), 1)
    with pytest.raises(ValidationError):
        cca_svd(np.ones((2, 3)), np.eye(3), np.eye(3), 1)


def test_gsym_identity_metric_is_plain_eigh():
    gen = np.random.default_rng(6)
    A = spd(gen, 6)
    vals = [p.value for p in gsym_eig(A, np.eye(6), 6)]
    np.testing.assert_allclose(vals, np.sort(np.linalg.eigvalsh(A))[::-1], atol=1e-10)


def test_gsym_equal_matrices():
    gen = np.random.default_rng(7)
    A = spd(gen, 5)
    np.testing.assert_allclose([p.value for p in gsym_eig(A, A, 5)], 1.0, atol=1e-10)


def test_gsym_brute_force_rayleigh():
    gen = np.random.default_rng(8)
    X = gen.normal(size=(6, 6))
    A, B = X @ X.T, spd(gen, 6, 50)
    top = gsym_eig(A, B, 1)[0]
    v = gen.normal(size=(10**6, 6))
    rq = np.einsum("ij,jk,ik->i", v, A, v) / np.einsum("ij,jk,ik->i", v, B, v)
    assert rq.max() <= top.value * (1 + 1e-12)
    res = optimize.minimize(lambda z: -(z @ A @ z) / (z @ B @ z), v[rq.argmax()], method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000})
    assert -res.fun == pytest.approx(top.value, rel=1e-3)


def test_gsym_residual_and_b_orthonormal():
    gen = np.random.default_rng(9)
    for _ in range(20):
        p = int(gen.integers(2, 10))
        X = gen.normal(size=(p, p))
        A, B = X @ X.T, spd(gen, p, 1e4)
        pairs = gsym_eig(A, B, p)
        V = np.column_stack([q.vector for q in pairs])
        np.testing.assert_allclose(V.T @ B @ V, np.eye(p), atol=1e-8)
        for q in pairs:
            assert np.linalg.norm(A @ q.vector - q.value * B @ q.vector) <= 1e-8 * np.linalg.norm(A)
        vals = [q.value for q in pairs]
        assert vals == sorted(vals, reverse=True)
