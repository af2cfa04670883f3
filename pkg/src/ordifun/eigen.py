"""Penalized CCA and symmetric-definite generalized eigenproblems via Cholesky whitening."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ordifun.errors import ConditioningError, ValidationError

JITTER_STEPS = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)
SIGN_TOL = 1e-12


@dataclass(frozen=True)
class CanonicalTriple:
    b: np.ndarray
    theta: np.ndarray
    rho: float


@dataclass(frozen=True)
class EigenPair:
    vector: np.ndarray
    value: float


def _symmetric(S, name):
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {S.shape}", "bad_shape")
    scale = max(np.abs(S).max(), 1.0)
    if np.abs(S - S.T).max() > 1e-10 * scale:
        raise ValidationError(f"{name} is not symmetric", "not_symmetric")
    return (S + S.T) / 2.0


def jittered_cholesky(S, name="metric"):
    """Lower Cholesky factor of ``S``, adding ``eps * trace(S)/p * I`` if needed.

    ``eps`` escalates from 0 through 1e-12 ... 1e-8.  Returns ``(L, eps)``.
    """
    S = _symmetric(S, name)
    p = S.shape[0]
    scale = np.trace(S) / p
    if not np.isfinite(scale) or scale <= 0:
        scale = 1.0
    for eps in JITTER_STEPS:
        try:
            L = linalg.cholesky(S + eps * scale * np.eye(p), lower=True)
        except linalg.LinAlgError:
            continue
        # positive-but-tiny pivots make whitening meaningless
        d = np.diag(L)
        if d.min() > 0 and d.min() ** 2 > 1e-14 * d.max() ** 2:
            return L, eps
    raise ConditioningError(f"{name} is not positive definite even with jitter 1e-8")


def fix_sign(v, *partners):
    """Flip ``v`` (and each partner) so that the first clearly nonzero entry of ``v`` is positive."""
    idx = np.flatnonzero(np.abs(v) > SIGN_TOL * max(np.abs(v).max(), 1e-300))
    if idx.size and v[idx[0]] < 0:
        return (-v, *(-w for w in partners))
    return (v, *partners)


def cca_svd(C12, S1, S2, m: int) -> list[CanonicalTriple]:
    """Leading canonical triples of the pencil ``[[0, C12], [C12', 0]] / diag(S1, S2)``.

    With ``S1 = L1 L1'`` and ``S2 = L2 L2'`` the whitened cross matrix
    ``L1^-1 C12 L2^-T = U diag(s) V'`` gives ``b_k = L1^-T u_k``,
    ``theta_k = L2^-T v_k`` and ``rho_k = s_k``.
    """
    C12 = np.asarray(C12, dtype=np.float64)
    p, q = C12.shape
    if np.shape(S1) != (p, p) or np.shape(S2) != (q, q):
        raise ValidationError("metric shapes do not match the cross matrix", "bad_shape")
    L1, _ = jittered_cholesky(S1, "S1")
    L2, _ = jittered_cholesky(S2, "S2")
    M = linalg.solve_triangular(L1, C12, lower=True)
    M = linalg.solve_triangular(L2, M.T, lower=True).T
    U, s, Vt = linalg.svd(M, full_matrices=False)
    k = min(int(m), p, q)
    B = linalg.solve_triangular(L1.T, U[:, :k], lower=False)
    T = linalg.solve_triangular(L2.T, Vt[:k].T, lower=False)
    out = []
    for i in range(k):
        b, theta = fix_sign(B[:, i], T[:, i])
        out.append(CanonicalTriple(b=b, theta=theta, rho=float(s[i])))
    return out


def gsym_eig(A, B, m: int) -> list[EigenPair]:
    """Largest ``m`` solutions of ``A v = rho B v`` normalized to ``v'Bv = 1``."""
    A = _symmetric(A, "A")
    p = A.shape[0]
    L, _ = jittered_cholesky(B, "B")
    W = linalg.solve_triangular(L, A, lower=True)
    W = linalg.solve_triangular(L, W.T, lower=True).T
    vals, vecs = linalg.eigh((W + W.T) / 2.0)
    order = np.argsort(vals)[::-1][: min(int(m), p)]
    V = linalg.solve_triangular(L.T, vecs[:, order], lower=False)
    out = []
    for col, i in enumerate(order):
        (v,) = fix_sign(V[:, col])
        out.append(EigenPair(vector=v, value=float(vals[i])))
    return out


def cca_residual(C12, S1, S2, triple: CanonicalTriple) -> float:
    """Block-pencil residual of one triple."""
    r1 = C12 @ triple.theta - triple.rho * (S1 @ triple.b)
    r2 = C12.T @ triple.b - triple.rho * (S2 @ triple.theta)
    return float(np.linalg.norm(r1) + np.linalg.norm(r2))
