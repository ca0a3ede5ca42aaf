"""Dense linear-algebra kernel: truncated SVD, block projectors, norms, perturbation checks."""
from dataclasses import dataclass, field

import numpy as np

from probmat._rng import make_rng


@dataclass
class TruncatedSvd:
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def rank(self):
        return self.S.shape[0]

    def reconstruct(self):
        return (self.U * self.S) @ self.V.T


def _fix_signs(U, V):
    # largest-magnitude entry of each left singular vector is made positive
    if U.shape[1] == 0:
        return U, V
    pivot = U[np.argmax(np.abs(U), axis=0), np.arange(U.shape[1])]
    sgn = np.where(pivot < 0, -1.0, 1.0)
    return U * sgn, V * sgn


def truncated_svd(A, r):
    """Top-``r`` singular triplets of a dense matrix, with deterministic signs."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("A has non-finite entries")
    if r < 0 or r > min(A.shape):
        raise ValueError(f"rank {r} out of range for shape {A.shape}")
    if r == 0:
        return TruncatedSvd(np.zeros((A.shape[0], 0)), np.zeros(0), np.zeros((A.shape[1], 0)))
    U, S, Vt = np.linalg.svd(A, full_matrices=False)
    U, V = _fix_signs(U[:, :r], Vt[:r].T)
    return TruncatedSvd(U, S[:r], V)


def spectral_norm(A, tol=1e-10, max_iter=10_000, seed=0):
    """Largest singular value by power iteration on A^T A from a seeded start."""
    A = np.asarray(A, dtype=float)
    if A.size == 0 or not np.any(A):
        return 0.0
    x = make_rng(seed, "power-iteration").standard_normal(A.shape[1])
    x /= np.linalg.norm(x)
    prev = 0.0
    for _ in range(max_iter):
        y = A.T @ (A @ x)
        lam = float(np.linalg.norm(y))
        if lam == 0.0:
            return 0.0
        x = y / lam
        if abs(lam - prev) <= tol * lam:
            break
        prev = lam
    return float(np.sqrt(lam))


def op_norm(A):
    """Exact spectral norm from a dense SVD."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


@dataclass
class ProjectionBasis:
    """Per-bin orthonormal blocks; blocks of zeroed bins are empty.

    ``members[b]`` lists the word indices of block ``b`` and ``blocks[b]`` is
    the matching ``len(members[b]) x r_b`` orthonormal basis.
    """

    M: int
    members: list = field(default_factory=list)
    blocks: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.members) != len(self.blocks):
            raise ValueError("members and blocks must align")
        seen = np.zeros(self.M, dtype=bool)
        for idx, V in zip(self.members, self.blocks):
            idx = np.asarray(idx)
            if V.shape[0] != idx.size:
                raise ValueError("block rows must match bin size")
            if idx.size and (idx.min() < 0 or idx.max() >= self.M):
                raise ValueError("bin index out of range")
            if np.any(seen[idx]):
                raise ValueError("bins overlap")
            seen[idx] = True
            if V.shape[1] and not np.allclose(V.T @ V, np.eye(V.shape[1]), atol=1e-8):
                raise ValueError("block columns are not orthonormal")

    @property
    def total_rank(self):
        return sum(V.shape[1] for V in self.blocks)

    def embedding(self):
        """M x total_rank matrix Q with P_V = Q Q^T (blocks on disjoint rows)."""
        Q = np.zeros((self.M, self.total_rank))
        col = 0
        for idx, V in zip(self.members, self.blocks):
            r = V.shape[1]
            if r:
                Q[np.asarray(idx), col:col + r] = V
                col += r
        return Q

    def projector(self):
        Q = self.embedding()
        return Q @ Q.T


def apply_block_projector(basis, A):
    """P_V A P_V, i.e. V_k (V_k^T A[I_k, I_l] V_l) V_l^T over all bin pairs."""
    A = np.asarray(A, dtype=float)
    if A.shape != (basis.M, basis.M):
        raise ValueError(f"matrix shape {A.shape} does not match basis dimension {basis.M}")
    Q = basis.embedding()
    if Q.shape[1] == 0:
        return np.zeros_like(A)
    return Q @ (Q.T @ A @ Q) @ Q.T


def sqrt_perturbation_gap(U, P):
    """Return (||U - PU||^2, ||UU^T - PU (PU)^T||) for a projector P."""
    U = np.asarray(U, dtype=float)
    P = np.asarray(P, dtype=float)
    if not (np.allclose(P, P.T, atol=1e-8) and np.allclose(P @ P, P, atol=1e-8)):
        raise ValueError("P is not a symmetric idempotent projector")
    PU = P @ U
    lhs = op_norm(U - PU) ** 2
    rhs = op_norm(U @ U.T - PU @ PU.T)
    return lhs, rhs


def wedin_rank1_gap(v, E):
    """Compare v with the rank-1 truncated SVD of v v^T + E.

    Returns (err, ||E||^{1/2}, ||E|| / ||v||) where err is the sign-aligned
    distance between v and sqrt(sigma_1) u_1.
    """
    v = np.asarray(v, dtype=float)
    E = np.asarray(E, dtype=float)
    X = np.outer(v, v) + E
    top = truncated_svd(X, 1)
    v_hat = np.sqrt(top.S[0]) * top.U[:, 0]
    err = min(np.linalg.norm(v - v_hat), np.linalg.norm(v + v_hat))
    e_norm = op_norm(E)
    v_norm = np.linalg.norm(v)
    bound_b = e_norm / v_norm if v_norm > 0 else np.inf
    return float(err), float(np.sqrt(e_norm)), float(bound_b)
