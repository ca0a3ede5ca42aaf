"""Binned, regularised, block-projected rank-R recovery of B, plus two baselines."""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from probmat.spectral import ProjectionBasis, apply_block_projector, truncated_svd


@dataclass
class EstimatorParams:
    """Tuning for :func:`recover`.

    ``w_min`` is a lower bound on the row sums of W; when it is None the
    heuristic ``1/R`` is used and flagged in the report. ``k0_override``
    replaces the computed cutoff bin index.
    """

    R: int
    eps: float = 0.1
    w_min: float | None = None
    c0: float = 1.0
    k0_override: int | None = None
    bin_prune_coeff: float = 20.0

    def __post_init__(self):
        if self.R < 1:
            raise ValueError("R must be >= 1")
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        if self.w_min is not None and not 0 < self.w_min <= 1:
            raise ValueError("w_min must lie in (0, 1]")
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")

    @property
    def w_min_value(self):
        return self.w_min if self.w_min is not None else 1.0 / self.R

    @property
    def k0(self):
        if self.k0_override is not None:
            return int(self.k0_override)
        x = self.c0 * self.R / (self.eps * math.sqrt(self.w_min_value))
        return math.ceil(4 * math.log(x) + 16)


@dataclass
class BinPartition:
    N: float
    K: int
    assignment: np.ndarray
    rho_hat: np.ndarray
    rho_bar: np.ndarray
    k0: int
    bin_members: list
    pruned: list = field(default_factory=list)

    @property
    def surviving(self):
        return [k for k in range(1, self.K + 1) if self.rho_bar[k] > 0]

    @property
    def all_zeroed(self):
        return not self.surviving

    @property
    def word_rho_bar(self):
        """rho_bar of each word's bin (0 for excluded words)."""
        return self.rho_bar[self.assignment]

    @property
    def excluded(self):
        return self.word_rho_bar == 0


@dataclass
class Estimate:
    """Rank-R estimate B_hat = diag(scale) U diag(S) V^T diag(scale)."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    scale: np.ndarray
    excluded: np.ndarray
    report: dict = field(default_factory=dict)

    @property
    def M(self):
        return self.U.shape[0]

    def dense(self):
        left = self.scale[:, None] * self.U * self.S
        return left @ (self.V.T * self.scale[None, :])


def empirical_marginals(C):
    """rho_hat_i = (row_i + col_i) / (2 N) with N the nominal sample size."""
    if not C.nominal_N:
        raise ValueError("nominal_N must be positive")
    return (C.row_sums() + C.col_sums()) / (2.0 * C.nominal_N)


def assign_bins(rho_hat, N, params):
    """Log-spaced bins on the empirical marginals, with pruning and the k0 cutoff.

    Bin 0 holds rho_hat < 1/N; bin k >= 1 holds e^{k-1}/N <= rho_hat < e^k/N
    (the last bin is closed on the right). rho_bar_k = e^{k+1}/N for nonempty bins
    that survive, 0 otherwise.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    rho_hat = np.asarray(rho_hat, dtype=float)
    K = int(math.floor(math.log(N))) + 1
    lower = np.exp(np.arange(K)) / N  # lower edge of bins 1..K
    assignment = np.searchsorted(lower, rho_hat, side="right")
    members = [np.flatnonzero(assignment == k) for k in range(K + 1)]

    k0 = params.k0
    rho_bar = np.zeros(K + 1)
    pruned = []
    for k in range(1, K + 1):
        if k < k0 or members[k].size == 0:
            continue
        if members[k].size < params.bin_prune_coeff * math.exp(-1.5 * (k + 1)) * N:
            if members[k].size:
                pruned.append(k)
            continue
        rho_bar[k] = math.exp(k + 1) / N
    part = BinPartition(N, K, assignment, rho_hat, rho_bar, k0, members, pruned)
    if part.all_zeroed:
        warnings.warn("every bin was zeroed; the estimate will be the zero matrix", RuntimeWarning)
    return part


def _symmetric_sums(C):
    return C.row_sums() + C.col_sums()


def regularize_block(C2, part, k, params, _sums=None, _csr=None):
    """Regularised diagonal block B~_k of C2 / N.

    Rule 1 zeroes word i when its symmetrised full-matrix sum exceeds
    2 rho_bar_k; rule 2 then zeroes words whose in-block row or column sum
    exceeds 2 |I_k| rho_bar_k^2 / w_min. Both rules act on row and column.
    Returns (block, zeroed_by_rule1, zeroed_by_rule2) with word indices.
    """
    rb = part.rho_bar[k]
    if rb <= 0:
        raise ValueError(f"bin {k} is excluded")
    N = part.N
    idx = part.bin_members[k]
    sums = _symmetric_sums(C2) if _sums is None else _sums
    csr = C2.to_csr() if _csr is None else _csr
    block = csr[idx][:, idx].toarray()

    # (row + col) / 2 > 2 rho_bar N, compared in count units
    rule1 = sums[idx] > 4.0 * rb * N
    block[rule1, :] = 0
    block[:, rule1] = 0

    limit = 2.0 * idx.size * rb * rb * N / params.w_min_value
    rule2 = (block.sum(axis=1) > limit) | (block.sum(axis=0) > limit)
    block[rule2, :] = 0
    block[:, rule2] = 0
    return block / N, idx[rule1], idx[rule2]


def block_basis(Bk, R):
    """Top-R left singular vectors of a block; an all-zero block gives an empty basis."""
    Bk = np.asarray(Bk, dtype=float)
    n = Bk.shape[0]
    if n == 0 or not np.any(Bk):
        return np.zeros((n, 0))
    return truncated_svd(Bk, min(R, n)).U


def _check_batches(*Cs):
    M, N = Cs[0].M, Cs[0].nominal_N
    for C in Cs[1:]:
        if C.M != M:
            raise ValueError("count batches have different dimensions")
        if C.nominal_N != N:
            raise ValueError("count batches have different nominal_N")
    return M, N


def _bin_bases(C2, part, params, rank, center=None):
    """Regularise each surviving block of C2 and collect its top-``rank`` basis.

    With ``center`` given, the block basis is computed from
    B~_k - center_{I_k} center_{I_k}^T with zeroed words kept at zero.
    """
    sums = _symmetric_sums(C2)
    csr = C2.to_csr()
    members, blocks, diag = [], [], []
    for k in part.surviving:
        Bk, z1, z2 = regularize_block(C2, part, k, params, _sums=sums, _csr=csr)
        idx = part.bin_members[k]
        if center is not None:
            c = center[idx].copy()
            keep = ~np.isin(idx, np.concatenate([z1, z2]))
            Bk = (Bk - np.outer(c, c)) * np.outer(keep, keep)
        V = block_basis(Bk, rank)
        members.append(idx)
        blocks.append(V)
        diag.append({
            "bin": k,
            "size": int(idx.size),
            "rho_bar": float(part.rho_bar[k]),
            "zeroed_rule1": int(z1.size),
            "zeroed_rule2": int(z2.size),
            "basis_rank": int(V.shape[1]),
        })
    return ProjectionBasis(C2.M, members, blocks), diag


def _partition_report(part, params):
    return {
        "N": float(part.N),
        "K": part.K,
        "k0": part.k0,
        "bin_sizes": [int(m.size) for m in part.bin_members],
        "rho_bar": part.rho_bar.tolist(),
        "pruned_bins": part.pruned,
        "all_zeroed": part.all_zeroed,
        "w_min": params.w_min_value,
        "w_min_heuristic": params.w_min is None,
    }


def recover(C1, C2, C3, params):
    """Rank-R estimate of B from three independent count batches.

    C1 sets marginals and bins, C2 gives the per-bin subspaces, and C3 is
    rescaled by D^{-1}, projected, and truncated to rank R.
    """
    M, N = _check_batches(C1, C2, C3)
    R = min(params.R, M)
    part = assign_bins(empirical_marginals(C1), N, params)
    basis, bins = _bin_bases(C2, part, params, R)

    d = np.sqrt(part.word_rho_bar)
    dinv = np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)
    X = dinv[:, None] * (C3.to_dense() / N) * dinv[None, :]
    svd = truncated_svd(apply_block_projector(basis, X), R)

    excluded = part.excluded
    report = _partition_report(part, params)
    report.update({
        "method": "recover",
        "bins": bins,
        "zeroed_rule1": sum(b["zeroed_rule1"] for b in bins),
        "zeroed_rule2": sum(b["zeroed_rule2"] for b in bins),
        "singular_values": svd.S.tolist(),
        "excluded_words": int(excluded.sum()),
        "excluded_mass": float(empirical_marginals(C3)[excluded].sum()),
    })
    return Estimate(svd.U, svd.S, svd.V, d, excluded, report)


def baseline_naive(C, R):
    """Rank-R truncated SVD of C / N."""
    svd = truncated_svd(C.to_dense() / C.nominal_N, min(R, C.M))
    report = {"method": "naive", "singular_values": svd.S.tolist(), "excluded_mass": 0.0}
    return Estimate(svd.U, svd.S, svd.V, np.ones(C.M), np.zeros(C.M, dtype=bool), report)


def baseline_scaled(C1, C2, R):
    """Rank-R truncation after rescaling by diag(max(rho_hat, 1/N))^{-1/2}."""
    M, N = _check_batches(C1, C2)
    s = np.maximum(empirical_marginals(C1), 1.0 / N)
    d = np.sqrt(s)
    X = (C2.to_dense() / N) / d[:, None] / d[None, :]
    svd = truncated_svd(X, min(R, M))
    report = {"method": "scaled", "singular_values": svd.S.tolist(), "excluded_mass": 0.0}
    return Estimate(svd.U, svd.S, svd.V, d, np.zeros(M, dtype=bool), report)


def l1_error(A, B):
    """Entrywise l1 distance sum |A - B|."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError("shapes differ")
    return float(np.abs(A - B).sum())


def numerical_rank(A, rtol=1e-9):
    s = np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))
