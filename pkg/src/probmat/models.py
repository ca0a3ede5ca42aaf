"""Ground-truth probability models B = P W P^T and samplers for counts and sequences."""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from probmat._rng import make_rng

FAMILIES = ("topic", "hmm-bigram", "sbm", "custom")
SCHEMES = ("poisson", "multinomial", "exact")

# Poisson means below this floor are skipped when sampling.
POISSON_FLOOR = 1e-18
_COUNT_LIMIT = 2**62


@dataclass
class ProbabilityModel:
    """Factored probability matrix ``B = P @ W @ P.T``.

    ``P`` is M x R with columns summing to one; ``W`` is R x R with entries
    summing to one.
    """

    M: int
    R: int
    P: np.ndarray
    W: np.ndarray
    family: str = "custom"
    psd_w: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        self.W = np.asarray(self.W, dtype=float)
        self.validate()

    def validate(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.R < 1 or self.R > self.M:
            raise ValueError(f"need 1 <= R <= M, got R={self.R}, M={self.M}")
        if self.P.shape != (self.M, self.R) or self.W.shape != (self.R, self.R):
            raise ValueError("P must be M x R and W must be R x R")
        if np.any(self.P < 0):
            raise ValueError("P has negative entries")
        if not np.allclose(self.P.sum(axis=0), 1.0, rtol=0, atol=1e-12):
            raise ValueError("columns of P must sum to 1")
        if self.family in ("topic", "sbm") and np.any(self.W < 0):
            raise ValueError("W must be entrywise nonnegative")
        if abs(self.W.sum() - 1.0) > 1e-12:
            raise ValueError("entries of W must sum to 1")
        if self.psd_w:
            sym = (self.W + self.W.T) / 2
            if np.linalg.eigvalsh(sym).min() < -1e-10:
                raise ValueError("psd_w is set but W is not positive semidefinite")

    @property
    def B(self):
        return self.P @ self.W @ self.P.T

    @property
    def w_min(self):
        """Smallest row sum of W."""
        return float(self.W.sum(axis=1).min())

    @property
    def marginals(self):
        B = self.B
        return (B.sum(axis=0) + B.sum(axis=1)) / 2


@dataclass
class HmmModel:
    """Symmetric two-state HMM: flip probability ``t``, emissions ``p`` and ``q``."""

    t: float
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        if self.p.ndim != 1 or self.p.shape != self.q.shape:
            raise ValueError("p and q must be vectors of equal length")
        for name, v in (("p", self.p), ("q", self.q)):
            if np.any(v < 0) or abs(v.sum() - 1.0) > 1e-12:
                raise ValueError(f"{name} is not a probability vector")
        if not 0.0 <= self.t <= 1.0:
            raise ValueError("t must lie in [0, 1]")

    @property
    def M(self):
        return self.p.shape[0]

    @property
    def transition(self):
        t = self.t
        return np.array([[1 - t, t], [t, 1 - t]])


@dataclass
class CountMatrix:
    """Sparse COO counts with entries sorted by ascending (i, j).

    ``scheme="exact"`` marks population inputs (``C = N * B``) whose entries
    are real-valued; the sampled schemes hold integer counts.
    """

    M: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    nominal_N: float
    scheme: str = "poisson"
    batch_id: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        dtype = float if self.scheme == "exact" else np.int64
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        vals = np.asarray(self.vals)
        if self.scheme != "exact" and vals.size and not np.all(np.mod(vals, 1) == 0):
            raise ValueError("sampled counts must be integers")
        vals = vals.astype(dtype)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("rows, cols and vals must have equal length")
        if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= self.M or cols.max() >= self.M):
            raise ValueError("index out of range")
        if np.any(vals < 0):
            raise ValueError("counts must be nonnegative")
        keep = vals != 0
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        order = np.lexsort((cols, rows))
        self.rows, self.cols, self.vals = rows[order], cols[order], vals[order]
        if self.rows.size > 1:
            lin = self.rows * self.M + self.cols
            if np.any(np.diff(lin) == 0):
                raise ValueError("duplicate (i, j) entries")

    @classmethod
    def from_dense(cls, A, nominal_N, scheme="poisson", batch_id=0):
        A = np.asarray(A)
        r, c = np.nonzero(A)
        return cls(A.shape[0], r, c, A[r, c], nominal_N, scheme, batch_id)

    @property
    def total(self):
        return self.vals.sum()

    def to_csr(self):
        return scipy.sparse.csr_matrix(
            (self.vals.astype(float), (self.rows, self.cols)), shape=(self.M, self.M)
        )

    def to_dense(self):
        A = np.zeros((self.M, self.M), dtype=self.vals.dtype if self.vals.size else float)
        A[self.rows, self.cols] = self.vals
        return A

    def row_sums(self):
        return np.bincount(self.rows, weights=self.vals, minlength=self.M)

    def col_sums(self):
        return np.bincount(self.cols, weights=self.vals, minlength=self.M)


def generate_topic_model(M, R, mixing, concentration=1.0, seed=0):
    """Topic model: columns of P are Dirichlet draws, W = diag(mixing)."""
    mixing = np.asarray(mixing, dtype=float)
    if R > M:
        raise ValueError("R must not exceed M")
    if mixing.shape != (R,) or np.any(mixing < 0) or abs(mixing.sum() - 1.0) > 1e-12:
        raise ValueError("mixing must be a length-R probability vector")
    if concentration <= 0:
        raise ValueError("concentration must be positive")
    rng = make_rng(seed, "topic-model")
    P = rng.dirichlet(np.full(M, float(concentration)), size=R).T
    # renormalise so the column-sum invariant holds to rounding
    P = P / P.sum(axis=0, keepdims=True)
    return ProbabilityModel(
        M, R, P, np.diag(mixing), family="topic", psd_w=True,
        params={"mixing": mixing.tolist(), "concentration": float(concentration), "seed": int(seed)},
    )


def generate_sbm_model(M, R, alpha, beta):
    """R equal communities; in-community weight ~ alpha, cross weight ~ beta."""
    if M % R:
        raise ValueError("M must be divisible by R")
    if beta < 0 or alpha < beta:
        raise ValueError("need alpha >= beta >= 0")
    if alpha == 0:
        raise ValueError("alpha must be positive")
    size = M // R
    P = np.zeros((M, R))
    for c in range(R):
        P[c * size:(c + 1) * size, c] = 1.0 / size
    W = np.full((R, R), float(beta))
    np.fill_diagonal(W, float(alpha))
    W /= W.sum()
    return ProbabilityModel(
        M, R, P, W, family="sbm", psd_w=bool(np.linalg.eigvalsh(W).min() >= -1e-10),
        params={"alpha": float(alpha), "beta": float(beta)},
    )


def hmm_bigram_model(h):
    """Stationary bigram matrix of a symmetric two-state HMM."""
    P = np.column_stack([h.p, h.q])
    W = 0.5 * h.transition
    return ProbabilityModel(
        h.M, 2, P, W, family="hmm-bigram", psd_w=bool(h.t <= 0.5),
        params={"t": float(h.t)},
    )


def sample_counts(model, N, scheme="poisson", seed=0, batch_id=0):
    """Draw a count matrix with nominal sample size ``N``.

    Poisson: C_ij ~ Poi(N B_ij) independently (means below POISSON_FLOOR are
    skipped). Multinomial: exactly N pairs drawn i.i.d. from B.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    B = model.B
    M = model.M
    if N * B.max() > _COUNT_LIMIT:
        raise OverflowError("N * max(B) exceeds representable counts")
    rng = make_rng(seed, "counts", batch_id)
    if scheme == "poisson":
        flat = B.ravel() * N
        idx = np.flatnonzero(flat > POISSON_FLOOR)
        draws = rng.poisson(flat[idx])
        hit = draws > 0
        idx, draws = idx[hit], draws[hit]
    elif scheme == "multinomial":
        flat = np.clip(B.ravel(), 0, None)
        flat = flat / flat.sum()
        pairs = rng.choice(flat.size, size=int(N), p=flat)
        idx, draws = np.unique(pairs, return_counts=True)
    else:
        raise ValueError(f"cannot sample with scheme {scheme!r}")
    return CountMatrix(M, idx // M, idx % M, draws, N, scheme, batch_id)


def exact_counts(model, N, batch_id=0):
    """Population 'counts' C = N * B, used for noiseless pipeline checks."""
    return CountMatrix.from_dense(N * model.B, N, scheme="exact", batch_id=batch_id)


def sample_batches(model, N, batches=3, scheme="poisson", seed=0):
    """Independent count batches with batch_id = 1, ..., batches."""
    if batches < 1:
        raise ValueError("need at least one batch")
    return [sample_counts(model, N, scheme, seed, batch_id=b) for b in range(1, batches + 1)]


def hmm_sample_sequence(h, length, seed=0):
    """Sample ``length`` symbols from the stationary chain of ``h``."""
    if length < 1:
        raise ValueError("length must be at least 1")
    rng = make_rng(seed, "hmm-sequence")
    first = rng.integers(0, 2)
    flips = rng.random(length - 1) < h.t
    states = (first + np.concatenate([[0], np.cumsum(flips)])) % 2
    out = np.empty(length, dtype=np.int64)
    for state, dist in ((0, h.p), (1, h.q)):
        where = np.flatnonzero(states == state)
        out[where] = rng.choice(h.M, size=where.size, p=dist)
    return out


def uniform_disjoint_hmm(M, t):
    """p uniform on the first half of the alphabet, q uniform on the second."""
    if M % 2:
        raise ValueError("M must be even")
    p = np.zeros(M)
    q = np.zeros(M)
    p[: M // 2] = 2.0 / M
    q[M // 2:] = 2.0 / M
    return HmmModel(t, p, q)
