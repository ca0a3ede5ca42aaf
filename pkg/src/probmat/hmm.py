"""Learning a symmetric two-state HMM from one observation sequence.

The bigram residual B - rho rho^T equals ((1 - 2t)/4) (p - q)(p - q)^T, so a
centred rank-1 variant of the binned recovery estimates
delta = sqrt(|1 - 2t| / 4) (p - q). Trigram statistics of the two
"superwords" {S, not S}, with S = {delta > 0}, then pin down t.
"""
from dataclasses import dataclass, field

import numpy as np

from probmat.estimator import (
    EstimatorParams,
    _bin_bases,
    _check_batches,
    _partition_report,
    assign_bins,
    empirical_marginals,
)
from probmat.models import CountMatrix
from probmat.spectral import apply_block_projector, truncated_svd


class HmmDegenerateError(ValueError):
    """Raised when the data carry no usable two-state signal.

    ``reason`` is one of ``"rank1-superwords"``, ``"near-degenerate-mixing"``
    or ``"empty-anchor"``.
    """

    def __init__(self, reason, message):
        super().__init__(message)
        self.reason = reason


@dataclass
class HmmCounts:
    batches: list
    sequence: np.ndarray


@dataclass
class HmmEstimate:
    delta_hat: np.ndarray
    anchor_set: np.ndarray
    rho_hat: np.ndarray
    t_hat: float | None = None
    p_hat: np.ndarray | None = None
    q_hat: np.ndarray | None = None
    status: str = "ok"
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == "ok"


def hmm_counts(seq, M, batches=3):
    """Bigram counts of consecutive pairs, dealt round-robin into batches.

    Every batch gets nominal_N = (len(seq) - 1) // batches.
    """
    seq = np.asarray(seq, dtype=np.int64)
    if seq.ndim != 1 or seq.size < 3:
        raise ValueError("sequence must have length >= 3")
    if seq.min() < 0 or seq.max() >= M:
        raise ValueError("symbol out of range")
    first, second = seq[:-1], seq[1:]
    n_pairs = first.size
    nominal = max(n_pairs // batches, 1)
    out = []
    for b in range(batches):
        lin = first[b::batches] * M + second[b::batches]
        idx, cnt = np.unique(lin, return_counts=True)
        out.append(CountMatrix(M, idx // M, idx % M, cnt, nominal, "multinomial", b + 1))
    return HmmCounts(out, seq)


def _cross_rate(C2csr, A, B, rho, N):
    # observed / expected co-occurrence of word sets A and B, both orders
    if A.size == 0 or B.size == 0:
        return 0.0
    expected = 2.0 * N * rho[A].sum() * rho[B].sum()
    if expected == 0:
        return 0.0
    observed = C2csr[A][:, B].sum() + C2csr[B][:, A].sum()
    return float(observed / expected)


def stitch_signs(per_bin_vectors, members, C2, rho_hat, residual_sign=1.0):
    """Relative sign for each bin's segment of the separation vector.

    The bin with the largest segment norm is the reference. Every other bin
    keeps its sign when its positive part co-occurs with the reference's
    positive part (and negative with negative) at a higher observed/expected
    rate than the crossed pairing; ``residual_sign = -1`` (anti-correlated
    chain, t > 1/2) reverses the comparison. Ties keep the sign.
    """
    signs = np.ones(len(per_bin_vectors))
    norms = [np.linalg.norm(v) if v.size else 0.0 for v in per_bin_vectors]
    if len(per_bin_vectors) <= 1 or max(norms) == 0:
        return signs
    ref = int(np.argmax(norms))
    csr = C2.to_csr()
    N = C2.nominal_N
    ref_idx = np.asarray(members[ref])
    ref_pos = ref_idx[per_bin_vectors[ref] > 0]
    ref_neg = ref_idx[per_bin_vectors[ref] < 0]
    for k, v in enumerate(per_bin_vectors):
        if k == ref or norms[k] == 0:
            continue
        idx = np.asarray(members[k])
        pos, neg = idx[v > 0], idx[v < 0]
        aligned = _cross_rate(csr, ref_pos, pos, rho_hat, N) + _cross_rate(csr, ref_neg, neg, rho_hat, N)
        crossed = _cross_rate(csr, ref_pos, neg, rho_hat, N) + _cross_rate(csr, ref_neg, pos, rho_hat, N)
        if residual_sign * (aligned - crossed) < 0:
            signs[k] = -1.0
    return signs


def estimate_delta(C1, C2, C3, params):
    """Estimate delta = sqrt(|1-2t|/4) (p - q), up to a global sign.

    Returns (delta_hat, rho_hat, report); rho_hat are the C1 marginals used
    for binning and centring. Entries of excluded words are zero.
    """
    M, N = _check_batches(C1, C2, C3)
    rho = empirical_marginals(C1)
    part = assign_bins(rho, N, params)
    basis, bins = _bin_bases(C2, part, params, 1, center=rho)

    d = np.sqrt(part.word_rho_bar)
    dinv = np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)
    X = dinv[:, None] * (C3.to_dense() / N - np.outer(rho, rho)) * dinv[None, :]
    top = truncated_svd(apply_block_projector(basis, X), 1)
    sigma = float(top.S[0])
    u, v = top.U[:, 0], top.V[:, 0]
    residual_sign = 1.0 if u @ v >= 0 else -1.0
    scaled = np.sqrt(sigma) * u

    segments = [scaled[idx] for idx in basis.members]
    signs = stitch_signs(segments, basis.members, C2, rho, residual_sign)
    for idx, s in zip(basis.members, signs):
        scaled[idx] *= s
    delta = d * scaled

    report = _partition_report(part, params)
    report.update({
        "bins": bins,
        "sigma": sigma,
        "residual_sign": residual_sign,
        "stitch_flips": int(np.sum(signs < 0)),
    })
    return delta, rho, report


def superword_moments(seq, anchor_set):
    """Empirical P(S), P(SS), P(SSS) over sliding windows of the sequence."""
    seq = np.asarray(seq)
    if seq.size < 3:
        raise ValueError("sequence must have length >= 3")
    ind = np.isin(seq, np.asarray(anchor_set, dtype=seq.dtype))
    m = ind.mean()
    b2 = (ind[:-1] & ind[1:]).mean()
    t3 = (ind[:-2] & ind[1:-1] & ind[2:]).mean()
    return float(m), float(b2), float(t3)


def population_superword_moments(t, a, b):
    """Exact (m, P(SS), P(SSS)) of the stationary chain by matrix products.

    ``a`` and ``b`` are the probabilities that states 1 and 2 emit into S.
    """
    T = np.array([[1 - t, t], [t, 1 - t]])
    pi = np.array([0.5, 0.5])
    O = np.diag([a, b])
    one = np.ones(2)
    m = pi @ O @ one
    b2 = pi @ O @ T @ O @ one
    t3 = pi @ O @ T @ O @ T @ O @ one
    return float(m), float(b2), float(t3)


def solve_transition(m, b2, t3, tol_sep=1e-6, tol=1e-6):
    """Invert superword moments for the flip probability.

    With lam = 1 - 2t and s = (P(S|1) - P(S|2))/2 the stationary chain gives
    P(SS) = m^2 + lam s^2 and P(SSS) = m^3 + 2 m lam s^2 + m lam^2 s^2,
    so lam = (P(SSS) - m^3 - 2 m c) / (m c) with c = P(SS) - m^2.
    Returns (t_hat, s^2).
    """
    if not tol < m < 1 - tol:
        raise HmmDegenerateError("rank1-superwords", f"superword mass {m} is degenerate")
    c = b2 - m * m
    if abs(c) <= tol_sep:
        raise HmmDegenerateError("rank1-superwords", "no detectable separation on the anchor set")
    lam = (t3 - m**3 - 2 * m * c) / (m * c)
    t_hat = float(np.clip((1 - lam) / 2, tol, 1 - tol))
    if lam == 0:
        raise HmmDegenerateError("near-degenerate-mixing", "estimated lambda is zero")
    return t_hat, float(c / lam)


def recover_emissions(rho_hat, delta_hat, t_hat, tol=1e-3):
    """p_hat, q_hat = rho_hat +- (p - q)/2 with p - q = delta_hat / sqrt(|1 - 2t|/4).

    Negative entries are clipped and both vectors renormalised.
    """
    lam = abs(1 - 2 * t_hat)
    if lam < tol:
        raise HmmDegenerateError("near-degenerate-mixing", "t_hat is too close to 1/2")
    diff = np.asarray(delta_hat, dtype=float) / np.sqrt(lam / 4)
    rho_hat = np.asarray(rho_hat, dtype=float)
    out = []
    for v in (rho_hat + diff / 2, rho_hat - diff / 2):
        v = np.clip(v, 0, None)
        total = v.sum()
        out.append(v / total if total > 0 else np.full(v.size, 1.0 / v.size))
    return out[0], out[1]


SEPARATION_Z = 4.0


def hmm_learn(seq, M, params=None, tol_sep=None):
    """Full pipeline: bigrams -> delta_hat -> anchor set -> t_hat -> emissions.

    Degenerate inputs produce an estimate with ``status`` set to the failure
    reason instead of raising. With ``tol_sep=None`` the separation test uses
    a length-aware floor: P(SS) - m^2 must exceed SEPARATION_Z times its i.i.d.
    standard error m (1 - m) / sqrt(L - 1), or 1e-6 if that is larger.
    """
    if params is None:
        params = EstimatorParams(R=2, w_min=0.5)
    seq = np.asarray(seq, dtype=np.int64)
    counts = hmm_counts(seq, M)
    rho_seq = np.bincount(seq, minlength=M) / seq.size
    diagnostics = {"length": int(seq.size)}
    if seq.size < 10 * M:
        diagnostics["warning"] = "sequence shorter than 10 M"

    delta, _, report = estimate_delta(*counts.batches, params)
    diagnostics["delta"] = report
    anchor = np.flatnonzero(delta > 0)
    est = HmmEstimate(delta, anchor, rho_seq, diagnostics=diagnostics)
    if anchor.size == 0:
        est.status = "empty-anchor"
        est.p_hat = est.q_hat = rho_seq.copy()
        return est
    moments = superword_moments(seq, anchor)
    diagnostics["superword_moments"] = moments
    if tol_sep is None:
        m = moments[0]
        tol_sep = max(1e-6, SEPARATION_Z * m * (1 - m) / np.sqrt(seq.size - 1))
    diagnostics["tol_sep"] = tol_sep
    try:
        t_hat, s2 = solve_transition(*moments, tol_sep=tol_sep)
        diagnostics["superword_separation_sq"] = s2
        est.t_hat = t_hat
        est.p_hat, est.q_hat = recover_emissions(rho_seq, delta, t_hat)
    except HmmDegenerateError as err:
        est.status = err.reason
        est.p_hat = est.q_hat = rho_seq.copy()
        diagnostics["failure"] = str(err)
    return est


def emission_error(p_hat, q_hat, p, q):
    """min over label swap of ||p_hat - p||_1 + ||q_hat - q||_1."""
    direct = np.abs(p_hat - p).sum() + np.abs(q_hat - q).sum()
    swapped = np.abs(p_hat - q).sum() + np.abs(q_hat - p).sum()
    return float(min(direct, swapped))
