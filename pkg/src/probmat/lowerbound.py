"""Numerics for the uniform-vs-two-state-HMM testing lower bound.

Setup: alphabet of size n (even), a labelling sigma splits it into two halves,
state + emits uniformly on sigma^+, state - on sigma^-, and the hidden chain
flips with probability t (1/4 in the hard family). r(p) is the cross moment
E[P(G|sigma) P(G|pi)] for uniformly random G of length k when the two
labellings share a = p n / 2 symbols in their + halves.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from probmat._rng import make_rng

BRUTEFORCE_LIMIT = 10**7


@dataclass
class LbConfig:
    n: int
    k: int
    t: float = 0.25
    c: float | None = None

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ValueError("n must be a positive even integer")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if not 0 < self.t < 0.5:
            raise ValueError("t must lie in (0, 1/2)")
        if self.c is not None and not 0 <= self.c < 1.5:
            raise ValueError("c must lie in [0, 3/2)")


@dataclass
class CrossMoment:
    value: float
    gamma1: float
    gamma2: float


def _disc(p):
    return math.sqrt(64.0 * (p - 1.0) * p + 25.0)


def log_r_closed_form(p, k, n):
    """log r(p), evaluated with the (5 + s)^k power factored out."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    s = _disc(p)
    ratio = (5.0 - s) / (5.0 + s)
    bracket = (s + 3.0) + (s - 3.0) * ratio**k
    return (-2 * k * math.log(n) - (3 * k + 1) * math.log(2.0)
            + k * math.log(5.0 + s) + math.log(bracket / s))


def r_closed_form(p, k, n):
    """Closed-form cross moment at t = 1/4.

    r(p) = 2^{-3k-1} n^{-2k} / s * [s((5+s)^k + (5-s)^k) + 3((5+s)^k - (5-s)^k)]
    with s = sqrt(64 (p - 1) p + 25).
    """
    return math.exp(log_r_closed_form(p, k, n))


def cross_moment(p, k, n):
    """r(p) with the eigenvalues (5 +- s)/(8 n^2) of the reduced 2x2 recurrence."""
    s = _disc(p)
    return CrossMoment(r_closed_form(p, k, n), (5 + s) / (8 * n * n), (5 - s) / (8 * n * n))


def reduced_recurrence(p, n):
    """2x2 matrix H(p) acting on (F_{++} + F_{--}, F_{+-} + F_{-+}) at t = 1/4.

    The 4x4 recurrence preserves this symmetric pair; its eigenvalues are
    (5 +- sqrt(64 p (p-1) + 25)) / (8 n^2).
    """
    return np.array([[10 * p, 6 * (1 - p)], [6 * p, 10 * (1 - p)]]) / (8.0 * n * n)


def recurrence_matrix(p, t=0.25):
    """Un-normalised 4x4 transfer matrix over label classes (++, +-, -+, --).

    Entry (c, c') = 16 w_sigma w_pi q(c'), where w is 1 - t when the
    corresponding label is kept and t when it changes, and q = (p, 1-p, 1-p, p).
    At t = 1/4 this is the integer pattern 9/3/1 times p or 1 - p.
    """
    labels = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    q = np.array([p, 1 - p, 1 - p, p])
    A = np.empty((4, 4))
    for i, (s1, p1) in enumerate(labels):
        for j, (s2, p2) in enumerate(labels):
            ws = (1 - t) if s1 == s2 else t
            wp = (1 - t) if p1 == p2 else t
            A[i, j] = 16.0 * ws * wp * q[j]
    return A


def r_recurrence(p, k, n, t=0.25):
    """Cross moment by iterating F_{s+1} = A F_s / (8 n^2) from F_1 = 1/n^2.

    Closes with (1/2) (p F_{++} + (1-p) F_{+-} + (1-p) F_{-+} + p F_{--}).
    """
    if k == 0:
        return 1.0
    A = recurrence_matrix(p, t) / (8.0 * n * n)
    F = np.full(4, 1.0 / (n * n))
    for _ in range(k - 1):
        F = A @ F
    q = np.array([p, 1 - p, 1 - p, p])
    return float(0.5 * q @ F)


def _labelling(n, a):
    """sigma, pi in {+1,-1}^n with sigma^+ = first half and |sigma^+ & pi^+| = a."""
    half = n // 2
    if not 0 <= a <= half:
        raise ValueError("overlap out of range")
    sigma = np.where(np.arange(n) < half, 1, -1)
    pi = -np.ones(n, dtype=int)
    pi[:a] = 1
    pi[half:half + (half - a)] = 1
    return sigma, pi


def _sequence_likelihoods(labels, k, n, t):
    """P(G | labelling) for every G in [n]^k, enumerated in lexicographic order."""
    stay = 2 * (1 - t)  # 3/2 at t = 1/4
    move = 2 * t        # 1/2 at t = 1/4
    prob = np.full(n, 1.0 / n)
    last = labels.copy()
    for _ in range(k - 1):
        step = np.where(last[:, None] == labels[None, :], stay, move) / n
        prob = (prob[:, None] * step).ravel()
        last = np.tile(labels, prob.size // n)
    return prob


def r_bruteforce(a, k, n, t=0.25):
    """E[P(G|sigma) P(G|pi)] over G uniform on [n]^k by full enumeration."""
    if n**k > BRUTEFORCE_LIMIT:
        raise ValueError(f"n^k = {n**k} exceeds the enumeration guard")
    if k == 0:
        return 1.0
    sigma, pi = _labelling(n, a)
    ps = _sequence_likelihoods(sigma, k, n, t)
    pp = _sequence_likelihoods(pi, k, n, t)
    return float(np.sum(ps * pp) / n**k)


def overlap_weights(n):
    """P(|sigma^+ & pi^+| = a) = C(n/2, a)^2 / C(n, n/2), exact then converted."""
    half = n // 2
    total = math.comb(n, half)
    return [float(Fraction(math.comb(half, a) ** 2, total)) for a in range(half + 1)]


def variance_sum(n, k):
    """E[Y_n^2] = sum_a C(n/2,a)^2 n^{2k} r(2a/n) / C(n, n/2)."""
    if n < 2 or n % 2:
        raise ValueError("n must be a positive even integer")
    total = 0.0
    for a, w in enumerate(overlap_weights(n)):
        if k == 0:
            total += w
            continue
        total += w * math.exp(log_r_closed_form(2 * a / n, k, n) + 2 * k * math.log(n))
    return total


def variance_bound(c):
    """Asymptotic bound sqrt(2 / (2 - 4c/3)) on E[Y_n^2]."""
    if not 0 <= c < 1.5:
        raise ValueError("c must lie in [0, 3/2)")
    return math.sqrt(2.0 / (2.0 - 4.0 * c / 3.0))


def tv_bound(c):
    """Upper bound (1/2) sqrt(sqrt(2/(2 - 4c/3)) - 1) on the total variation distance."""
    return 0.5 * math.sqrt(variance_bound(c) - 1.0)


@dataclass
class YnStats:
    n: int
    k: int
    trials: int
    mean: float
    var: float
    mean_se: float
    var_se: float
    labelling_index: np.ndarray | None = None

    def mean_ci(self, z=3.0):
        return self.mean - z * self.mean_se, self.mean + z * self.mean_se


def all_labellings(n):
    """Every balanced labelling as a (C(n, n/2), n) array of +-1."""
    combos = list(combinations(range(n), n // 2))
    out = -np.ones((len(combos), n), dtype=np.int8)
    for row, plus in enumerate(combos):
        out[row, list(plus)] = 1
    return out


def sample_Yn(n, k, trials, seed=0, chunk=512):
    """Monte-Carlo moments of Y_n = n^k E_sigma[P(G|sigma)] with G uniform.

    Each draw also samples sigma from P'(sigma | G), so (G, sigma) follows the
    labelled reference law; Y_n itself depends on G only. Indices of the drawn
    labellings (rows of :func:`all_labellings`) are kept on the result.
    """
    if n % 2 or n < 2:
        raise ValueError("n must be a positive even integer")
    if n > 16:
        raise ValueError("exact labelling enumeration is limited to n <= 16")
    if k < 1 or trials < 2:
        raise ValueError("need k >= 1 and at least two trials")
    labs = all_labellings(n).astype(np.int64)
    rng = make_rng(seed, "lowerbound-mc")
    ys = np.empty(trials)
    drawn = np.empty(trials, dtype=np.int64)
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        G = rng.integers(0, n, size=(m, k))
        L = labs[:, G]  # (labellings, m, k)
        same = L[:, :, 1:] == L[:, :, :-1]
        # P(G|sigma) n^k = product of 3/2 (stay) and 1/2 (flip) factors
        w = np.prod(np.where(same, 1.5, 0.5), axis=2)
        ys[done:done + m] = w.mean(axis=0)
        cdf = np.cumsum(w / w.sum(axis=0, keepdims=True), axis=0)
        u = rng.random(m)
        drawn[done:done + m] = np.minimum((cdf < u[None, :]).sum(axis=0), len(labs) - 1)
        done += m
    mean = float(ys.mean())
    var = float(ys.var(ddof=1))
    centred = (ys - mean) ** 2
    return YnStats(n, k, trials, mean, var, float(ys.std(ddof=1) / math.sqrt(trials)),
                   float(centred.std(ddof=1) / math.sqrt(trials)), drawn)
