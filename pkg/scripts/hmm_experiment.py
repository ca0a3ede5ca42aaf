"""Two-state HMM learning versus sequence length, with a known-states reference.

The reference estimates p and q from the emissions with the hidden states
revealed, which lower-bounds the emission error any method can reach at that
length.

    python scripts/hmm_experiment.py --M 200 --lengths 10000 40000 160000 --seeds 20
"""
import argparse
import warnings

import numpy as np

from probmat.estimator import EstimatorParams
from probmat.hmm import emission_error, hmm_learn
from probmat.models import uniform_disjoint_hmm


def sample_with_states(h, length, rng):
    flips = rng.random(length - 1) < h.t
    states = (rng.integers(0, 2) + np.concatenate([[0], np.cumsum(flips)])) % 2
    seq = np.empty(length, dtype=np.int64)
    for s, dist in ((0, h.p), (1, h.q)):
        where = np.flatnonzero(states == s)
        seq[where] = rng.choice(h.M, size=where.size, p=dist)
    return seq, states


def known_state_error(h, seq, states):
    p_hat = np.bincount(seq[states == 0], minlength=h.M).astype(float)
    q_hat = np.bincount(seq[states == 1], minlength=h.M).astype(float)
    return emission_error(p_hat / max(p_hat.sum(), 1), q_hat / max(q_hat.sum(), 1), h.p, h.q)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--M", type=int, default=200)
    ap.add_argument("--t", type=float, default=0.25)
    ap.add_argument("--lengths", type=int, nargs="+", default=[10_000, 40_000, 160_000, 640_000])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--k0", type=int, default=0)
    args = ap.parse_args()

    h = uniform_disjoint_hmm(args.M, args.t)
    params = EstimatorParams(R=2, w_min=0.5, k0_override=args.k0)
    print(f"{'length':>9} {'ok':>4} {'|t-t|':>8} {'emis l1':>8} {'known':>8} {'cos(delta)':>10}")
    for L in args.lengths:
        t_err, e_err, ref, cos = [], [], [], []
        for seed in range(args.seeds):
            rng = np.random.default_rng([seed, L])
            seq, states = sample_with_states(h, L, rng)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                est = hmm_learn(seq, args.M, params)
            ref.append(known_state_error(h, seq, states))
            if not est.ok:
                continue
            t_err.append(abs(est.t_hat - args.t))
            e_err.append(emission_error(est.p_hat, est.q_hat, h.p, h.q))
            d = h.p - h.q
            cos.append(abs(est.delta_hat @ d) / (np.linalg.norm(est.delta_hat) * np.linalg.norm(d) + 1e-300))
        med = lambda v: float(np.median(v)) if v else float("nan")  # noqa: E731
        print(f"{L:9d} {len(t_err):4d} {med(t_err):8.4f} {med(e_err):8.3f} {med(ref):8.3f} {med(cos):10.3f}")


if __name__ == "__main__":
    main()
