"""SBM with Zipf-distributed word weights: where marginal rescaling matters.

    python scripts/heavy_tail_demo.py --exponent 1.0 --ratios 10 50 200
"""
import argparse
import warnings

import numpy as np

from probmat.estimator import EstimatorParams, baseline_naive, baseline_scaled, l1_error, recover
from probmat.models import ProbabilityModel, sample_batches


def zipf_sbm(M, exponent, alpha=4.0, beta=1.0):
    half = M // 2
    w = 1.0 / np.arange(1, half + 1) ** exponent
    w /= w.sum()
    P = np.zeros((M, 2))
    P[:half, 0] = w
    P[half:, 1] = w
    W = np.array([[alpha, beta], [beta, alpha]]) / (2 * (alpha + beta))
    return ProbabilityModel(M, 2, P, W, family="sbm", psd_w=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--M", type=int, default=400)
    ap.add_argument("--exponent", type=float, default=1.0)
    ap.add_argument("--ratios", type=float, nargs="+", default=[10, 50, 200], help="N / M values")
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()

    model = zipf_sbm(args.M, args.exponent)
    params = EstimatorParams(R=2, w_min=model.w_min, k0_override=1)
    print(f"{'N/M':>6} {'naive':>8} {'scaled':>8} {'recover':>8}")
    for ratio in args.ratios:
        errs = []
        for seed in range(args.seeds):
            C1, C2, C3 = sample_batches(model, int(ratio * args.M), seed=seed)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                errs.append([l1_error(e.dense(), model.B) for e in (
                    baseline_naive(C1, 2), baseline_scaled(C1, C2, 2), recover(C1, C2, C3, params))])
        med = np.median(errs, axis=0)
        print(f"{ratio:6.0f} {med[0]:8.3f} {med[1]:8.3f} {med[2]:8.3f}")


if __name__ == "__main__":
    main()
