"""Independent oracles and seeded instances shared by unit tests and the acceptance gate."""
import itertools

import numpy as np


def random_projector(rng, n):
    k = int(rng.integers(0, n + 1))
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q[:, :k]
    return Q @ Q.T


def sqrt_perturbation_instance(seed):
    rng = np.random.default_rng([seed, 1])
    n = int(rng.integers(2, 25))
    r = int(rng.integers(1, n + 1))
    U = rng.standard_normal((n, r)) * rng.uniform(0.1, 5.0)
    return U, random_projector(rng, n)


def wedin_instance(seed):
    """Random v with a symmetric E whose norm is 1e-4 to 1 times ||v||^2."""
    rng = np.random.default_rng([seed, 2])
    n = int(rng.integers(2, 30))
    v = rng.standard_normal(n) * rng.uniform(0.1, 3.0)
    G = rng.standard_normal((n, n))
    E = (G + G.T) / 2
    E *= 10 ** rng.uniform(-4, 0) * (v @ v) / np.linalg.norm(E, 2)
    return v, E


def path_sum_moments(t, a, b):
    """P(S), P(SS), P(SSS) of the stationary symmetric chain by summing over hidden paths.

    ``a`` and ``b`` are the probabilities that states 0 and 1 emit into S.
    """
    emit = (a, b)
    out = []
    for length in (1, 2, 3):
        total = 0.0
        for path in itertools.product((0, 1), repeat=length):
            w = 0.5
            for prev, nxt in zip(path, path[1:]):
                w *= t if prev != nxt else 1 - t
            for s in path:
                w *= emit[s]
            total += w
        out.append(total)
    return tuple(out)
