import numpy as np
import pytest

from probmat import io
from probmat.estimator import EstimatorParams, recover
from probmat.models import (
    CountMatrix,
    exact_counts,
    generate_sbm_model,
    generate_topic_model,
    hmm_sample_sequence,
    sample_batches,
    sample_counts,
    uniform_disjoint_hmm,
)


def test_model_round_trip(tmp_path):
    m = generate_topic_model(12, 3, [0.2, 0.3, 0.5], seed=2)
    io.save_model(tmp_path / "m.json", m)
    back = io.load_model(tmp_path / "m.json")
    assert np.array_equal(back.P, m.P) and np.array_equal(back.W, m.W)
    assert back.family == "topic" and back.params == m.params


def test_hmm_round_trip(tmp_path):
    h = uniform_disjoint_hmm(6, 0.3)
    io.save_hmm(tmp_path / "h.json", h)
    back = io.load_hmm(tmp_path / "h.json")
    assert back.t == h.t and np.array_equal(back.p, h.p)
    with pytest.raises(ValueError):
        io.load_model(tmp_path / "h.json")


def test_counts_round_trip(tmp_path):
    C = sample_counts(generate_sbm_model(20, 2, 4, 1), 700, seed=1, batch_id=2)
    io.save_counts(tmp_path / "c.coo", C)
    text = (tmp_path / "c.coo").read_text().splitlines()
    assert text[0] == "20 700 poisson 2"
    assert len(text) == 1 + C.vals.size
    back = io.load_counts(tmp_path / "c.coo")
    assert np.array_equal(back.to_dense(), C.to_dense())
    assert (back.nominal_N, back.scheme, back.batch_id) == (700, "poisson", 2)


def test_exact_counts_round_trip(tmp_path):
    C = exact_counts(generate_sbm_model(6, 2, 3, 1), 1000.5)
    io.save_counts(tmp_path / "e.coo", C)
    back = io.load_counts(tmp_path / "e.coo")
    np.testing.assert_array_equal(back.to_dense(), C.to_dense())
    assert back.nominal_N == 1000.5


def test_empty_counts_round_trip(tmp_path):
    C = CountMatrix(4, [], [], [], 10)
    io.save_counts(tmp_path / "z.coo", C)
    assert io.load_counts(tmp_path / "z.coo").total == 0


def test_bad_header(tmp_path):
    (tmp_path / "bad.coo").write_text("4 10\n0 0 1\n")
    with pytest.raises(ValueError):
        io.load_counts(tmp_path / "bad.coo")


def test_sequence_round_trip(tmp_path):
    seq = hmm_sample_sequence(uniform_disjoint_hmm(10, 0.2), 300, seed=4)
    io.save_sequence(tmp_path / "s.txt", seq)
    assert np.array_equal(io.load_sequence(tmp_path / "s.txt"), seq)


def test_estimate_round_trip(tmp_path):
    m = generate_sbm_model(40, 2, 4, 1)
    est = recover(*sample_batches(m, 40 * 200, seed=0), EstimatorParams(R=2, k0_override=1))
    io.save_estimate(tmp_path / "e.json", est)
    back = io.load_estimate(tmp_path / "e.json")
    np.testing.assert_array_equal(back.dense(), est.dense())
    assert np.array_equal(back.excluded, est.excluded)
