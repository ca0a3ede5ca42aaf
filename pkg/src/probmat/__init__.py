"""Low-rank probability matrix recovery from sparse counts."""
from probmat.estimator import (
    EstimatorParams,
    baseline_naive,
    baseline_scaled,
    l1_error,
    recover,
)
from probmat.hmm import hmm_learn
from probmat.models import (
    CountMatrix,
    HmmModel,
    ProbabilityModel,
    generate_sbm_model,
    generate_topic_model,
    hmm_bigram_model,
    hmm_sample_sequence,
    sample_batches,
    sample_counts,
)

__version__ = "0.1.0"
