from .encoder import EncoderParams, encode, encode_batch
from .loss import cosine_sim, info_nce, info_nce_grad, symmetric_info_nce
from .probe import (
    ProbeMetrics,
    ProbeSuiteConfig,
    evaluate_retrieval,
    recall_at_k,
    run_probe_suite,
    train_probe,
)
from .synthetic import LabeledClip, SynthConfig, generate_synthetic
