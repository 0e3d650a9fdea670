"""Contrastive training on synthetic videos and the background-bias retrieval probe."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..errors import PreconditionError, TrainingError
from ..merge import AugmentConfig, fame_augment_batch
from .encoder import EncoderParams, backward, feature_dim, features, forward
from .loss import DEFAULT_TAU, symmetric_info_nce
from .synthetic import LabeledClip, SynthConfig, generate_synthetic

log = logging.getLogger(__name__)

TRAIN_FRACTION = 0.8


@dataclass
class ProbeMetrics:
    motion_recall_at_1: float
    background_recall_at_1: float
    loss_history: list = field(default_factory=list)
    config_echo: dict = field(default_factory=dict)
    seed: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def split_dataset(dataset: Sequence[LabeledClip]):
    """First 80% of indices train, the rest evaluate."""
    n_train = int(round(TRAIN_FRACTION * len(dataset)))
    return list(dataset[:n_train]), list(dataset[n_train:])


def recall_at_k(query_emb, key_emb, query_labels, key_labels, k: int = 1) -> float:
    """Fraction of queries whose label appears among the *k* most cosine-similar keys.

    Ties in similarity go to the lower key index.
    """
    q = np.asarray(query_emb, dtype=np.float64)
    kk = np.asarray(key_emb, dtype=np.float64)
    q = q / np.linalg.norm(q, axis=1, keepdims=True)
    kk = kk / np.linalg.norm(kk, axis=1, keepdims=True)
    sims = q @ kk.T
    order = np.argsort(-sims, axis=1, kind="stable")[:, :k]
    key_labels = np.asarray(key_labels)
    hits = key_labels[order] == np.asarray(query_labels)[:, None]
    return float(np.mean(np.any(hits, axis=1)))


def embed_dataset(params: EncoderParams, items: Sequence[LabeledClip]) -> np.ndarray:
    e, _ = forward(params, features([it.clip for it in items]))
    return e


def evaluate_retrieval(
    params: EncoderParams,
    eval_set: Sequence[LabeledClip],
    train_set: Sequence[LabeledClip],
    k: int = 1,
) -> ProbeMetrics:
    """Nearest-neighbour recall of motion and background labels, no augmentation."""
    if not eval_set or not train_set:
        raise PreconditionError("retrieval needs nonempty eval and train sets")
    q = embed_dataset(params, eval_set)
    keys = embed_dataset(params, train_set)
    motion = recall_at_k(
        q, keys, [it.motion_label for it in eval_set], [it.motion_label for it in train_set], k
    )
    background = recall_at_k(
        q, keys, [it.background_label for it in eval_set], [it.background_label for it in train_set], k
    )
    return ProbeMetrics(motion, background)


def _two_offsets(rng: np.random.Generator, n_offsets: int):
    if n_offsets < 2:
        return 0, 0
    a, b = rng.choice(n_offsets, size=2, replace=False)
    return int(a), int(b)


def train_probe(
    dataset: Sequence[LabeledClip],
    aug: AugmentConfig | None = None,
    epochs: int = 30,
    batch_size: int = 16,
    learning_rate: float = 0.05,
    tau: float = DEFAULT_TAU,
    seed: int = 7,
    init: EncoderParams | None = None,
):
    """Train the toy encoder with symmetric InfoNCE and in-batch negatives.

    Each video contributes two temporal windows per step; with *aug* set, the
    pair goes through :func:`fame_augment_batch` first. Returns
    ``(params, metrics)`` where the metrics come from the held-out split and
    ``loss_history`` holds the mean loss of every epoch.
    """
    if batch_size < 2:
        raise PreconditionError("batch_size must be at least 2 for in-batch negatives")
    train, held_out = split_dataset(dataset)
    if len(train) < 2 or not held_out:
        raise PreconditionError(f"dataset of {len(dataset)} videos is too small to split")

    rng = np.random.default_rng(seed)
    first = train[0].clip
    if init is None:
        params = EncoderParams.init(feature_dim(*first.shape), rng)
    else:
        params = init.copy()

    history = []
    step = 0
    for epoch in range(epochs):
        order = rng.permutation(len(train))
        epoch_losses = []
        for start in range(0, len(order), batch_size):
            idx = order[start:start + batch_size]
            if len(idx) < 2:
                continue
            items = [train[i] for i in idx]
            offsets = [_two_offsets(rng, it.num_offsets) for it in items]
            view_a = [it.window(a) for it, (a, _) in zip(items, offsets)]
            view_b = [it.window(b) for it, (_, b) in zip(items, offsets)]
            if aug is not None:
                pairs = fame_augment_batch(view_a, aug, partners=view_b, rng=rng)
                view_a = [p[0] for p in pairs]
                view_b = [p[1] for p in pairs]

            x = features(view_a + view_b)
            emb, cache = forward(params, x)
            loss, grad_e = symmetric_info_nce(emb, tau)
            if not np.isfinite(loss):
                raise TrainingError(step, loss)
            grads = backward(params, cache, grad_e)
            for name in EncoderParams.NAMES:
                getattr(params, name)[...] -= learning_rate * getattr(grads, name)
            if not all(np.all(np.isfinite(a)) for a in params.arrays()):
                raise TrainingError(step, float("nan"))
            epoch_losses.append(loss)
            step += 1
        history.append(float(np.mean(epoch_losses)))
        log.debug("epoch %d loss %.4f", epoch, history[-1])

    metrics = evaluate_retrieval(params, held_out, train)
    metrics.loss_history = history
    metrics.seed = seed
    metrics.config_echo = {
        "augment": None if aug is None else aug.to_dict(),
        "epochs": epochs,
        "batch_size": batch_size,
        "learning_rate": learning_rate,
        "tau": tau,
    }
    return params, metrics


RUN_NAMES = ("off", "intra", "inter")


@dataclass(frozen=True)
class ProbeSuiteConfig:
    """Everything one ``fame probe`` invocation needs; unknown keys are rejected."""

    runs: tuple = RUN_NAMES
    seed: int = 7
    epochs: int = 30
    batch_size: int = 16
    learning_rate: float = 0.05
    tau: float = DEFAULT_TAU
    beta: float = 0.2  # close to the square's swept footprint in the default videos
    bins: int = 16
    branches: str = "single"
    intra_offset: int = 4
    synthetic: dict = field(default_factory=dict)

    def __post_init__(self):
        bad = [r for r in self.runs if r not in RUN_NAMES]
        if bad or not self.runs:
            raise PreconditionError(f"runs must be a nonempty subset of {RUN_NAMES}, got {list(self.runs)}")
        if self.epochs < 1:
            raise PreconditionError(f"epochs must be positive, got {self.epochs}")
        if self.tau <= 0:
            raise PreconditionError(f"tau must be positive, got {self.tau}")
        self.synth_config()  # validates the synthetic block
        self.augment("inter")

    @classmethod
    def from_dict(cls, d: dict) -> "ProbeSuiteConfig":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(d) - known)
        if unknown:
            raise PreconditionError(f"unknown probe config keys: {unknown}")
        d = dict(d)
        if "runs" in d:
            d["runs"] = tuple(d["runs"])
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["runs"] = list(self.runs)
        d["synthetic"] = self.synth_config().to_dict()
        return d

    def synth_config(self) -> SynthConfig:
        extra = sorted(set(self.synthetic) - set(SynthConfig.__dataclass_fields__))
        if extra:
            raise PreconditionError(f"unknown synthetic config keys: {extra}")
        kw = {"rng_seed": self.seed, **self.synthetic}
        return SynthConfig(**kw)

    def augment(self, run: str) -> AugmentConfig | None:
        if run == "off":
            return None
        return AugmentConfig(
            beta=self.beta,
            bins=self.bins,
            background_mode=run,
            branches=self.branches,
            intra_offset=self.intra_offset,
            rng_seed=self.seed,
        )


def run_probe_suite(config: ProbeSuiteConfig | None = None) -> dict:
    """Train one encoder per run on the same data and seed; return metrics plus a summary."""
    config = config or ProbeSuiteConfig()
    dataset = generate_synthetic(config.synth_config())
    runs = {}
    for name in config.runs:
        _, metrics = train_probe(
            dataset,
            config.augment(name),
            epochs=config.epochs,
            batch_size=config.batch_size,
            learning_rate=config.learning_rate,
            tau=config.tau,
            seed=config.seed,
        )
        runs[name] = metrics.to_dict()
    motion = {k: v["motion_recall_at_1"] for k, v in runs.items()}
    background = {k: v["background_recall_at_1"] for k, v in runs.items()}
    summary = {"motion_recall_at_1": motion, "background_recall_at_1": background}
    if "off" in motion:
        summary["background_minus_motion_off"] = round(background["off"] - motion["off"], 9)
        summary["motion_gain_over_off"] = {
            k: round(v - motion["off"], 9) for k, v in motion.items() if k != "off"
        }
    return {"config": config.to_dict(), "runs": runs, "summary": summary}
