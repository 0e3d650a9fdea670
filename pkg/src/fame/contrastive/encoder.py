"""Two-layer MLP clip encoder with a manual backward pass.

``clip -> 2x avg-pool (T, H, W) -> flatten -> affine -> relu -> affine -> l2-normalize``
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..clip import Clip

HIDDEN = 128
EMBED = 32
INPUT_CENTER = 0.5

# how many times encode() hit a zero pre-normalization vector
fallback_count = 0


@dataclass
class EncoderParams:
    w1: np.ndarray  # (hidden, d_in)
    b1: np.ndarray
    w2: np.ndarray  # (embed, hidden)
    b2: np.ndarray

    NAMES = ("w1", "b1", "w2", "b2")

    @classmethod
    def init(cls, d_in: int, rng: np.random.Generator, hidden: int = HIDDEN, embed: int = EMBED):
        return cls(
            w1=rng.normal(0.0, np.sqrt(2.0 / d_in), (hidden, d_in)),
            b1=np.zeros(hidden),
            w2=rng.normal(0.0, np.sqrt(1.0 / hidden), (embed, hidden)),
            b2=np.zeros(embed),
        )

    def arrays(self):
        return [getattr(self, n) for n in self.NAMES]

    def copy(self) -> "EncoderParams":
        return EncoderParams(*(a.copy() for a in self.arrays()))

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def with_flat(self, v: np.ndarray) -> "EncoderParams":
        out, i = [], 0
        for a in self.arrays():
            out.append(np.asarray(v[i:i + a.size], dtype=np.float64).reshape(a.shape))
            i += a.size
        return EncoderParams(*out)

    def equals(self, other: "EncoderParams") -> bool:
        return all(np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays()))


def pool2(data: np.ndarray) -> np.ndarray:
    """2x average pooling over the last three axes (T, H, W); odd remainders are dropped."""
    *lead, t, h, w = data.shape
    t2, h2, w2 = t // 2, h // 2, w // 2
    x = np.asarray(data, dtype=np.float64)[..., : 2 * t2, : 2 * h2, : 2 * w2]
    x = x.reshape(*lead, t2, 2, h2, 2, w2, 2)
    return x.mean(axis=(-5, -3, -1))


def features(clips) -> np.ndarray:
    """``(n, d_in)`` design matrix for a sequence of clips or ``(n, C, T, H, W)`` array."""
    if isinstance(clips, np.ndarray):
        arr = clips
    else:
        arr = np.stack([c.data if isinstance(c, Clip) else np.asarray(c) for c in clips])
    pooled = pool2(arr)
    # centering the [0, 1] pixels keeps the hidden layer from starting saturated
    return pooled.reshape(len(pooled), -1) - INPUT_CENTER


def feature_dim(c: int, t: int, h: int, w: int) -> int:
    return c * (t // 2) * (h // 2) * (w // 2)


def forward(params: EncoderParams, x: np.ndarray):
    """Embed rows of *x*; returns ``(embeddings, cache)`` for :func:`backward`."""
    global fallback_count
    pre = x @ params.w1.T + params.b1
    act = np.maximum(pre, 0.0)
    z = act @ params.w2.T + params.b2
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    zero = norms[:, 0] == 0
    if np.any(zero):
        fallback_count += int(zero.sum())
        z = z.copy()
        z[zero] = 0.0
        z[zero, 0] = 1.0
        norms[zero] = 1.0
    e = z / norms
    return e, (x, pre, act, e, norms, zero)


def backward(params: EncoderParams, cache, grad_e: np.ndarray) -> EncoderParams:
    """Parameter gradients given the gradient w.r.t. the unit embeddings."""
    x, pre, act, e, norms, zero = cache
    grad_z = (grad_e - e * np.sum(e * grad_e, axis=1, keepdims=True)) / norms
    grad_z[zero] = 0.0  # the fallback embedding is constant
    grad_act = grad_z @ params.w2
    grad_pre = grad_act * (pre > 0)
    return EncoderParams(
        w1=grad_pre.T @ x,
        b1=grad_pre.sum(axis=0),
        w2=grad_z.T @ act,
        b2=grad_z.sum(axis=0),
    )


def encode(params: EncoderParams, clip: Clip) -> np.ndarray:
    """Unit-norm embedding of one clip."""
    e, _ = forward(params, features([clip]))
    return e[0]


def encode_batch(params: EncoderParams, clips) -> np.ndarray:
    e, _ = forward(params, features(clips))
    return e
