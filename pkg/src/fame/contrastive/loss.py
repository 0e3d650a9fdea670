"""InfoNCE with hand-derived gradients.

For a query ``q`` and keys ``k`` with cosine similarities ``s_k``::

    L = -log sum_{pos} exp(s_k / tau) + log sum_{all} exp(s_k / tau)
    dL/ds_k = (softmax_all(s / tau)_k - [k in pos] * softmax_pos(s / tau)_k) / tau

and the cosine Jacobians ``ds/dq = (k_hat - s q_hat) / |q|``,
``ds/dk = (q_hat - s k_hat) / |k|``.
"""
from __future__ import annotations

import numpy as np
from scipy.special import logsumexp, softmax

from ..errors import PreconditionError

DEFAULT_TAU = 0.1


def _norm(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise PreconditionError("cosine similarity is undefined for a zero vector")
    return n


def cosine_sim(q, k) -> float:
    q = np.asarray(q, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    s = float(q @ k / (_norm(q)[0] * _norm(k)[0]))
    return min(1.0, max(-1.0, s))


def _keys(positives, negatives, dim):
    pos = np.asarray(positives, dtype=np.float64).reshape(-1, dim)
    neg = np.asarray(negatives, dtype=np.float64).reshape(-1, dim)
    if len(pos) == 0:
        raise PreconditionError("InfoNCE needs at least one positive key")
    return pos, neg


def _similarities(q, keys):
    qn = _norm(q)[0]
    kn = _norm(keys) if len(keys) else np.ones((0, 1))
    q_hat = q / qn
    k_hat = keys / kn
    return k_hat @ q_hat, q_hat, k_hat, qn, kn


def _check_tau(tau):
    if not tau > 0:
        raise PreconditionError(f"temperature must be positive, got {tau}")


def info_nce(q, positives, negatives, tau: float = DEFAULT_TAU) -> float:
    """``-log(sum_pos exp(sim/tau) / sum_all exp(sim/tau))``."""
    _check_tau(tau)
    q = np.asarray(q, dtype=np.float64)
    pos, neg = _keys(positives, negatives, q.shape[-1])
    if len(neg) == 0:
        return 0.0
    s, *_ = _similarities(q, np.vstack([pos, neg]))
    logits = s / tau
    return float(logsumexp(logits) - logsumexp(logits[: len(pos)]))


def info_nce_grad(q, positives, negatives, tau: float = DEFAULT_TAU):
    """Gradients of :func:`info_nce` w.r.t. ``q``, each positive and each negative.

    Returns ``(grad_q, grad_pos, grad_neg)`` shaped like the inputs.
    """
    _check_tau(tau)
    q = np.asarray(q, dtype=np.float64)
    pos, neg = _keys(positives, negatives, q.shape[-1])
    if len(neg) == 0:
        return np.zeros_like(q), np.zeros_like(pos), np.zeros_like(neg)
    keys = np.vstack([pos, neg])
    s, q_hat, k_hat, qn, kn = _similarities(q, keys)
    logits = s / tau
    ds = softmax(logits)
    ds[: len(pos)] -= softmax(logits[: len(pos)])
    ds /= tau
    grad_q = (ds @ k_hat - (ds @ s) * q_hat) / qn
    grad_k = ds[:, None] * (q_hat[None, :] - s[:, None] * k_hat) / kn
    return grad_q, grad_k[: len(pos)], grad_k[len(pos):]


def symmetric_info_nce(embeddings: np.ndarray, tau: float = DEFAULT_TAU):
    """Mean InfoNCE over a batch of positive pairs, each view querying the other.

    *embeddings* is ``(2N, D)``: rows ``i`` and ``i + N`` are the two views of
    video ``i``. For the query at row ``m`` the positive is its partner row and
    the negatives are all ``2N - 2`` views of the other videos. Returns
    ``(loss, grad)`` with ``grad`` the gradient w.r.t. *embeddings*.
    """
    _check_tau(tau)
    e = np.asarray(embeddings, dtype=np.float64)
    m, _ = e.shape
    if m % 2 or m < 4:
        raise PreconditionError(f"need two views for each of at least 2 videos, got {m} rows")
    n = m // 2
    norms = _norm(e)
    e_hat = e / norms
    sims = e_hat @ e_hat.T
    logits = sims / tau
    np.fill_diagonal(logits, -np.inf)
    partner = np.concatenate([np.arange(n, m), np.arange(n)])
    rows = np.arange(m)
    lse = logsumexp(logits, axis=1)
    loss = float(np.mean(lse - logits[rows, partner]))

    g = np.exp(logits - lse[:, None])  # softmax over j != m; diagonal is exactly 0
    g[rows, partner] -= 1.0
    g /= tau * m
    d_hat = (g + g.T) @ e_hat
    grad = (d_hat - e_hat * np.sum(e_hat * d_hat, axis=1, keepdims=True)) / norms
    return loss, grad
