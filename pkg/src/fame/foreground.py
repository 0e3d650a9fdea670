"""Unsupervised foreground discovery from frame differences and color statistics.

Pipeline for one clip::

    seed  = seed_region(clip)                 # (H, W) motion magnitude
    avg   = temporal_average(clip)            # clip viewed as one image
    model = sample_color_model(avg, seed)     # fg/bg color histograms
    soft  = soft_mask(avg, model)             # P(F | color) per pixel
    mask  = binarize(soft, beta)              # top round(beta*H*W) pixels

Masks are plain numpy arrays: seed and soft masks are float64 ``(H, W)``,
binary masks are uint8 ``(H, W)`` holding 0/1. Every ranking step breaks ties
by ascending row-major pixel index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clip import Clip, Frame, quantize_u8, temporal_average, write_pgm
from .errors import PreconditionError, ShapeError

DEFAULT_BINS = 16
DEFAULT_FG_FRAC = 0.5
DEFAULT_BG_FRAC = 0.1
GRID_SIDE = 4
METHODS = ("fame", "gauss", "seed", "grid")


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def top_count(beta: float, h: int, w: int) -> int:
    """Number of foreground pixels for portion *beta* of an ``h x w`` mask."""
    return round_half_up(beta * h * w)


def rank_descending(values: np.ndarray) -> np.ndarray:
    """Flat indices sorted by value, largest first, ties by ascending index."""
    return np.argsort(-np.asarray(values, dtype=np.float64).ravel(), kind="stable")


def seed_region(clip: Clip) -> np.ndarray:
    """Mean absolute frame difference summed over channels.

    ``S[i, j] = sum_c sum_t |X[c, t+1, i, j] - X[c, t, i, j]| / (T - 1)``
    """
    if clip.T < 2:
        raise PreconditionError("seed region requires at least two frames")
    x = clip.data
    acc = np.zeros((clip.H, clip.W), dtype=np.float64)
    # accumulate in (c, t) order so the result is reproducible bit for bit
    for c in range(clip.C):
        diffs = np.abs(np.diff(x[c].astype(np.float64), axis=0))
        for d in diffs:
            acc += d
    return acc / (clip.T - 1)


def quantize_colors(image: np.ndarray, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Joint color index per pixel of a ``(C, H, W)`` image in ``[0, 1]``.

    Each channel is cut into *bins* equal bins (1.0 lands in the last one);
    the index is ``sum_c bin_c * bins**(C - 1 - c)``.
    """
    image = np.asarray(image, dtype=np.float64)
    per_channel = np.minimum(np.floor(image * bins), bins - 1).astype(np.int64)
    index = np.zeros(image.shape[1:], dtype=np.int64)
    for c in range(image.shape[0]):
        index = index * bins + per_channel[c]
    return index


@dataclass(frozen=True, eq=False)
class ColorModel:
    """Quantized color histograms of the foreground and background samples."""

    bins: int
    channels: int
    fg_hist: np.ndarray
    bg_hist: np.ndarray
    shape: tuple | None = field(default=None)

    def __post_init__(self):
        n = self.bins ** self.channels
        for name in ("fg_hist", "bg_hist"):
            hist = np.asarray(getattr(self, name), dtype=np.int64)
            if hist.shape != (n,):
                raise ShapeError(f"{name} must have {n} entries, got {hist.shape}")
            if np.any(hist < 0):
                raise PreconditionError(f"{name} counts must be nonnegative")
            hist.flags.writeable = False
            object.__setattr__(self, name, hist)

    @property
    def fg_total(self) -> int:
        return int(self.fg_hist.sum())

    @property
    def bg_total(self) -> int:
        return int(self.bg_hist.sum())

    @property
    def num_colors(self) -> int:
        return self.bins ** self.channels

    def likelihood_table(self) -> np.ndarray:
        """``P(F | x)`` for every quantized color ``x``; unseen colors get 0.5."""
        p_f = self.fg_hist / self.fg_total if self.fg_total else np.zeros(self.num_colors)
        p_b = self.bg_hist / self.bg_total if self.bg_total else np.zeros(self.num_colors)
        denom = p_f + p_b
        table = np.full(self.num_colors, 0.5)
        seen = denom > 0
        table[seen] = p_f[seen] / denom[seen]
        return table


def sample_color_model(
    avg: Frame,
    seed: np.ndarray,
    fg_frac: float = DEFAULT_FG_FRAC,
    bg_frac: float = DEFAULT_BG_FRAC,
    bins: int = DEFAULT_BINS,
) -> ColorModel:
    """Histogram the colors of the top *fg_frac* and bottom *bg_frac* seed pixels."""
    seed = np.asarray(seed)
    h, w = seed.shape
    if (avg.H, avg.W) != (h, w):
        raise ShapeError(f"frame is {avg.H}x{avg.W} but seed map is {h}x{w}")
    if not (fg_frac > 0 and bg_frac > 0 and fg_frac + bg_frac <= 1):
        raise PreconditionError(
            f"need 0 < fg_frac, 0 < bg_frac and fg_frac + bg_frac <= 1, got {fg_frac}, {bg_frac}"
        )
    if bins < 1:
        raise PreconditionError(f"bins must be positive, got {bins}")
    n_fg = top_count(fg_frac, h, w)
    n_bg = top_count(bg_frac, h, w)
    if n_fg < 1 or n_bg < 1:
        raise PreconditionError(
            f"empty color sample: {n_fg} foreground / {n_bg} background pixels of {h * w}"
        )
    order = rank_descending(seed)
    colors = quantize_colors(avg.data, bins).ravel()
    n_colors = bins ** avg.C
    fg_hist = np.bincount(colors[order[:n_fg]], minlength=n_colors)
    bg_hist = np.bincount(colors[order[h * w - n_bg:]], minlength=n_colors)
    return ColorModel(bins, avg.C, fg_hist, bg_hist, shape=(h, w))


def foreground_likelihood(model: ColorModel, color_index: int) -> float:
    """``P(x|F) / (P(x|F) + P(x|B))`` for one quantized color, 0.5 if unseen."""
    if not 0 <= color_index < model.num_colors:
        raise PreconditionError(f"color index {color_index} out of range [0, {model.num_colors})")
    p_f = model.fg_hist[color_index] / model.fg_total if model.fg_total else 0.0
    p_b = model.bg_hist[color_index] / model.bg_total if model.bg_total else 0.0
    if p_f + p_b == 0:
        return 0.5
    return float(p_f / (p_f + p_b))


def soft_mask(avg: Frame, model: ColorModel) -> np.ndarray:
    if model.shape is not None and (avg.H, avg.W) != tuple(model.shape):
        raise ShapeError(f"frame is {avg.H}x{avg.W} but color model was sampled on {model.shape}")
    if avg.C != model.channels:
        raise ShapeError(f"frame has {avg.C} channels, color model {model.channels}")
    return model.likelihood_table()[quantize_colors(avg.data, model.bins)]


def binarize(soft: np.ndarray, beta: float) -> np.ndarray:
    """Set exactly ``round(beta * H * W)`` of the largest entries to 1."""
    soft = np.asarray(soft)
    h, w = soft.shape
    if not 0 < beta <= 1:
        raise PreconditionError(f"beta must be in (0, 1], got {beta}")
    k = top_count(beta, h, w)
    if k < 1:
        raise PreconditionError(f"beta={beta} selects no pixels of a {h}x{w} mask")
    mask = np.zeros(h * w, dtype=np.uint8)
    mask[rank_descending(soft)[:k]] = 1
    return mask.reshape(h, w)


def gaussian_prior(h: int, w: int) -> np.ndarray:
    """Centered 2-D Gaussian with sigma = (H/4, W/4)."""
    i = (np.arange(h) - (h - 1) / 2) ** 2 / (2 * (h / 4) ** 2)
    j = (np.arange(w) - (w - 1) / 2) ** 2 / (2 * (w / 4) ** 2)
    return np.exp(-(i[:, None] + j[None, :]))


def grid_edges(n: int, parts: int = GRID_SIDE) -> list[int]:
    return [k * n // parts for k in range(parts + 1)]


def grid_mask(seed: np.ndarray, beta: float, side: int = GRID_SIDE) -> np.ndarray:
    """Keep the ``round(beta * side**2)`` grid cells with the largest seed sums."""
    seed = np.asarray(seed)
    h, w = seed.shape
    if h < side or w < side:
        raise PreconditionError(f"grid variant needs at least {side}x{side} pixels, got {h}x{w}")
    if not 0 < beta <= 1:
        raise PreconditionError(f"beta must be in (0, 1], got {beta}")
    k = round_half_up(beta * side * side)
    if k < 1:
        raise PreconditionError(f"beta={beta} selects no grid cells")
    rows, cols = grid_edges(h, side), grid_edges(w, side)
    sums = np.array([
        [seed[rows[a]:rows[a + 1], cols[b]:cols[b + 1]].sum() for b in range(side)]
        for a in range(side)
    ])
    mask = np.zeros((h, w), dtype=np.uint8)
    for cell in rank_descending(sums)[:k]:
        a, b = divmod(int(cell), side)
        mask[rows[a]:rows[a + 1], cols[b]:cols[b + 1]] = 1
    return mask


def fame_mask(
    clip: Clip,
    beta: float,
    bins: int = DEFAULT_BINS,
    fg_frac: float = DEFAULT_FG_FRAC,
    bg_frac: float = DEFAULT_BG_FRAC,
) -> np.ndarray:
    """Binary foreground mask for *clip*, shared by all of its frames."""
    seed = seed_region(clip)
    avg = temporal_average(clip)
    model = sample_color_model(avg, seed, fg_frac, bg_frac, bins)
    return binarize(soft_mask(avg, model), beta)


def variant_mask(clip: Clip, method: str, beta: float, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Foreground mask by *method*: ``fame``, ``gauss``, ``seed`` or ``grid``."""
    if method == "fame":
        return fame_mask(clip, beta, bins)
    if method == "gauss":
        return binarize(gaussian_prior(clip.H, clip.W), beta)
    if method == "seed":
        return binarize(seed_region(clip), beta)
    if method == "grid":
        return grid_mask(seed_region(clip), beta)
    raise ValueError(f"unknown mask method {method!r}; choose from {METHODS}")


def save_mask(path, mask: np.ndarray) -> None:
    """Write a binary mask as P5 with 0 / 255."""
    write_pgm(path, np.asarray(mask, dtype=np.uint8) * 255)


def save_soft_mask(path, soft: np.ndarray) -> None:
    write_pgm(path, quantize_u8(soft))
