"""Foreground/background compositing and batch-level background shuffling."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from .clip import Clip, as_clip
from .errors import PreconditionError, ShapeError
from .foreground import DEFAULT_BINS, fame_mask

BACKGROUND_MODES = ("inter", "intra")
BRANCHES = ("single", "both")
_AXES = ("C", "T", "H", "W")


@dataclass(frozen=True)
class AugmentConfig:
    beta: float = 0.5
    bins: int = DEFAULT_BINS
    background_mode: str = "inter"
    branches: str = "single"
    intra_offset: int = 4
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise PreconditionError(f"beta must be in (0, 1], got {self.beta}")
        if self.background_mode not in BACKGROUND_MODES:
            raise PreconditionError(
                f"background_mode must be one of {BACKGROUND_MODES}, got {self.background_mode!r}"
            )
        if self.branches not in BRANCHES:
            raise PreconditionError(f"branches must be one of {BRANCHES}, got {self.branches!r}")
        if self.bins < 1:
            raise PreconditionError(f"bins must be positive, got {self.bins}")
        if not 0 <= self.rng_seed < 2**64:
            raise PreconditionError("rng_seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "AugmentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise PreconditionError(f"unknown augment config keys: {unknown}")
        return cls(**d)


@dataclass(frozen=True)
class BatchAssignment:
    """``permutation[i]`` is the index of the clip donating background to clip ``i``."""

    permutation: tuple[int, ...]

    def __len__(self):
        return len(self.permutation)

    def __getitem__(self, i):
        return self.permutation[i]


def _check_same_shape(a: Clip, b: Clip) -> None:
    for axis, m, n in zip(_AXES, a.shape, b.shape):
        if m != n:
            raise ShapeError(f"clips disagree on axis {axis}: {m} vs {n}")


def merge_arrays(fg: np.ndarray, bg: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask.astype(bool)[None, None], fg, bg)


def merge(fg: Clip, bg: Clip, mask: np.ndarray) -> Clip:
    """Foreground pixels where ``mask == 1``, background pixels elsewhere.

    The ``(H, W)`` mask is broadcast over channels and frames.
    """
    _check_same_shape(fg, bg)
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ShapeError(f"mask must be 2-D, got shape {mask.shape}")
    for axis, m, n in zip(("H", "W"), mask.shape, (fg.H, fg.W)):
        if m != n:
            raise ShapeError(f"mask disagrees with clips on axis {axis}: {m} vs {n}")
    return Clip(merge_arrays(fg.data, bg.data, mask))


def random_derangement(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform permutation of ``range(n)`` without fixed points (rejection sampling)."""
    if n < 2:
        raise PreconditionError(f"a derangement needs at least 2 elements, got {n}")
    idx = np.arange(n)
    while True:
        perm = rng.permutation(n)
        if not np.any(perm == idx):
            return perm


def assign_backgrounds(n: int, mode: str, rng: np.random.Generator) -> BatchAssignment:
    if n < 1:
        raise PreconditionError(f"batch size must be positive, got {n}")
    if mode == "intra":
        return BatchAssignment(tuple(range(n)))
    if mode == "inter":
        if n < 2:
            raise PreconditionError("inter-video backgrounds need a batch of at least 2 clips")
        return BatchAssignment(tuple(int(p) for p in random_derangement(n, rng)))
    raise PreconditionError(f"unknown background mode {mode!r}")


def shift_window(clip: Clip, offset: int) -> np.ndarray:
    """Frames ``t + offset`` (mod T) of *clip*."""
    return np.roll(clip.data, -offset, axis=1)


def _merged_views(
    views: Sequence[Clip], masks: Sequence[np.ndarray], config: AugmentConfig, rng
) -> list[Clip]:
    assignment = assign_backgrounds(len(views), config.background_mode, rng)
    out = []
    for i, (view, mask) in enumerate(zip(views, masks)):
        if config.background_mode == "intra":
            donor = shift_window(view, config.intra_offset)
        else:
            donor = views[assignment[i]].data
        out.append(Clip(merge_arrays(view.data, donor, mask)))
    return out


def fame_augment_batch(
    clips: Sequence[Clip],
    config: AugmentConfig,
    partners: Sequence[Clip] | None = None,
    rng: np.random.Generator | None = None,
) -> list[tuple[Clip, Clip]]:
    """Build a positive pair per clip with foreground/background merging.

    View one is ``clips[i]``; view two is ``partners[i]`` (another temporal
    window of the same video) or the clip itself when no partners are given.
    With ``branches="single"`` only view one is merged; with ``"both"`` view
    two is merged too, using an independently drawn donor. Donor pixels are
    copied raw, including whatever moves in them.
    """
    clips = [as_clip(c) for c in clips]
    if not clips:
        return []
    for c in clips[1:]:
        _check_same_shape(clips[0], c)
    if clips[0].T < 2:
        raise PreconditionError("foreground merging requires clips of at least two frames")
    if partners is None:
        partners = clips
    else:
        partners = [as_clip(p) for p in partners]
        if len(partners) != len(clips):
            raise ShapeError(f"got {len(partners)} partner views for {len(clips)} clips")
        for p in partners:
            _check_same_shape(clips[0], p)
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)

    masks = [fame_mask(c, config.beta, config.bins) for c in clips]
    first = _merged_views(clips, masks, config, rng)
    if config.branches == "single":
        second = list(partners)
    else:
        if partners is clips:
            partner_masks = masks
        else:
            partner_masks = [fame_mask(p, config.beta, config.bins) for p in partners]
        second = _merged_views(partners, partner_masks, config, rng)
    return list(zip(first, second))
