"""Labeled toy videos: a bright square moving over a static striped background.

The background is large, static and specific to its class, the motion cue is
a small square, so a contrastive encoder left to itself matches backgrounds.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..clip import Clip
from ..errors import PreconditionError

_BACKGROUND_SALT = 0x5EED_BA5E


@dataclass(frozen=True)
class SynthConfig:
    num_videos: int = 200
    num_motion_classes: int = 4
    num_background_classes: int = 8
    channels: int = 3
    frames: int = 8          # clip length fed to the encoder
    extra_frames: int = 4    # video length is frames + extra_frames
    height: int = 32
    width: int = 32
    object_size: int = 6
    speed: int = 2           # pixels per frame
    start_spread: int = 16   # side of the centered box the square starts in
    phase_jitter: float = 0.15
    contrast_jitter: float = 0.5     # per-video background gain in 1 +- this
    brightness_jitter: float = 0.15  # per-video background offset in +- this
    rng_seed: int = 7

    def __post_init__(self):
        if self.num_motion_classes < 2 or self.num_background_classes < 2:
            raise PreconditionError("need at least two motion and two background classes")
        if self.channels not in (1, 3):
            raise PreconditionError(f"channels must be 1 or 3, got {self.channels}")
        if not 0 < self.object_size < min(self.height, self.width):
            raise PreconditionError("object_size must be positive and smaller than the frame")
        if self.frames < 2 or self.extra_frames < 1:
            raise PreconditionError("need frames >= 2 and extra_frames >= 1")
        if self.num_videos < 1:
            raise PreconditionError("num_videos must be positive")
        if not 0 <= self.contrast_jitter < 1 or self.brightness_jitter < 0 or self.phase_jitter < 0:
            raise PreconditionError("jitters must be nonnegative and contrast_jitter below 1")

    @property
    def video_frames(self) -> int:
        return self.frames + self.extra_frames

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LabeledClip:
    """A full video plus its labels; ``window(offset)`` cuts an encoder clip."""

    video: Clip
    motion_label: int
    background_label: int
    frames: int
    positions: np.ndarray  # (video_frames, 2) top-left corner (row, col) per frame
    object_size: int

    @property
    def clip(self) -> Clip:
        return self.window(0)

    @property
    def num_offsets(self) -> int:
        return self.video.T - self.frames + 1

    def window(self, offset: int) -> Clip:
        return Clip(self.video.data[:, offset:offset + self.frames])

    def footprint(self, offset: int = 0) -> np.ndarray:
        """Boolean ``(H, W)`` union of the square over the frames of one window."""
        h, w = self.video.H, self.video.W
        out = np.zeros((h, w), dtype=bool)
        s = self.object_size
        for r, c in self.positions[offset:offset + self.frames]:
            out[r:r + s, c:c + s] = True
        return out


def motion_directions(n: int) -> np.ndarray:
    """Unit (row, col) velocity per motion class; with 4 classes: up, down, left, right."""
    if n == 4:
        return np.array([[-1, 0], [1, 0], [0, -1], [0, 1]], dtype=np.float64)
    angles = 2 * np.pi * np.arange(n) / n
    return np.stack([-np.sin(angles), np.cos(angles)], axis=1)


def background_params(label: int, channels: int):
    """Class-determined stripe frequency, per-channel mean, amplitude and phase."""
    rng = np.random.default_rng([_BACKGROUND_SALT, label])
    freq = 1 + label % 4 + rng.uniform(0.0, 0.5)
    mean = rng.uniform(0.25, 0.55, channels)
    amp = rng.uniform(0.1, 0.25, channels)
    phase = rng.uniform(0, 2 * np.pi, channels)
    return freq, mean, amp, phase


BACKGROUND_CEILING = 0.9  # keeps the white square's color out of every background


def render_background(
    label: int, channels: int, h: int, w: int, jitter: float = 0.0, gain: float = 1.0, offset: float = 0.0
) -> np.ndarray:
    """``(C, H, W)`` vertical sinusoidal stripes; *jitter* shifts every channel's phase.

    *gain* scales the stripes about the class mean and *offset* shifts them,
    which makes each video's background its own while leaving it perfectly
    correlated with its class. Every row carries the same palette, so any band
    of rows samples all of the background colors.
    """
    freq, mean, amp, phase = background_params(label, channels)
    arg = 2 * np.pi * freq * np.arange(w) / w
    wave = amp[:, None] * np.sin(arg[None] + (phase + jitter)[:, None])
    row = mean[:, None] + offset + gain * wave
    return np.clip(np.repeat(row[:, None, :], h, axis=1), 0.0, BACKGROUND_CEILING)


def _trajectory(rng, direction, length, size, h, w, speed, spread):
    # starts come from one centered box shared by all directions, so a single
    # frame says nothing about the motion class
    start = np.empty(2)
    for axis, extent in ((0, h), (1, w)):
        room = extent - size
        lo = max(0, (room - spread) // 2)
        hi = min(room, lo + spread)
        start[axis] = rng.integers(lo, hi + 1)
    t = np.arange(length)[:, None]
    pos = np.rint(start[None, :] + direction[None, :] * speed * t).astype(int)
    pos[:, 0] = np.clip(pos[:, 0], 0, h - size)
    pos[:, 1] = np.clip(pos[:, 1], 0, w - size)
    return pos


def generate_synthetic(config: SynthConfig) -> list[LabeledClip]:
    """Deterministic labeled dataset; motion label ``i % M``, background ``(i // M) % B``."""
    rng = np.random.default_rng(config.rng_seed)
    directions = motion_directions(config.num_motion_classes)
    m, b = config.num_motion_classes, config.num_background_classes
    h, w, s = config.height, config.width, config.object_size
    out = []
    for i in range(config.num_videos):
        motion = i % m
        background = (i // m) % b
        jitter = rng.uniform(-config.phase_jitter, config.phase_jitter)
        gain = 1 + rng.uniform(-config.contrast_jitter, config.contrast_jitter)
        offset = rng.uniform(-config.brightness_jitter, config.brightness_jitter)
        bg = render_background(background, config.channels, h, w, jitter, gain, offset)
        pos = _trajectory(
            rng, directions[motion], config.video_frames, s, h, w, config.speed, config.start_spread
        )
        video = np.repeat(bg[:, None], config.video_frames, axis=1)
        for t, (r, c) in enumerate(pos):
            video[:, t, r:r + s, c:c + s] = 1.0
        out.append(LabeledClip(Clip(video), motion, background, config.frames, pos, s))
    return out
