"""Foreground-background merging (FAME) for video clips."""
from .clip import (
    Clip,
    Frame,
    export_frames,
    import_frames,
    load_clip,
    save_clip,
    temporal_average,
)
from .errors import (
    ClipFormatError,
    ClipLengthError,
    ClipRangeError,
    FameError,
    PreconditionError,
    ShapeError,
    TrainingError,
)
from .foreground import (
    ColorModel,
    binarize,
    fame_mask,
    foreground_likelihood,
    sample_color_model,
    seed_region,
    soft_mask,
    variant_mask,
)
from .merge import AugmentConfig, BatchAssignment, assign_backgrounds, fame_augment_batch, merge

__version__ = "0.1.0"
