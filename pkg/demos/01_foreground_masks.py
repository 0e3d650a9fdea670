# Foreground masks from frame differences and color statistics
#
# A moving white square on a striped background. We look at the seed map,
# the soft foreground likelihood and the binary masks of every method.

# %%
import numpy as np

from fame.clip import temporal_average
from fame.contrastive.synthetic import SynthConfig, generate_synthetic
from fame.foreground import fame_mask, sample_color_model, seed_region, soft_mask, variant_mask

item = generate_synthetic(SynthConfig(num_videos=4, rng_seed=1))[3]  # motion class "right"
clip = item.clip
print("clip shape (C, T, H, W):", clip.shape)

# %%
# The seed map is large wherever pixels change between frames.
seed = seed_region(clip)
print("seed map max / mean:", seed.max().round(3), seed.mean().round(3))
print("rows 8..15, every other column:")
print(np.round(seed[8:16, ::2], 1))

# %%
# Colors of the strongest seed pixels form the foreground histogram, the
# weakest ones the background histogram; their ratio gives a soft mask.
avg = temporal_average(clip)
model = sample_color_model(avg, seed)
soft = soft_mask(avg, model)
print("joint color bins:", model.num_colors, " soft mask range:", soft.min(), soft.max())

# %%
# Binarize at the swept-footprint fraction and compare with the truth.
foot = item.footprint(0)
beta = foot.mean()
mask = fame_mask(clip, beta).astype(bool)
iou = (mask & foot).sum() / (mask | foot).sum()
print(f"beta={beta:.3f}  ones={mask.sum()}  IoU with the true footprint={iou:.3f}")

# %%
for method in ("fame", "gauss", "seed", "grid"):
    m = variant_mask(clip, method, 0.25)
    print(f"{method:>5}: {int(m.sum())} ones, footprint covered {(m.astype(bool) & foot).sum() / foot.sum():.2f}")
