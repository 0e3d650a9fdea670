# Pasting a clip's foreground onto another clip's background
#
# The merged clip keeps the motion of its source and takes every other
# pixel from a donor, either another video (inter) or a shifted window of
# the same video (intra).

# %%
import numpy as np

from fame.contrastive.synthetic import SynthConfig, generate_synthetic
from fame.foreground import fame_mask
from fame.merge import AugmentConfig, assign_backgrounds, fame_augment_batch, merge

videos = generate_synthetic(SynthConfig(num_videos=8, rng_seed=2))
a, b = videos[0].clip, videos[5].clip
print("labels (motion, background):", (videos[0].motion_label, videos[0].background_label),
      (videos[5].motion_label, videos[5].background_label))

# %%
mask = fame_mask(a, 0.2)
out = merge(a, b, mask)
sel = mask.astype(bool)
print("inside the mask equals the source:", np.array_equal(out.data[:, :, sel], a.data[:, :, sel]))
print("outside equals the donor:", np.array_equal(out.data[:, :, ~sel], b.data[:, :, ~sel]))

# %%
# Donors for a batch: a derangement, so no clip keeps its own background.
rng = np.random.default_rng(0)
for _ in range(3):
    print(assign_backgrounds(6, "inter", rng).permutation)

# %%
clips = [v.clip for v in videos]
pairs = fame_augment_batch(clips, AugmentConfig(beta=0.2, rng_seed=3))
changed = [float(np.mean(p[0].data != c.data)) for p, c in zip(pairs, clips)]
print("fraction of values replaced per clip:", np.round(changed, 2))
