# The contrastive objective and its gradient
#
# A query should be closer to its positive than to any negative; the loss
# is a softmax cross-entropy over cosine similarities divided by tau.

# %%
import numpy as np

from fame.contrastive.loss import cosine_sim, info_nce, info_nce_grad

q = np.array([1.0, 0.0])
print("sims (1, 0) at tau=1:", round(info_nce(q, [[1.0, 0.0]], [[0.0, 1.0]], tau=1.0), 5))
for tau in (1.0, 0.5, 0.1):
    print(f"tau={tau}: loss {info_nce(q, [[0.9, 0.1]], [[0.1, 0.9], [-1.0, 0.2]], tau):.5f}")

# %%
# Check the analytic gradient against central differences.
rng = np.random.default_rng(0)
q, pos, neg = rng.normal(size=5), rng.normal(size=(1, 5)), rng.normal(size=(3, 5))
gq, _, _ = info_nce_grad(q, pos, neg, 0.1)
fd = np.array([(info_nce(q + e, pos, neg, 0.1) - info_nce(q - e, pos, neg, 0.1)) / 2e-5
               for e in np.eye(5) * 1e-5])
print("max |analytic - numeric|:", np.abs(gq - fd).max())
print("gradient is orthogonal to q:", abs(cosine_sim(gq, q)) < 1e-8)
