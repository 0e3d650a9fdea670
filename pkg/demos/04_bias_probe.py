# Does merging move the encoder from backgrounds to motion?
#
# Three encoders are trained on the same synthetic videos: plain temporal
# pairs, pairs merged onto a shifted window of the same video, and pairs
# merged onto other videos. Retrieval on held-out videos then asks which
# label each embedding's nearest neighbour shares. Takes under a minute.

# %%
from fame.contrastive.probe import ProbeSuiteConfig, run_probe_suite

result = run_probe_suite(ProbeSuiteConfig())
for name, m in result["runs"].items():
    print(f"{name:>5}: motion R@1 {m['motion_recall_at_1']:.3f}   background R@1 {m['background_recall_at_1']:.3f}"
          f"   loss {m['loss_history'][0]:.2f} -> {m['loss_history'][-1]:.2f}")

# %%
print(result["summary"])
