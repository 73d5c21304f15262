# %% [markdown]
# # Leaderboard consistency
#
# Seventeen retrievers were scored (nDCG@10) on a human-labeled passage
# set and on generated counterparts built with and without quality
# control. Spearman's rho between the rankings measures agreement.

# %%
import numpy as np

from irsynth.eval import consistency_analysis, robustness_resample, spearman, spearman_permutation_pvalue

human = [48.000, 45.232, 45.119, 44.130, 44.122, 43.787, 43.104, 43.056, 42.553, 42.388,
         42.253, 41.675, 39.787, 39.565, 36.570, 33.637, 26.211]
with_qc = [59.625, 55.260, 54.431, 52.581, 55.513, 59.015, 51.456, 51.438, 51.528, 54.292,
           47.989, 48.102, 51.098, 54.404, 47.127, 42.107, 34.155]
without_qc = [33.434, 32.581, 32.099, 30.870, 33.119, 36.186, 30.471, 30.411, 30.155, 32.067,
              28.579, 30.548, 30.297, 33.286, 29.231, 24.798, 22.582]
models = [f"model-{i:02d}" for i in range(17)]

for name, gen in (("with QC", with_qc), ("without QC", without_qc)):
    rep = consistency_analysis(dict(zip(models, human)), dict(zip(models, gen)))
    perm = spearman_permutation_pvalue(rep.ranks_a, rep.ranks_b, 20_000)
    print(f"{name:<11} rho={rep.rho:.4f}  p(t)={rep.p_value:.2e}  p(perm)={perm:.2e}")

# %% [markdown]
# Robustness: does a 2,000-query sample rank models the same way as the
# full query set? A planted universe of 7,000 noisy per-query scores
# stands in for real runs.

# %%
rng = np.random.default_rng(0)
true = np.linspace(0.47, 0.53, 10)  # closely matched models
per_query = {f"m{m}": {f"q{i}": float(v) for i, v in
                       enumerate(np.clip(true[m] + rng.normal(0, 0.3, 7000), 0, 1))}
             for m in range(10)}
reference = {f"m{m}": float(true[m]) for m in range(10)}
res = robustness_resample(per_query, reference, sample_size=2000, trials=30)
print(f"full rho {res.full_rho:.3f}; 30 trials: mean {res.mean_rho:.3f}, std {res.std_rho:.3f}")
print("spearman on identical ranks:", spearman([1, 2, 3, 4], [1, 2, 3, 4]))
