"""
Adaptive versus rational expectations
=====================================

An adaptive forecaster only looks at a variable's own past. A rational one
uses every relevant input; here that is a small neural network trained on
synthetic dyads.
"""

# %%
import numpy as np

from ratchoice import conflict_data as cd
from ratchoice import expectations as ex

rng = np.random.default_rng(0)
trend = np.cumsum(rng.normal(0.5, 1.0, 40))
print("adaptive forecast (mean of last 3):", round(ex.adaptive_forecast(trend, 3), 3),
      "| next value:", round(trend[-1] + 0.5, 3))

# %% [markdown]
# On a trending series the moving average lags behind, which is the bias
# rational expectations avoid. Next, build a dataset of dyads.

# %%
dyads = cd.synth_generate(cd.SynthConfig(n=1000, seed=1))
X, norm = cd.normalize(dyads)
data = ex.LabeledDataset(X, cd.outcomes(dyads), cd.FEATURES)
train, hold = data.split(0.8, seed=1)
print(f"{len(dyads)} dyads, conflict rate {data.targets.mean():.3f}")

# %% [markdown]
# Before training, confirm backpropagation against finite differences.

# %%
model = ex.init_model([7, 10, 1], seed=1)
print("gradient check, max relative error:", ex.grad_check(model, train.subset(np.arange(50))))

# %%
model, curve = ex.train(model, train, ex.TrainConfig(learning_rate=0.5, epochs=2000, seed=1))
print(f"loss {curve[0]:.4f} -> {curve[-1]:.4f}")
print(f"train accuracy {ex.accuracy(model, train):.3f}, holdout accuracy {ex.accuracy(model, hold):.3f}")

# %% [markdown]
# An ensemble of differently seeded networks gives a spread as a rough
# uncertainty signal.

# %%
ens, _ = ex.train_ensemble([7, 6, 1], train, ex.TrainConfig(0.5, 500, 0), k=3)
print("ensemble holdout accuracy:", round(ex.accuracy(ens, hold), 3))
print("mean member spread on holdout:", round(float(ens.spread(hold.features).mean()), 4))
