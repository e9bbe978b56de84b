"""
Steering dyads away from conflict
=================================

The trained network is the plant; policy variables are the controls. For
each conflictual dyad we search for values of the controllable variables
that push predicted risk below 0.5, one variable at a time (golden section
search) and all four together (simulated annealing).
"""

# %%
import numpy as np

from ratchoice import conflict_data as cd
from ratchoice import control
from ratchoice import expectations as ex

dyads = cd.synth_generate(cd.SynthConfig(n=600, seed=2))
X, norm = cd.normalize(dyads)
data = ex.LabeledDataset(X, cd.outcomes(dyads), cd.FEATURES)
model, _ = ex.train(ex.init_model([7, 10, 1], 2), data, ex.TrainConfig(0.5, 1500, 2))
print("training accuracy:", round(ex.accuracy(model, data), 3))

# %% [markdown]
# One dyad in detail.

# %%
target = next(d for d in dyads if d.outcome == 1 and control.risk(model, d, norm) > 0.5)
single = control.control_single(model, norm, target, "democracy")
print(f"democracy {target.democracy:.2f} -> {single.controlled.democracy:.2f}; "
      f"risk {single.risk_before:.3f} -> {single.risk_after:.3f}")

many = control.control_multiple(model, norm, target, control.CONTROLLABLE, seed=0)
print("multiple-variable deltas:", {k: round(v, 3) for k, v in many.deltas.items()},
      f"risk -> {many.risk_after:.3f}")

# %% [markdown]
# The five standard strategies over every conflict in the data.

# %%
sa = control.AnnealingSchedule(alpha=0.9, steps_per_temp=10, t_min=1e-3, restarts=2)
for strategy in control.standard_strategies(sa=sa):
    rep = control.avoidance_report(model, norm, dyads, strategy, seed=0)
    deltas = ", ".join(f"{k}={v:.2f}" for k, v in rep.mean_abs_delta.items())
    print(f"{strategy.label:11s} {rep.percent_avoided:6.1f}% of {rep.n_conflicts} avoided  ({deltas})")
