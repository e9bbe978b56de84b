"""
Four optimizers on one landscape
================================

Golden section search handles a single bounded variable; simulated annealing,
a genetic algorithm and particle swarm take on a multimodal surface in two
dimensions. All three stochastic methods are seeded, so reruns repeat exactly.
"""

# %%
import math

import numpy as np

from ratchoice import optimizers as opt

res = opt.golden_section(math.cos, 0.0, 2 * math.pi, tol=1e-8)
print(f"cos minimum near {res.best_point[0]:.8f} (pi = {math.pi:.8f}) after {res.evaluations} evaluations")

# %% [markdown]
# Each iteration keeps a fraction phi - 1 of the bracket.

# %%
widths = np.array(res.info["widths"])
print("first bracket ratios:", np.round(widths[1:6] / widths[:5], 12))

# %% [markdown]
# Rastrigin: a bowl covered in local minima, with the global minimum 0 at the origin.

# %%
def rastrigin(x):
    x = np.asarray(x, dtype=float)
    return float(np.sum(x**2 + 10.0 * (1.0 - np.cos(2.0 * np.pi * x))))


bounds = opt.Bounds([-5.12, -5.12], [5.12, 5.12])
runs = {
    "annealing": opt.simulated_annealing(rastrigin, bounds, seed=0),
    "genetic": opt.genetic_algorithm(rastrigin, bounds, opt.GAConfig(), seed=0),
    "swarm": opt.particle_swarm(rastrigin, bounds, opt.PSOConfig(), seed=0),
}
for name, r in runs.items():
    print(f"{name:10s} best {r.best_value:.2e} at {np.round(r.best_point, 4)} ({r.evaluations} evaluations)")

# %% [markdown]
# How reliable are they? Count successes (best value below 0.1) over ten seeds.

# %%
for name, run in [
    ("annealing", lambda s: opt.simulated_annealing(rastrigin, bounds, seed=s)),
    ("genetic", lambda s: opt.genetic_algorithm(rastrigin, bounds, opt.GAConfig(), s)),
    ("swarm", lambda s: opt.particle_swarm(rastrigin, bounds, opt.PSOConfig(), s)),
]:
    print(name, sum(run(s).best_value < 0.1 for s in range(10)), "/ 10")
