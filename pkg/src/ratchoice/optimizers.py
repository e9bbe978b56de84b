"""Box-bounded minimizers: golden section, simulated annealing, GA and PSO.

Every routine minimizes. To maximize a utility, pass its negation.
The stochastic routines take an integer seed and are fully reproducible
for a given (objective, bounds, config, seed).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # phi - 1, about 0.618
INV_PHI2 = 1.0 - INV_PHI  # equals INV_PHI**2

Objective = Callable[[np.ndarray], float]


@dataclass(frozen=True, eq=False)
class Bounds:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.array(self.lo, dtype=float))
        hi = np.atleast_1d(np.array(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DomainError(f"lo and hi must be 1-D and equally long, got {lo.shape} and {hi.shape}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise DomainError("bounds must be finite")
        if np.any(lo >= hi):
            raise DomainError(f"every lower bound must be below its upper bound: lo={lo}, hi={hi}")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> "Bounds":
        pairs = list(pairs)
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    def clip(self, x):
        return np.clip(x, self.lo, self.hi)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi))

    def uniform(self, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
        size = self.dim if n is None else (n, self.dim)
        return self.lo + rng.random(size) * self.width


@dataclass
class OptimResult:
    """Outcome of a minimization.

    ``trace`` holds the incumbent (best so far) value after each iteration.
    ``info`` carries routine-specific extras, e.g. the golden-section
    bracket history.
    """

    best_point: np.ndarray
    best_value: float
    evaluations: int
    trace: list[float]
    info: dict = field(default_factory=dict)

    def write_trace_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration", "best_value"])
            for i, v in enumerate(self.trace):
                writer.writerow([i, repr(float(v))])


class _Counted:
    """Wraps an objective: counts calls and rejects non-finite values."""

    def __init__(self, f: Objective):
        self.f = f
        self.calls = 0

    def __call__(self, x) -> float:
        self.calls += 1
        v = float(self.f(x))
        if not math.isfinite(v):
            raise DomainError(f"objective returned a non-finite value {v!r} at {x!r}")
        return v


def golden_section(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-6, max_iter: int = 200
) -> OptimResult:
    """Golden section search for a minimum of ``f`` on ``[lo, hi]``.

    Each iteration keeps the better interior point and shrinks the bracket
    by ``phi - 1``. Stops once the bracket is no wider than ``tol`` or after
    ``max_iter`` iterations, and returns the bracket midpoint.
    ``info["brackets"]`` lists the bracket after every iteration, starting
    with the initial one; ``info["widths"]`` holds the matching widths as
    tracked internally (the endpoints differ from them only by rounding).
    """
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise DomainError(f"invalid bracket [{lo}, {hi}]")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ConfigurationError(f"max_iter must be positive, got {max_iter}")
    obj = _Counted(f)
    # The bracket is carried as (a, h) and h shrinks by an exact factor each
    # step; recomputing interior points from a and h avoids the slow drift of
    # the textbook form, where new endpoints inherit old rounding errors.
    a, h = float(lo), float(hi) - float(lo)
    c, d = a + INV_PHI2 * h, a + INV_PHI * h
    fc, fd = obj(c), obj(d)
    brackets, widths = [(a, a + h)], [h]
    trace = []
    it = 0
    while h > tol and it < max_iter:
        h *= INV_PHI
        if fc <= fd:
            d, fd = c, fc
            c = a + INV_PHI2 * h
            fc = obj(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * h
            fd = obj(d)
        it += 1
        brackets.append((a, a + h))
        widths.append(h)
        trace.append(min(fc, fd) if not trace else min(trace[-1], fc, fd))
    x = a + 0.5 * h
    fx = obj(x)
    return OptimResult(np.array([x]), fx, obj.calls, trace, {"brackets": brackets, "widths": widths, "iterations": it})


@dataclass(frozen=True)
class AnnealingSchedule:
    """Cooling schedule for :func:`simulated_annealing`.

    ``t0=None`` sets the start temperature to the standard deviation of the
    objective over 20 uniform samples. ``step_scale`` is the Gaussian
    proposal's standard deviation as a fraction of each dimension's width.
    """

    t0: float | None = None
    alpha: float = 0.95
    steps_per_temp: int = 100
    t_min: float = 1e-3
    restarts: int = 1
    step_scale: float = 0.1

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.t_min > 0:
            raise ConfigurationError(f"t_min must be positive, got {self.t_min}")
        if self.t0 is not None and not self.t0 > self.t_min:
            raise ConfigurationError(f"t0 must exceed t_min, got t0={self.t0}, t_min={self.t_min}")
        if self.steps_per_temp < 1 or self.restarts < 1:
            raise ConfigurationError("steps_per_temp and restarts must be positive")
        if not self.step_scale > 0:
            raise ConfigurationError(f"step_scale must be positive, got {self.step_scale}")


def simulated_annealing(
    f: Objective,
    bounds: Bounds,
    schedule: AnnealingSchedule | None = None,
    seed: int = 0,
    x0: Sequence[float] | None = None,
) -> OptimResult:
    """Metropolis simulated annealing with geometric cooling.

    Worse moves are accepted with probability ``exp(-delta / T)`` and the
    temperature is multiplied by ``alpha`` after ``steps_per_temp``
    proposals. Proposals are clamped to the bounds. With ``restarts > 1``
    the chain restarts from a fresh uniform point; the first chain starts
    at ``x0`` if given. The best point ever evaluated is returned.
    """
    schedule = schedule or AnnealingSchedule()
    rng = np.random.default_rng(seed)
    obj = _Counted(f)
    sigma = schedule.step_scale * bounds.width

    t0 = schedule.t0
    if t0 is None:
        samples = [obj(p) for p in bounds.uniform(rng, 20)]
        t0 = float(np.std(samples))
        if not t0 > schedule.t_min:
            t0 = 10.0 * schedule.t_min

    best_x, best_f = None, math.inf
    trace = []
    for r in range(schedule.restarts):
        if r == 0 and x0 is not None:
            x = bounds.clip(np.asarray(x0, dtype=float))
        else:
            x = bounds.uniform(rng)
        fx = obj(x)
        if fx < best_f:
            best_x, best_f = x.copy(), fx
        t = t0
        while t > schedule.t_min:
            steps = rng.normal(size=(schedule.steps_per_temp, bounds.dim)) * sigma
            coins = rng.random(schedule.steps_per_temp)
            for step, coin in zip(steps, coins):
                y = bounds.clip(x + step)
                fy = obj(y)
                delta = fy - fx
                if delta <= 0 or coin < math.exp(-delta / t):
                    x, fx = y, fy
                    if fx < best_f:
                        best_x, best_f = x.copy(), fx
            trace.append(best_f)
            t *= schedule.alpha
    return OptimResult(best_x, best_f, obj.calls, trace, {"t0": t0})


@dataclass(frozen=True)
class GAConfig:
    """Real-coded GA settings. ``mutation_sigma`` is a fraction of each
    dimension's width; ``mutation_rate`` is a per-gene probability."""

    pop_size: int = 50
    generations: int = 200
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    mutation_sigma: float = 0.1
    elitism_count: int = 2

    def __post_init__(self):
        if self.pop_size < 2:
            raise ConfigurationError(f"pop_size must be at least 2, got {self.pop_size}")
        if self.generations < 0:
            raise ConfigurationError(f"generations must be non-negative, got {self.generations}")
        if not 0 <= self.elitism_count < self.pop_size:
            raise ConfigurationError(
                f"elitism_count must lie in [0, pop_size), got {self.elitism_count} for pop_size {self.pop_size}"
            )
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {v}")
        if self.mutation_sigma < 0:
            raise ConfigurationError(f"mutation_sigma must be non-negative, got {self.mutation_sigma}")


def genetic_algorithm(f: Objective, bounds: Bounds, cfg: GAConfig | None = None, seed: int = 0) -> OptimResult:
    """Real-coded genetic algorithm.

    Binary tournament selection, blend crossover with a per-gene mixing
    coefficient drawn from U[-0.25, 1.25], Gaussian mutation, and elitism.
    Offspring are clamped to the bounds. Returns the best individual ever
    evaluated.
    """
    cfg = cfg or GAConfig()
    rng = np.random.default_rng(seed)
    obj = _Counted(f)
    n, dim = cfg.pop_size, bounds.dim
    sigma = cfg.mutation_sigma * bounds.width

    pop = bounds.uniform(rng, n)
    fit = np.array([obj(p) for p in pop])
    i_best = int(np.argmin(fit))
    best_x, best_f = pop[i_best].copy(), float(fit[i_best])
    trace = [best_f]
    n_children = n - cfg.elitism_count
    for _ in range(cfg.generations):
        # all random draws for the generation happen before any evaluation
        cand = rng.integers(0, n, size=(n_children, 2, 2))
        do_cross = rng.random(n_children) < cfg.crossover_rate
        mix = rng.uniform(-0.25, 1.25, size=(n_children, dim))
        do_mut = rng.random((n_children, dim)) < cfg.mutation_rate
        noise = rng.normal(size=(n_children, dim)) * sigma

        # binary tournaments: the fitter of two random individuals, for each parent
        winners = np.where(fit[cand[:, :, 0]] <= fit[cand[:, :, 1]], cand[:, :, 0], cand[:, :, 1])
        p1, p2 = pop[winners[:, 0]], pop[winners[:, 1]]
        children = np.where(do_cross[:, None], mix * p1 + (1.0 - mix) * p2, p1)
        children = bounds.clip(np.where(do_mut, children + noise, children))

        elite = np.argsort(fit, kind="stable")[: cfg.elitism_count]
        child_fit = np.array([obj(c) for c in children])
        pop = np.vstack([pop[elite], children])
        fit = np.concatenate([fit[elite], child_fit])
        i_best = int(np.argmin(fit))
        if fit[i_best] < best_f:
            best_x, best_f = pop[i_best].copy(), float(fit[i_best])
        trace.append(best_f)
    return OptimResult(best_x, best_f, obj.calls, trace)


@dataclass(frozen=True)
class PSOConfig:
    swarm_size: int = 40
    iterations: int = 200
    inertia: float = 0.7
    cognitive_coef: float = 1.5
    social_coef: float = 1.5

    def __post_init__(self):
        if self.swarm_size < 1:
            raise ConfigurationError(f"swarm_size must be positive, got {self.swarm_size}")
        if self.iterations < 0:
            raise ConfigurationError(f"iterations must be non-negative, got {self.iterations}")
        for name in ("inertia", "cognitive_coef", "social_coef"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be non-negative, got {getattr(self, name)}")


def particle_swarm(f: Objective, bounds: Bounds, cfg: PSOConfig | None = None, seed: int = 0) -> OptimResult:
    """Global-best particle swarm.

    Velocity update ``v = w*v + c1*r1*(pbest - x) + c2*r2*(gbest - x)``.
    A particle that hits a wall is clamped there and its velocity in that
    dimension is zeroed.
    """
    cfg = cfg or PSOConfig()
    rng = np.random.default_rng(seed)
    obj = _Counted(f)
    n, dim = cfg.swarm_size, bounds.dim

    x = bounds.uniform(rng, n)
    v = rng.uniform(-1.0, 1.0, size=(n, dim)) * 0.1 * bounds.width
    fx = np.array([obj(p) for p in x])
    pbest, pbest_f = x.copy(), fx.copy()
    g = int(np.argmin(pbest_f))
    gbest, gbest_f = pbest[g].copy(), float(pbest_f[g])
    trace = [gbest_f]
    for _ in range(cfg.iterations):
        r1 = rng.random((n, dim))
        r2 = rng.random((n, dim))
        v = cfg.inertia * v + cfg.cognitive_coef * r1 * (pbest - x) + cfg.social_coef * r2 * (gbest - x)
        x = x + v
        hit = (x < bounds.lo) | (x > bounds.hi)
        x = bounds.clip(x)
        v[hit] = 0.0
        fx = np.array([obj(p) for p in x])
        improved = fx < pbest_f
        pbest[improved] = x[improved]
        pbest_f[improved] = fx[improved]
        g = int(np.argmin(pbest_f))
        if pbest_f[g] < gbest_f:
            gbest, gbest_f = pbest[g].copy(), float(pbest_f[g])
        trace.append(gbest_f)
    return OptimResult(gbest, gbest_f, obj.calls, trace)
