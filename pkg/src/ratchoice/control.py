"""Feedback control of conflict risk.

A trained risk model is treated as a plant: for every historically
conflictual dyad, the controllable inputs are tuned to drive predicted
risk down, one variable at a time with golden section search or several
at once with simulated annealing. A dyad counts as avoided when the
controlled risk drops below the decision threshold (0.5 by default).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .conflict_data import CONTROLLABLE, DEMOCRACY_RANGE, FEATURES, Dyad, NormParams
from .errors import ConfigurationError, EmptyReportError, LoadError, ShapeError
from .optimizers import AnnealingSchedule, Bounds, golden_section, simulated_annealing

DEFAULT_THRESHOLD = 0.5

SUMMARY_COLUMNS = (
    "strategy",
    "variable_set",
    "n_conflicts",
    "n_avoided",
    "percent_avoided",
    "mean_abs_delta_democracy",
    "mean_abs_delta_allies",
    "mean_abs_delta_capability",
    "mean_abs_delta_dependency",
)

# presentation order for plot output
PLOT_ORDER = ("Democracy", "Allies", "Dependency", "Capability", "Multiple")

_INDEX = {name: i for i, name in enumerate(FEATURES)}


@dataclass(frozen=True)
class GSSConfig:
    """Golden-section settings for single-variable control.

    ``prescan`` evenly spaced points pick the bracket GSS then refines,
    which guards against non-unimodal risk slices.
    """

    tol: float = 1e-6
    max_iter: int = 200
    prescan: int = 32

    def __post_init__(self):
        if not self.tol > 0 or self.max_iter < 1 or self.prescan < 2:
            raise ConfigurationError(f"invalid GSS config {self}")


DEFAULT_SA = AnnealingSchedule(alpha=0.9, steps_per_temp=20, t_min=1e-3, restarts=5)


@dataclass(frozen=True)
class ControlStrategy:
    mode: str
    variables: tuple[str, ...]
    optimizer_config: GSSConfig | AnnealingSchedule

    def __post_init__(self):
        vars_ = tuple(v.strip().lower() for v in self.variables)
        if not vars_:
            raise ConfigurationError("a control strategy needs at least one variable")
        bad = [v for v in vars_ if v not in CONTROLLABLE]
        if bad:
            raise ConfigurationError(f"not controllable: {', '.join(bad)} (choose from {', '.join(CONTROLLABLE)})")
        if len(set(vars_)) != len(vars_):
            raise ConfigurationError(f"repeated variable in {vars_}")
        if self.mode == "single":
            if len(vars_) != 1 or not isinstance(self.optimizer_config, GSSConfig):
                raise ConfigurationError("single mode takes one variable and a GSSConfig")
        elif self.mode == "multiple":
            if not isinstance(self.optimizer_config, AnnealingSchedule):
                raise ConfigurationError("multiple mode takes an AnnealingSchedule")
        else:
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        # canonical order keeps labels stable
        object.__setattr__(self, "variables", tuple(v for v in CONTROLLABLE if v in vars_))

    @classmethod
    def single(cls, variable: str, cfg: GSSConfig | None = None) -> "ControlStrategy":
        return cls("single", (variable,), cfg or GSSConfig())

    @classmethod
    def multiple(cls, variables: Sequence[str] = CONTROLLABLE, cfg: AnnealingSchedule | None = None) -> "ControlStrategy":
        return cls("multiple", tuple(variables), cfg or DEFAULT_SA)

    @classmethod
    def parse(cls, text: str, gss: GSSConfig | None = None, sa: AnnealingSchedule | None = None) -> "ControlStrategy":
        """Parse ``single:<var>`` or ``multiple:<var>,<var>,...`` (``multiple``
        alone means all four)."""
        mode, _, rest = text.strip().partition(":")
        mode = mode.lower()
        names = [v for v in rest.split(",") if v.strip()]
        if mode == "single":
            if len(names) != 1:
                raise ConfigurationError(f"single strategy needs exactly one variable: {text!r}")
            return cls.single(names[0], gss)
        if mode == "multiple":
            return cls.multiple(names or CONTROLLABLE, sa)
        raise ConfigurationError(f"unknown strategy {text!r}")

    @property
    def variable_set(self) -> str:
        return "+".join(self.variables)

    @property
    def label(self) -> str:
        if self.mode == "single":
            return self.variables[0].capitalize()
        if self.variables == CONTROLLABLE:
            return "Multiple"
        return f"Multiple({self.variable_set})"


@dataclass(frozen=True)
class ControlledDyad:
    original: Dyad
    controlled: Dyad
    risk_before: float
    risk_after: float
    deltas: dict[str, float]
    avoided: bool


@dataclass(frozen=True)
class AvoidanceReport:
    strategy: ControlStrategy
    n_conflicts: int
    n_avoided: int
    percent_avoided: float
    mean_abs_delta: dict[str, float]
    threshold: float = DEFAULT_THRESHOLD
    details: tuple[ControlledDyad, ...] = field(default=(), repr=False)

    def summary_row(self) -> list[str]:
        return [
            self.strategy.mode,
            self.strategy.variable_set,
            str(self.n_conflicts),
            str(self.n_avoided),
            repr(float(self.percent_avoided)),
        ] + [repr(float(self.mean_abs_delta[v])) for v in CONTROLLABLE]


def _check_norm(model, norm: NormParams):
    if norm.mins.size != len(FEATURES) or model.n_inputs != len(FEATURES):
        raise ShapeError(
            f"model expects {model.n_inputs} inputs and normalization has {norm.mins.size}; both must be {len(FEATURES)}"
        )


def risk(model, dyad: Dyad, norm: NormParams) -> float:
    """Predicted conflict risk of a dyad."""
    _check_norm(model, norm)
    return float(model.predict(norm.apply(dyad.features()))[0])


def variable_bounds(variable: str, norm: NormParams, current: float) -> tuple[float, float]:
    """Legal control range in original units.

    Democracy uses its scale [-10, 10] and allies [0, 1]. Dependency and
    capability run from 0 to the training maximum, widened to include the
    dyad's own value when that is larger.
    """
    if variable == "democracy":
        return DEMOCRACY_RANGE
    if variable == "allies":
        return (0.0, 1.0)
    hi = max(float(norm.maxs[_INDEX[variable]]), float(current))
    if hi <= 0:
        hi = 1.0
    return (0.0, hi)


class _RiskSlice:
    """Risk as a function of a few controllable inputs, everything else frozen."""

    def __init__(self, model, norm: NormParams, dyad: Dyad, variables: Sequence[str]):
        self.model = model
        self.norm = norm
        self.base = dyad.features()
        self.cols = [_INDEX[v] for v in variables]
        self.z_base = norm.apply(self.base)[None, :]
        span = norm.span[self.cols]
        self.col_min = norm.mins[self.cols]
        self.col_scale = np.where(span > 0, 1.0 / np.where(span > 0, span, 1.0), 0.0)

    def point(self, values) -> np.ndarray:
        x = self.base.copy()
        x[self.cols] = values
        return x

    def __call__(self, values) -> float:
        z = self.z_base.copy()
        z[0, self.cols] = (np.asarray(values, dtype=float) - self.col_min) * self.col_scale
        return float(self.model.predict(z)[0])


def _round_binary(f: _RiskSlice, values: np.ndarray, pos: int) -> np.ndarray:
    """Snap a relaxed binary coordinate to the endpoint with lower risk
    (ties go to the nearer endpoint)."""
    relaxed = float(values[pos])
    ends = []
    for e in (0.0, 1.0):
        v = values.copy()
        v[pos] = e
        ends.append((f(v), abs(e - relaxed), e, v))
    ends.sort(key=lambda t: (t[0], t[1], t[2]))
    return ends[0][3]


def _finish(f: _RiskSlice, dyad: Dyad, variables, values, risk_before: float, threshold: float) -> ControlledDyad:
    original = np.array([getattr(dyad, v) for v in variables], dtype=float)
    if "allies" in variables:
        values = _round_binary(f, np.asarray(values, dtype=float), variables.index("allies"))
    r = f(values)
    if not r < risk_before:
        values, r = original, risk_before
    changes = {}
    for v, val in zip(variables, values):
        changes[v] = int(round(val)) if v == "allies" else float(val)
    controlled = dyad.with_features(**changes)
    deltas = {v: float(getattr(controlled, v)) - float(getattr(dyad, v)) for v in variables}
    return ControlledDyad(dyad, controlled, risk_before, r, deltas, r < threshold)


def _require_conflict(dyad: Dyad):
    if dyad.outcome != 1:
        raise ConfigurationError("only conflict dyads (outcome 1) are controlled")


def control_single(
    model,
    norm: NormParams,
    dyad: Dyad,
    variable: str,
    gss_cfg: GSSConfig | None = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> ControlledDyad:
    """Minimize risk over one controllable variable.

    A coarse scan picks the best grid cell, golden section search refines
    it, and the best of {original, best grid point, GSS point} is kept, so
    risk never increases.
    """
    strategy = ControlStrategy.single(variable, gss_cfg)
    variable, cfg = strategy.variables[0], strategy.optimizer_config
    _check_norm(model, norm)
    _require_conflict(dyad)
    f = _RiskSlice(model, norm, dyad, [variable])
    original = float(getattr(dyad, variable))
    risk_before = f([original])
    lo, hi = variable_bounds(variable, norm, original)

    grid = np.linspace(lo, hi, cfg.prescan)
    grid_risk = np.array([f([g]) for g in grid])
    i = int(np.argmin(grid_risk))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = golden_section(lambda t: f([t]), a, b, tol=cfg.tol, max_iter=cfg.max_iter)

    candidates = [(risk_before, 0, original), (float(grid_risk[i]), 1, float(grid[i])),
                  (res.best_value, 2, float(res.best_point[0]))]
    best = min(candidates, key=lambda c: (c[0], c[1]))
    return _finish(f, dyad, [variable], np.array([best[2]]), risk_before, threshold)


def control_multiple(
    model,
    norm: NormParams,
    dyad: Dyad,
    variables: Sequence[str],
    sa_cfg: AnnealingSchedule | None = None,
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
) -> ControlledDyad:
    """Minimize risk jointly over several controllable variables with
    multi-start simulated annealing (first chain starts at the observed
    values). Binary rounding and incumbent retention as in
    :func:`control_single`."""
    if not variables:
        raise ConfigurationError("empty variable set")
    strategy = ControlStrategy.multiple(variables, sa_cfg)
    variables, cfg = list(strategy.variables), strategy.optimizer_config
    _check_norm(model, norm)
    _require_conflict(dyad)
    f = _RiskSlice(model, norm, dyad, variables)
    original = np.array([getattr(dyad, v) for v in variables], dtype=float)
    risk_before = f(original)
    bounds = Bounds.from_pairs([variable_bounds(v, norm, getattr(dyad, v)) for v in variables])
    res = simulated_annealing(f, bounds, cfg, seed=seed, x0=original)
    return _finish(f, dyad, variables, res.best_point, risk_before, threshold)


def _dyad_seed(seed: int, i: int) -> int:
    return int(np.random.SeedSequence([int(seed), i]).generate_state(1, dtype=np.uint64)[0])


def avoidance_report(
    model,
    norm: NormParams,
    dyads: Sequence[Dyad],
    strategy: ControlStrategy,
    threshold: float = DEFAULT_THRESHOLD,
    seed: int = 0,
) -> AvoidanceReport:
    """Apply a strategy to every conflict dyad and aggregate the results.

    Peaceful dyads are skipped. Each dyad gets its own seed derived from
    ``seed`` and its position, so results do not depend on processing order.
    """
    conflicts = [(i, d) for i, d in enumerate(dyads) if d.outcome == 1]
    if not conflicts:
        raise EmptyReportError("no conflict dyads to control")
    details = []
    for i, d in conflicts:
        if strategy.mode == "single":
            cd = control_single(model, norm, d, strategy.variables[0], strategy.optimizer_config, threshold)
        else:
            cd = control_multiple(
                model, norm, d, strategy.variables, strategy.optimizer_config, _dyad_seed(seed, i), threshold
            )
        details.append(cd)
    n = len(details)
    n_avoided = sum(cd.avoided for cd in details)
    mad = {
        v: float(np.mean([abs(cd.deltas[v]) for cd in details])) if v in strategy.variables else 0.0
        for v in CONTROLLABLE
    }
    return AvoidanceReport(strategy, n, n_avoided, 100.0 * n_avoided / n, mad, threshold, tuple(details))


def standard_strategies(gss: GSSConfig | None = None, sa: AnnealingSchedule | None = None) -> list[ControlStrategy]:
    """The four single-variable strategies followed by all four jointly."""
    return [ControlStrategy.single(v, gss) for v in ("democracy", "allies", "dependency", "capability")] + [
        ControlStrategy.multiple(CONTROLLABLE, sa)
    ]


def write_summary_csv(path, reports: Sequence[AvoidanceReport]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for rep in reports:
            writer.writerow(rep.summary_row())


def write_detail_csv(path, reports: Sequence[AvoidanceReport]) -> None:
    cols = ["strategy", "variable_set", "row", "risk_before", "risk_after", "avoided"]
    for v in CONTROLLABLE:
        cols += [f"{v}_before", f"{v}_after"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for rep in reports:
            for k, cd in enumerate(rep.details):
                row = [rep.strategy.mode, rep.strategy.variable_set, k, repr(cd.risk_before),
                       repr(cd.risk_after), int(cd.avoided)]
                for v in CONTROLLABLE:
                    row += [repr(float(getattr(cd.original, v))), repr(float(getattr(cd.controlled, v)))]
                writer.writerow(row)


def read_summary_csv(path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != SUMMARY_COLUMNS:
            raise LoadError(None, None, f"{path}: header must be {','.join(SUMMARY_COLUMNS)}")
        rows = list(reader)
    for n, row in enumerate(rows, start=1):
        if row["strategy"] not in ("single", "multiple"):
            raise LoadError(n, "strategy", f"unknown strategy {row['strategy']!r}")
        try:
            float(row["percent_avoided"])
        except (TypeError, ValueError):
            raise LoadError(n, "percent_avoided", f"cannot parse {row['percent_avoided']!r}") from None
    return rows


def plot_rows(summary: Sequence[dict[str, str]]) -> list[tuple[str, float]]:
    """Reshape summary rows to (label, percent_avoided) in presentation order."""
    labelled = []
    for row in summary:
        names = [v for v in row["variable_set"].split("+") if v]
        if row["strategy"] == "single":
            label = names[0].capitalize() if names else "Single"
        elif tuple(v for v in CONTROLLABLE if v in names) == CONTROLLABLE:
            label = "Multiple"
        else:
            label = f"Multiple({row['variable_set']})"
        labelled.append((label, float(row["percent_avoided"])))
    rank = {lab: i for i, lab in enumerate(PLOT_ORDER)}
    return sorted(labelled, key=lambda t: rank.get(t[0], len(PLOT_ORDER)))
