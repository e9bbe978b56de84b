"""Learned expectation models.

A small feedforward network (tanh hidden layers, logistic output) maps a
feature vector to a score in (0, 1), e.g. the risk that a dyad is in
conflict. Training is plain full-batch gradient descent on mean squared
error. ``adaptive_forecast`` is the naive look-back predictor used as a
biased baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DivergenceError, DomainError, InsufficientHistoryError, ShapeError

# logistic(±36) is still strictly inside (0, 1) in double precision
_LOGIT_CLIP = 36.0


def _logistic(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass(frozen=True, eq=False)
class ExpectationModel:
    """Feedforward network with bias terms folded into each weight matrix.

    ``weights[l]`` has shape ``(layer_sizes[l + 1], layer_sizes[l] + 1)``;
    the last column holds the biases.
    """

    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ShapeError(f"layer_sizes must hold at least two positive widths, got {self.layer_sizes}")
        if sizes[-1] != 1:
            raise ShapeError(f"output width must be 1, got {sizes[-1]}")
        if len(self.weights) != len(sizes) - 1:
            raise ShapeError(f"expected {len(sizes) - 1} weight matrices, got {len(self.weights)}")
        frozen = []
        for l, w in enumerate(self.weights):
            w = np.array(w, dtype=float)
            expected = (sizes[l + 1], sizes[l] + 1)
            if w.shape != expected:
                raise ShapeError(f"layer {l}: weight shape {w.shape}, expected {expected}")
            if not np.all(np.isfinite(w)):
                raise DomainError(f"layer {l}: weights must be finite")
            w.flags.writeable = False
            frozen.append(w)
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "weights", tuple(frozen))

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_parameters(self) -> int:
        return sum(w.size for w in self.weights)

    def _activations(self, X: np.ndarray) -> list[np.ndarray]:
        acts = [X]
        a = X
        last = len(self.weights) - 1
        for l, w in enumerate(self.weights):
            z = a @ w[:, :-1].T + w[:, -1]
            if l == last:
                a = _logistic(np.clip(z, -_LOGIT_CLIP, _LOGIT_CLIP))
            else:
                a = np.tanh(z)
            acts.append(a)
        return acts

    def predict(self, X) -> np.ndarray:
        """Scores for a batch of rows, shape ``(n,)``."""
        X = _as_batch(X, self.n_inputs)
        return self._activations(X)[-1][:, 0]

    def flatten(self) -> np.ndarray:
        return np.concatenate([w.ravel() for w in self.weights])

    def with_flat(self, theta) -> "ExpectationModel":
        """Same architecture, weights taken from a flat vector."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_parameters,):
            raise ShapeError(f"expected {self.n_parameters} parameters, got shape {theta.shape}")
        out, pos = [], 0
        for w in self.weights:
            out.append(theta[pos:pos + w.size].reshape(w.shape))
            pos += w.size
        return ExpectationModel(self.layer_sizes, tuple(out))

    def __eq__(self, other):
        if not isinstance(other, ExpectationModel):
            return NotImplemented
        return self.layer_sizes == other.layer_sizes and all(
            np.array_equal(a, b) for a, b in zip(self.weights, other.weights)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    """Mean prediction of independently initialized networks.

    Stands in for a Bayesian network: the spread across members is a
    rough uncertainty signal, the mean is the point prediction.
    """

    members: tuple[ExpectationModel, ...]

    def __post_init__(self):
        if not self.members:
            raise ShapeError("an ensemble needs at least one member")
        sizes = {m.layer_sizes for m in self.members}
        if len(sizes) != 1:
            raise ShapeError("ensemble members must share an architecture")
        object.__setattr__(self, "members", tuple(self.members))

    @property
    def n_inputs(self) -> int:
        return self.members[0].n_inputs

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return self.members[0].layer_sizes

    def predict(self, X) -> np.ndarray:
        return np.mean([m.predict(X) for m in self.members], axis=0)

    def spread(self, X) -> np.ndarray:
        return np.std([m.predict(X) for m in self.members], axis=0)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.5
    epochs: int = 2000
    seed: int = 0
    train_fraction: float = 0.8

    def __post_init__(self):
        if not (np.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise ConfigurationError(f"learning_rate must be positive, got {self.learning_rate}")
        if int(self.epochs) != self.epochs or self.epochs < 0:
            raise ConfigurationError(f"epochs must be a non-negative integer, got {self.epochs}")
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigurationError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if not (0 < self.train_fraction <= 1):
            raise ConfigurationError(f"train_fraction must lie in (0, 1], got {self.train_fraction}")


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    features: np.ndarray
    targets: np.ndarray
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        y = np.array(self.targets, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ShapeError(f"features must be a non-empty n x d matrix, got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise ShapeError(f"{X.shape[0]} feature rows but {y.shape[0]} targets")
        if np.isnan(X).any() or np.isnan(y).any():
            raise DomainError("dataset contains NaN entries")
        if ((y < 0) | (y > 1)).any():
            raise DomainError("targets must lie in [0, 1]")
        names = tuple(self.feature_names) or tuple(f"x{i}" for i in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ShapeError(f"{len(names)} feature names for {X.shape[1]} columns")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "feature_names", names)

    def __len__(self):
        return self.features.shape[0]

    def subset(self, idx) -> "LabeledDataset":
        return LabeledDataset(self.features[idx], self.targets[idx], self.feature_names)

    def split(self, train_fraction: float, seed: int) -> tuple["LabeledDataset", "LabeledDataset | None"]:
        """Seeded shuffle split. The holdout is None when ``train_fraction`` is 1."""
        n = len(self)
        order = np.random.default_rng(seed).permutation(n)
        n_train = max(1, int(round(train_fraction * n)))
        if n_train >= n:
            return self.subset(order), None
        return self.subset(order[:n_train]), self.subset(order[n_train:])


def _as_batch(x, width: int) -> np.ndarray:
    X = np.asarray(x, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != width:
        raise ShapeError(f"expected input width {width}, got shape {np.shape(x)}")
    return X


def init_model(layer_sizes: Sequence[int], seed: int) -> ExpectationModel:
    """Weights drawn uniformly from [-0.5, 0.5] with a seeded generator."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2:
        raise ShapeError(f"layer_sizes must hold at least two widths, got {layer_sizes}")
    if sizes[-1] != 1:
        raise ShapeError(f"output width must be 1, got {sizes[-1]}")
    rng = np.random.default_rng(seed)
    weights = tuple(rng.uniform(-0.5, 0.5, size=(sizes[l + 1], sizes[l] + 1)) for l in range(len(sizes) - 1))
    return ExpectationModel(sizes, weights)


def zero_model(layer_sizes: Sequence[int]) -> ExpectationModel:
    sizes = tuple(int(s) for s in layer_sizes)
    return ExpectationModel(sizes, tuple(np.zeros((sizes[l + 1], sizes[l] + 1)) for l in range(len(sizes) - 1)))


def forward(model, x):
    """Score one row (returns a float) or a batch of rows (returns an array)."""
    scores = model.predict(x)
    if np.ndim(x) == 1:
        return float(scores[0])
    return scores


def mse_loss(model: ExpectationModel, data: LabeledDataset) -> float:
    pred = model.predict(data.features)
    return float(np.mean((pred - data.targets) ** 2))


def loss_and_gradients(model: ExpectationModel, X: np.ndarray, y: np.ndarray) -> tuple[float, list[np.ndarray]]:
    """Mean squared error and its gradient with respect to every weight matrix."""
    acts = model._activations(X)
    n = X.shape[0]
    out = acts[-1][:, 0]
    err = out - y
    loss = float(np.mean(err**2))

    last = len(model.weights) - 1
    grads: list[np.ndarray] = [None] * len(model.weights)
    # d loss / d output, then through the logistic
    delta = (2.0 / n) * err[:, None] * out[:, None] * (1.0 - out[:, None])
    w_last = model.weights[last]
    z_last = acts[-2] @ w_last[:, :-1].T + w_last[:, -1]
    delta = np.where(np.abs(z_last) < _LOGIT_CLIP, delta, 0.0)
    for l in range(last, -1, -1):
        a_in = acts[l]
        w = model.weights[l]
        grads[l] = np.hstack([delta.T @ a_in, delta.sum(axis=0)[:, None]])
        if l > 0:
            delta = (delta @ w[:, :-1]) * (1.0 - acts[l] ** 2)
    return loss, grads


def train(model: ExpectationModel, data: LabeledDataset, cfg: TrainConfig) -> tuple[ExpectationModel, list[float]]:
    """Full-batch gradient descent on mean squared error.

    ``loss_curve[k]`` is the training loss after ``k`` updates, so the curve
    has one entry per epoch and starts at the untrained loss.
    """
    if data.features.shape[1] != model.n_inputs:
        raise ShapeError(f"data has {data.features.shape[1]} features, model expects {model.n_inputs}")
    if cfg.epochs == 0:
        return model, []
    weights = [w.copy() for w in model.weights]
    current = model
    curve = []
    X, y = data.features, data.targets
    for epoch in range(int(cfg.epochs)):
        loss, grads = loss_and_gradients(current, X, y)
        if not np.isfinite(loss):
            raise DivergenceError(epoch)
        curve.append(loss)
        with np.errstate(over="ignore", invalid="ignore"):
            for w, g in zip(weights, grads):
                w -= cfg.learning_rate * g
        if not all(np.all(np.isfinite(w)) for w in weights):
            raise DivergenceError(epoch)
        current = ExpectationModel(model.layer_sizes, tuple(w.copy() for w in weights))
    return current, curve


def train_ensemble(
    layer_sizes: Sequence[int], data: LabeledDataset, cfg: TrainConfig, k: int
) -> tuple[EnsembleModel, list[list[float]]]:
    """Train ``k`` networks from independent seeded inits and average them."""
    if k < 1:
        raise ConfigurationError(f"ensemble size must be positive, got {k}")
    seeds = np.random.SeedSequence(int(cfg.seed)).generate_state(k, dtype=np.uint64)
    members, curves = [], []
    for s in seeds:
        m, curve = train(init_model(layer_sizes, int(s)), data, cfg)
        members.append(m)
        curves.append(curve)
    return EnsembleModel(tuple(members)), curves


def grad_check(model: ExpectationModel, data: LabeledDataset, perturbation: float = 1e-5) -> float:
    """Largest relative gap between backprop and central differences.

    Relative error per weight is ``|a - n| / max(|a| + |n|, 1e-8)``; the
    floor keeps weights with vanishing gradients from dominating.
    """
    if not (1e-8 <= perturbation <= 1e-3):
        raise DomainError(f"perturbation must lie in [1e-8, 1e-3], got {perturbation}")
    X, y = data.features, data.targets
    _, grads = loss_and_gradients(model, X, y)
    analytic = np.concatenate([g.ravel() for g in grads])
    theta = model.flatten()
    numeric = np.empty_like(theta)
    for i in range(theta.size):
        step = np.zeros_like(theta)
        step[i] = perturbation
        up = mse_loss(model.with_flat(theta + step), data)
        down = mse_loss(model.with_flat(theta - step), data)
        numeric[i] = (up - down) / (2 * perturbation)
    rel = np.abs(analytic - numeric) / np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    return float(rel.max())


def accuracy(model, data: LabeledDataset, threshold: float = 0.5) -> float:
    pred = model.predict(data.features) >= threshold
    return float(np.mean(pred == (data.targets >= threshold)))


def adaptive_forecast(series: Sequence[float], order: int) -> float:
    """Mean of the last ``order`` observations.

    On a trending series this lags behind the trend; that systematic error is
    the point of the baseline.
    """
    if order < 1:
        raise DomainError(f"order must be positive, got {order}")
    if len(series) < order:
        raise InsufficientHistoryError(f"need at least {order} observations, got {len(series)}")
    return float(np.mean(np.asarray(series[len(series) - order:], dtype=float)))


def save_model(model: ExpectationModel, path) -> None:
    lines = ["layers: " + " ".join(str(s) for s in model.layer_sizes)]
    for w in model.weights:
        for row in w:
            lines.append(" ".join(f"{v:.17g}" for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> ExpectationModel:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("layers:"):
        raise ShapeError(f"{path}: missing 'layers:' header")
    try:
        sizes = tuple(int(t) for t in lines[0][len("layers:"):].split())
    except ValueError:
        raise ShapeError(f"{path}: malformed layers header {lines[0]!r}") from None
    rows = lines[1:]
    weights, pos = [], 0
    for l in range(len(sizes) - 1):
        n_out, n_in = sizes[l + 1], sizes[l] + 1
        block = rows[pos:pos + n_out]
        if len(block) != n_out:
            raise ShapeError(f"{path}: layer {l} needs {n_out} rows, found {len(block)}")
        mat = np.array([[float(v) for v in r.split()] for r in block])
        if mat.shape != (n_out, n_in):
            raise ShapeError(f"{path}: layer {l} rows must have {n_in} values")
        weights.append(mat)
        pos += n_out
    if pos != len(rows):
        raise ShapeError(f"{path}: {len(rows) - pos} trailing weight rows")
    return ExpectationModel(sizes, tuple(weights))
