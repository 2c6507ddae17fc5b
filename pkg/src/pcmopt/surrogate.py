"""Feedforward surrogate networks trained with Levenberg-Marquardt.

Architecture: input layer, one sigmoid hidden layer (default 10 neurons),
and a single linear output neuron predicting one thermal metric. Inputs and
targets are min-max normalized to [-1, 1]; the ranges are stored with the
model so prediction round-trips in physical units.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np


class ExtrapolationWarning(UserWarning):
    """Prediction requested outside the training input ranges."""


class DegenerateDataWarning(UserWarning):
    """Training targets carry no variance; constant predictor returned."""


def activation(x):
    """Hidden-layer sigmoid 2/(1 + e^(-2x)) - 1 (odd, range (-1, 1))."""
    return 2.0 / (1.0 + np.exp(-2.0 * x)) - 1.0


@dataclass
class TrainingSet:
    """Rows of (input vector, scalar target) with provenance metadata."""

    X: np.ndarray  # (n_rows, n_inputs)
    y: np.ndarray  # (n_rows,)
    input_names: list[str]
    target_name: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.X.shape[0] != self.y.size:
            raise ValueError("X and y row counts differ")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("training data contains non-finite entries")

    def __len__(self):
        return self.y.size

    def subset(self, idx) -> "TrainingSet":
        return TrainingSet(self.X[idx], self.y[idx], self.input_names,
                           self.target_name, dict(self.metadata))


def load_training_csv(path, target: str,
                      input_names: list[str] | None = None) -> TrainingSet:
    """Read a training set from a headered CSV.

    The target column is named explicitly; input columns default to every
    column that is not a known target column.
    """
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        if target not in header:
            raise ValueError(f"target column {target!r} not in {header}")
        if input_names is None:
            reserved = {"T_o_max_C", "T_osc_C", "case_index", "config_hash",
                        target}
            input_names = [h for h in header if h not in reserved]
        X, y = [], []
        for row in reader:
            X.append([float(row[n]) for n in input_names])
            y.append(float(row[target]))
    return TrainingSet(np.asarray(X), np.asarray(y), input_names, target)


@dataclass
class SurrogateModel:
    """Trained network weights plus normalization ranges and provenance."""

    input_dim: int
    hidden: list[int]
    W1: np.ndarray  # (hidden, input_dim)
    b1: np.ndarray  # (hidden,)
    W2: np.ndarray  # (1, hidden)
    b2: np.ndarray  # (1,)
    in_min: np.ndarray
    in_max: np.ndarray
    out_min: float
    out_max: float
    target: str
    seed: int
    train_config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden": list(self.hidden),
            "W1": self.W1.tolist(),
            "b1": self.b1.tolist(),
            "W2": self.W2.tolist(),
            "b2": self.b2.tolist(),
            "in_min": self.in_min.tolist(),
            "in_max": self.in_max.tolist(),
            "out_min": self.out_min,
            "out_max": self.out_max,
            "target": self.target,
            "seed": self.seed,
            "train_config": self.train_config,
        }

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "SurrogateModel":
        return cls(
            input_dim=d["input_dim"], hidden=list(d["hidden"]),
            W1=np.asarray(d["W1"]), b1=np.asarray(d["b1"]),
            W2=np.asarray(d["W2"]), b2=np.asarray(d["b2"]),
            in_min=np.asarray(d["in_min"]), in_max=np.asarray(d["in_max"]),
            out_min=d["out_min"], out_max=d["out_max"],
            target=d["target"], seed=d["seed"],
            train_config=d.get("train_config", {}),
        )

    @classmethod
    def load(cls, path) -> "SurrogateModel":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def _normalize(v, lo, hi):
    span = np.where(hi > lo, hi - lo, 1.0)
    return 2.0 * (v - lo) / span - 1.0


def _denormalize(v, lo, hi):
    return (v + 1.0) / 2.0 * (hi - lo) + lo


def _forward_normalized(model: SurrogateModel, Xn: np.ndarray) -> np.ndarray:
    A = activation(Xn @ model.W1.T + model.b1)
    return (A @ model.W2.T).ravel() + model.b2[0]


def predict(model: SurrogateModel, x) -> float | np.ndarray:
    """Metric estimate in physical units for one input vector or a batch."""
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if X.shape[1] != model.input_dim:
        raise ValueError(
            f"expected {model.input_dim} inputs, got {X.shape[1]}")
    if np.any(X < model.in_min - 1e-12) or np.any(X > model.in_max + 1e-12):
        warnings.warn("input outside training bounds; extrapolating",
                      ExtrapolationWarning, stacklevel=2)
    Xn = _normalize(X, model.in_min, model.in_max)
    yn = _forward_normalized(model, Xn)
    y = _denormalize(yn, model.out_min, model.out_max)
    return float(y[0]) if np.asarray(x).ndim == 1 else y


def _pack(W1, b1, W2, b2):
    return np.concatenate([W1.ravel(), b1, W2.ravel(), b2])


def _unpack(p, n_in, n_hid):
    i = 0
    W1 = p[i:i + n_hid * n_in].reshape(n_hid, n_in); i += n_hid * n_in
    b1 = p[i:i + n_hid]; i += n_hid
    W2 = p[i:i + n_hid].reshape(1, n_hid); i += n_hid
    b2 = p[i:i + 1]
    return W1, b1, W2, b2


def _forward_jacobian(p, Xn, n_hid):
    """Network output and its Jacobian w.r.t. every weight, both per sample."""
    n, n_in = Xn.shape
    W1, b1, W2, b2 = _unpack(p, n_in, n_hid)
    A = activation(Xn @ W1.T + b1)          # (n, h)
    y = (A @ W2.T).ravel() + b2[0]
    dact = (1.0 - A * A) * W2.ravel()       # (n, h)
    J_W1 = dact[:, :, None] * Xn[:, None, :]  # (n, h, n_in)
    J = np.concatenate([
        J_W1.reshape(n, n_hid * n_in),
        dact,
        A,
        np.ones((n, 1)),
    ], axis=1)
    return y, J


def network_jacobian(model: SurrogateModel, Xn: np.ndarray) -> np.ndarray:
    """Jacobian of the normalized-space output at the model's weights."""
    p = _pack(model.W1, model.b1, model.W2, model.b2)
    _, J = _forward_jacobian(p, Xn, model.hidden[0])
    return J


def train_lm(data: TrainingSet, hidden: int = 10, seed: int = 0,
             max_epochs: int = 300, val_fraction: float = 0.15,
             mu0: float = 1e-3, mu_max: float = 1e10,
             grad_tol: float = 1e-7, patience: int = 6) -> SurrogateModel:
    """Fit a surrogate by damped Gauss-Newton least squares.

    Each epoch solves (J^T J + mu I) dw = J^T e, shrinking mu x0.1 on an
    accepted step and growing it x10 on a rejected one. Stops on max_epochs,
    mu overflow, gradient norm below grad_tol, or validation error rising
    for `patience` consecutive epochs. Deterministic for a given seed.
    """
    if len(data) < 10:
        raise ValueError("need at least 10 training rows")
    rng = np.random.default_rng(seed)
    n, n_in = data.X.shape

    in_min = data.X.min(axis=0)
    in_max = data.X.max(axis=0)
    out_min = float(data.y.min())
    out_max = float(data.y.max())
    config = {
        "hidden": hidden, "max_epochs": max_epochs,
        "val_fraction": val_fraction, "mu0": mu0, "mu_max": mu_max,
        "grad_tol": grad_tol, "patience": patience,
        "init": "uniform[-0.5,0.5]",
    }

    if out_max <= out_min:
        warnings.warn("constant training targets; returning constant "
                      "predictor", DegenerateDataWarning, stacklevel=2)
        return SurrogateModel(
            input_dim=n_in, hidden=[hidden],
            W1=np.zeros((hidden, n_in)), b1=np.zeros(hidden),
            W2=np.zeros((1, hidden)), b2=np.array([0.0]),
            in_min=in_min, in_max=in_max,
            out_min=out_min - 0.5, out_max=out_min + 0.5,
            target=data.target_name, seed=seed, train_config=config)

    Xn = _normalize(data.X, in_min, in_max)
    yn = _normalize(data.y, out_min, out_max)

    order = rng.permutation(n)
    n_val = int(round(val_fraction * n))
    val_idx = order[:n_val]
    tr_idx = order[n_val:]
    Xtr, ytr = Xn[tr_idx], yn[tr_idx]
    Xval, yval = Xn[val_idx], yn[val_idx]

    n_params = hidden * n_in + hidden + hidden + 1
    p = rng.uniform(-0.5, 0.5, size=n_params)

    def sse(params, X, y):
        out, _ = _forward_jacobian(params, X, hidden)
        return float(np.sum((y - out) ** 2))

    mu = mu0
    best_val = np.inf
    best_p = p.copy()
    val_rises = 0
    train_sse = sse(p, Xtr, ytr)

    for _ in range(max_epochs):
        yhat, J = _forward_jacobian(p, Xtr, hidden)
        e = ytr - yhat
        g = J.T @ e
        if np.linalg.norm(g) < grad_tol:
            break
        JtJ = J.T @ J
        accepted = False
        while mu <= mu_max:
            try:
                step = np.linalg.solve(JtJ + mu * np.eye(n_params), g)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            new_sse = sse(p + step, Xtr, ytr)
            if new_sse < train_sse:
                p = p + step
                train_sse = new_sse
                mu = max(mu * 0.1, 1e-20)
                accepted = True
                break
            mu *= 10.0
        if not accepted:
            break  # mu overflow: no descent direction left

        if Xval.shape[0] >= 1:
            val_sse = sse(p, Xval, yval)
            if val_sse < best_val - 1e-15:
                best_val = val_sse
                best_p = p.copy()
                val_rises = 0
            else:
                val_rises += 1
                if val_rises >= patience:
                    break
        else:
            best_p = p.copy()

    W1, b1, W2, b2 = _unpack(best_p, n_in, hidden)
    return SurrogateModel(
        input_dim=n_in, hidden=[hidden],
        W1=W1.copy(), b1=b1.copy(), W2=W2.copy(), b2=b2.copy(),
        in_min=in_min, in_max=in_max, out_min=out_min, out_max=out_max,
        target=data.target_name, seed=seed, train_config=config)


def r_squared(model: SurrogateModel, test: TrainingSet) -> float:
    """Coefficient of determination on denormalized predictions."""
    if len(test) < 2:
        raise ValueError("need at least 2 test rows")
    ss_tot = float(np.sum((test.y - test.y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("zero-variance test targets")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExtrapolationWarning)
        pred = predict(model, test.X)
    ss_res = float(np.sum((test.y - pred) ** 2))
    return 1.0 - ss_res / ss_tot
