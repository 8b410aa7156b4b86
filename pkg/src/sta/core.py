"""Soft-supervised topological autoencoder: model types and exact per-sample math.

A single hidden layer of radial units laid out on a 2-D grid feeds two sigmoid
heads, a decoder reconstructing the input and a classifier predicting the
label. ``kappa`` mixes the two squared-error costs; ``kappa=0`` is a pure
autoencoder and ``kappa=1`` a pure classifier.

Everything here works on one sample at a time, which is how the model is
trained (plain per-sample SGD).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import expit

from .errors import InvalidArgumentError, InvalidConfigurationError, TrainingDivergedError

__all__ = [
    "GridTopology",
    "StaModel",
    "TrainConfig",
    "ForwardTrace",
    "Gradients",
    "sigmoid",
    "grid_distance",
    "best_matching_unit",
    "annealing_width",
    "neighborhood_coeff",
    "hidden_activations",
    "forward",
    "loss",
    "loss_terms",
    "output_deltas",
    "hidden_delta",
    "gradients_from_trace",
    "compute_gradients",
    "apply_updates",
]


@dataclass(frozen=True)
class GridTopology:
    """Row-major 2-D grid of hidden units; unit ``j`` sits at ``divmod(j, cols)``."""

    rows: int
    cols: int

    def __post_init__(self):
        if int(self.rows) != self.rows or int(self.cols) != self.cols:
            raise InvalidArgumentError("grid dimensions must be integers")
        if self.rows < 1 or self.cols < 1:
            raise InvalidArgumentError(f"grid dimensions must be positive, got {self.rows}x{self.cols}")
        if self.rows * self.cols < 4:
            raise InvalidArgumentError(f"grid needs at least 4 units, got {self.rows}x{self.cols}")

    @property
    def n_units(self) -> int:
        return self.rows * self.cols

    @cached_property
    def coords(self) -> np.ndarray:
        """(n_units, 2) integer array of (row, col) per unit."""
        j = np.arange(self.n_units)
        out = np.stack([j // self.cols, j % self.cols], axis=1)
        out.setflags(write=False)
        return out

    @cached_property
    def distances(self) -> np.ndarray:
        """Pairwise Euclidean distances between unit grid positions."""
        c = self.coords.astype(float)
        diff = c[:, None, :] - c[None, :, :]
        out = np.sqrt((diff**2).sum(axis=2))
        out.setflags(write=False)
        return out

    def index(self, row: int, col: int) -> int:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise InvalidArgumentError(f"({row}, {col}) outside {self.rows}x{self.cols} grid")
        return int(row) * self.cols + int(col)

    def coord(self, j: int) -> tuple[int, int]:
        self.check_unit(j)
        return divmod(int(j), self.cols)

    def check_unit(self, j) -> None:
        if not (0 <= j < self.n_units) or int(j) != j:
            raise InvalidArgumentError(f"unit index {j} out of range [0, {self.n_units})")


@dataclass
class StaModel:
    """Reference vectors plus decoder/classifier weights.

    ``W`` and ``V_dec`` are (n_units, d), ``V_cls`` is (n_units, C). Column
    ``k`` of ``V_dec`` feeds decoder output ``k``. ``C`` may be 0 for a model
    trained purely as an autoencoder.
    """

    grid: GridTopology
    W: np.ndarray
    V_dec: np.ndarray
    V_cls: np.ndarray
    sigma_rbf: float = 1.0
    class_names: tuple[str, ...] = ()
    norm_min: Optional[np.ndarray] = None
    norm_max: Optional[np.ndarray] = None

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=float)
        self.V_dec = np.asarray(self.V_dec, dtype=float)
        self.V_cls = np.asarray(self.V_cls, dtype=float)
        if self.V_cls.ndim == 1 and self.V_cls.size == 0:
            self.V_cls = self.V_cls.reshape(self.grid.n_units, 0)
        self.class_names = tuple(str(c) for c in self.class_names)
        if self.norm_min is not None:
            self.norm_min = np.asarray(self.norm_min, dtype=float)
        if self.norm_max is not None:
            self.norm_max = np.asarray(self.norm_max, dtype=float)
        self.validate()

    @property
    def input_dim(self) -> int:
        return self.W.shape[1]

    @property
    def num_classes(self) -> int:
        return self.V_cls.shape[1]

    def validate(self) -> None:
        n = self.grid.n_units
        if self.W.ndim != 2 or self.W.shape[0] != n:
            raise InvalidArgumentError(f"W must be ({n}, d), got {self.W.shape}")
        d = self.W.shape[1]
        if d < 1:
            raise InvalidArgumentError("input dimension must be at least 1")
        if self.V_dec.shape != (n, d):
            raise InvalidArgumentError(f"V_dec must be ({n}, {d}), got {self.V_dec.shape}")
        if self.V_cls.ndim != 2 or self.V_cls.shape[0] != n:
            raise InvalidArgumentError(f"V_cls must be ({n}, C), got {self.V_cls.shape}")
        if self.class_names and len(self.class_names) != self.V_cls.shape[1]:
            raise InvalidArgumentError(
                f"{len(self.class_names)} class names for {self.V_cls.shape[1]} class outputs"
            )
        if not (self.sigma_rbf > 0 and math.isfinite(self.sigma_rbf)):
            raise InvalidArgumentError(f"sigma_rbf must be positive, got {self.sigma_rbf}")
        for name in ("W", "V_dec", "V_cls"):
            if not np.isfinite(getattr(self, name)).all():
                raise InvalidArgumentError(f"{name} contains non-finite values")
        for name in ("norm_min", "norm_max"):
            arr = getattr(self, name)
            if arr is not None and arr.shape != (d,):
                raise InvalidArgumentError(f"{name} must have length {d}, got shape {arr.shape}")

    def copy(self) -> "StaModel":
        return StaModel(
            grid=self.grid,
            W=self.W.copy(),
            V_dec=self.V_dec.copy(),
            V_cls=self.V_cls.copy(),
            sigma_rbf=self.sigma_rbf,
            class_names=self.class_names,
            norm_min=None if self.norm_min is None else self.norm_min.copy(),
            norm_max=None if self.norm_max is None else self.norm_max.copy(),
        )


@dataclass
class TrainConfig:
    """Hyperparameters for one training run.

    ``sigma0`` defaults to half the longer grid side and ``t_inf`` to
    ``epochs``, so the cosine annealing covers the whole run.
    """

    kappa: float = 0.5
    eta: float = 0.05
    sigma0: Optional[float] = None
    sigma_inf: float = 0.5
    t_inf: Optional[int] = None
    epochs: int = 500
    rows: int = 15
    cols: int = 15
    sigma_rbf: float = 1.0
    seed: int = 42

    def __post_init__(self):
        if self.sigma0 is None:
            self.sigma0 = max(self.rows, self.cols) / 2
        if self.t_inf is None:
            self.t_inf = max(int(self.epochs), 1)
        self.validate()

    @property
    def grid(self) -> GridTopology:
        return GridTopology(self.rows, self.cols)

    def validate(self) -> None:
        if not (0.0 <= self.kappa <= 1.0):
            raise InvalidConfigurationError(f"kappa must lie in [0, 1], got {self.kappa}")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise InvalidConfigurationError(f"eta must be a positive real, got {self.eta}")
        if not (self.sigma0 > self.sigma_inf > 0):
            raise InvalidConfigurationError(
                f"need sigma0 > sigma_inf > 0, got sigma0={self.sigma0}, sigma_inf={self.sigma_inf}"
            )
        if int(self.t_inf) != self.t_inf or self.t_inf < 1:
            raise InvalidConfigurationError(f"t_inf must be a positive integer, got {self.t_inf}")
        if int(self.epochs) != self.epochs or self.epochs < 0:
            raise InvalidConfigurationError(f"epochs must be a non-negative integer, got {self.epochs}")
        if self.epochs > self.t_inf:
            raise InvalidConfigurationError(f"epochs ({self.epochs}) may not exceed t_inf ({self.t_inf})")
        if not (self.sigma_rbf > 0 and math.isfinite(self.sigma_rbf)):
            raise InvalidConfigurationError(f"sigma_rbf must be positive, got {self.sigma_rbf}")
        if not (0 <= self.seed < 2**64) or int(self.seed) != self.seed:
            raise InvalidConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        try:
            GridTopology(self.rows, self.cols)
        except InvalidArgumentError as exc:
            raise InvalidConfigurationError(str(exc)) from None

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "eta": self.eta,
            "sigma0": self.sigma0,
            "sigma_inf": self.sigma_inf,
            "t_inf": self.t_inf,
            "epochs": self.epochs,
            "rows": self.rows,
            "cols": self.cols,
            "sigma_rbf": self.sigma_rbf,
            "seed": self.seed,
        }


@dataclass
class ForwardTrace:
    win: int
    H: np.ndarray
    O_dec: np.ndarray
    O_cls: np.ndarray = field(default_factory=lambda: np.zeros(0))


class Gradients(NamedTuple):
    W: np.ndarray
    V_dec: np.ndarray
    V_cls: np.ndarray


def sigmoid(x):
    """Logistic function, evaluated without overflow for any finite input."""
    out = expit(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


def grid_distance(a: int, b: int, grid: GridTopology) -> float:
    grid.check_unit(a)
    grid.check_unit(b)
    return float(grid.distances[int(a), int(b)])


def _as_input(X, model: StaModel) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape != (model.input_dim,):
        raise InvalidArgumentError(f"input must have shape ({model.input_dim},), got {X.shape}")
    return X


def _sq_distances(X: np.ndarray, model: StaModel) -> np.ndarray:
    diff = X - model.W
    return np.einsum("ij,ij->i", diff, diff)


def best_matching_unit(X, model: StaModel) -> int:
    """Index of the nearest reference vector; ties go to the lowest index."""
    X = _as_input(X, model)
    return int(np.argmin(_sq_distances(X, model)))


def annealing_width(t, config: TrainConfig) -> float:
    """Cosine-annealed neighbourhood width, ``sigma0`` at t=0 down to ``sigma_inf`` at ``t_inf``.

    Epochs past ``t_inf`` clamp to ``sigma_inf``.
    """
    if t < 0:
        raise InvalidArgumentError(f"epoch must be non-negative, got {t}")
    s0, s_inf, t_inf = config.sigma0, config.sigma_inf, config.t_inf
    if t == 0:
        return float(s0)
    if t >= t_inf:
        return float(s_inf)
    # written as s0 - drop so rounding can never push S above s0
    return s0 - 0.5 * (s0 - s_inf) * (1.0 - math.cos(math.pi * t / t_inf))


def neighborhood_coeff(j, win, t, config: TrainConfig, grid: GridTopology) -> float:
    return math.exp(-grid_distance(win, j, grid) / annealing_width(t, config))


def _hidden(sq_dist, model: StaModel, win: int, width: float) -> np.ndarray:
    # one exp of the summed exponents; the grid term is exactly 0 at win
    return np.exp(-(model.grid.distances[win] / width + sq_dist / model.sigma_rbf**2))


def hidden_activations(X, model: StaModel, win: int, t, config: TrainConfig) -> np.ndarray:
    """Hidden layer output: grid neighbourhood of ``win`` times the radial response of each unit."""
    X = _as_input(X, model)
    model.grid.check_unit(win)
    return _hidden(_sq_distances(X, model), model, int(win), annealing_width(t, config))


def forward(X, t, model: StaModel, config: TrainConfig, win: Optional[int] = None) -> ForwardTrace:
    """Run one sample through the network.

    Pass ``win`` to pin the winning unit instead of searching for it; the
    gradient checker uses this to hold the winner fixed under perturbation.
    """
    X = _as_input(X, model)
    sq = _sq_distances(X, model)
    if win is None:
        win = int(np.argmin(sq))
    else:
        model.grid.check_unit(win)
        win = int(win)
    H = _hidden(sq, model, win, annealing_width(t, config))
    O_dec = expit(H @ model.V_dec)
    O_cls = expit(H @ model.V_cls) if model.num_classes else np.zeros(0)
    return ForwardTrace(win=win, H=H, O_dec=O_dec, O_cls=O_cls)


def _check_targets(trace: ForwardTrace, X, T, kappa=None):
    X = np.asarray(X, dtype=float)
    T = np.zeros(0) if T is None else np.asarray(T, dtype=float)
    if X.shape != trace.O_dec.shape:
        raise InvalidArgumentError(f"input shape {X.shape} does not match decoder {trace.O_dec.shape}")
    if T.shape != trace.O_cls.shape:
        raise InvalidArgumentError(f"target shape {T.shape} does not match classifier {trace.O_cls.shape}")
    if kappa is not None:
        if not (0.0 <= kappa <= 1.0):
            raise InvalidConfigurationError(f"kappa must lie in [0, 1], got {kappa}")
        if kappa > 0 and T.size == 0:
            raise InvalidConfigurationError("kappa > 0 requires class targets")
    return X, T


def loss_terms(trace: ForwardTrace, X, T, kappa: float) -> tuple[float, float]:
    """The kappa-weighted (reconstruction, classification) parts of the loss."""
    X, T = _check_targets(trace, X, T, kappa)
    rec = 0.5 * (1.0 - kappa) * float(np.sum((trace.O_dec - X) ** 2))
    cls = 0.5 * kappa * float(np.sum((trace.O_cls - T) ** 2)) if T.size else 0.0
    return rec, cls


def loss(trace: ForwardTrace, X, T, kappa: float) -> float:
    rec, cls = loss_terms(trace, X, T, kappa)
    return rec + cls


def output_deltas(trace: ForwardTrace, X, T) -> tuple[np.ndarray, np.ndarray]:
    """Error signals at the decoder and classifier pre-activations, without the kappa weights."""
    X, T = _check_targets(trace, X, T)
    O, P = trace.O_dec, trace.O_cls
    return (O - X) * O * (1.0 - O), (P - T) * P * (1.0 - P)


def hidden_delta(delta_dec, delta_cls, model: StaModel, kappa: float) -> np.ndarray:
    delta_dec = np.asarray(delta_dec, dtype=float)
    delta_cls = np.asarray(delta_cls, dtype=float)
    if delta_dec.shape != (model.input_dim,) or delta_cls.shape != (model.num_classes,):
        raise InvalidArgumentError("delta shapes do not match the model heads")
    back = (1.0 - kappa) * (model.V_dec @ delta_dec) + kappa * (model.V_cls @ delta_cls)
    return back / model.sigma_rbf**2


def gradients_from_trace(trace: ForwardTrace, X, T, model: StaModel, kappa: float) -> Gradients:
    """Exact gradient of the loss with the winning unit held fixed.

    The radial factor contributes ``2/sigma_rbf**2`` on differentiation, so
    the reference-vector gradient carries an explicit factor 2 on top of the
    ``1/sigma_rbf**2`` inside :func:`hidden_delta`.  Descending it moves
    ``W_j`` toward ``X`` when ``delta_hid_j < 0`` and away from it when
    ``delta_hid_j > 0``.
    """
    X, T = _check_targets(trace, X, T, kappa)
    O, P, H = trace.O_dec, trace.O_cls, trace.H
    a, b = 1.0 - kappa, kappa
    d_dec = (O - X) * O * (1.0 - O)
    d_cls = (P - T) * P * (1.0 - P)
    Hc = H[:, None]
    g_dec = Hc * (a * d_dec)
    g_cls = Hc * (b * d_cls)
    back = model.V_dec @ (a * d_dec) + model.V_cls @ (b * d_cls)
    g_W = ((2.0 / model.sigma_rbf**2) * back * H)[:, None] * (X - model.W)
    return Gradients(g_W, g_dec, g_cls)


def compute_gradients(X, T, t, model: StaModel, config: TrainConfig, win: Optional[int] = None) -> Gradients:
    trace = forward(X, t, model, config, win=win)
    return gradients_from_trace(trace, X, T, model, config.kappa)


def apply_updates(model: StaModel, grads: Sequence[np.ndarray], eta: float, epoch=None, sample=None) -> StaModel:
    """In-place SGD step ``p -= eta * grad``; refuses non-finite gradients."""
    g_W, g_dec, g_cls = grads
    if g_W.shape != model.W.shape or g_dec.shape != model.V_dec.shape or g_cls.shape != model.V_cls.shape:
        raise InvalidArgumentError("gradient shapes do not match the model")
    # a sum is NaN/Inf whenever any term is (or the sum overflows, which is divergence too)
    if not math.isfinite(g_W.sum() + g_dec.sum() + g_cls.sum()):
        bad = [n for n, g in (("W", g_W), ("V_dec", g_dec), ("V_cls", g_cls)) if not np.isfinite(g).all()]
        raise TrainingDivergedError(f"non-finite gradient for {', '.join(bad) or 'parameters'}", epoch=epoch, sample=sample)
    if eta == 0:
        return model
    model.W -= eta * g_W
    model.V_dec -= eta * g_dec
    model.V_cls -= eta * g_cls
    return model
