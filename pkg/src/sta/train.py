"""Seeded initialisation, the per-sample SGD loop, and a finite-difference gradient check."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import (
    StaModel,
    TrainConfig,
    annealing_width,
    apply_updates,
    forward,
    gradients_from_trace,
    loss,
    loss_terms,
)
from .data import Dataset
from .errors import InvalidArgumentError, InvalidConfigurationError, TrainingDivergedError

log = logging.getLogger(__name__)

HISTORY_HEADER = ("epoch", "S_t", "loss_rec", "loss_cls", "loss_total")

# independent substreams so that, e.g., the number of classes never shifts the shuffle order
_STREAM_W, _STREAM_DEC, _STREAM_CLS, _STREAM_SHUFFLE = range(4)


@dataclass(frozen=True)
class RngStream:
    """Named PCG64 substreams derived from one 64-bit seed via numpy's SeedSequence."""

    seed: int
    algorithm: str = "PCG64"

    def generator(self, *key: int) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=tuple(int(k) for k in key))
        return np.random.Generator(np.random.PCG64(ss))

    def epoch_order(self, t: int, n: int) -> np.ndarray:
        return self.generator(_STREAM_SHUFFLE, t).permutation(n)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    S_t: float
    loss_rec: float
    loss_cls: float
    loss_total: float


@dataclass
class TrainHistory:
    records: list[EpochRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def append(self, rec: EpochRecord) -> None:
        self.records.append(rec)

    def totals(self) -> np.ndarray:
        return np.array([r.loss_total for r in self.records])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HISTORY_HEADER)
        for r in self.records:
            writer.writerow([r.epoch] + [format(v, ".17g") for v in (r.S_t, r.loss_rec, r.loss_cls, r.loss_total)])
        return buf.getvalue()

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_csv(), encoding="utf-8")
        return path


def _check_dataset(dataset: Dataset, config: TrainConfig) -> None:
    if dataset.n == 0:
        raise InvalidArgumentError("dataset is empty")
    if config.kappa > 0 and not dataset.has_labels:
        raise InvalidConfigurationError(f"kappa={config.kappa} > 0 needs labelled data")


def init_model(config: TrainConfig, dataset: Dataset, rng: Optional[RngStream] = None) -> StaModel:
    """Reference vectors uniform within each feature's data range; head weights uniform in [-0.5, 0.5]."""
    _check_dataset(dataset, config)
    rng = rng or RngStream(config.seed)
    grid = config.grid
    n, d, C = grid.n_units, dataset.d, dataset.num_classes
    lo = dataset.X.min(axis=0)
    hi = dataset.X.max(axis=0)
    W = lo + (hi - lo) * rng.generator(_STREAM_W).random((n, d))
    V_dec = rng.generator(_STREAM_DEC).uniform(-0.5, 0.5, (n, d))
    V_cls = rng.generator(_STREAM_CLS).uniform(-0.5, 0.5, (n, C))
    return StaModel(
        grid=grid,
        W=W,
        V_dec=V_dec,
        V_cls=V_cls,
        sigma_rbf=config.sigma_rbf,
        class_names=dataset.class_names if C else (),
        norm_min=dataset.norm_min,
        norm_max=dataset.norm_max,
    )


def train_epoch(model: StaModel, dataset: Dataset, t: int, config: TrainConfig, rng: Optional[RngStream] = None) -> EpochRecord:
    """One pass over the data in a seeded order, updating ``model`` in place.

    Losses are accumulated per sample before that sample's update.
    """
    if not (0 <= t < config.epochs):
        raise InvalidArgumentError(f"epoch {t} outside [0, {config.epochs})")
    _check_dataset(dataset, config)
    rng = rng or RngStream(config.seed)
    kappa, eta = config.kappa, config.eta
    X, T = dataset.X, dataset.targets()
    if model.num_classes == 0:
        T = np.zeros((dataset.n, 0))
    elif T.shape[1] != model.num_classes:
        raise InvalidArgumentError(f"dataset has {T.shape[1]} classes, model has {model.num_classes}")
    rec_sum = cls_sum = 0.0
    for i in rng.epoch_order(t, dataset.n):
        x, target = X[i], T[i]
        trace = forward(x, t, model, config)
        rec, cls = loss_terms(trace, x, target, kappa)
        rec_sum += rec
        cls_sum += cls
        grads = gradients_from_trace(trace, x, target, model, kappa)
        apply_updates(model, grads, eta, epoch=t, sample=int(i))
    for name in ("W", "V_dec", "V_cls"):
        if not np.isfinite(getattr(model, name)).all():
            raise TrainingDivergedError(f"{name} became non-finite", epoch=t)
    n = dataset.n
    return EpochRecord(t, annealing_width(t, config), rec_sum / n, cls_sum / n, (rec_sum + cls_sum) / n)


def fit(dataset: Dataset, config: TrainConfig) -> tuple[StaModel, TrainHistory]:
    _check_dataset(dataset, config)
    rng = RngStream(config.seed)
    model = init_model(config, dataset, rng)
    history = TrainHistory()
    for t in range(config.epochs):
        rec = train_epoch(model, dataset, t, config, rng)
        history.append(rec)
        if t % 100 == 0 or t == config.epochs - 1:
            log.debug("epoch %d S=%.4f loss=%.6f", t, rec.S_t, rec.loss_total)
    return model, history


def gradient_check(model: StaModel, X, T, t: int, config: TrainConfig, step: float = 1e-5, atol: float = 1e-8) -> float:
    """Worst relative error between analytic gradients and central differences of the loss.

    The winning unit is found once on the unperturbed model and held fixed.
    Entries whose absolute discrepancy is at most ``atol`` count as exact.
    """
    X = np.asarray(X, dtype=float)
    T = np.zeros(0) if T is None else np.asarray(T, dtype=float)
    kappa = config.kappa
    trace = forward(X, t, model, config)
    win = trace.win
    analytic = gradients_from_trace(trace, X, T, model, kappa)
    probe = model.copy()
    worst = 0.0
    for name, grad in zip(("W", "V_dec", "V_cls"), analytic):
        param = getattr(probe, name)
        for idx in np.ndindex(param.shape):
            orig = param[idx]
            param[idx] = orig + step
            up = loss(forward(X, t, probe, config, win=win), X, T, kappa)
            param[idx] = orig - step
            down = loss(forward(X, t, probe, config, win=win), X, T, kappa)
            param[idx] = orig
            numeric = (up - down) / (2 * step)
            err = abs(numeric - grad[idx])
            if err <= atol:
                continue
            worst = max(worst, err / max(abs(numeric), abs(grad[idx])))
    return worst
