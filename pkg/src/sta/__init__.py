"""Soft-supervised topological autoencoder (STA)."""

from .core import (
    ForwardTrace,
    Gradients,
    GridTopology,
    StaModel,
    TrainConfig,
    annealing_width,
    apply_updates,
    best_matching_unit,
    compute_gradients,
    forward,
    grid_distance,
    hidden_activations,
    hidden_delta,
    loss,
    neighborhood_coeff,
    output_deltas,
    sigmoid,
)
from .data import Dataset, bundled_dataset, gen_preset, load_csv, normalize, one_hot
from .serialize import load_model, save_model
from .train import RngStream, TrainHistory, fit, gradient_check, init_model, train_epoch
from .analyze import MapProjection, knn_map_accuracy, map_purity, project, render_svg

__version__ = "0.1.0"
