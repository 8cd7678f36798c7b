"""Stepwise-elimination sample selection for training on noisy labels."""

from .datagen import LabeledDataset, NoiseSpec, empirical_noise_rate, inject_noise, load_csv, make_blobs
from .errors import ConfigError, DataError, PolicyError, ShapeError, StateError
from .metrics import NoiseReport, aggregate_runs, auroc, noise_prf, overhead, test_accuracy
from .model import ModelState, OptimizerConfig, cosine_lr, forward_logits, init_model, per_sample_loss, sgd_epoch
from .selection import ScheduleConfig, SelectionState, objective_J, policy_epoch, rho_max_from_estimate, rho_schedule, select_kept

__version__ = "0.1.0"
