"""Loss-based sample selection: the stepwise-elimination schedule and its baselines.

Every method exposes the same per-epoch hook, :func:`policy_epoch`, which
returns the indices to train on this epoch plus an optional loss cap.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, PolicyError
from .model import per_sample_loss
from .utils import round_half_away

METHODS = ("baseline", "truncation", "self_paced", "one_shot", "step_e", "oracle")
# methods whose gate vector marks samples as dropped
FILTERING_METHODS = ("self_paced", "one_shot", "step_e")

SELF_PACED_START = 0.5
TRUNCATION_FIT_EPOCH = 1


@dataclass
class ScheduleConfig:
    T_warm: int = 10
    T_total: int = 60
    rho_max: float = 0.45

    def __post_init__(self):
        for name in ("T_warm", "T_total"):
            v = getattr(self, name)
            if int(v) != v:
                raise ConfigError("must be an integer", f"schedule.{name}")
            setattr(self, name, int(v))
        if self.T_total < 1:
            raise ConfigError("must be >= 1", "schedule.T_total")
        if not 0 <= self.T_warm < self.T_total:
            raise ConfigError(f"warm-up {self.T_warm} must lie in [0, T_total={self.T_total})", "schedule.T_warm")
        if not 0.0 <= self.rho_max <= 0.5:
            raise ConfigError(f"{self.rho_max} exceeds the 0.5 cap (must lie in [0, 0.5])", "schedule.rho_max")


@dataclass
class SelectionState:
    method: str
    gamma: np.ndarray
    probe_losses: np.ndarray = None
    # epoch of the latest probe pass, None before the first one
    probe_epoch: int = None
    rho_t: float = 0.0
    memory: dict = field(default_factory=dict)

    @classmethod
    def initial(cls, method, n):
        if method not in METHODS:
            raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}", "run.methods")
        return cls(method=method, gamma=np.ones(n, dtype=bool))

    @property
    def n(self):
        return len(self.gamma)

    def dropped(self):
        return np.flatnonzero(~self.gamma)


def rho_schedule(t, cfg):
    """Drop ratio at epoch ``t``: zero through warm-up, then a linear ramp toward ``rho_max``."""
    if not 0 <= t < cfg.T_total:
        raise ConfigError(f"epoch {t} outside [0, {cfg.T_total})", "t")
    if t < cfg.T_warm:
        return 0.0
    return cfg.rho_max * (t - cfg.T_warm) / (cfg.T_total - cfg.T_warm)


def rho_max_from_estimate(rho_hat):
    return min(0.5, rho_hat + 0.05)


def _check_losses(losses):
    losses = np.asarray(losses, dtype=float)
    if np.isnan(losses).any():
        raise DataError("NaN in per-sample losses")
    return losses


def lowest_k(losses, k):
    """Indices of the ``k`` smallest losses, ties broken toward the lower index, in ascending index order."""
    order = np.argsort(_check_losses(losses), kind="stable")
    return np.sort(order[:k])


def select_kept(losses, keep_fraction):
    n = len(losses)
    if n < 1:
        raise DataError("cannot select from an empty loss vector")
    if not 0.0 < keep_fraction <= 1.0:
        raise ConfigError("keep fraction must lie in (0, 1]", "keep_fraction")
    return lowest_k(losses, max(1, round_half_away(keep_fraction * n)))


def _probe(state, model, ds, t, probe):
    losses = np.asarray(probe(model, ds, np.arange(state.n)), dtype=float)
    if losses.shape != (state.n,):
        raise PolicyError(f"probe returned shape {losses.shape}, expected ({state.n},)")
    state.probe_losses = _check_losses(losses)
    state.probe_epoch = t
    return state.probe_losses


def _gate(state, kept):
    gamma = np.zeros(state.n, dtype=bool)
    gamma[kept] = True
    state.gamma = gamma
    state.rho_t = 1.0 - len(kept) / state.n
    return kept


def _all(state):
    state.gamma = np.ones(state.n, dtype=bool)
    state.rho_t = 0.0
    return np.arange(state.n)


def _baseline(state, model, ds, t, cfg, probe, permanent_drop):
    return _all(state), None


def _step_e(state, model, ds, t, cfg, probe, permanent_drop):
    rho = rho_schedule(t, cfg)
    n_drop = round_half_away(rho * state.n)
    if n_drop == 0:
        # warm-up: nothing is dropped, so the probe is skipped
        kept = _all(state)
    else:
        losses = _probe(state, model, ds, t, probe)
        if permanent_drop:
            already = ~state.gamma
            # previously dropped samples sort last, so they stay dropped
            ranked = np.where(already, np.inf, losses)
            kept = lowest_k(ranked, state.n - max(n_drop, int(already.sum())))
        else:
            kept = lowest_k(losses, state.n - n_drop)
        _gate(state, kept)
    state.rho_t = rho
    return kept, None


def self_paced_keep_ratio(t, cfg):
    """Keep ratio for the self-paced baseline: 1.0 during warm-up, then 0.5 rising linearly to 1.0 at the last epoch."""
    if t < cfg.T_warm:
        return 1.0
    span = cfg.T_total - 1 - cfg.T_warm
    if span <= 0:
        return 1.0
    return SELF_PACED_START + (1.0 - SELF_PACED_START) * (t - cfg.T_warm) / span


def _self_paced(state, model, ds, t, cfg, probe, permanent_drop):
    k = self_paced_keep_ratio(t, cfg)
    state.memory["keep_ratio"] = k
    if t < cfg.T_warm:
        return _all(state), None
    losses = _probe(state, model, ds, t, probe)
    kept = _gate(state, lowest_k(losses, state.n - round_half_away((1.0 - k) * state.n)))
    return kept, None


def _one_shot(state, model, ds, t, cfg, probe, permanent_drop):
    if t < cfg.T_warm:
        return _all(state), None
    if "drop_set" not in state.memory:
        # normally t == T_warm; a late first call selects at that epoch instead
        losses = _probe(state, model, ds, t, probe)
        n_drop = round_half_away(cfg.rho_max * state.n)
        kept = lowest_k(losses, state.n - n_drop)
        _gate(state, kept)
        state.memory["drop_set"] = state.dropped()
        return kept, None
    return np.flatnonzero(state.gamma), None


def _truncation(state, model, ds, t, cfg, probe, permanent_drop):
    if t == TRUNCATION_FIT_EPOCH and "tau" not in state.memory:
        losses = _probe(state, model, ds, t, probe)
        state.memory["tau"] = float(np.quantile(losses, 1.0 - cfg.rho_max))
    return _all(state), state.memory.get("tau")


_POLICIES = {
    "baseline": _baseline,
    "oracle": _baseline,
    "step_e": _step_e,
    "self_paced": _self_paced,
    "one_shot": _one_shot,
    "truncation": _truncation,
}


def policy_epoch(state, model, ds, t, cfg, probe=per_sample_loss, permanent_drop=False):
    """Decide which samples train at epoch ``t`` using the model as it stands before the epoch.

    Returns ``(state, kept, loss_cap)``. ``kept`` is an ascending index
    array; ``loss_cap`` is None except for truncation once its threshold
    is fitted, where per-sample training loss becomes min(loss, cap).
    ``probe(model, ds, indices)`` computes per-sample losses and can be
    replaced to drive the policy with synthetic losses.
    """
    if not 0 <= t < cfg.T_total:
        raise ConfigError(f"epoch {t} outside [0, {cfg.T_total})", "t")
    if ds is not None and state.n != ds.n:
        raise PolicyError(f"selection state covers {state.n} samples, dataset has {ds.n}")
    kept, cap = _POLICIES[state.method](state, model, ds, t, cfg, probe, permanent_drop)
    if len(kept) == 0:
        raise PolicyError(f"{state.method}: empty kept set at epoch {t}")
    if state.method in ("step_e", "one_shot") and len(kept) < math.floor((1.0 - cfg.rho_max) * state.n + 1e-9):
        raise PolicyError(f"{state.method}: kept {len(kept)} of {state.n}, below the (1 - rho_max) floor")
    return state, kept, cap


def objective_J(model, ds, gamma, lam=0.0, losses=None):
    """Gated empirical risk plus the keep-more-data term; a diagnostic, never used for selection."""
    gamma = np.asarray(gamma, dtype=float)
    n = len(gamma)
    if n == 0:
        return 0.0
    if not gamma.any():
        return 0.0
    if losses is None:
        losses = per_sample_loss(model, ds, np.arange(n))
    losses = np.asarray(losses, dtype=float)
    return float((gamma * losses).sum() / n + lam * gamma.sum() / n)
