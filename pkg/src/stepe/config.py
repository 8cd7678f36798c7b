"""Run configuration: a flat ``section.key = value`` text format.

Example::

    # 40% symmetric noise on 20 Gaussian classes
    dataset.kind = blobs
    dataset.noise_rate = 0.4
    schedule.rho_max = auto
    run.methods = baseline, step_e
    run.seeds = 13, 21, 42

Omitted keys take their defaults, unknown keys are rejected.
"""

from dataclasses import asdict, dataclass, field, fields

from .datagen import NOISE_KINDS
from .errors import ConfigError
from .model import ARCHS, OptimizerConfig
from .selection import METHODS, ScheduleConfig


@dataclass
class DatasetConfig:
    kind: str = "blobs"
    K: int = 20
    d: int = 64
    n_train: int = 10000
    n_test: int = 2000
    separation: float = 6.0
    seed: int = 0
    noise: str = "symmetric"
    noise_rate: float = 0.4
    # None: derived from ``seed``
    noise_seed: int = None
    confusion_temperature: float = 1.0
    path: str = None
    split: float = 0.8
    header: bool = False
    standardize: bool = True


@dataclass
class ScheduleSettings:
    T_warm: int = 10
    T_total: int = 60
    # None means "auto": min(0.5, empirical noise rate + 0.05)
    rho_max: float = None


@dataclass
class RunSettings:
    methods: list = field(default_factory=lambda: list(METHODS))
    seeds: list = field(default_factory=lambda: [13, 21, 42])
    arch: str = "mlp"
    hidden: int = 64
    out: str = "results"
    permanent_drop: bool = False
    lam: float = 0.0


@dataclass
class RunConfig:
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    opt: OptimizerConfig = field(default_factory=OptimizerConfig)
    schedule: ScheduleSettings = field(default_factory=ScheduleSettings)
    run: RunSettings = field(default_factory=RunSettings)
    source: str = ""

    def as_dict(self):
        return {
            "dataset": asdict(self.dataset),
            "opt": asdict(self.opt),
            "schedule": asdict(self.schedule),
            "run": asdict(self.run),
        }

    def validate(self):
        ds, sch, run = self.dataset, self.schedule, self.run
        if ds.kind not in ("blobs", "csv"):
            raise ConfigError(f"unknown dataset kind {ds.kind!r}", "dataset.kind")
        if ds.kind == "csv" and not ds.path:
            raise ConfigError("csv datasets need a path", "dataset.path")
        if ds.noise not in NOISE_KINDS + ("none",):
            raise ConfigError(f"unknown noise kind {ds.noise!r}", "dataset.noise")
        if not 0.0 <= ds.noise_rate <= 1.0:
            raise ConfigError("must lie in [0, 1]", "dataset.noise_rate")
        if not 0.0 <= ds.split <= 1.0:
            raise ConfigError("must lie in [0, 1]", "dataset.split")
        if ds.K < 2:
            raise ConfigError("must be >= 2", "dataset.K")
        if ds.d < 1 or (ds.kind == "blobs" and ds.d < 2):
            raise ConfigError("too small", "dataset.d")
        if ds.kind == "blobs" and (ds.n_train < ds.K or ds.n_test < ds.K):
            raise ConfigError("n_train and n_test must be >= K", "dataset.n_train")
        if ds.separation < 0:
            raise ConfigError("must be nonnegative", "dataset.separation")
        # builds a ScheduleConfig only for its checks
        ScheduleConfig(sch.T_warm, sch.T_total, 0.0 if sch.rho_max is None else sch.rho_max)
        # same for the optimizer
        OptimizerConfig(**asdict(self.opt))
        if not run.methods:
            raise ConfigError("at least one method is required", "run.methods")
        for m in run.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; expected one of {', '.join(METHODS)}", "run.methods")
        if len(set(run.methods)) != len(run.methods):
            raise ConfigError("duplicate method", "run.methods")
        if not run.seeds:
            raise ConfigError("at least one seed is required", "run.seeds")
        if run.arch not in ARCHS:
            raise ConfigError(f"unknown architecture {run.arch!r}", "run.arch")
        if run.hidden < 1:
            raise ConfigError("must be >= 1", "run.hidden")
        if run.lam < 0:
            raise ConfigError("must be nonnegative", "run.lambda")
        return self


_SECTIONS = {"dataset": DatasetConfig, "opt": OptimizerConfig, "schedule": ScheduleSettings, "run": RunSettings}
# config-file spelling -> dataclass attribute
_ALIASES = {("run", "lambda"): "lam"}


def _parse_bool(text, key):
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}", key)


def _parse_int(text, key):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}", key) from None


def _parse_float(text, key):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}", key) from None


def _coerce(text, default, annotation, key):
    if annotation in (bool, "bool"):
        return _parse_bool(text, key)
    if annotation in (int, "int"):
        if text.lower() in ("none", "auto", ""):
            if default is None:
                return None
        return _parse_int(text, key)
    if annotation in (float, "float"):
        if text.lower() in ("auto", "none") and default is None:
            return None
        return _parse_float(text, key)
    if annotation in (list, "list"):
        items = [s.strip() for s in text.split(",") if s.strip()]
        if key == "run.seeds":
            return [_parse_int(s, key) for s in items]
        return items
    return text


def parse_config_text(text):
    cfg = RunConfig(source=text)
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key", key)
        seen.add(key)
        section, _, name = key.partition(".")
        if section not in _SECTIONS or not name:
            raise ConfigError(f"line {lineno}: unknown key", key)
        attr = _ALIASES.get((section, name), name)
        spec = {f.name: f for f in fields(_SECTIONS[section])}
        if attr not in spec or (attr == name and name in _ALIASES.values()):
            raise ConfigError(f"line {lineno}: unknown key", key)
        target = getattr(cfg, section)
        setattr(target, attr, _coerce(value, getattr(_SECTIONS[section](), attr), spec[attr].type, key))
    return cfg.validate()


def parse_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())
