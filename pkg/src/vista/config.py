"""Run configuration: JSON schema, defaults, validation, and echo round-trip.

A minimal config is {"mode", "n", "theta_true", "seed"}; every other field has
a mode-aware default.  Unknown keys anywhere in the document are rejected so a
typo cannot silently fall back to a default.  ``effective_dict`` materializes
all defaults; persisting it and loading it back reproduces the same config.
"""

import json
import math
from dataclasses import asdict, dataclass, field, replace

from .dynamics import CHANNEL_AMPDAMP, CHANNEL_DEPHASING, CHANNEL_NONE, CHANNELS
from .errors import ConfigError

MODE_PURE = "vista_pure"
MODE_NOISY_DEPHASING = "vista_noisy_dephasing"
MODE_NOISY_AMPDAMP = "vista_noisy_ampdamp"
MODE_MULTIPARAM = "vista_multiparam"
MODE_CASCADE = "cascade"
MODE_BASELINE = "baseline_fft"
MODES = (
    MODE_PURE,
    MODE_NOISY_DEPHASING,
    MODE_NOISY_AMPDAMP,
    MODE_MULTIPARAM,
    MODE_CASCADE,
    MODE_BASELINE,
)

NORM_PLAIN = "plain"
NORM_QN = "quasi_normalized"

_DEFAULT_CHANNEL = {
    MODE_PURE: CHANNEL_NONE,
    MODE_NOISY_DEPHASING: CHANNEL_DEPHASING,
    MODE_NOISY_AMPDAMP: CHANNEL_AMPDAMP,
    MODE_MULTIPARAM: CHANNEL_DEPHASING,
    MODE_CASCADE: CHANNEL_NONE,
    MODE_BASELINE: CHANNEL_DEPHASING,
}

_DEFAULT_NORM = {
    MODE_PURE: NORM_PLAIN,
    MODE_NOISY_DEPHASING: NORM_QN,
    MODE_NOISY_AMPDAMP: NORM_QN,
    MODE_MULTIPARAM: NORM_PLAIN,
    MODE_CASCADE: NORM_PLAIN,
    MODE_BASELINE: NORM_PLAIN,
}


def _take(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object, got {type(d).__name__}")
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown {where} keys: {', '.join(unknown)}")
    return d


@dataclass(frozen=True)
class OptimizerBlock:
    lr0: float = 0.05
    decay: float = 0.995
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_epochs: int = 400
    tol_conv: float = 1e-5
    window: int = 20
    budget_s: float = 600.0


@dataclass(frozen=True)
class ShotsBlock:
    nu_start: int = 10_000
    nu_end: int = 40_000
    profile: str = "geometric"
    exact: bool = False


@dataclass(frozen=True)
class GradientBlock:
    method: str = "central_difference"
    h_theta: float | None = None  # defaults to pi/(8 n)
    h_phi: float = 0.05
    crn: bool = False  # reuse one shot stream for both sides of each difference


@dataclass(frozen=True)
class InitBlock:
    theta0: float | None = None  # explicit start; otherwise uniform draw
    center: float = 0.0
    halfwidth: float | None = None  # defaults to pi/(2 n), the convergence window
    phi0: float = 0.1
    theta2_0: float | None = None


@dataclass(frozen=True)
class MultiparamBlock:
    trotter_steps: int = 64
    probe_steps: int = 2000


@dataclass(frozen=True)
class CascadeBlock:
    n_sequence: tuple = ()
    g_min: float = 1e-4


@dataclass(frozen=True)
class BaselineBlock:
    total_time: float = 1.0
    steps: int = 200
    shots_per_step: int = 2500


@dataclass(frozen=True)
class RunConfig:
    mode: str
    n: int
    theta_true: float
    seed: int
    normalization: str = NORM_PLAIN
    channel: str = CHANNEL_NONE
    gamma_true: float = 0.0
    theta2_true: float | None = None
    output: str | None = None
    optimizer: OptimizerBlock = field(default_factory=OptimizerBlock)
    shots: ShotsBlock = field(default_factory=ShotsBlock)
    gradient: GradientBlock = field(default_factory=GradientBlock)
    init: InitBlock = field(default_factory=InitBlock)
    multiparam: MultiparamBlock = field(default_factory=MultiparamBlock)
    cascade: CascadeBlock = field(default_factory=CascadeBlock)
    baseline: BaselineBlock = field(default_factory=BaselineBlock)

    def h_theta_effective(self):
        h = self.gradient.h_theta
        return math.pi / (8 * self.n) if h is None else h

    def init_halfwidth_effective(self, n=None):
        hw = self.init.halfwidth
        return math.pi / (2 * (n or self.n)) if hw is None else hw


_TOP_KEYS = (
    "mode",
    "n",
    "theta_true",
    "seed",
    "normalization",
    "channel",
    "gamma_true",
    "theta2_true",
    "output",
    "optimizer",
    "shots",
    "gradient",
    "init",
    "multiparam",
    "cascade",
    "baseline",
)


def _block(cls, d, where):
    if d is None:
        return cls()
    fields = {f for f in cls.__dataclass_fields__}
    _take(d, fields, where)
    kwargs = dict(d)
    if cls is CascadeBlock and "n_sequence" in kwargs:
        kwargs["n_sequence"] = tuple(int(x) for x in kwargs["n_sequence"])
    return cls(**kwargs)


def from_dict(doc):
    """Build and validate a RunConfig from a parsed JSON document."""
    _take(doc, _TOP_KEYS, "config")
    for key in ("mode", "n", "theta_true"):
        if key not in doc:
            raise ConfigError(f"config key {key!r} is required")
    if "seed" not in doc:
        raise ConfigError("config key 'seed' is required (file or --seed)")

    mode = doc["mode"]
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")

    cfg = RunConfig(
        mode=mode,
        n=int(doc["n"]),
        theta_true=float(doc["theta_true"]),
        seed=int(doc["seed"]),
        normalization=doc.get("normalization", _DEFAULT_NORM[mode]),
        channel=doc.get("channel", _DEFAULT_CHANNEL[mode]),
        gamma_true=float(doc.get("gamma_true", 0.0)),
        theta2_true=None if doc.get("theta2_true") is None else float(doc["theta2_true"]),
        output=doc.get("output"),
        optimizer=_block(OptimizerBlock, doc.get("optimizer"), "optimizer"),
        shots=_block(ShotsBlock, doc.get("shots"), "shots"),
        gradient=_block(GradientBlock, doc.get("gradient"), "gradient"),
        init=_block(InitBlock, doc.get("init"), "init"),
        multiparam=_block(MultiparamBlock, doc.get("multiparam"), "multiparam"),
        cascade=_block(CascadeBlock, doc.get("cascade"), "cascade"),
        baseline=_block(BaselineBlock, doc.get("baseline"), "baseline"),
    )
    validate(cfg)
    return cfg


def validate(cfg):
    if cfg.n < 1:
        raise ConfigError(f"n must be >= 1, got {cfg.n}")
    if cfg.gamma_true < 0:
        raise ConfigError(f"gamma_true must be >= 0, got {cfg.gamma_true}")
    if cfg.channel not in CHANNELS:
        raise ConfigError(f"unknown channel {cfg.channel!r}")
    if cfg.channel == CHANNEL_NONE and cfg.gamma_true != 0:
        raise ConfigError("channel 'none' requires gamma_true = 0")
    if cfg.normalization not in (NORM_PLAIN, NORM_QN):
        raise ConfigError(f"unknown normalization {cfg.normalization!r}")

    if cfg.mode == MODE_PURE and cfg.normalization != NORM_PLAIN:
        raise ConfigError("vista_pure has a pure ansatz; quasi-normalization is a no-op and rejected")
    if cfg.mode == MODE_NOISY_DEPHASING and cfg.channel != CHANNEL_DEPHASING:
        raise ConfigError("vista_noisy_dephasing requires channel 'dephasing'")
    if cfg.mode == MODE_NOISY_AMPDAMP and cfg.channel != CHANNEL_AMPDAMP:
        raise ConfigError("vista_noisy_ampdamp requires channel 'amplitude_damping'")
    if cfg.mode == MODE_MULTIPARAM:
        if cfg.theta2_true is None:
            raise ConfigError("vista_multiparam requires theta2_true")
        if cfg.channel != CHANNEL_DEPHASING:
            raise ConfigError("vista_multiparam requires channel 'dephasing'")
        if cfg.normalization != NORM_PLAIN:
            raise ConfigError("vista_multiparam uses a pure ansatz; normalization must be plain")
        if cfg.n > 10:
            raise ConfigError(f"vista_multiparam dense path is limited to n <= 10, got {cfg.n}")
    if cfg.mode == MODE_CASCADE and not cfg.cascade.n_sequence:
        raise ConfigError("cascade mode requires cascade.n_sequence")
    if cfg.mode == MODE_CASCADE and cfg.normalization != NORM_PLAIN:
        raise ConfigError("cascade stages use a pure ansatz; normalization must be plain")
    if cfg.cascade.n_sequence:
        seq = cfg.cascade.n_sequence
        if any(b <= a for a, b in zip(seq, seq[1:])):
            raise ConfigError(f"cascade.n_sequence must be strictly increasing, got {seq}")
        if cfg.mode == MODE_CASCADE and len(seq) < 2:
            raise ConfigError("cascade needs at least two stages")

    if not 0 <= cfg.init.phi0 < math.pi / 2:
        raise ConfigError(f"init.phi0 must lie in [0, pi/2), got {cfg.init.phi0}")
    if cfg.gradient.method not in ("central_difference", "parameter_shift"):
        raise ConfigError(f"unknown gradient method {cfg.gradient.method!r}")
    if not cfg.shots.exact and (cfg.shots.nu_start < 1 or cfg.shots.nu_end < 1):
        raise ConfigError("shot counts must be >= 1 unless shots.exact")
    if not cfg.shots.exact and cfg.shots.nu_end < cfg.shots.nu_start:
        raise ConfigError("shots.nu_end must be >= shots.nu_start")
    if cfg.shots.profile not in ("constant", "linear", "geometric"):
        raise ConfigError(f"unknown shots profile {cfg.shots.profile!r}")
    if cfg.optimizer.max_epochs < 1:
        raise ConfigError("optimizer.max_epochs must be >= 1")
    if cfg.baseline.steps < 2:
        raise ConfigError("baseline.steps must be >= 2")
    if cfg.baseline.total_time <= 0:
        raise ConfigError("baseline.total_time must be positive")
    if cfg.baseline.shots_per_step < 1:
        raise ConfigError("baseline.shots_per_step must be >= 1")


def effective_dict(cfg):
    """Fully materialized config document (all defaults filled in)."""
    doc = asdict(cfg)
    doc["cascade"]["n_sequence"] = list(cfg.cascade.n_sequence)
    return doc


def load_config(path, overrides=None):
    """Parse a JSON config file, apply CLI overrides, validate."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file {path} not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if overrides:
        doc.update({k: v for k, v in overrides.items() if v is not None})
    return from_dict(doc)


def with_overrides(cfg, **kwargs):
    """Functional update preserving validation."""
    new = replace(cfg, **kwargs)
    validate(new)
    return new
