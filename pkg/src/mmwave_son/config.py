"""Run configuration: one flat text format covering every tunable.

The file format is deliberately dumb: one ``section.key = value`` pair per
line, ``#`` comments, blank lines ignored. Values are parsed as int,
float, bool (``true``/``false``) or bare string. Unknown or duplicate keys
are errors, so a typo cannot silently fall back to a default. Loading,
serializing and loading again yields an identical config.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .channel import ChannelParams
from .floc import FlocParams
from .qlearn import LearningConfig, RewardSpec


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DeployParams:
    region_width_m: float = 1000.0
    region_height_m: float = 1000.0
    lambda_bs_per_km2: float = 120.0
    ue_radius_m: float = 10.0
    qos_sinr: float = 2.83

    def validate(self):
        if self.region_width_m <= 0 or self.region_height_m <= 0:
            raise ValueError("region sides must be positive")
        if self.lambda_bs_per_km2 < 0:
            raise ValueError("lambda_bs_per_km2 must be >= 0")
        if self.ue_radius_m < 0:
            raise ValueError("ue_radius_m must be >= 0")
        return self

    @property
    def region(self):
        return (self.region_width_m, self.region_height_m)


@dataclass(frozen=True)
class RunConfig:
    deploy: DeployParams = field(default_factory=DeployParams)
    channel: ChannelParams = field(default_factory=ChannelParams)
    floc: FlocParams = field(default_factory=FlocParams)
    learn: LearningConfig = field(default_factory=LearningConfig)
    reward_kind: str = "cdpq"
    expq_shape: float = 1.0
    seed: int = 1
    out_dir: str = "artifacts"
    eval_mode: str = "in_cluster"
    parallel: bool = False
    sweep_size_min: int = 2
    sweep_size_max: int = 14
    sweep_seeds_per_size: int = 20

    def reward_spec(self):
        return RewardSpec(
            kind=self.reward_kind,
            qos_sinr=self.deploy.qos_sinr,
            shape=self.expq_shape,
        )

    def validate(self):
        self.deploy.validate()
        self.channel.validate()
        self.floc.validate()
        self.learn.validate()
        self.reward_spec().validate()
        if self.eval_mode not in ("in_cluster", "full_network"):
            raise ConfigError("run.eval_mode must be in_cluster or full_network")
        if self.seed < 0:
            raise ConfigError("run.seed must be >= 0")
        if not self.out_dir:
            raise ConfigError("run.out_dir must not be empty")
        if not 1 <= self.sweep_size_min <= self.sweep_size_max <= 14:
            raise ConfigError("sweep sizes must satisfy 1 <= min <= max <= 14")
        if self.sweep_seeds_per_size < 1:
            raise ConfigError("sweep.seeds_per_size must be >= 1")
        return self


# dotted key -> (RunConfig attribute, nested field or None, expected type)
SCHEMA = {
    "deploy.region_width_m": ("deploy", "region_width_m", float),
    "deploy.region_height_m": ("deploy", "region_height_m", float),
    "deploy.lambda_bs_per_km2": ("deploy", "lambda_bs_per_km2", float),
    "deploy.ue_radius_m": ("deploy", "ue_radius_m", float),
    "deploy.qos_sinr": ("deploy", "qos_sinr", float),
    "channel.carrier_freq_hz": ("channel", "carrier_freq_hz", float),
    "channel.beta1_db": ("channel", "beta1_db", float),
    "channel.beta2": ("channel", "beta2", float),
    "channel.zeta_db": ("channel", "zeta_db", float),
    "channel.noise_dbm": ("channel", "noise_dbm", float),
    "channel.p_min_dbm": ("channel", "p_min_dbm", float),
    "channel.p_max_dbm": ("channel", "p_max_dbm", float),
    "floc.unit_distance_m": ("floc", "unit_distance_m", float),
    "floc.outband_distance_m": ("floc", "outband_distance_m", float),
    "floc.arrival_window_s": ("floc", "arrival_window_s", float),
    "floc.backoff_max_s": ("floc", "backoff_max_s", float),
    "floc.message_delay_s": ("floc", "message_delay_s", float),
    "floc.convergence_budget_s": ("floc", "convergence_budget_s", float),
    "learn.n_power": ("learn", "n_power", int),
    "learn.ring_width_m": ("learn", "ring_width_m", float),
    "learn.n_rings": ("learn", "n_rings", int),
    "learn.alpha": ("learn", "alpha", float),
    "learn.gamma": ("learn", "gamma", float),
    "learn.episodes_max": ("learn", "episodes_max", int),
    "learn.epsilon0": ("learn", "epsilon0", float),
    "learn.epsilon_decay_fraction": ("learn", "epsilon_decay_fraction", float),
    "learn.q_init_scale": ("learn", "q_init_scale", float),
    "learn.greedy_tol": ("learn", "greedy_tol", float),
    "learn.early_stop_delta": ("learn", "early_stop_delta", float),
    "learn.early_stop_patience": ("learn", "early_stop_patience", int),
    "learn.trace_every": ("learn", "trace_every", int),
    "learn.update_rule": ("learn", "update_rule", str),
    "reward.kind": ("reward_kind", None, str),
    "reward.expq_shape": ("expq_shape", None, float),
    "run.seed": ("seed", None, int),
    "run.out_dir": ("out_dir", None, str),
    "run.eval_mode": ("eval_mode", None, str),
    "run.parallel": ("parallel", None, bool),
    "sweep.size_min": ("sweep_size_min", None, int),
    "sweep.size_max": ("sweep_size_max", None, int),
    "sweep.seeds_per_size": ("sweep_seeds_per_size", None, int),
}


def _parse_value(text):
    low = text.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _coerce(key, value, want):
    if want is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("%s expects a number, got %r" % (key, value))
        return float(value)
    if want is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError("%s expects an integer, got %r" % (key, value))
        return value
    if want is bool:
        if not isinstance(value, bool):
            raise ConfigError("%s expects true or false, got %r" % (key, value))
        return value
    if not isinstance(value, str):
        raise ConfigError("%s expects a string, got %r" % (key, value))
    return value


def parse_config_text(text):
    """Raw dotted-key mapping from config text; values typed, keys checked."""
    out = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected 'section.key = value'" % lineno)
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in SCHEMA:
            raise ConfigError("line %d: unknown key %r" % (lineno, key))
        if key in out:
            raise ConfigError("line %d: duplicate key %r" % (lineno, key))
        if not raw:
            raise ConfigError("line %d: empty value for %r" % (lineno, key))
        out[key] = _coerce(key, _parse_value(raw), SCHEMA[key][2])
    return out


def config_from_mapping(kv):
    nested = {"deploy": {}, "channel": {}, "floc": {}, "learn": {}}
    scalars = {}
    for key, value in kv.items():
        attr, sub, _ = SCHEMA[key]
        if sub is None:
            scalars[attr] = value
        else:
            nested[attr][sub] = value
    cfg = RunConfig(
        deploy=replace(DeployParams(), **nested["deploy"]),
        channel=replace(ChannelParams(), **nested["channel"]),
        floc=replace(FlocParams(), **nested["floc"]),
        learn=replace(LearningConfig(), **nested["learn"]),
        **scalars,
    )
    if "-" in cfg.eval_mode:
        cfg = replace(cfg, eval_mode=cfg.eval_mode.replace("-", "_"))
    return cfg


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_mapping(parse_config_text(fh.read()))


def _render(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_to_text(cfg):
    """Canonical serialization; parsing it back reproduces cfg exactly."""
    lines = ["# resolved run configuration"]
    section_seen = None
    for key, (attr, sub, _) in SCHEMA.items():
        section = key.split(".", 1)[0]
        if section != section_seen:
            lines.append("")
            section_seen = section
        value = getattr(cfg, attr) if sub is None else getattr(getattr(cfg, attr), sub)
        lines.append("%s = %s" % (key, _render(value)))
    return "\n".join(lines) + "\n"
