"""Training and attack configuration.

Config files are flat plain text, one ``key = value`` per line; blank lines
and lines starting with '#' are ignored. Every key below is addressable and
unknown keys are rejected. Command-line overrides use the same key names and
win over file values.

Keys and defaults::

    tau = 0.4                  temperature of the contrastive softmax
    eps1 = 1.0                 adversarial contrastive coefficient
    eps2 = 1.0                 information-regularization strength
    gamma = 1.1                curriculum multiplier applied to eps1
    period = 20                epochs between curriculum updates
    subgraph_size = 500        nodes sampled per training iteration
    p_edge_1 = 0.2             edge-drop rate, view 1
    p_feat_1 = 0.3             feature-mask rate, view 1
    p_edge_2 = 0.4             edge-drop rate, view 2
    p_feat_2 = 0.4             feature-mask rate, view 2
    learning_rate = 0.001
    weight_decay = 1e-05
    epochs = 200
    seed = 0
    hidden_dim = 128           GCN hidden width
    embed_dim = 128            embedding width
    proj_dim = 128             projection-head hidden width
    attack_steps = 5
    attack_alpha = 0.1         structure step size (plain gradient)
    attack_beta = 0.01         feature step size (sign gradient)
    attack_delta_a_fraction = 0.1   edge budget as a fraction of total edge mass
    attack_delta_x = 0.5       l-infinity bound on feature perturbations
    attack_anchor = view1      one of view1 | view2 | original
    attack_discrete_samples = 1

Suggested search grids (not automated): attack_alpha, attack_beta over
{0.001, 0.01, 0.1}; eps1, eps2 over {0.5, 1, 1.5, 2}.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .errors import ConfigError, DomainError

_ANCHORS = ("view1", "view2", "original")


@dataclass
class AttackConfig:
    steps: int = 5
    alpha: float = 0.1
    beta: float = 0.01
    delta_a_fraction: float = 0.1
    delta_x: float = 0.5
    anchor: str = "view1"
    discrete_samples: int = 1

    def validate(self) -> None:
        if self.steps < 0:
            raise DomainError("attack_steps must be >= 0")
        if self.alpha <= 0 or self.beta <= 0:
            raise DomainError("attack step sizes must be positive")
        if self.delta_a_fraction < 0 or self.delta_x < 0:
            raise DomainError("attack budgets must be non-negative")
        if self.anchor not in _ANCHORS:
            raise DomainError(f"attack_anchor must be one of {_ANCHORS}, got {self.anchor!r}")
        if self.discrete_samples < 1:
            raise DomainError("attack_discrete_samples must be >= 1")


@dataclass
class TrainConfig:
    tau: float = 0.4
    eps1: float = 1.0
    eps2: float = 1.0
    gamma: float = 1.1
    period: int = 20
    subgraph_size: int = 500
    p_edge_1: float = 0.2
    p_feat_1: float = 0.3
    p_edge_2: float = 0.4
    p_feat_2: float = 0.4
    learning_rate: float = 1e-3
    weight_decay: float = 1e-5
    epochs: int = 200
    seed: int = 0
    hidden_dim: int = 128
    embed_dim: int = 128
    proj_dim: int = 128
    attack: AttackConfig = field(default_factory=AttackConfig)

    def validate(self) -> None:
        if self.tau <= 0:
            raise DomainError("tau must be positive")
        if self.eps1 < 0 or self.eps2 < 0:
            raise DomainError("eps1 and eps2 must be non-negative")
        if self.gamma <= 0:
            raise DomainError("gamma must be positive")
        if self.period < 1:
            raise DomainError("period must be >= 1")
        if self.subgraph_size < 1:
            raise DomainError("subgraph_size must be >= 1")
        for name in ("p_edge_1", "p_feat_1", "p_edge_2", "p_feat_2"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"{name} must be in [0, 1]")
        if self.learning_rate <= 0:
            raise DomainError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise DomainError("weight_decay must be non-negative")
        if self.epochs < 0:
            raise DomainError("epochs must be >= 0")
        if self.seed < 0:
            raise DomainError("seed must be non-negative")
        if min(self.hidden_dim, self.embed_dim, self.proj_dim) < 1:
            raise DomainError("architecture dimensions must be >= 1")
        self.attack.validate()


# dataclass field annotations are strings under `from __future__ import annotations`
_TYPE_NAMES = {"int": int, "float": float, "str": str}


def _schema() -> dict[str, type]:
    schema: dict[str, type] = {}
    for f in fields(TrainConfig):
        if f.name == "attack":
            continue
        schema[f.name] = _TYPE_NAMES[f.type] if isinstance(f.type, str) else f.type
    for f in fields(AttackConfig):
        schema[f"attack_{f.name}"] = _TYPE_NAMES[f.type] if isinstance(f.type, str) else f.type
    return schema


CONFIG_KEYS: dict[str, type] = _schema()


def _cast(key: str, raw: str):
    kind = CONFIG_KEYS[key]
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return str(raw)
    except ValueError:
        raise ConfigError(f"value for key {key!r} must be {kind.__name__}, got {raw!r}") from None


def parse_config_file(path: str) -> dict[str, str]:
    """Raw key -> value strings from a flat config file."""
    out: dict[str, str] = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            out[key] = value
    return out


def resolve_config(path: str | None, overrides: dict[str, str] | None = None) -> TrainConfig:
    """Defaults, then file values, then overrides; validated."""
    values: dict[str, str] = {}
    if path is not None:
        values.update(parse_config_file(path))
    for key, raw in (overrides or {}).items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = raw
    cfg = TrainConfig()
    for key, raw in values.items():
        parsed = _cast(key, raw)
        if key.startswith("attack_"):
            setattr(cfg.attack, key[len("attack_"):], parsed)
        else:
            setattr(cfg, key, parsed)
    try:
        cfg.validate()
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def config_to_flat_dict(cfg: TrainConfig) -> dict:
    """Fully materialized key -> value mapping (manifest form)."""
    out = {}
    for f in fields(TrainConfig):
        if f.name == "attack":
            continue
        out[f.name] = getattr(cfg, f.name)
    for f in fields(AttackConfig):
        out[f"attack_{f.name}"] = getattr(cfg.attack, f.name)
    return out
