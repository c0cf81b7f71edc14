"""
Run Configuration
Flat, frozen RunConfig materialized from layered sources:
defaults → task preset → config file → KEY=VAL overrides.
"""
import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import config
from src.exceptions import ConfigError

logger = logging.getLogger(__name__)

MODEL_BACKENDS = ["gp", "ensemble", "none"]
BRANCH_SOURCES = ["buffer", "initial"]
COREGIONALIZATIONS = ["full", "diagonal"]
HIDDEN_FIELDS = ("gp_mean_hidden", "ensemble_hidden")


@dataclass(frozen=True)
class RunConfig:
    preset: str = ""
    env: str = "u_maze"
    seed: int = 0

    # Strategy and optimism schedule
    strategy: str = "hot_gp"
    hucrl_beta: float = config.HUCRL_BETA
    hucrl_candidates: int = config.HUCRL_CANDIDATES
    r_min_start: float = config.R_MIN_START
    r_min_end: float = 0.5

    # Outer loop (N, T, M, K, B, G) and policy-search constants
    total_env_steps: int = 150_000
    horizon: int = 150
    model_rollouts: int = 400
    rollout_steps: int = 1
    batch_size: int = 256
    updates_per_step: int = 5
    gamma: float = 0.99
    learning_rate: float = 1e-3
    tau: float = 0.005
    buffer_capacity: int = 0
    branch_from: str = "buffer"

    # Joint model
    model_backend: str = "gp"
    gp_subsample_cap: int = config.GP_SUBSAMPLE_CAP
    gp_mean_epochs: int = config.GP_MEAN_EPOCHS
    gp_kernel_steps: int = config.GP_KERNEL_STEPS
    gp_kernel_lr: float = config.GP_KERNEL_LR
    coregionalization: str = "full"
    gp_mean_hidden: tuple = tuple(config.GP_MEAN_HIDDEN)
    gp_mean_activation: str = config.GP_MEAN_ACTIVATION
    ensemble_size: int = config.ENSEMBLE_SIZE
    ensemble_hidden: tuple = tuple(config.ENSEMBLE_HIDDEN)
    ensemble_activation: str = config.ENSEMBLE_ACTIVATION
    ensemble_epochs: int = config.ENSEMBLE_EPOCHS
    ensemble_clamp_logvar: bool = True
    bootstrap_mode: str = "mean"

    # Policy search
    policy_algorithm: str = "sac"
    ddpg_explore_noise: bool = False

    # Environment extras
    action_penalty: float = 0.0
    literal_penalty_sign: bool = False
    maze_layout: tuple | None = None

    # Evaluation and bookkeeping
    eval_every: int = 5
    eval_episodes: int = 5
    log_wall_time: bool = False

    def __post_init__(self):
        if self.maze_layout is not None:
            object.__setattr__(self, "maze_layout", tuple(str(row) for row in self.maze_layout))
        for name in HIDDEN_FIELDS:
            try:
                widths = tuple(int(w) for w in getattr(self, name))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{name} must be a list of layer widths") from exc
            object.__setattr__(self, name, widths)
        self.validate()

    def validate(self) -> None:
        def need(ok: bool, message: str):
            if not ok:
                raise ConfigError(message)

        need(self.env in config.ENVIRONMENTS, f"unknown env '{self.env}', expected one of {config.ENVIRONMENTS}")
        need(self.strategy in config.STRATEGIES, f"unknown strategy '{self.strategy}'")
        need(self.model_backend in MODEL_BACKENDS, f"unknown model_backend '{self.model_backend}'")
        need(self.policy_algorithm in config.POLICY_ALGORITHMS, f"unknown policy_algorithm '{self.policy_algorithm}'")
        need(self.branch_from in BRANCH_SOURCES, f"branch_from must be one of {BRANCH_SOURCES}")
        need(self.coregionalization in COREGIONALIZATIONS, f"coregionalization must be one of {COREGIONALIZATIONS}")
        need(self.bootstrap_mode in config.BOOTSTRAP_MODES, f"bootstrap_mode must be one of {config.BOOTSTRAP_MODES}")
        need(0.0 <= self.r_min_start <= self.r_min_end < 1.0, "need 0 <= r_min_start <= r_min_end < 1")
        need(self.rollout_steps >= 1, "rollout_steps (K) must be at least 1")
        need(self.model_rollouts >= 0, "model_rollouts (M) must be nonnegative")
        need(self.horizon >= 1, "horizon (T) must be at least 1")
        need(self.total_env_steps >= self.horizon, "total_env_steps (N) must cover at least one episode")
        need(self.batch_size >= 1 and self.updates_per_step >= 0, "invalid batch_size/updates_per_step")
        need(0.0 <= self.gamma <= 1.0 and 0.0 < self.tau <= 1.0, "gamma must lie in [0, 1] and tau in (0, 1]")
        need(self.learning_rate > 0, "learning_rate must be positive")
        need(self.buffer_capacity >= 0, "buffer_capacity must be nonnegative (0 = unlimited)")
        need(self.eval_every >= 1 and self.eval_episodes >= 1, "eval_every and eval_episodes must be at least 1")
        need(self.gp_subsample_cap >= 2, "gp_subsample_cap must be at least 2")
        need(self.ensemble_size >= 1, "ensemble_size must be at least 1")
        for name in HIDDEN_FIELDS:
            need(all(w >= 1 for w in getattr(self, name)), f"{name} widths must be positive")
        for name in ("gp_mean_activation", "ensemble_activation"):
            need(getattr(self, name) in config.ACTIVATIONS, f"{name} must be one of {config.ACTIVATIONS}")
        if self.strategy.startswith("hucrl"):
            need(self.hucrl_beta > 0 and self.hucrl_candidates >= 1, "H-UCRL needs hucrl_beta > 0 and hucrl_candidates >= 1")

    def to_json(self) -> str:
        """Canonical snapshot: sorted keys, 2-space indent, trailing newline."""
        data = asdict(self)
        if data["maze_layout"] is not None:
            data["maze_layout"] = list(data["maze_layout"])
        for name in HIDDEN_FIELDS:
            data[name] = list(data[name])
        return json.dumps(data, sort_keys=True, indent=2) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json(), encoding="utf-8")
        return path


FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def coerce_value(key: str, raw):
    """Convert an override string (or JSON value) to the field's type."""
    if key not in FIELD_TYPES:
        raise ConfigError(f"unknown config key '{key}'")
    kind = FIELD_TYPES[key]
    if not isinstance(raw, str):
        if kind is int and isinstance(raw, float) and raw.is_integer():
            return int(raw)
        if kind is float and isinstance(raw, int) and not isinstance(raw, bool):
            return float(raw)
        return raw
    text = raw.strip()
    try:
        if kind is bool:
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(float(text)) if "e" in text.lower() else int(text)
        if kind is float:
            return float(text)
        if key == "maze_layout":
            return None if text.lower() in ("", "null", "none") else json.loads(text)
        if key in HIDDEN_FIELDS:
            if text.startswith("["):
                return tuple(int(w) for w in json.loads(text))
            return tuple(int(w) for w in text.split(",") if w.strip())
    except (TypeError, ValueError, json.JSONDecodeError) as exc:
        type_name = getattr(kind, "__name__", str(kind))
        raise ConfigError(f"cannot parse {key}={raw!r} as {type_name}") from exc
    return text


def parse_overrides(pairs) -> dict:
    """['key=value', ...] → {key: typed value}."""
    result = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"override '{pair}' is not of the form KEY=VAL")
        key, raw = pair.split("=", 1)
        key = key.strip()
        result[key] = coerce_value(key, raw)
    return result


def read_config_file(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return data


def _check_keys(source: str, values: dict) -> None:
    unknown = sorted(set(values) - set(FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown config keys in {source}: {', '.join(unknown)}")


def materialize(file_values: dict | None = None, overrides: dict | None = None, seed: int | None = None) -> RunConfig:
    """Layer defaults, the named preset, file values, then overrides."""
    file_values = dict(file_values or {})
    overrides = dict(overrides or {})
    presets = {name: dict(block) for name, block in config.TASK_PRESETS.items()}
    for name, block in (file_values.pop("presets", None) or {}).items():
        _check_keys(f"preset '{name}'", block)
        presets.setdefault(name, {}).update(block)
    _check_keys("config file", file_values)
    _check_keys("overrides", overrides)

    preset_name = overrides.get("preset") or file_values.get("preset") or ""
    env_name = overrides.get("env") or file_values.get("env")
    if not preset_name and env_name in presets:
        preset_name = env_name
    if preset_name and preset_name not in presets:
        raise ConfigError(f"unknown preset '{preset_name}', expected one of {sorted(presets)}")

    values = {}
    if preset_name:
        values.update(presets[preset_name])
        values["preset"] = preset_name
    values.update({k: coerce_value(k, v) for k, v in file_values.items()})
    values.update(overrides)
    if seed is not None:
        values["seed"] = int(seed)
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_run_config(path=None, overrides=(), seed: int | None = None) -> RunConfig:
    file_values = read_config_file(path) if path else {}
    cfg = materialize(file_values, parse_overrides(overrides), seed)
    logger.debug("materialized config: %s", cfg)
    return cfg


def load_snapshot(path) -> RunConfig:
    """Re-read a run directory's canonical snapshot."""
    data = read_config_file(path)
    _check_keys(str(path), data)
    return RunConfig(**data)
