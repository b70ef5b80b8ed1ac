"""Tracker configuration and the flat ``key = value`` config file format."""
import dataclasses
import os
from dataclasses import dataclass

from .scoring import DpmrParams
from .solver import AdmmConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrackerConfig:
    # training objective and score QP
    lam: float = 0.01
    gamma: float = 3.02
    nu: float = 0.201
    f0: int = 10
    q: float = 0.0408
    tr: float = 14.0
    F_max: int = 50
    # ADMM
    mu0: float = 1.0
    mu_scale: float = 2.0
    mu_max: float = 1000.0
    admm_iters: int = 2
    alternations: int = 1
    # features and geometry
    feature: str = "gray"
    cn_table: str = ""
    cell_size: int = 4
    padded_scale: float = 5.0
    model_cells: int = 50
    label_sigma_factor: float = 1.0 / 16
    scale_count: int = 5
    scale_step: float = 1.01
    scale_penalty: float = 1.0
    # DPMR area split
    high_area_fraction: float = 0.2
    dpmr_epsilon: float = 1e-6
    # mode and ablation toggles
    mode: str = "tsd"
    discard: bool = True
    fusion: bool = True
    response_reg: bool = True
    learning_rate: float = 0.0125

    def __post_init__(self):
        positive = ["gamma", "q", "F_max", "mu0", "admm_iters", "alternations", "cell_size",
                    "padded_scale", "model_cells", "label_sigma_factor", "scale_count",
                    "scale_step", "scale_penalty", "dpmr_epsilon", "f0"]
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.lam < 0 or self.nu < 0 or self.tr < 0:
            raise ConfigError("lam, nu and tr must be >= 0")
        if not 0 < self.q < 1:
            raise ConfigError("q must lie in (0, 1)")
        if self.scale_count % 2 != 1:
            raise ConfigError("scale_count must be odd")
        if self.mode not in ("tsd", "baseline"):
            raise ConfigError(f"mode must be 'tsd' or 'baseline', got {self.mode!r}")
        if self.feature not in ("gray", "cn"):
            raise ConfigError(f"feature must be 'gray' or 'cn', got {self.feature!r}")
        if not 0 < self.learning_rate <= 1:
            raise ConfigError("learning_rate must lie in (0, 1]")
        if not 0 < self.high_area_fraction < 1:
            raise ConfigError("high_area_fraction must lie in (0, 1)")
        try:
            self.admm()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def admm(self):
        return AdmmConfig(self.lam, self.mu0, self.mu_scale, self.mu_max,
                          self.admm_iters, self.alternations)

    def dpmr_params(self):
        return DpmrParams(self.high_area_fraction, self.dpmr_epsilon, self.tr)

    def cn_table_path(self):
        return self.cn_table or os.environ.get("TSD_CN_TABLE", "")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)


FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(TrackerConfig)}


def _coerce(key, raw):
    kind = FIELD_TYPES[key]
    text = str(raw).strip()
    if kind in (bool, "bool"):
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {text!r}")
    try:
        if kind in (int, "int"):
            return int(text)
        if kind in (float, "float"):
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r}") from None
    return text


def parse_config_text(text, origin="<config>"):
    """Parse flat ``key = value`` lines; ``#`` starts a comment. Unknown keys fail."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in FIELD_TYPES:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, val)
    return values


def resolve_config(path=None, overrides=None, base=None):
    """Defaults < config file < overrides."""
    cfg = base or TrackerConfig()
    values = {}
    if path:
        try:
            with open(path) as fh:
                values.update(parse_config_text(fh.read(), str(path)))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for key, val in (overrides or {}).items():
        if key not in FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = _coerce(key, val) if isinstance(val, str) else val
    return cfg.replace(**values)


def format_config(cfg):
    return "".join(f"{k} = {v}\n" for k, v in cfg.to_dict().items())
