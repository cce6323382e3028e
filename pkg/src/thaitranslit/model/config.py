"""Model and training configuration, plus the flat ``key=value`` file format."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .tokenizer import VOCAB_SIZE


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TransformerConfig:
    d_model: int = 256
    d_ff: int = 512
    num_layers: int = 4
    num_heads: int = 4
    # per-head width; None means d_model // num_heads (which must then divide evenly)
    d_kv: int | None = None
    vocab_size: int = VOCAB_SIZE
    dropout: float = 0.1
    num_buckets: int = 32
    max_distance: int = 128

    def __post_init__(self):
        for name in ("d_model", "d_ff", "num_layers", "num_heads", "vocab_size", "num_buckets", "max_distance"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.d_kv is None and self.d_model % self.num_heads:
            raise ConfigError(
                f"d_model {self.d_model} is not divisible by num_heads {self.num_heads}; set d_kv explicitly")
        if self.d_kv is not None and self.d_kv < 1:
            raise ConfigError("d_kv must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0, 1)")

    @property
    def head_dim(self) -> int:
        return self.d_kv if self.d_kv is not None else self.d_model // self.num_heads

    @property
    def inner_dim(self) -> int:
        return self.head_dim * self.num_heads

    @classmethod
    def small(cls, **kw) -> "TransformerConfig":
        # 512 is not a multiple of 6 heads, so the head width is given directly
        return cls(**{"d_model": 512, "d_ff": 1024, "num_layers": 6, "num_heads": 6, "d_kv": 64, **kw})

    @classmethod
    def verysmall(cls, **kw) -> "TransformerConfig":
        return cls(**{"d_model": 256, "d_ff": 512, "num_layers": 4, "num_heads": 4, **kw})

    @classmethod
    def toy(cls, **kw) -> "TransformerConfig":
        return cls(**{"d_model": 64, "d_ff": 128, "num_layers": 2, "num_heads": 2, **kw})

    @classmethod
    def preset(cls, name: str, **kw) -> "TransformerConfig":
        try:
            return {"small": cls.small, "verysmall": cls.verysmall, "toy": cls.toy}[name](**kw)
        except KeyError:
            raise ConfigError(f"unknown preset {name!r}") from None


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 0.001
    weight_decay: float = 0.01
    warmup_steps: int = 5000
    grad_accum_steps: int = 4
    max_grad_norm: float = 1.0
    batch_size: int = 32
    eval_steps: int = 5000
    save_steps: int = 5000
    seed: int = 42
    # 0 means "derive from epochs"
    max_steps: int = 0
    max_length: int = 64
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    deterministic: bool = True

    def __post_init__(self):
        for name in ("epochs", "learning_rate", "warmup_steps", "grad_accum_steps", "max_grad_norm",
                     "batch_size", "eval_steps", "save_steps", "max_length", "eps"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.weight_decay < 0 or self.max_steps < 0 or self.seed < 0:
            raise ConfigError("weight_decay, max_steps and seed must be non-negative")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("betas must be in [0, 1)")


def _coerce(value: str, kind, key: str):
    text = value.strip()
    try:
        if kind is bool:
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        if kind == "int|None":
            return None if text.lower() in ("", "none") else int(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r}") from None
    return text


_KINDS = {
    "int": int, "float": float, "bool": bool, "int | None": "int|None",
}


def _field_kinds(cls) -> dict:
    return {f.name: _KINDS.get(f.type if isinstance(f.type, str) else f.type.__name__, str) for f in fields(cls)}


def parse_config_text(text: str) -> tuple[TransformerConfig, TrainConfig]:
    """Parse ``key=value`` lines (``#`` comments allowed).

    ``preset`` selects a starting TransformerConfig; other keys override
    fields of either dataclass.
    """
    model_kinds, train_kinds = _field_kinds(TransformerConfig), _field_kinds(TrainConfig)
    preset = "verysmall"
    model_kw, train_kw = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "preset":
            preset = value
        elif key in model_kinds:
            model_kw[key] = _coerce(value, model_kinds[key], key)
        elif key in train_kinds:
            train_kw[key] = _coerce(value, train_kinds[key], key)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    return TransformerConfig.preset(preset, **model_kw), TrainConfig(**train_kw)


def load_config_file(path) -> tuple[TransformerConfig, TrainConfig]:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def config_text(model: TransformerConfig, train: TrainConfig) -> str:
    lines = [f"{k}={'none' if v is None else v}" for k, v in asdict(model).items()]
    lines += [f"{k}={v}" for k, v in asdict(train).items()]
    return "\n".join(lines) + "\n"


__all__ = ["ConfigError", "TrainConfig", "TransformerConfig", "config_text", "load_config_file",
           "parse_config_text"]
