"""Flat ``key = value`` experiment configuration files."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Optional

from .backends import DEFAULT_BASE_URL, DEFAULT_MODEL
from .chat import ChatConfig
from .fem.material import PLANE_STRAIN, Material
from .queries import Q1, Q2_PLANNER
from .roles import default_combinations, resolve_combination

LEVELS = ("L0", "L1", "L2")
QUERIES = (Q1, Q2_PLANNER, "auto")
BACKEND_KINDS = ("http", "scripted", "replay", "record")


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key] = value
    return out


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


@dataclass
class BackendConfig:
    kind: str = "scripted"
    base_url: str = DEFAULT_BASE_URL
    model: str = DEFAULT_MODEL
    temperature: float = 1.0
    max_tokens: int = 2048
    replay_dir: Optional[str] = None
    p_success: float = 0.8
    p_fenics: float = 0.5


@dataclass
class SandboxConfig:
    interpreter_cmd: str = "python3"
    timeout_s: float = 120.0
    output_cap: int = 2000


@dataclass
class OracleConfig:
    n: int = 50
    probe: int = 21
    E: float = 1e9
    nu: float = 0.3
    formulation: str = PLANE_STRAIN
    shear_y_only: bool = False

    def material(self) -> Material:
        return Material(self.E, self.nu, self.formulation)


@dataclass
class ExperimentConfig:
    combinations: list[str] = field(default_factory=default_combinations)
    n_runs: int = 40
    query: str = "auto"
    level: str = "L1"
    tolerance: float = 0.05
    seed: int = 0
    parallelism: int = 1
    backend: BackendConfig = field(default_factory=BackendConfig)
    sandbox: SandboxConfig = field(default_factory=SandboxConfig)
    chat: ChatConfig = field(default_factory=ChatConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)

    def __post_init__(self):
        self.combinations = [
            "+".join(r.abbreviation for r in resolve_combination(c)) for c in self.combinations
        ]
        if self.n_runs < 1:
            raise ConfigError("n_runs must be positive")
        if self.level not in LEVELS:
            raise ConfigError(f"level must be one of {LEVELS}")
        if self.query not in QUERIES:
            raise ConfigError(f"query must be one of {QUERIES}")
        if self.backend.kind not in BACKEND_KINDS:
            raise ConfigError(f"backend.kind must be one of {BACKEND_KINDS}")
        if self.query == Q2_PLANNER:
            missing = [c for c in self.combinations if "Plan" not in c.split("+")]
            if missing:
                raise ConfigError(f"query q2_planner needs a Planner in every combination: {missing}")
        self.chat.model = self.backend.model
        self.chat.temperature = self.backend.temperature
        self.chat.max_tokens = self.backend.max_tokens

    def query_for(self, combination: str) -> str:
        if self.query != "auto":
            return self.query
        return Q2_PLANNER if "Plan" in combination.split("+") else Q1

    @classmethod
    def from_mapping(cls, kv: dict[str, str]) -> "ExperimentConfig":
        sections = {"backend": {}, "sandbox": {}, "chat": {}, "oracle": {}, "scripted": {}}
        top: dict = {}
        for key, value in kv.items():
            head, _, rest = key.partition(".")
            if rest and head in sections:
                sections[head][rest] = value
            elif rest and head == "harness":
                top[rest] = value
            elif not rest:
                top[key] = value
            else:
                raise ConfigError(f"unknown key {key!r}")
        try:
            backend = _fill(BackendConfig(), sections["backend"])
            for k, v in sections["scripted"].items():
                _fill(backend, {k: v})
            chat = _fill(ChatConfig(), sections["chat"])
            cfg = dict(
                backend=backend,
                sandbox=_fill(SandboxConfig(), sections["sandbox"]),
                chat=chat,
                oracle=_fill(OracleConfig(), sections["oracle"]),
            )
            for k, v in top.items():
                if k == "combinations":
                    cfg[k] = [c.strip() for c in v.split(";") if c.strip()]
                elif k in ("n_runs", "seed", "parallelism"):
                    cfg[k] = int(v)
                elif k == "tolerance":
                    cfg[k] = float(v)
                elif k in ("query", "level"):
                    cfg[k] = v
                else:
                    raise ConfigError(f"unknown key {k!r}")
            return cls(**cfg)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_mapping(parse_config_text(fh.read()))


def _fill(obj, values: dict[str, str]):
    known = {f.name: f for f in fields(obj)}
    for k, v in values.items():
        if k not in known:
            raise ConfigError(f"unknown key {k!r} for {type(obj).__name__}")
        current = getattr(obj, k)
        if isinstance(current, bool):
            setattr(obj, k, _bool(v))
        elif isinstance(current, int):
            setattr(obj, k, int(v))
        elif isinstance(current, float):
            setattr(obj, k, float(v))
        else:
            setattr(obj, k, v)
    return obj

