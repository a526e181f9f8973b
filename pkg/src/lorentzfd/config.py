"""Run configuration: a flat ``key = value`` file plus overrides."""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .groups import TriangleSignature

FORMATS = ("obj", "json", "svg")
EPS_FLOOR = 1e-3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    signature: tuple[int, int, int] = (2, 3, 7)
    level: int | None = None
    offsets: tuple[int, int, int] | str = "auto"
    vertex: int | str = "auto"
    epsilon: float = 0.1
    tolerance: float = 1e-9
    samples: int = 1000
    out: str = "out"
    formats: tuple[str, ...] = FORMATS
    name: str = ""
    seed: int = field(default_factory=lambda: int(os.environ.get("LFD_SEED", "0")))

    def validate(self) -> "RunConfig":
        try:
            sig = TriangleSignature.coerce(self.signature)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not sig.is_hyperbolic():
            raise ConfigError(f"signature {sig} is not hyperbolic (1/a + 1/b + 1/c must be < 1)")
        if self.level is not None and self.level < 1:
            raise ConfigError("level must be a positive integer")
        if self.offsets != "auto" and not (isinstance(self.offsets, tuple) and len(self.offsets) == 3):
            raise ConfigError("offsets must be 'auto' or three integers")
        if self.vertex != "auto" and self.vertex not in (1, 2, 3):
            raise ConfigError("vertex must be auto, 1, 2 or 3")
        if not EPS_FLOOR <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must lie in [{EPS_FLOOR}, 1]")
        if not 0 < self.tolerance < 1e-3:
            raise ConfigError("tolerance must lie in (0, 1e-3)")
        if self.samples < 0:
            raise ConfigError("samples must be non-negative")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"unknown formats {bad}; choose from {list(FORMATS)}")
        return self

    @property
    def target_level(self) -> int:
        """Requested level; automatic offsets default to level 1."""
        return 1 if self.level is None else self.level

    def label(self) -> str:
        if self.name:
            return self.name
        a, b, c = self.signature
        return f"G{a}_{b}_{c}"


def _ints(text: str, n: int | None = None) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc
    if n is not None and len(vals) != n:
        raise ConfigError(f"expected {n} integers, got {text!r}")
    return vals


_PARSERS = {
    "signature": lambda v: _ints(v, 3),
    "level": lambda v: None if v.lower() in ("", "auto", "none") else int(v),
    "offsets": lambda v: "auto" if v.lower() == "auto" else _ints(v, 3),
    "vertex": lambda v: "auto" if v.lower() == "auto" else int(v),
    "epsilon": float,
    "tolerance": float,
    "samples": int,
    "out": str,
    "formats": lambda v: tuple(f.strip().lower() for f in v.split(",") if f.strip()),
    "name": str,
    "seed": int,
}


def parse_pairs(pairs: dict[str, str]) -> dict:
    out = {}
    for key, raw in pairs.items():
        key = key.strip().lower()
        if key not in _PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            out[key] = _PARSERS[key](str(raw).strip())
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return out


def read_config_file(path) -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    pairs = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        k, v = line.split("=", 1)
        pairs[k.strip()] = v.strip()
    return pairs


def make_config(base: RunConfig | None = None, path=None, **overrides) -> RunConfig:
    """Combine defaults, an optional config file and string or typed overrides."""
    cfg = base or RunConfig()
    if path is not None:
        cfg = replace(cfg, **parse_pairs(read_config_file(path)))
    typed = {}
    for k, v in overrides.items():
        if v is None:
            continue
        typed.update(parse_pairs({k: v}) if isinstance(v, str) else {k: v})
    return replace(cfg, **typed).validate()
