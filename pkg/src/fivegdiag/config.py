"""INI configuration shared by every subcommand.

Example::

    [sim]
    seed = 7
    signature_dropout = 0.3

    [rules]
    delay_ratio_threshold = 3.0

    [endpoint]
    url = http://127.0.0.1:8000/v1/chat/completions
    model = ft:my-model

Secrets never live in the file; the endpoint reads its key from the
environment variable named by ``api_key_env``.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field
from typing import Optional

from .collector import DEFAULT_OBSERVE_S, DEFAULT_WARMUP_S
from .diagnoser import RuleConfig
from .logfilter import CHARS_PER_TOKEN
from .remote import EndpointConfig
from .sim import SimConfig


@dataclass(frozen=True)
class CollectorConfig:
    warmup_s: int = DEFAULT_WARMUP_S
    observe_s: int = DEFAULT_OBSERVE_S
    parallelism: int = 1


@dataclass(frozen=True)
class DatasetConfig:
    chars_per_token: int = CHARS_PER_TOKEN
    include_descriptions: bool = False


@dataclass(frozen=True)
class AppConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    rules: RuleConfig = field(default_factory=RuleConfig)
    endpoint: EndpointConfig = field(default_factory=EndpointConfig)
    collector: CollectorConfig = field(default_factory=CollectorConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)


def _coerce(section: configparser.SectionProxy, key: str, default):
    if isinstance(default, bool):
        return section.getboolean(key)
    if isinstance(default, int):
        return section.getint(key)
    if isinstance(default, float):
        return section.getfloat(key)
    if isinstance(default, tuple):
        return tuple(v.strip() for v in section[key].split(",") if v.strip())
    return section[key]


def _section(cp: configparser.ConfigParser, name: str, cls):
    base = cls()
    if not cp.has_section(name):
        return base
    known = {f.name for f in dataclasses.fields(cls)}
    values = {}
    for key in cp[name]:
        if key not in known:
            raise ValueError(f"[{name}] unknown key {key!r}")
        values[key] = _coerce(cp[name], key, getattr(base, key))
    return cls(**values)


SECTIONS = {"sim": SimConfig, "rules": RuleConfig, "endpoint": EndpointConfig,
            "collector": CollectorConfig, "dataset": DatasetConfig}


def load_config(path: Optional[os.PathLike | str] = None) -> AppConfig:
    if path is None:
        return AppConfig()
    cp = configparser.ConfigParser(interpolation=None)
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    extra = set(cp.sections()) - set(SECTIONS)
    if extra:
        raise ValueError(f"unknown config sections: {', '.join(sorted(extra))}")
    return AppConfig(**{name: _section(cp, name, cls) for name, cls in SECTIONS.items()})
