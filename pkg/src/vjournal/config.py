"""Run configuration: paths, clock override and tunable thresholds.

Every field can be set from the environment as ``VJOURNAL_<FIELD>`` (upper
case); command-line flags take precedence over the environment.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .corpus import THETA_CONC
from .errors import ValidationError
from .readstats import S_MAX
from .refgraph import REF_MARGIN, THETA_REF
from .secondorder import LIST_CAP, SEED_ORDERS, SEED_SIZE

ENV_PREFIX = "VJOURNAL_"


@dataclass(frozen=True)
class Settings:
    theta_conc: float = THETA_CONC
    theta_ref: float = THETA_REF
    ref_margin: float = REF_MARGIN
    s_max: int = S_MAX
    list_cap: int = LIST_CAP
    seed_size: int = SEED_SIZE
    seed_order: str = "reads"
    token_secret: str = ""

    def validate(self) -> Settings:
        for name in ("theta_conc", "theta_ref", "ref_margin"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {v}")
        for name in ("s_max", "list_cap", "seed_size"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")
        if self.seed_order not in SEED_ORDERS:
            raise ValidationError(f"seed_order must be one of {SEED_ORDERS}")
        return self


@dataclass(frozen=True)
class RunConfig:
    corpus_dir: Path = Path("state")
    profiles_dir: Path = Path("profiles")
    out_dir: Path = Path("out")
    clock_override: dt.datetime | None = None
    settings: Settings = Settings()

    def today(self) -> dt.date:
        if self.clock_override is not None:
            return self.clock_override.date()
        return dt.datetime.now(dt.timezone.utc).date()


def parse_clock(value: str) -> dt.datetime:
    try:
        ts = dt.datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError:
        raise ValidationError(f"invalid date/time {value!r}") from None
    return ts if ts.tzinfo else ts.replace(tzinfo=dt.timezone.utc)


def _coerce(value: str, kind: type):
    if kind is int:
        return int(value)
    if kind is float:
        return float(value)
    return value


def load_config(overrides: Mapping[str, object] | None = None, environ: Mapping[str, str] | None = None) -> RunConfig:
    """Defaults, then ``VJOURNAL_*`` environment variables, then non-None ``overrides``."""
    env = os.environ if environ is None else environ
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    settings_kw: dict[str, object] = {}
    for f in dataclasses.fields(Settings):
        raw = env.get(ENV_PREFIX + f.name.upper())
        if raw is not None:
            kind = type(f.default)
            try:
                settings_kw[f.name] = _coerce(raw, kind)
            except ValueError:
                raise ValidationError(f"bad value for {ENV_PREFIX + f.name.upper()}: {raw!r}") from None
        if f.name in overrides:
            settings_kw[f.name] = overrides[f.name]
    settings = Settings(**settings_kw).validate()

    paths = {}
    for name in ("corpus_dir", "profiles_dir", "out_dir"):
        value = overrides.get(name) or env.get(ENV_PREFIX + name.upper())
        if value:
            paths[name] = Path(value)
    clock = overrides.get("clock_override") or env.get(ENV_PREFIX + "CLOCK_OVERRIDE")
    if isinstance(clock, str):
        clock = parse_clock(clock)
    elif isinstance(clock, dt.date) and not isinstance(clock, dt.datetime):
        clock = dt.datetime(clock.year, clock.month, clock.day, tzinfo=dt.timezone.utc)
    return RunConfig(clock_override=clock, settings=settings, **paths)
