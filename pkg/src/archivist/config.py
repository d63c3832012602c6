"""Service configuration: UTF-8 key=value file, overridden by ARCHIVIST_*
environment variables, with validated defaults."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigParseError

ENV_PREFIX = "ARCHIVIST_"

DEFAULT_LISTEN_PORT = 8080
DEFAULT_SESSION_TTL_MINUTES = 30
DEFAULT_MAX_IMAGE_BYTES = 25 * 1024 * 1024
DEFAULT_BANNER = "Electronic Medical Image Archive"


@dataclass
class ServiceConfig:
    listen_port: int = DEFAULT_LISTEN_PORT
    data_dir: str = "./data"
    session_ttl_minutes: int = DEFAULT_SESSION_TTL_MINUTES
    max_image_bytes: int = DEFAULT_MAX_IMAGE_BYTES
    bootstrap_banner: str = DEFAULT_BANNER


_FIELDS = ("listen_port", "data_dir", "session_ttl_minutes",
           "max_image_bytes", "bootstrap_banner")


def _parse_positive_int(field: str, raw: str, upper: int | None = None) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise ConfigParseError(field, f"{field} must be an integer, got {raw!r}") from None
    if value < 1 or (upper is not None and value > upper):
        bound = f"1..{upper}" if upper else ">= 1"
        raise ConfigParseError(field, f"{field} must be {bound}, got {value}")
    return value


def load_config(path: str | os.PathLike | None = None,
                env: dict | None = None) -> ServiceConfig:
    """File values overridden by environment variables; defaults fill gaps.
    A missing file is not an error; an invalid value is fatal and names the
    offending field."""
    env = os.environ if env is None else env
    raw: dict[str, str] = {}
    if path is not None and Path(path).exists():
        for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigParseError(
                    "file", f"line {lineno} is not a key=value pair: {line!r}"
                )
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _FIELDS:
                raise ConfigParseError(key, f"unknown configuration key {key!r}")
            raw[key] = value.strip()
    for field in _FIELDS:
        override = env.get(ENV_PREFIX + field.upper())
        if override is not None:
            raw[field] = override

    cfg = ServiceConfig()
    if "listen_port" in raw:
        cfg.listen_port = _parse_positive_int("listen_port", raw["listen_port"], 65535)
    if "data_dir" in raw:
        if not raw["data_dir"]:
            raise ConfigParseError("data_dir", "data_dir must not be empty")
        cfg.data_dir = raw["data_dir"]
    if "session_ttl_minutes" in raw:
        cfg.session_ttl_minutes = _parse_positive_int(
            "session_ttl_minutes", raw["session_ttl_minutes"]
        )
    if "max_image_bytes" in raw:
        cfg.max_image_bytes = _parse_positive_int("max_image_bytes", raw["max_image_bytes"])
    if "bootstrap_banner" in raw:
        cfg.bootstrap_banner = raw["bootstrap_banner"]
    return cfg
