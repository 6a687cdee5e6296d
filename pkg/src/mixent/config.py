"""Flat ``key = value`` configuration files.

Lines starting with ``#`` or ``;`` are comments. There are no sections.
Recognized search keys map onto :class:`mixent.search.SearchConfig`; family
hyper-parameters are ``alpha``, ``lambda_cap``, ``exclude_flat`` and
``sigma2_floor_scale``.
"""

from __future__ import annotations

import configparser
from dataclasses import fields, replace
from pathlib import Path

from .search import SearchConfig

_SECTION = "config"
FAMILY_KEYS = {"alpha": float, "lambda_cap": float, "sigma2_floor_scale": float, "exclude_flat": bool}


class ConfigError(ValueError):
    """Malformed configuration file or value."""


def parse_config(text: str) -> dict[str, str]:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace(f"[{_SECTION}]", "").strip()) from None
    extra = [s for s in parser.sections() if s != _SECTION]
    if extra:
        raise ConfigError(f"sections are not supported: [{extra[0]}]")
    return dict(parser[_SECTION])


def load_config(path: str | Path) -> dict[str, str]:
    return parse_config(Path(path).read_text())


def _to_bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


def search_config(raw: dict[str, str], base: SearchConfig | None = None) -> SearchConfig:
    """Apply the search keys present in ``raw`` on top of ``base``."""
    base = base or SearchConfig()
    updates = {}
    for f in fields(SearchConfig):
        if f.name not in raw:
            continue
        v = raw[f.name]
        try:
            if f.type in ("bool", bool):
                updates[f.name] = _to_bool(v)
            elif f.type in ("int", int):
                updates[f.name] = int(v)
            else:
                updates[f.name] = str(v)
        except ValueError as exc:
            raise ConfigError(f"{f.name}: {exc}") from None
    try:
        return replace(base, **updates)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def family_hyper(raw: dict[str, str]) -> dict[str, float | bool]:
    out = {}
    for k, conv in FAMILY_KEYS.items():
        if k in raw:
            if conv is bool:
                out[k] = _to_bool(raw[k])
                continue
            try:
                out[k] = conv(raw[k])
            except ValueError:
                raise ConfigError(f"{k}: not a number: {raw[k]!r}") from None
    return out


def float_list(v: str) -> list[float]:
    try:
        return [float(x) for x in v.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"not a list of numbers: {v!r}") from None


def int_list(v: str) -> list[int]:
    try:
        return [int(x) for x in v.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"not a list of integers: {v!r}") from None
