import logging
import os
from typing import Any
from typing import Dict
from typing import Optional

from ruamel.yaml import YAML
from ruamel.yaml import YAMLError

yaml = YAML(typ="safe")

DEFAULTS = {
    "bound": 4096,
    "ambient_order": 24,
    "family_scope": 20,
    "candidate_bound": 64,
}

BOUND_ENV = "CBTOOL_BOUND"


class ConfigError(Exception):
    pass


def load_config(path: Optional[str] = None) -> Dict[str, Any]:
    """Defaults overlaid with an optional YAML file of enumeration limits."""
    config = dict(DEFAULTS)
    if path is None:
        return config

    try:
        with open(path) as f:
            loaded = yaml.load(f) or {}
    except (OSError, YAMLError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e

    if not isinstance(loaded, dict):
        raise ConfigError(f"config {path} must be a mapping")

    for key, value in loaded.items():
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError(f"config key {key!r} must be a positive integer")
        config[key] = value

    logging.debug(f"loaded config from {path}: {config}")
    return config


def resolve_bound(flag: Optional[int], config: Dict[str, Any], environ: Optional[Dict[str, str]] = None) -> int:
    """--bound wins over CBTOOL_BOUND, which wins over the config file."""
    if flag is not None:
        return flag

    env = (os.environ if environ is None else environ).get(BOUND_ENV)
    if env:
        try:
            return int(env)
        except ValueError as e:
            raise ConfigError(f"{BOUND_ENV}={env!r} is not an integer") from e

    return config["bound"]
