"""
Configuration loading and logging setup for the command line.

Defaults live in config/lab_config.yaml. A user file given with --config is
merged over them key by key, so it only needs the values it changes. If the
bundled file is missing the built-in copy below is used instead.
"""

import copy
import logging
import os
import sys
from typing import Any, Dict, Optional

import yaml

from analysis.simulation import SimulationCase
from analysis.theory import GammaEstimator
from coding.errors import BbqError, ConfigError

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                                   "config", "lab_config.yaml")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

logger = logging.getLogger(__name__)


def get_default_config() -> Dict[str, Any]:
    return {
        "simulation": {
            "blocks": 50_000,
            "chunk_blocks": 4096,
            "seed": 0,
            "scenario": "two_baseband",
            "q1_fraction": 0.1,
            "q2_multipliers": [8, 4, 2, 1],
            "transform": "dct",
            "cases": {
                "a": {"block_len": 16, "rho": 0.4, "sigma": 1.0911},
                "b": {"block_len": 256, "rho": 0.9, "sigma": 2.2942},
            },
        },
        "gamma": {
            "m_range": 1000,
            "samples": 100_000,
            "chunk": 8192,
            "workers": 1,
            "jitter": 1e-7,
            "degenerate_threshold": 0.01,
            "transform": "rot2x2",
            "block_len": 2,
            "seed": 0,
            "cache_file": None,
        },
        "snrloss": {"alphas": "1:8:0.1", "scenario": "two_baseband"},
        "bitdepth": {"source_bits": 16, "ranges": [300, 500, 700, 900]},
        "verify": {"seed": 0},
        "logging": {"level": "INFO", "file": None},
    }


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def _read_yaml(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def load_config(path: Optional[str] = None) -> Dict[str, Any]:
    """Bundled defaults, with the user's file merged over them.

    An explicit path that cannot be read is an error. A missing bundled file
    is not: the built-in defaults stand in for it.
    """
    config = get_default_config()
    try:
        config = deep_merge(config, _read_yaml(DEFAULT_CONFIG_PATH))
    except (OSError, yaml.YAMLError) as e:
        logger.warning("bundled config unavailable (%s); using built-in defaults", e)
    if path is not None:
        try:
            config = deep_merge(config, _read_yaml(path))
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        except yaml.YAMLError as e:
            raise ConfigError(f"config {path} is not valid YAML: {e}") from None
        logger.info("loaded configuration from %s", path)
    return config


def cases_from_config(config: Dict[str, Any]) -> Dict[str, SimulationCase]:
    sim = config["simulation"]
    cases = {}
    try:
        for name, spec in sim.get("cases", {}).items():
            cases[name] = SimulationCase(
                name=name, block_len=int(spec["block_len"]), rho=float(spec["rho"]),
                sigma=float(spec["sigma"]),
                transform=str(spec.get("transform", sim.get("transform", "dct"))),
                q1_fraction=float(spec.get("q1_fraction", sim.get("q1_fraction", 0.1))),
                q2_multipliers=[float(m) for m in
                                spec.get("q2_multipliers", sim.get("q2_multipliers"))])
    except (KeyError, TypeError, ValueError, BbqError) as e:
        raise ConfigError(f"bad simulation case in config: {e}") from None
    return cases


def estimator_from_config(config: Dict[str, Any], **overrides) -> GammaEstimator:
    g = dict(config["gamma"])
    g.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return GammaEstimator(m_range=int(g["m_range"]), samples=int(g["samples"]),
                              seed=int(g["seed"]), workers=int(g["workers"]),
                              chunk=int(g["chunk"]), jitter=float(g["jitter"]),
                              degenerate_threshold=float(g["degenerate_threshold"]))
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"bad gamma settings in config: {e}") from None


def configure_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """Logs go to stderr, and to a file as well when one is configured."""
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.INFO),
                        format=LOG_FORMAT, handlers=handlers, force=True)
