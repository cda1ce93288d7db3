"""Python access to the msis library: simulator, training runs and metrics."""

import json

from . import _msis
from ._msis import ConfigError, UndefinedMetric, auc, target_names

__all__ = [
    "ConfigError",
    "UndefinedMetric",
    "auc",
    "cli",
    "default_config",
    "gradcheck",
    "normalize_config",
    "parameter_count",
    "run_model",
    "simulate",
    "target_names",
]


def _dump(config):
    if config is None:
        return ""
    return json.dumps(config)


def default_config():
    """Default experiment configuration as a nested dict."""
    return json.loads(_msis.default_config())


def normalize_config(config):
    """Validates a (possibly partial) config dict and returns it with defaults filled in."""
    return json.loads(_msis.normalize_config(_dump(config)))


def simulate(config=None):
    """Simulates a loan funnel; returns numpy arrays keyed by name."""
    return _msis.simulate(_dump(config))


def run_model(config=None, model="msis"):
    """Trains `model` once per configured seed; returns per-seed test AUCs."""
    return _msis.run_model(_dump(config), model)


def parameter_count(config=None):
    return _msis.parameter_count(_dump(config))


def gradcheck(config=None, seed=1, batch_size=64, step=1e-8, tol=1e-4):
    return _msis.gradcheck(_dump(config), seed, batch_size, step, tol)


def cli(*args):
    """Runs a command-line subcommand in-process, e.g. cli("simulate", "--n", "1000", "-o", "out")."""
    return _msis.cli(list(args))
