"""Positive-P Monte Carlo simulator of quantum noise in optical solitons.

Configurations are plain dicts with the same keys as the JSON config files;
missing keys take their defaults. Invalid configurations raise ConfigError
(a ValueError) naming the offending field.
"""

import json

from . import _core
from ._core import ConfigError, DivergenceError, __version__

__all__ = [
    "ConfigError",
    "DivergenceError",
    "__version__",
    "config_hash",
    "default_config",
    "figure",
    "from_physical",
    "normalize_config",
    "propagate",
    "read_array",
    "run_ensemble",
    "simulate",
    "sweep",
    "to_physical",
]


def _text(config):
    return json.dumps(config or {})


def default_config():
    """All configuration fields with their default values."""
    return json.loads(_core.default_config())


def normalize_config(config):
    """Validate `config` and return it with every field filled in."""
    return json.loads(_core.normalize_config(_text(config)))


def config_hash(config):
    return _core.config_hash(_text(config))


def run_ensemble(config):
    """Run the ensemble in memory; one report dict per output plane."""
    return _core.run_ensemble(_text(config))


def propagate(config, trajectory=0):
    """One trajectory with snapshots at config["xi_planes"]."""
    return _core.propagate(_text(config), trajectory)


def simulate(config, out, dump=0):
    """Run one configuration and write its outputs to directory `out`."""
    return json.loads(_core.simulate(_text(config), str(out), dump))


def sweep(spec, out):
    """Transition sweep; `spec` has the layout of a sweep spec file."""
    return json.loads(_core.sweep(json.dumps(spec), str(out)))


def figure(figure_id, out, tier="quick", **overrides):
    """Run a figure preset; overrides: seed, trajectories, grid, steps, threads."""
    return json.loads(_core.figure(figure_id, tier, str(out), json.dumps(overrides)))


def to_physical(value, kind, config=None):
    return _core.to_physical(_text(config), value, kind)


def from_physical(value, kind, config=None):
    return _core.from_physical(_text(config), value, kind)


def read_array(path):
    """Load a raw little-endian float64 array written by the simulator."""
    return _core.read_array(str(path))
