"""Python access to the two-end-lab core."""

import json
from pathlib import Path

from ._core import (
    ConfigError,
    c0,
    c1,
    jacobi_fields,
    normalize_config,
    oracle_suite,
    probe,
    profile,
    toda,
)
from . import _core

__all__ = [
    "ConfigError",
    "c0",
    "c1",
    "jacobi_fields",
    "normalize_config",
    "oracle_suite",
    "probe",
    "profile",
    "run",
    "toda",
]


def run(config, out=None, quiet=True):
    """Run a config given as text or a path. Returns (exit_code, report dict)."""
    if isinstance(config, Path) or (isinstance(config, str) and "=" not in config):
        config = Path(config).read_text()
    code, report = _core.run_text(config, "" if out is None else str(out), quiet)
    return code, json.loads(report)
