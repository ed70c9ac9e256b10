"""
Flat key=value text files: run reports, tuning reports, generator
manifests and config files. Read with python-dotenv, so `#` comments,
blank lines and quoted values follow .env rules.
"""

import math
import os
from typing import Any, Dict

from dotenv import dotenv_values

from src.errors import DataFormatError, InputError


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_report(values: Dict[str, Any], path: str) -> str:
    with open(path, "w") as f:
        for key, value in values.items():
            f.write(f"{key}={_format(value)}\n")
    return path


def read_report(path: str) -> Dict[str, str]:
    """Raw string values by key; later duplicates win."""
    if not os.path.isfile(path):
        raise InputError(f"file not found: {path}")
    values = dotenv_values(path, interpolate=False)
    bare = [key for key, value in values.items() if value is None]
    if bare:
        raise DataFormatError(f"{path}: expected key=value, found bare key '{bare[0]}'")
    return dict(values)


def read_config(path: str) -> Dict[str, str]:
    """Config file values with empty entries dropped, so they fall back to env and defaults."""
    return {k: v for k, v in read_report(path).items() if v != ""}
