"""HASE maps, alpha extraction and SCTS grid access."""

import json

from ._core import (
    HaseError,
    alpha_from_angular,
    config_schema,
    evaluate_map,
    field_at,
    git_blob_sha1,
    read_grid_summary,
    validate_config,
    wigner_delay,
    wigner_delay_linear_pi,
)


def schema():
    """Config schema as a dict."""
    return json.loads(config_schema())


def check_config(config):
    """Strictly validate a config dict; raises HaseError on the first bad key."""
    validate_config(json.dumps(config))


__all__ = [
    "HaseError",
    "alpha_from_angular",
    "check_config",
    "config_schema",
    "evaluate_map",
    "field_at",
    "git_blob_sha1",
    "read_grid_summary",
    "schema",
    "validate_config",
    "wigner_delay",
    "wigner_delay_linear_pi",
]
