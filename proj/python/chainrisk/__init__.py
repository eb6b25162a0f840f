"""Critical-chain scheduling and schedule risk analysis."""

import json as _json

from ._core import (
    ChainriskError,
    Project,
    ahp_weights as _ahp_weights,
    apd_buffer,
    cut_paste_buffer,
    load_project,
    mitigation as _mitigation,
    parse_patterson,
    project_from_json as _project_from_json,
    risk_criticality,
    rsem_buffer,
    schedule,
    simulate,
)

__all__ = [
    "ChainriskError",
    "Project",
    "ahp_weights",
    "apd_buffer",
    "cut_paste_buffer",
    "load_project",
    "mitigation",
    "parse_patterson",
    "project_from_json",
    "risk_criticality",
    "rsem_buffer",
    "schedule",
    "simulate",
]


def _doc(x):
    return x if isinstance(x, str) else _json.dumps(x)


def project_from_json(doc):
    """Build a project from a JSON string or an equivalent dict."""
    return _project_from_json(_doc(doc))


def ahp_weights(matrix):
    """(cost, time, quality) weights from a 3x3 comparison matrix."""
    return _ahp_weights(_doc(matrix))


def mitigation(doc):
    """Fault tree / event tree analysis from a JSON string or dict."""
    return _mitigation(_doc(doc))
