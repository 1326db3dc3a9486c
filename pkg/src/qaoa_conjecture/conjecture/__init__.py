"""Symbolic inequality conjectures over the knowledge table."""
from .engine import (
    DIRECTIONS,
    FAMILIES,
    LOWER,
    UPPER,
    Conjecture,
    EngineConfig,
    Frame,
    SlackRanker,
    Template,
    as_frame,
    dalmatian_filter,
    enumerate_forms,
    fit_bound,
    generate,
    rank_conjectures,
    slack,
    slack_vector,
)
from .expr import parse, to_string
from .io import conjecture_from_dict, conjecture_to_dict, read_conjectures, write_conjectures

__all__ = [
    "DIRECTIONS", "FAMILIES", "LOWER", "UPPER", "Conjecture", "EngineConfig", "Frame",
    "SlackRanker", "Template", "as_frame", "dalmatian_filter", "enumerate_forms", "fit_bound",
    "generate", "rank_conjectures", "slack", "slack_vector", "parse", "to_string",
    "conjecture_from_dict", "conjecture_to_dict", "read_conjectures", "write_conjectures",
]
