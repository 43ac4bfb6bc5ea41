"""Macro tree transducers: evaluation, depth-proper normalisation and
decision procedures for linear size/height increase."""

from .errors import *  # noqa: F401,F403
from .lookahead import TreeAutomaton
from .mtt import Mtt, apply, eval_state, extend, provisional_output, reachable_calls, validate
from .trees import Tree, parse_tree, to_str

__all__ = [
    "Mtt", "Tree", "TreeAutomaton", "apply", "eval_state", "extend", "parse_tree",
    "provisional_output", "reachable_calls", "to_str", "validate",
]
__version__ = "0.1.0"
