"""The recursive phase grammar: constants, witness trees and parsers."""

from .constants import (
    DEFAULT_PROFILE,
    ConstantsProfile,
    F_const,
    c_closed_form,
    c_const,
    c_recurrence,
    default_d,
    harmonic,
    multiphase_norm,
    phase_norm,
)
from .definitional import DefinitionalGrammar
from .parser import (
    ParseOutcome,
    PhaseSplit,
    Status,
    multiphase_parser,
    parse_multiphase,
    parse_phase,
    phase_parser,
    split_phases,
)
from .trees import (
    LeafPhase,
    Multiphase,
    NodePhase,
    iter_nodes,
    locate,
    recompute_demand,
    shift,
    to_pretty,
    to_text,
)


def demand_vector(tree):
    return tree.demand


def critical_set(tree):
    return tree.critical_set


__all__ = [
    "ConstantsProfile", "DEFAULT_PROFILE", "DefinitionalGrammar", "F_const", "LeafPhase",
    "Multiphase", "NodePhase", "ParseOutcome", "PhaseSplit", "Status", "c_closed_form",
    "c_const", "c_recurrence", "critical_set", "default_d", "demand_vector", "harmonic",
    "iter_nodes", "locate", "multiphase_norm", "multiphase_parser", "parse_multiphase",
    "parse_phase", "phase_norm", "phase_parser", "recompute_demand", "shift",
    "split_phases", "to_pretty", "to_text",
]
