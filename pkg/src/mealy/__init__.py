"""Mealy automata, their minimized powers, and growth of the generated semigroups."""

from .core import (
    MealyMachine,
    apply_action,
    connected_components,
    dual,
    inverse,
    is_invertible,
    is_reversible,
    product,
)
from .fmt import builtin, dumps, load, loads, resolve, to_dot
from .minimize import ActionSignature, StatePartition, action_signature, minimize, nerode_partition, same_action
from .power import explicit_power, level_transitive_up_to, minimized_power_sizes
from .analysis import (
    exponential_growth_certificate,
    find_relations,
    finiteness_probe,
    freeness_check,
    growth_function,
    lemma1_verify,
    proposition_verify,
)

__all__ = [
    "MealyMachine", "apply_action", "connected_components", "dual", "inverse", "is_invertible",
    "is_reversible", "product", "builtin", "dumps", "load", "loads", "resolve", "to_dot",
    "ActionSignature", "StatePartition", "action_signature", "minimize", "nerode_partition",
    "same_action", "explicit_power", "level_transitive_up_to", "minimized_power_sizes",
    "exponential_growth_certificate", "find_relations", "finiteness_probe", "freeness_check",
    "growth_function", "lemma1_verify", "proposition_verify",
]
