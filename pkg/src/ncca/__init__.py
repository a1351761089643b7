"""Number conservation in non-uniform elementary cellular automata."""

from .ca import (
    N4_EXTRA_NC_RULES,
    NC_RULES,
    Configuration,
    ResourceLimitError,
    RuleTable,
    RuleVector,
    evolve,
    is_nc_rule,
    next_config,
    rmt_sequence,
    rule_lookup,
)
from .decide import SuperNode, Verdict, decide_ncca, find_next_weight
from .oracle import brute_force_is_ncca, build_stg, census, count_ncca_vectors
from .rtree import build_tree, tree_decide_ncca
from .synth import SynthesisTrace, synthesize

__version__ = "0.1.0"

__all__ = [
    "N4_EXTRA_NC_RULES",
    "NC_RULES",
    "Configuration",
    "ResourceLimitError",
    "RuleTable",
    "RuleVector",
    "SuperNode",
    "SynthesisTrace",
    "Verdict",
    "brute_force_is_ncca",
    "build_stg",
    "build_tree",
    "census",
    "count_ncca_vectors",
    "decide_ncca",
    "evolve",
    "find_next_weight",
    "is_nc_rule",
    "next_config",
    "rmt_sequence",
    "rule_lookup",
    "synthesize",
    "tree_decide_ncca",
]
