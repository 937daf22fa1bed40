"""
树语义与蒙特卡洛模拟
"""

from analysis.semantics.simulator import (
    DEFAULT_MAX_SPACE,
    DEFAULT_MAX_STEPS,
    MonteCarloReport,
    OutcomeCount,
    SampleStats,
    estimate,
    simulate_run,
)
from analysis.semantics.tree import (
    Outcome,
    RunStats,
    Tree,
    format_tree,
    front,
    is_terminal,
    leaf_count,
    node,
    process_label,
    replay_run,
    sample_rule,
    step,
    step_with_choices,
    terminal_state,
)

__all__ = [
    "Tree",
    "Outcome",
    "RunStats",
    "node",
    "front",
    "step",
    "step_with_choices",
    "sample_rule",
    "process_label",
    "is_terminal",
    "leaf_count",
    "terminal_state",
    "format_tree",
    "replay_run",
    "simulate_run",
    "estimate",
    "MonteCarloReport",
    "OutcomeCount",
    "SampleStats",
    "DEFAULT_MAX_STEPS",
    "DEFAULT_MAX_SPACE",
]
