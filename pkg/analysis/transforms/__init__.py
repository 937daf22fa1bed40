"""
模型到模型的构造：规范化、pPDS 转换、有限空间变换与条件分支过程
"""

from analysis.transforms.conditioned import BOTTOM, ConditionedBp, conditioned_bp, conditioned_name
from analysis.transforms.finite_space import (
    FiniteSpaceResult,
    finite_space_transform,
    reachability,
    unbounded_set,
    unbounded_step,
)
from analysis.transforms.normalise import ensure_normalised, is_normalised, normalise
from analysis.transforms.ppds import (
    Ppds,
    PpdsRule,
    SerializationMap,
    from_ppds,
    render_ppds,
    serialise,
    solve_ppds,
)

__all__ = [
    "normalise",
    "ensure_normalised",
    "is_normalised",
    "Ppds",
    "PpdsRule",
    "SerializationMap",
    "serialise",
    "from_ppds",
    "solve_ppds",
    "render_ppds",
    "unbounded_set",
    "unbounded_step",
    "reachability",
    "finite_space_transform",
    "FiniteSpaceResult",
    "conditioned_bp",
    "conditioned_name",
    "ConditionedBp",
    "BOTTOM",
]
