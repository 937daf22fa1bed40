"""
规范化
为缺失的汇合规则补上新鲜状态 q̌，使每个终止运行都结束于单个同步状态
"""

import logging
from fractions import Fraction
from typing import Dict, FrozenSet, Optional, Tuple

from analysis.errors import TransformError
from analysis.model import ModelFlags, PsjsModel, Rule, Symbol, ensure_valid, fresh_name
from analysis.solvers import positive_states

logger = logging.getLogger(__name__)

CHECK_BASE = "$check"


def is_normalised(model: PsjsModel, positive: Optional[Dict[Symbol, FrozenSet[str]]] = None) -> bool:
    """
    结构判定：每个可能出现的汇合字 ⟨q1 q2⟩ 都有规则

    即对每条分裂规则 a → ⟨σ1 σ2⟩ 以及 q1 ∈ pos(σ1)、q2 ∈ pos(σ2)，都有 ⟨q1 q2⟩ ∈ Γ；
    并且右部不引用没有规则的汇合符号。分支过程总是规范的。
    """
    if model.flags.is_branching_process:
        return True
    positive = positive if positive is not None else positive_states(model)

    def lookup(sym: Symbol) -> FrozenSet[str]:
        return frozenset((sym.name,)) if sym.is_sync else positive.get(sym, frozenset())

    for rule in model.rules:
        for sym in rule.rhs:
            if sym.is_join and sym not in model.gamma:
                return False
        if rule.arity != 2:
            continue
        for q1 in lookup(rule.rhs[0]):
            for q2 in lookup(rule.rhs[1]):
                if not model.has_join(q1, q2):
                    return False
    return True


def normalise(model: PsjsModel) -> Tuple[PsjsModel, Optional[str]]:
    """
    规范化模型

    参数:
    - model: 已校验的模型，不能是三叉分支过程

    返回:
    - Tuple[PsjsModel, Optional[str]]: 规范化后的模型和新鲜状态 q̌；
      Q × Q 上没有缺失的汇合规则时只设置标志，状态为 None
    """
    flags = model.flags
    if flags.degree3:
        raise TransformError("三叉分支过程不能规范化")
    if flags.is_branching_process:
        return model.with_flags(normalised=True), None

    missing = [(r, s) for r in model.sync_states for s in model.sync_states if not model.has_join(r, s)]
    if not missing:
        return model.with_flags(normalised=True), None

    check = fresh_name(model.names, CHECK_BASE)
    extended = model.sync_states + (check,)
    target = Symbol.sync(check)
    added = [
        Rule(Symbol.join(r, s), (target,), Fraction(1))
        for r in extended
        for s in extended
        if not model.has_join(r, s)
    ]
    result = PsjsModel(
        sync_states=extended,
        rules=model.rules + tuple(added),
        flags=ModelFlags(normalised=True),
        start=model.start,
        provenance=model.provenance,
    )
    logger.info(f"规范化: 新增状态 {check}，补充 {len(added)} 条汇合规则")
    return ensure_valid(result), check


def ensure_normalised(model: PsjsModel) -> Tuple[PsjsModel, Optional[str]]:
    """结构上已规范时直接返回（设置标志），否则执行规范化并记录提示"""
    if is_normalised(model):
        if model.flags.normalised:
            return model, None
        return model.with_flags(normalised=True), None
    logger.info("模型未规范化，自动执行规范化")
    return normalise(model)
