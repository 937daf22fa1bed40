"""
有限空间分析的模型构造：无界集 U、有界非终止集 B 与有限空间变换
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import AbstractSet, Dict, FrozenSet, List, Optional, Set

from analysis.model import ModelFlags, PsjsModel, Rule, Symbol, ensure_valid, fresh_name
from analysis.solvers import positive_states
from analysis.transforms.normalise import ensure_normalised

logger = logging.getLogger(__name__)

BAR_BASE = "$bar"


def _successors(model: PsjsModel, positive: Dict[Symbol, FrozenSet[str]]) -> Dict[Symbol, Set[Symbol]]:
    """
    单步可达关系：一元规则的目标，以及分裂规则两个子进程分别终止后得到的汇合符号
    """
    def lookup(sym: Symbol) -> FrozenSet[str]:
        return frozenset((sym.name,)) if sym.is_sync else positive.get(sym, frozenset())

    succ: Dict[Symbol, Set[Symbol]] = {a: set() for a in model.process_symbols}
    for rule in model.rules:
        if rule.arity == 1:
            succ[rule.lhs].add(rule.rhs[0])
        elif rule.arity == 2 and not model.flags.is_branching_process:
            for q1 in lookup(rule.rhs[0]):
                for q2 in lookup(rule.rhs[1]):
                    join = Symbol.join(q1, q2)
                    if join in model.gamma:
                        succ[rule.lhs].add(join)
    return succ


def reachability(model: PsjsModel, positive: Optional[Dict[Symbol, FrozenSet[str]]] = None) -> Dict[Symbol, FrozenSet[Symbol]]:
    """a ⇒ b：从 a 出发能到达只含单个符号 b 的树（自反传递闭包）"""
    positive = positive if positive is not None else positive_states(model)
    succ = _successors(model, positive)
    closure: Dict[Symbol, FrozenSet[Symbol]] = {}
    for a in model.process_symbols:
        seen = {a}
        queue = [a]
        while queue:
            current = queue.pop()
            for nxt in succ.get(current, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        closure[a] = frozenset(seen)
    return closure


def unbounded_step(model: PsjsModel, current: AbstractSet[Symbol],
                   reach: Dict[Symbol, FrozenSet[Symbol]]) -> FrozenSet[Symbol]:
    """U_{k+1} = {a ∈ Γ | a ⇒ b，b 有分裂规则且某个子进程在 U_k 中}"""
    heads = {rule.lhs for rule in model.rules if rule.arity >= 2 and any(child in current for child in rule.rhs)}
    return frozenset(a for a in model.process_symbols if reach[a] & heads)


def unbounded_set(model: PsjsModel, positive: Optional[Dict[Symbol, FrozenSet[str]]] = None) -> FrozenSet[Symbol]:
    """
    U = {a ∈ Γ | 对所有 n 都有 P(S_a > n) > 0}

    从 U_0 = Σ 出发反复应用 unbounded_step，直到稳定。
    """
    reach = reachability(model, positive)
    current: FrozenSet[Symbol] = frozenset(model.alphabet)
    while True:
        updated = unbounded_step(model, current, reach)
        if updated == current:
            return current
        current = updated


@dataclass
class FiniteSpaceResult:
    """
    有限空间变换的结果

    bar_state 是新状态 q̄；check_state 是规范化引入的 q̌（若有）。
    """
    model: PsjsModel
    bar_state: str
    check_state: Optional[str]
    unbounded: FrozenSet[Symbol]
    bounded_nonterminating: FrozenSet[Symbol]


def finite_space_transform(model: PsjsModel) -> FiniteSpaceResult:
    """
    有限空间变换

    参数:
    - model: 已校验的 pSJS

    返回:
    - FiniteSpaceResult: 输出模型规范，原状态上的 [a↓q] 不变，且 [a↓q̄] = P(S_a < ∞ = T_a)
    """
    normalised, check = ensure_normalised(model)
    positive = positive_states(normalised)
    unbounded = unbounded_set(normalised, positive)
    bounded = frozenset(a for a in normalised.process_symbols if a not in unbounded and not positive[a])

    bar = fresh_name(normalised.names, BAR_BASE)
    bar_symbol = Symbol.sync(bar)
    one = Fraction(1)
    rules: List[Rule] = [rule for rule in normalised.rules if rule.lhs not in bounded]
    rules.extend(Rule(b, (bar_symbol,), one) for b in normalised.process_symbols if b in bounded)
    extended = normalised.sync_states + (bar,)
    for q1 in extended:
        for q2 in extended:
            if bar in (q1, q2):
                rules.append(Rule(Symbol.join(q1, q2), (bar_symbol,), one))

    result = PsjsModel(
        sync_states=extended,
        rules=tuple(rules),
        flags=ModelFlags(normalised=True),
        start=model.start,
        provenance=model.provenance,
    )
    ensure_valid(result)
    logger.info(f"有限空间变换: |U|={len(unbounded)}, |B|={len(bounded)}, 新状态 {bar}")
    return FiniteSpaceResult(result, bar, check, unbounded, bounded)
