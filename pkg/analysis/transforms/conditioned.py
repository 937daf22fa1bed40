"""
条件分支过程
把 pSJS 在“终止于 q”条件下的行为表示为分支过程，⟨q q⟩ 与 ⊥ 等同
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from analysis.errors import TransformError
from analysis.model import ModelFlags, PsjsModel, Rule, Symbol, ensure_valid
from analysis.solvers import TermMatrix

logger = logging.getLogger(__name__)

BOTTOM = "⊥"


def conditioned_name(sigma: Symbol, q: str) -> str:
    return f"{sigma}@{q}"


@dataclass
class ConditionedBp:
    """
    条件分支过程及符号映射

    symbols 把 (σ, q) 映射到分支过程中的符号 ⟨σ q⟩；defects 记录每个左部在精确重归一化之前的概率和偏差。
    """
    model: PsjsModel
    symbols: Dict[Tuple[Symbol, str], Symbol]
    defects: Dict[Symbol, float] = field(default_factory=dict)

    def symbol(self, sigma: Symbol, q: str) -> Symbol:
        """
        返回 ⟨σ q⟩

        异常:
        - TransformError: [σ↓q] = 0 时该符号无定义
        """
        try:
            return self.symbols[(sigma, q)]
        except KeyError:
            raise TransformError(f"[{sigma}↓{q}] = 0，条件符号 ⟨{sigma} {q}⟩ 无定义")

    @property
    def max_defect(self) -> float:
        return max(self.defects.values(), default=0.0)


def conditioned_bp(model: PsjsModel, terms: TermMatrix) -> ConditionedBp:
    """
    构造条件分支过程

    参数:
    - model: 已校验的 pSJS
    - terms: 该模型的终止概率

    返回:
    - ConditionedBp: 只为 [a↓q] > 0 的 (a, q) 建立符号；每个左部的概率精确归一
    """
    if model.flags.is_branching_process:
        raise TransformError("输入已是分支过程，无需条件化")
    system = terms.system
    if system.model is not model and system.model != model:
        raise TransformError("终止概率不属于该模型")

    bottom = Symbol.sync(BOTTOM)
    values = terms.values
    symbols: Dict[Tuple[Symbol, str], Symbol] = {}
    for i, (sigma, q) in enumerate(system.variables):
        if values[i] > 0:
            symbols[(sigma, q)] = Symbol.basic(conditioned_name(sigma, q))

    def child_symbol(sigma: Symbol, q: str) -> Symbol:
        return bottom if sigma.is_sync else symbols[(sigma, q)]

    rules: List[Rule] = []
    defects: Dict[Symbol, float] = {}
    degree3 = False
    for i, (sigma, q) in enumerate(system.variables):
        lhs = symbols.get((sigma, q))
        if lhs is None:
            continue
        value = float(values[i])
        weighted: List[Tuple[Tuple[Symbol, ...], Fraction]] = []
        for mono in system.by_lhs[i]:
            y = float(mono.coef)
            for factor in mono.factors:
                y *= float(values[factor])
            if y <= 0:
                continue
            rhs = tuple(child_symbol(child, target) for child, target in mono.children)
            weighted.append((rhs, Fraction(y / value)))
        if not weighted:
            symbols.pop((sigma, q))
            continue
        total = sum((w for _, w in weighted), Fraction(0))
        defects[lhs] = abs(1.0 - float(total))
        for rhs, w in weighted:
            degree3 = degree3 or len(rhs) == 3
            rules.append(Rule(lhs, rhs, w / total))

    bp = PsjsModel(
        sync_states=(BOTTOM,),
        rules=tuple(rules),
        flags=ModelFlags(is_branching_process=True, degree3=degree3),
        provenance="conditioned",
    )
    ensure_valid(bp)
    result = ConditionedBp(bp, symbols, defects)
    logger.debug(f"条件分支过程: {len(symbols)} 个符号, {len(rules)} 条规则, 最大概率偏差 {result.max_defect:.2e}")
    return result
