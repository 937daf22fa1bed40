"""
模型校验
检查 PsjsModel 的全部不变量，返回诊断列表而不是抛出异常
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List

from analysis.errors import ModelValidationError
from analysis.model.symbols import PsjsModel, Symbol, SymbolKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Diagnostic:
    """单条诊断：违反的不变量代码、说明和涉及的符号或规则"""
    code: str
    message: str
    subject: str = ""

    def __str__(self) -> str:
        if self.subject:
            return f"[{self.code}] {self.message} ({self.subject})"
        return f"[{self.code}] {self.message}"


def validate(model: PsjsModel) -> List[Diagnostic]:
    """
    校验模型

    参数:
    - model: 待校验的模型

    返回:
    - List[Diagnostic]: 诊断列表，为空表示所有不变量成立
    """
    diagnostics: List[Diagnostic] = []
    declared = set()
    for q in model.sync_states:
        if q in declared:
            diagnostics.append(Diagnostic("duplicate-state", "同步状态重复声明", q))
        declared.add(q)

    flags = model.flags
    if flags.degree3 and not flags.is_branching_process:
        diagnostics.append(Diagnostic("degree3-flag", "degree3 标志要求同时是分支过程"))
    if flags.is_branching_process and len(model.sync_states) != 1:
        diagnostics.append(Diagnostic(
            "branching-sync", f"分支过程必须恰好有一个同步状态，实际为 {len(model.sync_states)} 个"))

    gamma = model.gamma
    for symbol in model.process_symbols:
        if symbol.kind is SymbolKind.BASIC and symbol.name in declared:
            diagnostics.append(Diagnostic("name-clash", "基本符号与同步状态同名", symbol.name))

    sums: Dict[Symbol, Fraction] = {}
    for rule in model.rules:
        lhs = rule.lhs
        if not lhs.is_process:
            diagnostics.append(Diagnostic("lhs-not-process", "lhs must be a process symbol / 规则左部必须是过程符号", str(rule)))
        if lhs.is_join:
            if lhs.left not in declared or lhs.right not in declared:
                diagnostics.append(Diagnostic("undeclared-join", "汇合符号引用了未声明的同步状态", str(rule)))
            if flags.is_branching_process:
                diagnostics.append(Diagnostic("branching-join", "分支过程不能含汇合符号", str(rule)))

        if not (0 < rule.prob <= 1):
            diagnostics.append(Diagnostic("prob-range", f"概率 {rule.prob} 不在 (0,1] 内", str(rule)))
        sums[lhs] = sums.get(lhs, Fraction(0)) + rule.prob

        if rule.arity == 3 and not (flags.is_branching_process and flags.degree3):
            diagnostics.append(Diagnostic(
                "triple-rhs", "Triple rhs requires degree-3 branching process / 三元右部仅限三叉分支过程", str(rule)))
        elif rule.arity not in (1, 2, 3):
            diagnostics.append(Diagnostic("bad-arity", f"右部长度 {rule.arity} 非法", str(rule)))

        for sym in rule.rhs:
            if sym.is_sync:
                if sym.name not in declared:
                    diagnostics.append(Diagnostic("unknown-symbol", "右部引用了未声明的同步状态", sym.name))
            elif sym.is_join:
                if sym.left not in declared or sym.right not in declared:
                    diagnostics.append(Diagnostic("undeclared-join", "汇合符号引用了未声明的同步状态", str(rule)))
                if rule.arity == 1:
                    diagnostics.append(Diagnostic("join-alone", "汇合符号只能以 <q r> 的形式出现在二元右部中", str(rule)))
                if flags.is_branching_process:
                    diagnostics.append(Diagnostic("branching-join", "分支过程不能含汇合符号", str(rule)))
            elif sym not in gamma:
                diagnostics.append(Diagnostic("unknown-symbol", "右部引用了没有规则的基本符号", sym.name))

    for lhs, total in sums.items():
        if total != 1:
            diagnostics.append(Diagnostic(
                "prob-sum", f"probabilities for {lhs} sum to {total} ≠ 1 / 概率之和不为 1", str(lhs)))

    start = model.start
    if start is not None:
        known = (start.is_sync and start.name in declared) or start in gamma
        if not known:
            diagnostics.append(Diagnostic("start-unknown", "起始符号不在字母表中", start.name))

    return diagnostics


def ensure_valid(model: PsjsModel) -> PsjsModel:
    """
    校验模型，存在诊断时抛出 ModelValidationError

    返回:
    - PsjsModel: 原模型，便于链式调用
    """
    diagnostics = validate(model)
    if diagnostics:
        for diagnostic in diagnostics:
            logger.debug(f"模型诊断: {diagnostic}")
        raise ModelValidationError(diagnostics)
    return model
