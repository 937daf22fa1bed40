"""
pPDS 与 pSJS 之间的互相转换

serialise 把 pSJS 串行化为概率下推系统；from_ppds 把 pPDS 嵌入为 pSJS。
两个方向都保持终止概率。
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

from analysis.errors import ModelValidationError, TransformError
from analysis.model import Diagnostic, ModelFlags, PsjsModel, Rule, Symbol, ensure_valid, fresh_name, quote_name

logger = logging.getLogger(__name__)

BOX_BASE = "$box"
BAR_BASE = "$bar:"
TILDE_BASE = "$tilde:"


@dataclass(frozen=True)
class PpdsRule:
    """q a → q' w : prob，w 为压栈字，长度不超过 2（w[0] 成为新栈顶）"""
    state: str
    top: str
    target: str
    push: Tuple[str, ...]
    prob: Fraction

    def __str__(self) -> str:
        word = " ".join(self.push)
        right = f"{self.target} {word}".rstrip()
        return f"{self.state} {self.top} -> {right} : {self.prob}"


@dataclass(frozen=True)
class Ppds:
    """概率下推系统"""
    control_states: Tuple[str, ...]
    stack_alphabet: Tuple[str, ...]
    rules: Tuple[PpdsRule, ...]

    @cached_property
    def rules_by_lhs(self) -> Dict[Tuple[str, str], Tuple[PpdsRule, ...]]:
        grouped: Dict[Tuple[str, str], List[PpdsRule]] = {}
        for rule in self.rules:
            grouped.setdefault((rule.state, rule.top), []).append(rule)
        return {lhs: tuple(rules) for lhs, rules in grouped.items()}

    def rules_for(self, state: str, top: str) -> Tuple[PpdsRule, ...]:
        return self.rules_by_lhs.get((state, top), ())

    def validate(self) -> List[Diagnostic]:
        diagnostics = []
        states = set(self.control_states)
        stack = set(self.stack_alphabet)
        for rule in self.rules:
            if rule.state not in states or rule.target not in states:
                diagnostics.append(Diagnostic("unknown-state", "规则引用了未声明的控制状态", str(rule)))
            if rule.top not in stack or any(b not in stack for b in rule.push):
                diagnostics.append(Diagnostic("unknown-stack", "规则引用了未声明的栈符号", str(rule)))
            if len(rule.push) > 2:
                diagnostics.append(Diagnostic("push-length", "压栈字长度不能超过 2", str(rule)))
            if not (0 < rule.prob <= 1):
                diagnostics.append(Diagnostic("prob-range", f"概率 {rule.prob} 不在 (0,1] 内", str(rule)))
        for (state, top), rules in self.rules_by_lhs.items():
            total = sum((r.prob for r in rules), Fraction(0))
            if total != 1:
                diagnostics.append(Diagnostic(
                    "prob-sum", f"probabilities for {state} {top} sum to {total} ≠ 1 / 概率之和不为 1"))
        return diagnostics


@dataclass
class SerializationMap:
    """
    pSJS 符号与串行化后 pPDS 符号之间的对应

    box 是工作状态 □，bar[q] 是返回状态 q̄，tilde[q] 是挂起汇合标记 q̃。
    """
    box: str
    bar: Dict[str, str] = field(default_factory=dict)
    tilde: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {"box": self.box, "bar": dict(self.bar), "tilde": dict(self.tilde)}


def serialise(model: PsjsModel) -> Tuple[Ppds, SerializationMap]:
    """
    把 pSJS 串行化为 pPDS

    参数:
    - model: 已校验的 pSJS（分支过程使用独立后代语义，不在此列）

    返回:
    - Tuple[Ppds, SerializationMap]: [σ↓q] 等于 pPDS 中 [□σ↓q̄]
    """
    if model.flags.is_branching_process:
        raise TransformError("分支过程不能串行化")

    used = set(model.names)
    box = fresh_name(used, BOX_BASE)
    used.add(box)
    mapping = SerializationMap(box=box)
    for q in model.sync_states:
        mapping.bar[q] = fresh_name(used, BAR_BASE + q)
        used.add(mapping.bar[q])
        mapping.tilde[q] = fresh_name(used, TILDE_BASE + q)
        used.add(mapping.tilde[q])

    stack: List[str] = [str(s) for s in model.alphabet]
    for q in model.sync_states:
        for r in model.sync_states:
            join = str(Symbol.join(q, r))
            if join not in stack:
                stack.append(join)
    symbols = list(stack)
    stack.extend(mapping.tilde[q] for q in model.sync_states)

    one = Fraction(1)
    rules: List[PpdsRule] = []
    for rule in model.rules:
        rules.append(PpdsRule(box, str(rule.lhs), box, tuple(str(s) for s in rule.rhs), rule.prob))
    for q in model.sync_states:
        rules.append(PpdsRule(box, q, mapping.bar[q], (), one))
    for q in model.sync_states:
        for sigma in symbols:
            rules.append(PpdsRule(mapping.bar[q], sigma, box, (sigma, mapping.tilde[q]), one))
    for q in model.sync_states:
        for r in model.sync_states:
            rules.append(PpdsRule(mapping.bar[r], mapping.tilde[q], box, (str(Symbol.join(q, r)),), one))

    ppds = Ppds(
        control_states=(box,) + tuple(mapping.bar[q] for q in model.sync_states),
        stack_alphabet=tuple(stack),
        rules=tuple(rules),
    )
    logger.debug(f"串行化完成: 控制状态 {len(ppds.control_states)} 个, 栈符号 {len(stack)} 个, 规则 {len(rules)} 条")
    return ppds, mapping


def from_ppds(ppds: Ppds) -> PsjsModel:
    """
    把 pPDS 嵌入为 pSJS

    同步状态为 Q_P ∪ Γ_P；每个有规则的 (q, a) 成为汇合符号 ⟨q a⟩，
    按压栈长度生成 ⟨q a⟩ → r、⟨q a⟩ → ⟨r b⟩、⟨q a⟩ → ⟨⟨r b⟩ c⟩。
    """
    diagnostics = ppds.validate()
    if diagnostics:
        raise ModelValidationError(diagnostics)
    overlap = set(ppds.control_states) & set(ppds.stack_alphabet)
    if overlap:
        raise TransformError(f"控制状态与栈符号必须不相交: {sorted(overlap)}")

    rules = []
    for rule in ppds.rules:
        lhs = Symbol.join(rule.state, rule.top)
        if len(rule.push) == 0:
            rhs = (Symbol.sync(rule.target),)
        elif len(rule.push) == 1:
            rhs = (Symbol.sync(rule.target), Symbol.sync(rule.push[0]))
        else:
            rhs = (Symbol.join(rule.target, rule.push[0]), Symbol.sync(rule.push[1]))
        rules.append(Rule(lhs, rhs, rule.prob))

    model = PsjsModel(
        sync_states=ppds.control_states + ppds.stack_alphabet,
        rules=tuple(rules),
        flags=ModelFlags(),
        provenance="ppds",
    )
    return ensure_valid(model)


def solve_ppds(ppds: Ppds, tol: float = 1e-12, max_iter: int = 1_000_000) -> Dict[Tuple[str, str, str], float]:
    """
    直接在 pPDS 上做 Kleene 迭代，求 [q a↓r]（从 q a 出发以控制状态 r 清空栈）

    返回:
    - Dict[Tuple[str, str, str], float]: 键为 (q, a, r)
    """
    states = ppds.control_states
    state_index = {q: i for i, q in enumerate(states)}
    stack_index = {a: i for i, a in enumerate(ppds.stack_alphabet)}
    n_states, n_stack = len(states), len(ppds.stack_alphabet)
    x = np.zeros((n_states, n_stack, n_states))

    iterations = 0
    while iterations < max_iter:
        iterations += 1
        fx = np.zeros_like(x)
        for rule in ppds.rules:
            q, a = state_index[rule.state], stack_index[rule.top]
            target = state_index[rule.target]
            p = float(rule.prob)
            if len(rule.push) == 0:
                fx[q, a, target] += p
            elif len(rule.push) == 1:
                fx[q, a, :] += p * x[target, stack_index[rule.push[0]], :]
            else:
                b, c = stack_index[rule.push[0]], stack_index[rule.push[1]]
                fx[q, a, :] += p * (x[target, b, :] @ x[:, c, :])
        fx = np.minimum(fx, 1.0)
        change = float(np.max(np.abs(fx - x))) if x.size else 0.0
        x = fx
        if change < tol:
            break
    else:
        logger.warning(f"pPDS Kleene 迭代 {max_iter} 次后仍未收敛")

    return {
        (q, a, r): float(x[state_index[q], stack_index[a], state_index[r]])
        for q in states for a in ppds.stack_alphabet for r in states
    }


def render_ppds(ppds: Ppds) -> str:
    """审计用文本格式"""
    lines = [
        "control:" + "".join(" " + quote_name(q) for q in ppds.control_states),
        "stack:" + "".join(" " + quote_name(a) for a in ppds.stack_alphabet),
    ]
    for rule in ppds.rules:
        right = " ".join(quote_name(s) for s in (rule.target,) + rule.push)
        lines.append(f"{quote_name(rule.state)} {quote_name(rule.top)} -> {right} : "
                     f"{rule.prob.numerator}/{rule.prob.denominator}")
    return "\n".join(lines) + "\n"
