"""
终止概率方程组

变量为 (σ, q) 对，σ ∈ Γ，q ∈ Q。同步状态的常量 ([q↓q]=1, [r↓q]=0) 和
不在 Γ 中的汇合符号（永久冻结）在构建时直接传播，不进入变量表。
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, Iterator, List, Optional, Set, Tuple

import numpy as np
from scipy import sparse

from analysis.model import PsjsModel, Rule, Symbol

logger = logging.getLogger(__name__)

Pair = Tuple[Symbol, str]

# 每个单项式最多三个因子：两个并行子进程加一个后续汇合
MAX_FACTORS = 3


def positive_states(model: PsjsModel) -> Dict[Symbol, FrozenSet[str]]:
    """
    计算每个过程符号可能终止到的同步状态集合 {q | [a↓q] > 0}

    布尔最小不动点，不涉及浮点运算。分支过程按“所有子进程都终止于 ⊥”计算。
    """
    pos: Dict[Symbol, Set[str]] = {a: set() for a in model.process_symbols}

    def lookup(sym: Symbol) -> Set[str]:
        if sym.is_sync:
            return {sym.name}
        return pos.get(sym, set())

    branching = model.flags.is_branching_process
    bottom = model.sync_states[0] if branching and model.sync_states else None
    changed = True
    while changed:
        changed = False
        for rule in model.rules:
            target = pos[rule.lhs]
            before = len(target)
            if branching:
                if all(bottom in lookup(child) for child in rule.rhs):
                    target.add(bottom)
            elif rule.arity == 1:
                target.update(lookup(rule.rhs[0]))
            else:
                for q1 in lookup(rule.rhs[0]):
                    for q2 in lookup(rule.rhs[1]):
                        join = Symbol.join(q1, q2)
                        if join in pos:
                            target.update(pos[join])
            if len(target) != before:
                changed = True
    return {a: frozenset(states) for a, states in pos.items()}


@dataclass(frozen=True)
class Monomial:
    """
    方程右侧的一个单项式 coef · Π x[factor]

    children 按规则右部顺序列出全部 (σ, q) 子项（含常量 1 的同步子项），
    parallel 是并行执行的变量下标，sequel 是其后执行的变量下标（汇合或一元后继）。
    """
    lhs: int
    coef: Fraction
    rule: Rule
    children: Tuple[Pair, ...]
    parallel: Tuple[int, ...]
    sequel: Optional[int]

    @property
    def factors(self) -> Tuple[int, ...]:
        if self.sequel is None:
            return self.parallel
        return self.parallel + (self.sequel,)


@dataclass
class EquationSystem:
    """
    多项式不动点方程组 x = f(x)

    f 的系数都是非负有理数；数值求解时转换为 float 向量化计算。
    """
    model: PsjsModel
    variables: Tuple[Pair, ...]
    monomials: Tuple[Monomial, ...]
    positive: Dict[Symbol, FrozenSet[str]]
    pruned: bool = True
    index: Dict[Pair, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {pair: i for i, pair in enumerate(self.variables)}

    @property
    def size(self) -> int:
        return len(self.variables)

    def variable(self, sigma: Symbol, q: str) -> Optional[int]:
        return self.index.get((sigma, q))

    def constant(self, sigma: Symbol, q: str) -> Optional[float]:
        """同步状态与冻结汇合符号的常量值；对真正的变量返回 None"""
        if sigma.is_sync:
            return 1.0 if sigma.name == q else 0.0
        if sigma not in self.model.gamma or (sigma, q) not in self.index:
            return 0.0
        return None

    @cached_property
    def by_lhs(self) -> Tuple[Tuple[Monomial, ...], ...]:
        grouped: List[List[Monomial]] = [[] for _ in range(self.size)]
        for mono in self.monomials:
            grouped[mono.lhs].append(mono)
        return tuple(tuple(g) for g in grouped)

    @cached_property
    def lhs_array(self) -> np.ndarray:
        return np.array([m.lhs for m in self.monomials], dtype=np.int64)

    @cached_property
    def coef_array(self) -> np.ndarray:
        return np.array([float(m.coef) for m in self.monomials], dtype=float)

    @cached_property
    def factor_array(self) -> np.ndarray:
        """M×3 的因子下标矩阵，空位用 size 填充（指向常量 1）"""
        table = np.full((len(self.monomials), MAX_FACTORS), self.size, dtype=np.int64)
        for row, mono in enumerate(self.monomials):
            factors = mono.factors
            table[row, :len(factors)] = factors
        return table

    def _extended(self, x: np.ndarray) -> np.ndarray:
        return np.append(np.asarray(x, dtype=float), 1.0)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """计算 f(x)"""
        if not self.monomials:
            return np.zeros(self.size)
        xe = self._extended(x)
        values = self.coef_array * np.prod(xe[self.factor_array], axis=1)
        return np.bincount(self.lhs_array, weights=values, minlength=self.size)

    def jacobian(self, x: np.ndarray) -> sparse.csr_matrix:
        """f 在 x 处的稀疏雅可比矩阵"""
        n = self.size
        if not self.monomials:
            return sparse.csr_matrix((n, n))
        xe = self._extended(x)
        gathered = xe[self.factor_array]
        rows, cols, data = [], [], []
        for slot in range(MAX_FACTORS):
            mask = self.factor_array[:, slot] < n
            if not mask.any():
                continue
            others = np.prod(np.delete(gathered, slot, axis=1), axis=1)
            rows.append(self.lhs_array[mask])
            cols.append(self.factor_array[mask, slot])
            data.append((self.coef_array * others)[mask])
        if not rows:
            return sparse.csr_matrix((n, n))
        matrix = sparse.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
        return matrix.tocsr()

    def pairs(self) -> Iterator[Pair]:
        """Σ × Q 上的全部 (σ, q) 对"""
        for sigma in self.model.alphabet:
            for q in self.model.sync_states:
                yield sigma, q

    def describe(self) -> List[str]:
        """按变量列出方程，调试与审计用"""
        lines = []
        for i, (sigma, q) in enumerate(self.variables):
            terms = []
            for mono in self.by_lhs[i]:
                names = [f"v({self.variables[j][0]},{self.variables[j][1]})" for j in mono.factors]
                terms.append("·".join([str(mono.coef)] + names))
            lines.append(f"v({sigma},{q}) = " + (" + ".join(terms) if terms else "0"))
        return lines


def _psjs_monomials(rule: Rule, q: str, lookup, var_of) -> Iterator[Monomial]:
    lhs = var_of(rule.lhs, q)
    if rule.arity == 1:
        child = rule.rhs[0]
        if child.is_sync:
            if child.name == q:
                yield Monomial(lhs, rule.prob, rule, ((child, q),), (), None)
            return
        sequel = var_of(child, q)
        if sequel is not None:
            yield Monomial(lhs, rule.prob, rule, ((child, q),), (), sequel)
        return

    sigma1, sigma2 = rule.rhs
    for q1 in lookup(sigma1):
        for q2 in lookup(sigma2):
            join = Symbol.join(q1, q2)
            sequel = var_of(join, q)
            if sequel is None:
                continue
            parallel = []
            feasible = True
            for sigma, target in ((sigma1, q1), (sigma2, q2)):
                if sigma.is_sync:
                    feasible = feasible and sigma.name == target
                    continue
                index = var_of(sigma, target)
                if index is None:
                    feasible = False
                else:
                    parallel.append(index)
            if feasible:
                children = ((sigma1, q1), (sigma2, q2), (join, q))
                yield Monomial(lhs, rule.prob, rule, children, tuple(parallel), sequel)


def _branching_monomial(rule: Rule, bottom: str, var_of) -> Optional[Monomial]:
    lhs = var_of(rule.lhs, bottom)
    factors = []
    for child in rule.rhs:
        if child.is_sync:
            continue
        index = var_of(child, bottom)
        if index is None:
            return None
        factors.append(index)
    children = tuple((child, bottom) for child in rule.rhs)
    if rule.arity == 1 and factors:
        return Monomial(lhs, rule.prob, rule, children, (), factors[0])
    return Monomial(lhs, rule.prob, rule, children, tuple(factors), None)


def build_equation_system(model: PsjsModel, prune: bool = True) -> EquationSystem:
    """
    构建终止概率方程组

    参数:
    - model: 已校验的模型
    - prune: 是否只为 [a↓q] > 0 的变量建立方程（布尔预分析），关闭时为全部 Γ × Q 建立方程

    返回:
    - EquationSystem: 常量已传播的方程组；分支过程中每个子进程与唯一同步状态配对
    """
    positive = positive_states(model)
    if prune:
        variables = tuple((a, q) for a in model.process_symbols for q in model.sync_states if q in positive[a])
    else:
        variables = tuple((a, q) for a in model.process_symbols for q in model.sync_states)
    index = {pair: i for i, pair in enumerate(variables)}

    def var_of(sigma: Symbol, q: str) -> Optional[int]:
        return index.get((sigma, q))

    every = frozenset(model.sync_states)
    ordered: Dict[Symbol, Tuple[str, ...]] = {}

    def lookup(sym: Symbol) -> Tuple[str, ...]:
        # 按声明顺序枚举，保证单项式顺序可复现
        if sym.is_sync:
            return (sym.name,)
        if sym not in ordered:
            states = positive.get(sym, frozenset()) if prune else every
            ordered[sym] = tuple(q for q in model.sync_states if q in states)
        return ordered[sym]

    monomials: List[Monomial] = []
    if model.flags.is_branching_process:
        bottom = model.sync_states[0]
        for rule in model.rules:
            if var_of(rule.lhs, bottom) is None:
                continue
            mono = _branching_monomial(rule, bottom, var_of)
            if mono is not None:
                monomials.append(mono)
    else:
        for rule in model.rules:
            for q in model.sync_states:
                if var_of(rule.lhs, q) is None:
                    continue
                monomials.extend(_psjs_monomials(rule, q, lookup, var_of))

    system = EquationSystem(model, variables, tuple(monomials), positive, pruned=prune)
    logger.debug(f"方程组构建完成: 变量 {system.size} 个, 单项式 {len(monomials)} 个")
    return system


def zero_set(system: EquationSystem) -> FrozenSet[Pair]:
    """
    精确的定性分析：返回所有 [σ↓q] = 0 的 (σ, q) 对

    一个变量为正当且仅当其某个单项式的全部因子为正（布尔最小不动点）。
    """
    n = system.size
    positive = np.zeros(n + 1, dtype=bool)
    positive[n] = True
    if system.monomials:
        factors = system.factor_array
        lhs = system.lhs_array
        while True:
            ok = np.all(positive[factors], axis=1)
            updated = np.zeros(n + 1, dtype=bool)
            updated[n] = True
            updated[:n] = np.bincount(lhs, weights=ok.astype(float), minlength=n) > 0
            if np.array_equal(updated, positive):
                break
            positive = updated

    zeros = set()
    for sigma, q in system.pairs():
        const = system.constant(sigma, q)
        if const is not None:
            if const == 0.0:
                zeros.add((sigma, q))
        elif not positive[system.index[(sigma, q)]]:
            zeros.add((sigma, q))
    return frozenset(zeros)
