"""
配置树与马尔可夫链 M_S 的单步语义

树用 Symbol（叶子）或子树元组（二叉或三叉内部结点）表示。所有遍历都使用显式栈，
深树不会触发递归深度限制。
"""

import bisect
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple, Union

from analysis.errors import AnalysisError
from analysis.model import PsjsModel, Rule, Symbol

logger = logging.getLogger(__name__)

Tree = Union[Symbol, Tuple["Tree", ...]]
Position = Tuple[int, ...]


def leaf(symbol: Symbol) -> Tree:
    return symbol


def node(*children: Tree) -> Tree:
    if len(children) not in (2, 3):
        raise ValueError(f"内部结点必须有 2 或 3 个子树，实际 {len(children)} 个")
    return tuple(children)


def process_label(model: PsjsModel, tree: Tree) -> Optional[Symbol]:
    """
    若 tree 是可改写的过程则返回其符号

    Γ 中的叶子是过程；两个同步叶子构成的结点 (q1, q2) 当且仅当 ⟨q1 q2⟩ ∈ Γ 时是过程。
    """
    if isinstance(tree, Symbol):
        return tree if tree in model.gamma else None
    if len(tree) == 2:
        left, right = tree
        if isinstance(left, Symbol) and isinstance(right, Symbol) and left.is_sync and right.is_sync:
            join = Symbol.join(left.name, right.name)
            if join in model.gamma:
                return join
    return None


def _rewrite(model: PsjsModel, tree: Tree, replace: Callable[[Position, Symbol], Tree]) -> Tree:
    """后序遍历，把前沿上的每个过程替换为 replace 的结果，其余部分原样重建"""
    results: List[Tree] = []
    work: List[Tuple[Tree, Position, bool]] = [(tree, (), False)]
    while work:
        current, pos, expanded = work.pop()
        label = process_label(model, current)
        if label is not None:
            results.append(replace(pos, label))
        elif isinstance(current, Symbol):
            results.append(current)
        elif not expanded:
            work.append((current, pos, True))
            for i in reversed(range(len(current))):
                work.append((current[i], pos + (i,), False))
        else:
            k = len(current)
            children = tuple(results[-k:])
            del results[-k:]
            results.append(children)
    return results[0]


def front(model: PsjsModel, tree: Tree) -> List[Tuple[Position, Symbol]]:
    """
    返回前沿：从左到右的全部过程及其位置

    参数:
    - model: 模型
    - tree: 配置树

    返回:
    - List[Tuple[Position, Symbol]]: 为空当且仅当树是终止树
    """
    found: List[Tuple[Position, Symbol]] = []

    def collect(pos: Position, symbol: Symbol) -> Tree:
        found.append((pos, symbol))
        return symbol

    _rewrite(model, tree, collect)
    return found


def is_terminal(model: PsjsModel, tree: Tree) -> bool:
    return not front(model, tree)


def leaf_count(tree: Tree) -> int:
    """|t|：叶子个数，不计括号"""
    count = 0
    stack = [tree]
    while stack:
        current = stack.pop()
        if isinstance(current, Symbol):
            count += 1
        else:
            stack.extend(current)
    return count


def terminal_state(model: PsjsModel, tree: Tree) -> Optional[str]:
    """
    终止树对应的同步状态

    单个同步叶子返回其名字；分支过程中全部叶子都是 ⊥ 时返回 ⊥；其他终止树（冻结的汇合）返回 None。
    """
    if isinstance(tree, Symbol):
        return tree.name if tree.is_sync else None
    if model.flags.is_branching_process:
        stack = [tree]
        while stack:
            current = stack.pop()
            if isinstance(current, Symbol):
                if not current.is_sync:
                    return None
            else:
                stack.extend(current)
        return model.sync_states[0]
    return None


def format_tree(tree: Tree) -> str:
    """渲染为 <X <q r>> 形式"""
    parts: List[str] = []
    stack: List[Union[Tree, str]] = [tree]
    while stack:
        current = stack.pop()
        if isinstance(current, str):
            parts.append(current)
        elif isinstance(current, Symbol):
            parts.append(current.name)
        else:
            stack.append(">")
            for i in reversed(range(len(current))):
                stack.append(current[i])
                if i > 0:
                    stack.append(" ")
            stack.append("<")
    return "".join(parts)


def instantiate(rule: Rule) -> Tree:
    """规则右部对应的子树"""
    if rule.arity == 1:
        return rule.rhs[0]
    return tuple(rule.rhs)


@lru_cache(maxsize=4096)
def _cumulative(rules: Tuple[Rule, ...]) -> Tuple[float, ...]:
    total = 0.0
    bounds = []
    for rule in rules:
        total += float(rule.prob)
        bounds.append(total)
    return tuple(bounds)


def sample_rule(model: PsjsModel, symbol: Symbol, rng) -> Tuple[int, Rule]:
    """按概率抽取 symbol 的一条规则，rng 只需提供 random() 方法"""
    rules = model.rules_for(symbol)
    index = bisect.bisect_right(_cumulative(rules), rng.random())
    index = min(index, len(rules) - 1)
    return index, rules[index]


@dataclass
class StepResult:
    tree: Tree
    prob: Fraction
    rewrites: int
    log_prob: float = 0.0


def _advance(model: PsjsModel, tree: Tree, choose: Callable[[int, Symbol], Tuple[int, Rule]],
             exact: bool = True) -> StepResult:
    prob = Fraction(1)
    log_prob = 0.0
    rewrites = 0

    def replace(pos: Position, symbol: Symbol) -> Tree:
        nonlocal prob, log_prob, rewrites
        _, rule = choose(rewrites, symbol)
        rewrites += 1
        if exact:
            prob *= rule.prob
        log_prob += math.log(float(rule.prob))
        return instantiate(rule)

    new_tree = _rewrite(model, tree, replace)
    return StepResult(new_tree, prob, rewrites, log_prob)


def step(model: PsjsModel, tree: Tree, rng) -> Tuple[Tree, Fraction]:
    """
    M_S 的一步：前沿上的所有过程同时独立地按规则改写

    参数:
    - model: 已校验的模型
    - tree: 当前配置树
    - rng: 随机源，需提供 random()

    返回:
    - Tuple[Tree, Fraction]: 新树和所选转移的精确概率；终止树映射到自身，概率为 1
    """
    result = _advance(model, tree, lambda _i, symbol: sample_rule(model, symbol, rng))
    return result.tree, result.prob


def step_with_choices(model: PsjsModel, tree: Tree, choices: Sequence[int]) -> StepResult:
    """按给定的规则下标（前沿顺序）执行一步"""
    processes = front(model, tree)
    if len(choices) != len(processes):
        raise AnalysisError(f"前沿有 {len(processes)} 个过程，但给出了 {len(choices)} 个选择")

    def choose(i: int, symbol: Symbol) -> Tuple[int, Rule]:
        rules = model.rules_for(symbol)
        index = choices[i]
        if not 0 <= index < len(rules):
            raise AnalysisError(f"符号 {symbol} 没有下标为 {index} 的规则")
        return index, rules[index]

    return _advance(model, tree, choose)


class Outcome(str, Enum):
    """一次运行的结局"""
    TERMINATED = "terminated"
    CUTOFF_STEPS = "cutoff_steps"
    CUTOFF_SPACE = "cutoff_space"


@dataclass
class RunStats:
    """
    单次运行的度量

    time 为步数 T，work 为所有非终止树前沿大小之和 W，space 为访问过的树的最大叶子数 S。
    """
    outcome: Outcome
    time: int
    work: int
    space: int
    terminal: Optional[Tree] = None
    terminal_state: Optional[str] = None
    log_prob: Optional[float] = None
    prob: Optional[Fraction] = None


def replay_run(model: PsjsModel, start: Symbol, choices: Sequence[Sequence[int]]) -> RunStats:
    """
    按给定的逐步规则选择重放一次运行，计算路径的精确概率

    参数:
    - model: 已校验的模型
    - start: 起始符号
    - choices: 每一步一个元组，按前沿顺序给出规则下标

    返回:
    - RunStats: 在终止树停止；选择用尽仍未终止时结局为 CUTOFF_STEPS
    """
    tree: Tree = start
    prob = Fraction(1)
    log_prob = 0.0
    time = work = 0
    space = 1
    for step_choices in choices:
        if is_terminal(model, tree):
            break
        result = step_with_choices(model, tree, list(step_choices))
        tree = result.tree
        prob *= result.prob
        log_prob += result.log_prob
        time += 1
        work += result.rewrites
        space = max(space, leaf_count(tree))

    if is_terminal(model, tree):
        return RunStats(Outcome.TERMINATED, time, work, space, tree, terminal_state(model, tree), log_prob, prob)
    return RunStats(Outcome.CUTOFF_STEPS, time, work, space, None, None, log_prob, prob)
