"""
常用模型族：示例模型、倍增分支过程、随机游走 pPDS 以及随机生成的小模型
"""

from fractions import Fraction
from typing import List, Tuple, Union

import numpy as np

from analysis.model import ModelFlags, PsjsModel, Rule, Symbol, ensure_valid, parse_model
from analysis.transforms import BOTTOM, Ppds, PpdsRule

Probability = Union[Fraction, float, int, str]

EX1_TEXT = """\
# 两个同步状态的示例模型
states: q r
start: X
X -> <X X> : 1/2
X -> q : 3/10
X -> r : 1/5
<q r> -> X : 1
"""


def as_probability(p: Probability) -> Fraction:
    """把参数转换为精确有理数；浮点数按十进制字面值转换（0.05 -> 1/20）"""
    if isinstance(p, float):
        value = Fraction(repr(p))
    else:
        value = Fraction(p)
    if not 0 <= value <= 1:
        raise ValueError(f"概率参数必须在 [0, 1] 内: {p}")
    return value


def _weighted(lhs: Symbol, options: List[Tuple[Tuple[Symbol, ...], Fraction]]) -> List[Rule]:
    return [Rule(lhs, rhs, prob) for rhs, prob in options if prob > 0]


def ex1() -> PsjsModel:
    """X →0.5 ⟨X X⟩, X →0.3 q, X →0.2 r, ⟨q r⟩ →1 X"""
    return parse_model(EX1_TEXT)


def doubler(p: Probability) -> PsjsModel:
    """分支过程 X →p ⟨X X⟩, X →1−p ⊥"""
    p = as_probability(p)
    x = Symbol.basic("X")
    bottom = Symbol.sync(BOTTOM)
    rules = _weighted(x, [((x, x), p), ((bottom,), 1 - p)])
    return ensure_valid(PsjsModel((BOTTOM,), tuple(rules), ModelFlags(is_branching_process=True),
                                  start=x, provenance="doubler"))


def swapped_doubler(p: Probability) -> PsjsModel:
    """分支过程 X →p ⊥, X →1−p ⟨X X⟩"""
    p = as_probability(p)
    x = Symbol.basic("X")
    bottom = Symbol.sync(BOTTOM)
    rules = _weighted(x, [((bottom,), p), ((x, x), 1 - p)])
    return ensure_valid(PsjsModel((BOTTOM,), tuple(rules), ModelFlags(is_branching_process=True),
                                  start=x, provenance="swapped-doubler"))


def doubler_psjs(p: Probability) -> PsjsModel:
    """X →p ⟨X X⟩, X →1−p q, ⟨q q⟩ →1 q"""
    p = as_probability(p)
    x = Symbol.basic("X")
    q = Symbol.sync("q")
    rules = _weighted(x, [((x, x), p), ((q,), 1 - p)])
    rules.append(Rule(Symbol.join("q", "q"), (q,), Fraction(1)))
    return ensure_valid(PsjsModel(("q",), tuple(rules), start=x, provenance="doubler"))


def random_walk_ppds(p: Probability) -> Ppds:
    """qa →p qaa, qa →1−p q"""
    p = as_probability(p)
    rules = [PpdsRule("q", "a", "q", ("a", "a"), p), PpdsRule("q", "a", "q", (), 1 - p)]
    return Ppds(("q",), ("a",), tuple(rule for rule in rules if rule.prob > 0))


def _random_weights(rng: np.random.Generator, count: int) -> List[Fraction]:
    weights = [int(w) for w in rng.integers(1, 10, size=count)]
    total = sum(weights)
    return [Fraction(w, total) for w in weights]


def random_model(seed: int, max_symbols: int = 6, max_states: int = 3) -> PsjsModel:
    """
    随机生成的小 pSJS

    参数:
    - seed: 随机种子，相同种子生成相同模型
    - max_symbols: 基本符号个数上限
    - max_states: 同步状态个数上限

    返回:
    - PsjsModel: 已校验，规则概率为小分母有理数；部分汇合字没有规则
    """
    rng = np.random.default_rng(seed)
    n_states = int(rng.integers(1, max_states + 1))
    n_basic = int(rng.integers(1, max_symbols + 1))
    states = tuple(f"q{i}" for i in range(n_states))
    basics = [Symbol.basic(f"X{i}") for i in range(n_basic)]
    syncs = [Symbol.sync(q) for q in states]

    def element() -> Symbol:
        pool = basics if rng.random() < 0.5 else syncs
        return pool[int(rng.integers(len(pool)))]

    def rhs_options(count: int, split_bias: float) -> List[Tuple[Symbol, ...]]:
        options = []
        for _ in range(count):
            if rng.random() < split_bias:
                options.append((element(), element()))
            else:
                options.append((element(),))
        return options

    rules: List[Rule] = []
    for lhs in basics:
        options = rhs_options(int(rng.integers(1, 4)), 0.4)
        # 至少有一条直接终止的规则
        options[-1] = (syncs[int(rng.integers(n_states))],)
        rules.extend(Rule(lhs, rhs, w) for rhs, w in zip(options, _random_weights(rng, len(options))))
    for left in states:
        for right in states:
            if rng.random() < 0.6:
                join = Symbol.join(left, right)
                options = rhs_options(int(rng.integers(1, 3)), 0.2)
                rules.extend(Rule(join, rhs, w) for rhs, w in zip(options, _random_weights(rng, len(options))))
    return ensure_valid(PsjsModel(states, tuple(rules), start=basics[0], provenance=f"random:{seed}"))


def random_ppds(seed: int, max_states: int = 3, max_stack: int = 3) -> Ppds:
    """随机生成的小 pPDS，每个 (控制状态, 栈顶) 有 1 到 3 条规则，压栈长度 0 到 2"""
    rng = np.random.default_rng(seed)
    controls = tuple(f"p{i}" for i in range(int(rng.integers(1, max_states + 1))))
    stack = tuple(f"a{i}" for i in range(int(rng.integers(1, max_stack + 1))))
    rules: List[PpdsRule] = []
    for state in controls:
        for top in stack:
            count = int(rng.integers(1, 4))
            pushes = []
            for _ in range(count):
                length = int(rng.integers(0, 3))
                pushes.append(tuple(stack[int(rng.integers(len(stack)))] for _ in range(length)))
            pushes[-1] = ()
            for push, w in zip(pushes, _random_weights(rng, count)):
                target = controls[int(rng.integers(len(controls)))]
                rules.append(PpdsRule(state, top, target, push, w))
    return Ppds(controls, stack, tuple(rules))
