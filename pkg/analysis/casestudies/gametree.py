"""
博弈树求值的 pSJS 模型

随机博弈树：每个节点以概率 p 有三个子节点，否则是叶子；叶子值取自 {0..4}，
参数为 e 的叶子值服从期望为 e 的二项分布。max 节点的子节点参数依次为 e, e⊖1, e⊖2，
min 节点为 e, e⊕1, e⊕2。三种求值程序：

- ybw: Young Brothers Wait，先求第一个子节点，未剪枝时并行求另外两个
- seq: 顺序 alpha-beta 剪枝
- par: 三个子节点全部并行求值，不剪枝
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, List, Tuple

from analysis.casestudies.families import Probability, as_probability
from analysis.model import PsjsModel, Rule, Symbol, ensure_valid

logger = logging.getLogger(__name__)

VALUES = range(5)
TOP = 4
VARIANTS = ("ybw", "seq", "par")
ROOT_E = 2
CONDITION_STATE = "2"


def oplus(a: int, b: int) -> int:
    """饱和加法 a ⊕ b = min{a+b, 4}"""
    return min(a + b, TOP)


def ominus(a: int, b: int) -> int:
    """饱和减法 a ⊖ b = max{a−b, 0}"""
    return max(a - b, 0)


def leaf_weights(p: Probability, e: int) -> List[Fraction]:
    """x(k) = (1−p)·C(4,k)·(e/4)^k·(1−e/4)^{4−k}，k = 0..4"""
    p = as_probability(p)
    r = Fraction(e, TOP)
    return [(1 - p) * comb(TOP, k) * r ** k * (1 - r) ** (TOP - k) for k in VALUES]


@dataclass(frozen=True)
class GameTreeParams:
    variant: str
    p: Fraction

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"未知的博弈树程序: {self.variant}，可选 {', '.join(VARIANTS)}")
        object.__setattr__(self, "p", as_probability(self.p))
        if self.p >= 1:
            raise ValueError(f"p 必须小于 1: {self.p}")

    @property
    def root(self) -> Symbol:
        if self.variant == "par":
            return Symbol.basic(f"Max({ROOT_E})")
        return Symbol.basic(f"Max(0,{TOP},{ROOT_E})")


class _RuleBook:
    """按插入顺序收集规则与同步状态，丢弃概率为 0 的规则"""

    def __init__(self):
        self.rules: List[Rule] = []
        self.states: Dict[str, None] = {}

    def state(self, name: str) -> Symbol:
        self.states.setdefault(name, None)
        return Symbol.sync(name)

    def add(self, lhs: Symbol, rhs: Tuple[Symbol, ...], prob: Fraction) -> None:
        if prob > 0:
            self.rules.append(Rule(lhs, rhs, prob))

    def build(self, root: Symbol, provenance: str) -> PsjsModel:
        model = PsjsModel(tuple(self.states), tuple(self.rules), start=root, provenance=provenance)
        return ensure_valid(model)


def _interval_name(kind: str, alpha: int, beta: int, e: int) -> str:
    return f"{kind}({alpha},{beta},{e})"


def _clamped_leaves(book: _RuleBook, lhs: Symbol, weights: List[Fraction], alpha: int, beta: int) -> None:
    book.add(lhs, (book.state(str(alpha)),), sum(weights[:alpha + 1], Fraction(0)))
    for k in range(alpha + 1, beta):
        book.add(lhs, (book.state(str(k)),), weights[k])
    book.add(lhs, (book.state(str(beta)),), sum(weights[beta:], Fraction(0)))


def _pair_collectors(book: _RuleBook) -> None:
    """⟨a b⟩ →1 q(a,b)，⟨q(a,b) q(∨)⟩ →1 max{a,b}，⟨q(a,b) q(∧)⟩ →1 min{a,b}"""
    one = Fraction(1)
    q_max, q_min = "q(∨)", "q(∧)"
    for a in VALUES:
        for b in VALUES:
            book.add(Symbol.join(str(a), str(b)), (book.state(f"q({a},{b})"),), one)
    for a in VALUES:
        for b in VALUES:
            pair = f"q({a},{b})"
            book.add(Symbol.join(pair, q_max), (book.state(str(max(a, b))),), one)
            book.add(Symbol.join(pair, q_min), (book.state(str(min(a, b))),), one)


def _ybw(p: Fraction) -> PsjsModel:
    book = _RuleBook()
    one = Fraction(1)
    for v in VALUES:
        book.state(str(v))
    q_max, q_min = book.state("q(∨)"), book.state("q(∧)")
    for alpha in VALUES:
        for beta in range(alpha + 1, TOP + 1):
            for e in VALUES:
                weights = leaf_weights(p, e)
                maxi = Symbol.basic(_interval_name("Max", alpha, beta, e))
                mini = Symbol.basic(_interval_name("Min", alpha, beta, e))
                _clamped_leaves(book, maxi, weights, alpha, beta)
                book.add(maxi, (mini, book.state(f"q({alpha},{beta},∨,{ominus(e, 1)})")), p)
                _clamped_leaves(book, mini, weights, alpha, beta)
                book.add(mini, (maxi, book.state(f"q({alpha},{beta},∧,{oplus(e, 1)})")), p)

                book.add(Symbol.basic(_interval_name("Max2", alpha, beta, e)),
                         (mini, Symbol.basic(_interval_name("Min", alpha, beta, ominus(e, 1)))), one)
                book.add(Symbol.basic(_interval_name("Min2", alpha, beta, e)),
                         (maxi, Symbol.basic(_interval_name("Max", alpha, beta, oplus(e, 1)))), one)

                wait_max = f"q({alpha},{beta},∨,{e})"
                wait_min = f"q({alpha},{beta},∧,{e})"
                book.state(wait_max)
                book.state(wait_min)
                book.add(Symbol.join(str(beta), wait_max), (book.state(str(beta)),), one)
                for gamma in range(alpha, beta):
                    book.add(Symbol.join(str(gamma), wait_max),
                             (Symbol.basic(_interval_name("Max2", gamma, beta, e)), q_max), one)
                book.add(Symbol.join(str(alpha), wait_min), (book.state(str(alpha)),), one)
                for gamma in range(alpha + 1, beta + 1):
                    book.add(Symbol.join(str(gamma), wait_min),
                             (Symbol.basic(_interval_name("Min2", alpha, gamma, e)), q_min), one)
    _pair_collectors(book)
    return book.build(Symbol.basic(_interval_name("Max", 0, TOP, ROOT_E)), f"gametree:ybw:{p}")


def _seq(p: Fraction) -> PsjsModel:
    """
    顺序 alpha-beta：第二个子节点在第一个返回后启动，第三个在第二个返回后尾调用启动

    q(α,β,∨,e) 等待第一个子节点，r(α,β,∨,e) 等待第二个子节点，q(∨)/q(∧) 收尾返回。
    """
    book = _RuleBook()
    one = Fraction(1)
    for v in VALUES:
        book.state(str(v))
    q_max, q_min = book.state("q(∨)"), book.state("q(∧)")
    for alpha in VALUES:
        for beta in range(alpha + 1, TOP + 1):
            for e in VALUES:
                weights = leaf_weights(p, e)
                maxi = Symbol.basic(_interval_name("Max", alpha, beta, e))
                mini = Symbol.basic(_interval_name("Min", alpha, beta, e))
                _clamped_leaves(book, maxi, weights, alpha, beta)
                book.add(maxi, (mini, book.state(f"q({alpha},{beta},∨,{ominus(e, 1)})")), p)
                _clamped_leaves(book, mini, weights, alpha, beta)
                book.add(mini, (maxi, book.state(f"q({alpha},{beta},∧,{oplus(e, 1)})")), p)

                book.add(Symbol.basic(_interval_name("Max2", alpha, beta, e)),
                         (mini, book.state(f"r({alpha},{beta},∨,{ominus(e, 1)})")), one)
                book.add(Symbol.basic(_interval_name("Min2", alpha, beta, e)),
                         (maxi, book.state(f"r({alpha},{beta},∧,{oplus(e, 1)})")), one)

                first_max, second_max = f"q({alpha},{beta},∨,{e})", f"r({alpha},{beta},∨,{e})"
                book.state(first_max)
                book.state(second_max)
                book.add(Symbol.join(str(beta), first_max), (book.state(str(beta)),), one)
                book.add(Symbol.join(str(beta), second_max), (book.state(str(beta)),), one)
                for gamma in range(alpha, beta):
                    book.add(Symbol.join(str(gamma), first_max),
                             (Symbol.basic(_interval_name("Max2", gamma, beta, e)), q_max), one)
                    book.add(Symbol.join(str(gamma), second_max),
                             (Symbol.basic(_interval_name("Min", gamma, beta, e)),), one)

                first_min, second_min = f"q({alpha},{beta},∧,{e})", f"r({alpha},{beta},∧,{e})"
                book.state(first_min)
                book.state(second_min)
                book.add(Symbol.join(str(alpha), first_min), (book.state(str(alpha)),), one)
                book.add(Symbol.join(str(alpha), second_min), (book.state(str(alpha)),), one)
                for gamma in range(alpha + 1, beta + 1):
                    book.add(Symbol.join(str(gamma), first_min),
                             (Symbol.basic(_interval_name("Min2", alpha, gamma, e)), q_min), one)
                    book.add(Symbol.join(str(gamma), second_min),
                             (Symbol.basic(_interval_name("Max", alpha, gamma, e)),), one)
    for v in VALUES:
        book.add(Symbol.join(str(v), "q(∨)"), (book.state(str(v)),), one)
        book.add(Symbol.join(str(v), "q(∧)"), (book.state(str(v)),), one)
    return book.build(Symbol.basic(_interval_name("Max", 0, TOP, ROOT_E)), f"gametree:seq:{p}")


def _par(p: Fraction) -> PsjsModel:
    """
    全并行求值：Max(e) →p ⟨Min(e) MaxRest(e⊖1)⟩，MaxRest 再分裂出另外两个子节点

    max 节点的结果是状态 "k"，min 节点的结果是 "k'"；q(b',c') 收集后两个 min 子节点的结果。
    """
    book = _RuleBook()
    one = Fraction(1)
    for v in VALUES:
        book.state(str(v))
    for v in VALUES:
        book.state(f"{v}'")
    for e in VALUES:
        weights = leaf_weights(p, e)
        maxi, mini = Symbol.basic(f"Max({e})"), Symbol.basic(f"Min({e})")
        for k in VALUES:
            book.add(maxi, (book.state(str(k)),), weights[k])
            book.add(mini, (book.state(f"{k}'"),), weights[k])
        book.add(maxi, (mini, Symbol.basic(f"MaxRest({ominus(e, 1)})")), p)
        book.add(mini, (maxi, Symbol.basic(f"MinRest({oplus(e, 1)})")), p)
        book.add(Symbol.basic(f"MaxRest({e})"), (mini, Symbol.basic(f"Min({ominus(e, 1)})")), one)
        book.add(Symbol.basic(f"MinRest({e})"), (maxi, Symbol.basic(f"Max({oplus(e, 1)})")), one)
    for b in VALUES:
        for c in VALUES:
            book.add(Symbol.join(f"{b}'", f"{c}'"), (book.state(f"q({b}',{c}')"),), one)
            book.add(Symbol.join(str(b), str(c)), (book.state(f"q({b},{c})"),), one)
    for a in VALUES:
        for b in VALUES:
            for c in VALUES:
                book.add(Symbol.join(f"{a}'", f"q({b}',{c}')"), (book.state(str(max(a, b, c))),), one)
                book.add(Symbol.join(str(a), f"q({b},{c})"), (book.state(f"{min(a, b, c)}'"),), one)
    return book.build(Symbol.basic(f"Max({ROOT_E})"), f"gametree:par:{p}")


_BUILDERS = {"ybw": _ybw, "seq": _seq, "par": _par}


def gen_gametree(params: GameTreeParams) -> PsjsModel:
    """
    生成博弈树求值程序的模型

    参数:
    - params: 程序变体与分支概率 p

    返回:
    - PsjsModel: 已校验，起始符号为根 max 节点（参数 e = 2）；T(v,p)、W(v,p) 以终止于状态 "2" 为条件
    """
    model = _BUILDERS[params.variant](params.p)
    logger.debug(f"博弈树模型 {params.variant} p={params.p}: {model.summary()}")
    return model
