"""
分治数值积分的 pSJS 模型

区间上的振荡等级为 n 时，程序把区间一分为二并行递归；n 个振荡单元各自以 p/2 落入左半区间、
以 p/2 落入右半区间、以 1−p 消失。等级 0 的区间直接求值。
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from analysis.casestudies.families import Probability, as_probability
from analysis.model import PsjsModel, Rule, Symbol, ensure_valid

logger = logging.getLogger(__name__)

RESULT_STATE = "q"


@dataclass(frozen=True)
class DivConParams:
    p: Fraction
    n_max: int

    def __post_init__(self):
        object.__setattr__(self, "p", as_probability(self.p))
        if not 0 < self.p < 1:
            raise ValueError(f"细分概率 p 必须在 (0, 1) 内: {self.p}")
        if self.n_max < 0:
            raise ValueError(f"n_max 不能为负: {self.n_max}")


def split_weight(p: Probability, n: int, n1: int, n2: int) -> Fraction:
    """x(n,n1,n2) = C(n,n1)·C(n−n1,n2)·(p/2)^{n1+n2}·(1−p)^{n−n1−n2}"""
    p = as_probability(p)
    half = p / 2
    return comb(n, n1) * comb(n - n1, n2) * half ** (n1 + n2) * (1 - p) ** (n - n1 - n2)


def level_symbol(n: int) -> Symbol:
    return Symbol.basic(str(n))


def gen_divcon(params: DivConParams) -> PsjsModel:
    """
    生成分治积分程序的模型

    参数:
    - params: 细分概率与最大振荡等级

    返回:
    - PsjsModel: Q = {q}，Γ = {⟨q q⟩, 0..n_max}，起始符号为 n_max
    """
    q = Symbol.sync(RESULT_STATE)
    rules = [Rule(level_symbol(0), (q,), Fraction(1))]
    for n in range(1, params.n_max + 1):
        for n1 in range(n + 1):
            for n2 in range(n - n1 + 1):
                weight = split_weight(params.p, n, n1, n2)
                if weight > 0:
                    rules.append(Rule(level_symbol(n), (level_symbol(n1), level_symbol(n2)), weight))
    rules.append(Rule(Symbol.join(RESULT_STATE, RESULT_STATE), (q,), Fraction(1)))
    model = PsjsModel((RESULT_STATE,), tuple(rules), start=level_symbol(params.n_max),
                      provenance=f"divcon:{params.p}:{params.n_max}")
    model = ensure_valid(model)
    logger.debug(f"分治模型 p={params.p} n_max={params.n_max}: {model.summary()}")
    return model
