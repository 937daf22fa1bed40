"""
时间与工作量分布的动态规划

对方程组的每个变量 (σ, q) 同时计算截断的分布表：
T_{σ↓q}(k) = P(Run↓q, T_σ = k)，D_{σ↓q}(n) = P(Run↓q, W_σ = n)。
表的最后一行是常量行（在 0 处的单点分布），对应同步子项和单项式中的空位。
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from analysis.errors import AnalysisError
from analysis.model import PsjsModel, Symbol
from analysis.settings import DEFAULT_SETTINGS, AnalysisSettings
from analysis.solvers import EquationSystem, TermMatrix
from analysis.transforms import ensure_normalised

logger = logging.getLogger(__name__)

TAIL_EPSILON = 1e-9


@dataclass
class Pmf:
    """
    截断的概率质量函数

    mass[k] 对 k = 0..K 给出；cond_prob 是条件概率 [σ↓q]，tail = cond_prob − Σ mass。
    """
    mass: np.ndarray
    cond_prob: float
    kind: str = "time"
    convergence: Dict[str, object] = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.mass) - 1

    @property
    def total(self) -> float:
        return float(self.mass.sum())

    @property
    def tail(self) -> float:
        return max(self.cond_prob - self.total, 0.0)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.mass)

    def conditional(self) -> np.ndarray:
        """除以条件概率后的质量，即 P(· = k | Run↓q)"""
        if self.cond_prob <= 0:
            raise AnalysisError("条件概率为 0，条件分布无定义")
        return self.mass / self.cond_prob

    def rows(self) -> List[Tuple[int, float, float, float]]:
        """CSV 行 (k, mass, cdf, tail)，tail 为 cond_prob − cdf(k)"""
        cdf = self.cdf()
        return [(k, float(self.mass[k]), float(cdf[k]), max(self.cond_prob - float(cdf[k]), 0.0))
                for k in range(len(self.mass))]


def _padded(columns: List[Tuple[int, ...]], width: int, fill: int) -> np.ndarray:
    table = np.full((len(columns), width), fill, dtype=np.int64)
    for row, values in enumerate(columns):
        table[row, :len(values)] = values
    return table


def time_table(system: EquationSystem, K: int) -> np.ndarray:
    """
    所有变量的时间分布表，形状 (n+1, K+1)

    分裂单项式的时间为 1 + max(并行子项) + 后续；max 的分布由 CDF 乘积的差分得到：
    P(max = m) = Π F_j(m) − Π F_j(m−1)。
    """
    n = system.size
    monomials = system.monomials
    table = np.zeros((n + 1, K + 1))
    table[n, 0] = 1.0
    cdf = np.zeros((n + 1, K + 1))
    cdf[n, :] = 1.0
    if not monomials or K < 1:
        return table

    parallel = _padded([m.parallel for m in monomials], 3, n)
    sequel = np.array([n if m.sequel is None else m.sequel for m in monomials], dtype=np.int64)
    coef = system.coef_array
    lhs = system.lhs_array
    spread = np.zeros((len(monomials), K + 1))
    previous = np.zeros(len(monomials))

    for k in range(1, K + 1):
        last = k - 1
        current = np.prod(cdf[parallel, last], axis=1)
        spread[:, last] = np.maximum(current - previous, 0.0)
        previous = current
        offsets = last - np.arange(last + 1)
        conv = np.sum(spread[:, :last + 1] * table[sequel[:, None], offsets[None, :]], axis=1)
        table[:n, k] = np.bincount(lhs, weights=coef * conv, minlength=n)
        cdf[:n, k] = cdf[:n, k - 1] + table[:n, k]
    return table


def work_table(system: EquationSystem, K: int) -> np.ndarray:
    """
    所有变量的工作量分布表，形状 (n+1, K+1)

    单项式的工作量为 1 + 各因子工作量之和，用两次链式卷积 H2 = D1 * D2、H3 = H2 * D3 计算。
    """
    n = system.size
    monomials = system.monomials
    table = np.zeros((n + 1, K + 1))
    table[n, 0] = 1.0
    if not monomials or K < 1:
        return table

    factors = system.factor_array
    f1, f2, f3 = factors[:, 0], factors[:, 1], factors[:, 2]
    coef = system.coef_array
    lhs = system.lhs_array
    pair = np.zeros((len(monomials), K + 1))
    triple = np.zeros((len(monomials), K + 1))

    for k in range(1, K + 1):
        last = k - 1
        ahead = np.arange(last + 1)
        behind = last - ahead
        pair[:, last] = np.sum(table[f1[:, None], ahead[None, :]] * table[f2[:, None], behind[None, :]], axis=1)
        triple[:, last] = np.sum(pair[:, :last + 1] * table[f3[:, None], behind[None, :]], axis=1)
        table[:n, k] = np.bincount(lhs, weights=coef * triple[:, last], minlength=n)
    return table


def _prepare(model: PsjsModel, q: str, settings: AnalysisSettings,
             terms: Optional[TermMatrix]) -> TermMatrix:
    if q not in model.sync_set:
        raise AnalysisError(f"条件状态 {q} 不是模型的同步状态")
    normalised, _ = ensure_normalised(model)
    if terms is not None and terms.model == normalised:
        return terms
    return settings.solve(normalised)


def pmf_from_table(terms: TermMatrix, table: np.ndarray, sigma: Symbol, q: str, kind: str = "time") -> Pmf:
    """从 time_table/work_table 的结果中取出 (σ, q) 的分布；不在方程组中的变量为单点或零分布"""
    system = terms.system
    K = table.shape[1] - 1
    cond = terms.value(sigma, q)
    index = system.variable(sigma, q)
    if index is not None:
        return Pmf(table[index].copy(), cond, kind, terms.metadata())
    mass = np.zeros(K + 1)
    if sigma.is_sync and sigma.name == q:
        mass[0] = 1.0
    return Pmf(mass, cond, kind, terms.metadata())


def time_distribution(model: PsjsModel, a: Symbol, q: str, K: int,
                      settings: AnalysisSettings = DEFAULT_SETTINGS,
                      terms: Optional[TermMatrix] = None) -> Pmf:
    """
    时间分布 T_{a↓q}(k)，k = 0..K

    参数:
    - model: 已校验的模型，未规范时自动规范化
    - a: 起始符号
    - q: 原模型的同步状态
    - K: 截断点

    返回:
    - Pmf: 截断分布，cond_prob = [a↓q]
    """
    terms = _prepare(model, q, settings, terms)
    table = time_table(terms.system, K)
    return pmf_from_table(terms, table, a, q, "time")


def work_distribution(model: PsjsModel, a: Symbol, q: str, K: int,
                      settings: AnalysisSettings = DEFAULT_SETTINGS,
                      terms: Optional[TermMatrix] = None) -> Pmf:
    """工作量分布 D_{a↓q}(n)，n = 0..K"""
    terms = _prepare(model, q, settings, terms)
    table = work_table(terms.system, K)
    return pmf_from_table(terms, table, a, q, "work")


@dataclass
class TailExpectation:
    """E Z = Σ_k P(Z > k) 的截断下界"""
    value: float
    converged: bool
    last_term: float
    K: int


def tail_expectation(pmf: Pmf, cond_prob: Optional[float] = None) -> TailExpectation:
    """
    条件期望的下界 Σ_{k=0}^{K} (1 − (1/cond_prob)·Σ_{i≤k} mass[i])

    参数:
    - pmf: 截断分布
    - cond_prob: 条件概率，缺省使用 pmf.cond_prob

    返回:
    - TailExpectation: 末项小于 1e-9 时 converged=True，否则只是下界
    """
    cond = pmf.cond_prob if cond_prob is None else cond_prob
    if cond <= 0:
        raise AnalysisError(f"条件概率必须为正: {cond}")
    survival = np.clip(1.0 - pmf.cdf() / cond, 0.0, 1.0)
    last = float(survival[-1])
    return TailExpectation(float(survival.sum()), last < TAIL_EPSILON, last, pmf.K)
