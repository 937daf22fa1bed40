"""
组合度量：空间有限概率、pSJS 期望工作量、有限性判定、期望时间下界
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

from analysis.errors import AnalysisError
from analysis.model import PsjsModel, Symbol
from analysis.perf.branching import WorkResult, expected_work_bp
from analysis.perf.distributions import TailExpectation, tail_expectation, time_distribution
from analysis.settings import DEFAULT_SETTINGS, AnalysisSettings
from analysis.solvers import TermMatrix
from analysis.transforms import conditioned_bp, ensure_normalised, finite_space_transform

logger = logging.getLogger(__name__)

FINITE = "Finite"
INFINITE = "Infinite"


@dataclass
class SpaceResult:
    """P(S_a < ∞) 拆分为终止部分与有界非终止部分"""
    symbol: Symbol
    p_terminate: float
    p_bounded_nonterm: float
    bar_state: str
    terms: Dict[str, float] = field(default_factory=dict)
    convergence: Dict[str, object] = field(default_factory=dict)

    @property
    def p_finite(self) -> float:
        return self.p_terminate + self.p_bounded_nonterm

    def to_dict(self) -> Dict[str, object]:
        return {
            "symbol": str(self.symbol),
            "p_finite": self.p_finite,
            "p_terminate": self.p_terminate,
            "p_bounded_nonterm": self.p_bounded_nonterm,
            "bar_state": self.bar_state,
            "terms": dict(self.terms),
        }


def space_probability(model: PsjsModel, a: Symbol,
                      settings: AnalysisSettings = DEFAULT_SETTINGS) -> SpaceResult:
    """
    从 a 出发运行空间有限的概率

    参数:
    - model: 已校验的 pSJS
    - a: 过程符号

    返回:
    - SpaceResult: p_bounded_nonterm = [a↓q̄]，p_terminate 为其余状态之和
    """
    if a not in model.gamma:
        raise AnalysisError(f"{a} 不是模型的过程符号")
    transformed = finite_space_transform(model)
    terms = settings.solve(transformed.model)
    row = terms.row(a)
    bounded = row[transformed.bar_state]
    terminate = sum(v for q, v in row.items() if q != transformed.bar_state)
    logger.debug(f"空间分析 {a}: 终止 {terminate:.12g}, 有界非终止 {bounded:.12g}")
    return SpaceResult(a, float(terminate), float(bounded), transformed.bar_state, row, terms.metadata())


@dataclass
class PsjsWork:
    """
    pSJS 的期望工作量

    components 是每个终止状态 q 对应的条件分支过程结果，weights 是 [a↓q]。
    """
    symbol: Symbol
    value: float
    termination: float
    reason: str
    components: Dict[str, WorkResult] = field(default_factory=dict)
    weights: Dict[str, float] = field(default_factory=dict)
    convergence: Dict[str, object] = field(default_factory=dict)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    @property
    def verdict(self) -> str:
        return FINITE if self.finite else INFINITE

    def to_dict(self) -> Dict[str, object]:
        return {
            "symbol": str(self.symbol),
            "value": self.value if self.finite else INFINITE,
            "verdict": self.verdict,
            "termination": self.termination,
            "reason": self.reason,
            "weights": dict(self.weights),
            "components": {q: w.to_dict() for q, w in self.components.items()},
        }


def _bp_work(model: PsjsModel, a: Symbol, settings: AnalysisSettings) -> PsjsWork:
    bottom = model.sync_states[0]
    terms = settings.solve(model)
    termination = terms.value(a, bottom)
    result = expected_work_bp(model, a, settings.lp_tol, settings.lp_exact_limit)
    reason = "次临界" if result.finite else "特征矩阵非次临界"
    return PsjsWork(a, result.value, termination, reason, {bottom: result}, {bottom: termination}, terms.metadata())


def expected_work_psjs(model: PsjsModel, a: Symbol, settings: AnalysisSettings = DEFAULT_SETTINGS,
                       terms: Optional[TermMatrix] = None) -> PsjsWork:
    """
    期望工作量 E W_a

    参数:
    - model: 已校验的模型，内部规范化；分支过程直接按特征矩阵计算
    - a: 起始符号
    - terms: 规范化模型上已求得的终止概率，可省略

    返回:
    - PsjsWork: 存在非终止运行或任一条件分量非次临界时 value 为 math.inf
    """
    if model.flags.is_branching_process:
        return _bp_work(model, a, settings)
    if a.is_sync:
        return PsjsWork(a, 0.0, 1.0, "同步状态")

    normalised, _ = ensure_normalised(model)
    if terms is None or terms.model != normalised:
        terms = settings.solve(normalised)
    weights = {q: w for q, w in terms.row(a).items() if w > 0}
    termination = float(sum(weights.values()))
    if termination < 1.0 - settings.termination_slack:
        logger.info(f"{a}: 终止概率 {termination:.12g} < 1，期望工作量无穷")
        return PsjsWork(a, math.inf, termination, "存在非终止运行", weights=weights,
                        convergence=terms.metadata())

    conditioned = conditioned_bp(normalised, terms)
    components: Dict[str, WorkResult] = {}
    total = 0.0
    for q, weight in weights.items():
        start = conditioned.symbol(a, q)
        result = expected_work_bp(conditioned.model, start, settings.lp_tol, settings.lp_exact_limit)
        components[q] = result
        total += weight * result.value
    reason = "所有条件分量次临界" if math.isfinite(total) else "条件分支过程非次临界"
    return PsjsWork(a, total, termination, reason, components, weights, terms.metadata())


def conditional_expected_work(model: PsjsModel, a: Symbol, q: str,
                              settings: AnalysisSettings = DEFAULT_SETTINGS) -> WorkResult:
    """
    条件期望工作量 E(W_a | Run↓q)，等于条件分支过程中 ⟨a q⟩ 的期望工作量
    """
    if q not in model.sync_set:
        raise AnalysisError(f"条件状态 {q} 不是模型的同步状态")
    if model.flags.is_branching_process:
        return expected_work_bp(model, a, settings.lp_tol, settings.lp_exact_limit)
    normalised, _ = ensure_normalised(model)
    terms = settings.solve(normalised)
    if terms.value(a, q) <= 0:
        raise AnalysisError(f"[{a}↓{q}] = 0，条件期望无定义")
    conditioned = conditioned_bp(normalised, terms)
    return expected_work_bp(conditioned.model, conditioned.symbol(a, q), settings.lp_tol,
                            settings.lp_exact_limit)


def expected_time(model: PsjsModel, a: Symbol, q: str, K: Optional[int] = None,
                  settings: AnalysisSettings = DEFAULT_SETTINGS) -> TailExpectation:
    """条件期望时间 E(T_a | Run↓q) 的截断下界"""
    pmf = time_distribution(model, a, q, settings.max_k if K is None else K, settings)
    return tail_expectation(pmf)


@dataclass
class Finiteness:
    """期望工作量与期望时间的联合判定，二者总是同为有限或同为无穷"""
    symbol: Symbol
    work: str
    time: str
    detail: PsjsWork

    def to_dict(self) -> Dict[str, object]:
        return {
            "symbol": str(self.symbol),
            "work": self.work,
            "time": self.time,
            "detail": self.detail.to_dict(),
        }


def finiteness(model: PsjsModel, a: Symbol, settings: AnalysisSettings = DEFAULT_SETTINGS) -> Finiteness:
    """
    判定 E W_a 与 E T_a 是否有限

    时间的判定与工作量相同，不依赖截断的时间分布。
    """
    work = expected_work_psjs(model, a, settings)
    return Finiteness(a, work.verdict, work.verdict, work)
