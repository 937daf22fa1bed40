"""
分析参数
数值分析函数共用的求解与判定设置，由 factory 根据 AnalysisConfig 构造
"""

from dataclasses import dataclass
from typing import Optional

from analysis.model import PsjsModel
from analysis.solvers import SOLVERS, TermMatrix, build_equation_system


@dataclass(frozen=True)
class AnalysisSettings:
    method: str = "newton"
    tol: float = 1e-12
    max_iter: Optional[int] = None
    strict: bool = False
    max_k: int = 300
    lp_exact_limit: int = 50
    lp_tol: float = 1e-9
    # Σ_q [a↓q] 低于 1 − termination_slack 时视为存在非终止运行
    termination_slack: float = 1e-9

    def solve(self, model: PsjsModel) -> TermMatrix:
        if self.method not in SOLVERS:
            raise ValueError(f"不支持的求解方法: {self.method}")
        solver = SOLVERS[self.method](tol=self.tol, max_iter=self.max_iter, strict=self.strict)
        return solver.solve(build_equation_system(model))


DEFAULT_SETTINGS = AnalysisSettings()
