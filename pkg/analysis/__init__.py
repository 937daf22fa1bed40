"""
概率分裂-汇合系统 (pSJS) 的分析库

子包:
- model: 语法、解析、校验
- semantics: 树语义与蒙特卡洛模拟
- solvers: 终止概率方程组与迭代求解
- transforms: 规范化、pPDS 转换、有限空间变换、条件分支过程
- perf: 空间、时间与工作量度量
- casestudies: 分治积分与博弈树案例
"""

from analysis.errors import (
    AnalysisError,
    ConvergenceError,
    ModelError,
    ModelSyntaxError,
    ModelValidationError,
    PsjsError,
    SolverError,
    TransformError,
)
from analysis.settings import DEFAULT_SETTINGS, AnalysisSettings

__all__ = [
    "PsjsError",
    "ModelError",
    "ModelSyntaxError",
    "ModelValidationError",
    "SolverError",
    "ConvergenceError",
    "TransformError",
    "AnalysisError",
    "AnalysisSettings",
    "DEFAULT_SETTINGS",
]
