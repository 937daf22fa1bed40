"""
报告模型定义
使用 Pydantic 定义命令行各子命令输出的 JSON 文档
"""

import math
from enum import Enum
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field

SCHEMA_VERSION = "1.0"
INFINITE = "Infinite"

Number = Union[float, str]


def finite_or_label(value: float) -> Number:
    """无穷值在 JSON 中写作 "Infinite"，NaN 写作 "NaN" """
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return INFINITE
    return float(value)


class ReportKind(str, Enum):
    """报告类型枚举"""
    VALIDATE = "validate"
    TERM = "term"
    SPACE = "space"
    DIST = "dist"
    EXPECT = "expect"
    FINITE = "finite"
    SIMULATE = "simulate"
    SERIALISE = "serialise"
    NORMALISE = "normalise"
    CASESTUDY = "casestudy"


class Convergence(BaseModel):
    """迭代结果的收敛信息"""
    method: str = Field(..., description="求解方法（kleene 或 newton）")
    iterations: int = Field(..., ge=0, description="迭代次数")
    achieved_tol: float = Field(..., description="最后一次迭代的误差")
    converged: bool = Field(..., description="是否在预算内达到容差")


class Report(BaseModel):
    """所有报告的公共字段"""
    schema_version: str = Field(SCHEMA_VERSION, description="文档格式版本")
    kind: ReportKind = Field(..., description="报告类型")
    model: Optional[str] = Field(None, description="模型文件路径或来源")


class DiagnosticItem(BaseModel):
    code: str
    message: str
    subject: str = ""


class ValidateReport(Report):
    kind: ReportKind = ReportKind.VALIDATE
    valid: bool
    summary: Optional[str] = Field(None, description="模型规模摘要，校验失败时为空")
    diagnostics: List[DiagnosticItem] = Field(default_factory=list)


class TermReport(Report):
    """终止概率 [σ↓q]，values[σ][q]"""
    kind: ReportKind = ReportKind.TERM
    start: Optional[str] = None
    states: List[str]
    values: Dict[str, Dict[str, float]]
    convergence: Convergence


class SpaceReport(Report):
    kind: ReportKind = ReportKind.SPACE
    symbol: str
    p_finite: float
    p_terminate: float
    p_bounded_nonterm: float
    bar_state: str
    convergence: Convergence


class DistReport(Report):
    """截断分布，mass[k] 对 k = 0..K"""
    kind: ReportKind = ReportKind.DIST
    symbol: str
    state: str
    measure: str = Field(..., description="time 或 work")
    K: int
    cond_prob: float
    mass: List[float]
    tail: float
    convergence: Convergence


class ExpectReport(Report):
    kind: ReportKind = ReportKind.EXPECT
    symbol: str
    measure: str = Field(..., description="work 或 time")
    state: Optional[str] = Field(None, description="条件终止状态，为空表示无条件期望")
    value: Number
    finite: bool
    lower_bound: bool = Field(False, description="期望时间的截断下界")
    converged: bool = True
    detail: Dict[str, Any] = Field(default_factory=dict)
    convergence: Optional[Convergence] = None


class FiniteReport(Report):
    kind: ReportKind = ReportKind.FINITE
    symbol: str
    work: str
    time: str
    termination: float
    reason: str
    detail: Dict[str, Any] = Field(default_factory=dict)


class SimulateReport(Report):
    kind: ReportKind = ReportKind.SIMULATE
    symbol: str
    n_runs: int
    seed: int
    max_steps: int
    max_space: int
    result: Dict[str, Any]


class SerialiseReport(Report):
    kind: ReportKind = ReportKind.SERIALISE
    ppds: str = Field(..., description="pPDS 的文本形式")
    mapping: Dict[str, Any]
    control_states: int
    stack_symbols: int
    rules: int


class NormaliseReport(Report):
    kind: ReportKind = ReportKind.NORMALISE
    changed: bool
    check_state: Optional[str] = None
    text: str = Field(..., description="规范化后的模型文本")


class CaseStudyReport(Report):
    kind: ReportKind = ReportKind.CASESTUDY
    study: str
    K: int
    columns: List[str]
    rows: List[Dict[str, Any]]
