"""
报告模块：JSON 文档模型与表格、CSV 渲染
"""

from .models import (
    SCHEMA_VERSION,
    CaseStudyReport,
    Convergence,
    DiagnosticItem,
    DistReport,
    ExpectReport,
    FiniteReport,
    NormaliseReport,
    Report,
    ReportKind,
    SerialiseReport,
    SimulateReport,
    SpaceReport,
    TermReport,
    ValidateReport,
    finite_or_label,
)
from .render import ReportError, ReportRenderer, format_number, render_csv, render_json

__all__ = [
    'SCHEMA_VERSION',
    'Report',
    'ReportKind',
    'Convergence',
    'DiagnosticItem',
    'ValidateReport',
    'TermReport',
    'SpaceReport',
    'DistReport',
    'ExpectReport',
    'FiniteReport',
    'SimulateReport',
    'SerialiseReport',
    'NormaliseReport',
    'CaseStudyReport',
    'finite_or_label',
    'ReportError',
    'ReportRenderer',
    'format_number',
    'render_csv',
    'render_json',
]
