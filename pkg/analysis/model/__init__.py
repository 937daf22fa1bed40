"""
pSJS 模型：语法、解析与校验
"""

from analysis.model.parser import load_model, parse_model, quote_name, render_model
from analysis.model.symbols import ModelFlags, PsjsModel, Rule, Symbol, SymbolKind, fresh_name
from analysis.model.validation import Diagnostic, ensure_valid, validate

__all__ = [
    "Symbol",
    "SymbolKind",
    "Rule",
    "ModelFlags",
    "PsjsModel",
    "fresh_name",
    "parse_model",
    "load_model",
    "render_model",
    "quote_name",
    "validate",
    "ensure_valid",
    "Diagnostic",
]
