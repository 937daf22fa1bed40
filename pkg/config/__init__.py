"""
配置模块，提供统一的配置管理
"""

from .analysis_config import load_analysis_config, AnalysisConfig

__all__ = ['load_analysis_config', 'AnalysisConfig']
