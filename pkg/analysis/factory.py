"""
分析组件工厂模块
根据 AnalysisConfig 创建求解器、分析参数和分析器
"""

import logging
from typing import Optional

from config import AnalysisConfig, load_analysis_config
from analysis.analyzer import PsjsAnalyzer
from analysis.settings import AnalysisSettings
from analysis.solvers import SOLVERS, TerminationSolver

logger = logging.getLogger(__name__)


def create_solver(config: AnalysisConfig, method: Optional[str] = None, strict: bool = False) -> TerminationSolver:
    """
    创建终止概率求解器

    参数:
    - config: 分析配置
    - method: 求解方法，支持 'kleene' 和 'newton'，缺省取配置中的方法
    - strict: 未收敛时是否抛出 ConvergenceError

    返回:
    - TerminationSolver: 求解器实例

    异常:
    - ValueError: 不支持的求解方法
    """
    method = (method or config.solver_method).lower()
    if method not in SOLVERS:
        logger.error(f"不支持的求解方法: {method}")
        raise ValueError(f"不支持的求解方法: {method}，可选 {', '.join(SOLVERS)}")
    return SOLVERS[method](tol=config.tolerance, max_iter=config.max_iter_for(method), strict=strict)


def create_settings(config: AnalysisConfig, method: Optional[str] = None, strict: bool = False) -> AnalysisSettings:
    """把配置转换为数值函数共用的 AnalysisSettings"""
    method = (method or config.solver_method).lower()
    if method not in SOLVERS:
        raise ValueError(f"不支持的求解方法: {method}，可选 {', '.join(SOLVERS)}")
    return AnalysisSettings(
        method=method,
        tol=config.tolerance,
        max_iter=config.max_iter_for(method),
        strict=strict,
        max_k=config.max_k,
        lp_exact_limit=config.lp_exact_limit,
        lp_tol=config.lp_tolerance,
    )


def create_analyzer(config: Optional[AnalysisConfig] = None, method: Optional[str] = None,
                    strict: bool = False) -> PsjsAnalyzer:
    """
    创建分析器

    参数:
    - config: 分析配置，缺省从环境变量加载
    - method: 覆盖配置中的求解方法
    - strict: 严格模式

    返回:
    - PsjsAnalyzer: 绑定配置与分析参数的分析器
    """
    if config is None:
        config = load_analysis_config()
    settings = create_settings(config, method, strict)
    logger.debug(f"创建分析器: 方法={settings.method}, 严格模式={strict}")
    return PsjsAnalyzer(config, settings)
