"""
分析配置管理模块
集中管理求解器、模拟器和案例研究的参数，支持 .env 文件
"""

import os
import logging
from dataclasses import dataclass
from typing import Callable, Optional, TypeVar

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

T = TypeVar("T")

SOLVER_METHODS = ("kleene", "newton")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class AnalysisConfig:
    """分析配置数据类"""
    # 求解器配置
    tolerance: float = 1e-12
    kleene_max_iter: int = 1000000
    newton_max_iter: int = 200
    solver_method: str = "newton"

    # 模拟配置
    max_steps: int = 100000
    max_space: int = 1000000
    seed: int = 0

    # 并行配置
    threads: int = 1

    # 分布与线性规划配置
    max_k: int = 300
    lp_exact_limit: int = 50
    lp_tolerance: float = 1e-9

    log_level: str = "INFO"

    def max_iter_for(self, method: str) -> int:
        return self.kleene_max_iter if method == "kleene" else self.newton_max_iter


def _read(name: str, default: T, convert: Callable[[str], T],
          check: Optional[Callable[[T], bool]] = None) -> T:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = convert(raw.strip())
    except ValueError:
        logger.warning(f"环境变量 {name}={raw!r} 无法解析，使用默认值 {default}")
        return default
    if check is not None and not check(value):
        logger.warning(f"环境变量 {name}={raw!r} 超出取值范围，使用默认值 {default}")
        return default
    return value


def load_analysis_config(dotenv: bool = True) -> AnalysisConfig:
    """
    从环境变量加载分析配置

    参数:
    - dotenv: 是否先加载 .env 文件（已设置的环境变量不会被覆盖）

    返回:
    - AnalysisConfig: 分析配置对象；无效值记录警告并回退到默认值
    """
    if dotenv:
        load_dotenv()

    defaults = AnalysisConfig()
    positive = lambda v: v > 0
    config = AnalysisConfig(
        # 求解器配置
        tolerance=_read("PSJS_TOL", defaults.tolerance, float, positive),
        kleene_max_iter=_read("PSJS_KLEENE_MAX_ITER", defaults.kleene_max_iter, int, positive),
        newton_max_iter=_read("PSJS_NEWTON_MAX_ITER", defaults.newton_max_iter, int, positive),
        solver_method=_read("PSJS_SOLVER", defaults.solver_method, str.lower, lambda v: v in SOLVER_METHODS),

        # 模拟配置
        max_steps=_read("PSJS_MAX_STEPS", defaults.max_steps, int, positive),
        max_space=_read("PSJS_MAX_SPACE", defaults.max_space, int, positive),
        seed=_read("PSJS_SEED", defaults.seed, int, lambda v: v >= 0),

        threads=_read("PSJS_THREADS", defaults.threads, int, positive),

        max_k=_read("PSJS_MAX_K", defaults.max_k, int, lambda v: v >= 0),
        lp_exact_limit=_read("PSJS_LP_EXACT_LIMIT", defaults.lp_exact_limit, int, lambda v: v >= 0),
        lp_tolerance=_read("PSJS_LP_TOL", defaults.lp_tolerance, float, lambda v: v >= 0),

        log_level=_read("LOG_LEVEL", defaults.log_level, str.upper, lambda v: v in LOG_LEVELS),
    )
    logger.debug(f"分析配置: 方法={config.solver_method}, 容差={config.tolerance}, 线程={config.threads}")
    return config
