import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from analysis.errors import ConvergenceError
from analysis.model import PsjsModel, Symbol
from analysis.solvers.equations import EquationSystem

logger = logging.getLogger(__name__)


@dataclass
class TermMatrix:
    """
    终止概率 [σ↓q] 的数值解

    values 与 system.variables 一一对应；同步状态和冻结符号的常量由 system 给出。
    """
    system: EquationSystem
    values: np.ndarray
    method: str
    iterations: int
    achieved_tol: float
    converged: bool
    monotone: bool = True

    @property
    def model(self) -> PsjsModel:
        return self.system.model

    def value(self, sigma: Symbol, q: str) -> float:
        const = self.system.constant(sigma, q)
        if const is not None:
            return const
        return float(self.values[self.system.index[(sigma, q)]])

    def row(self, sigma: Symbol) -> Dict[str, float]:
        return {q: self.value(sigma, q) for q in self.model.sync_states}

    def termination_probability(self, sigma: Symbol) -> float:
        """[σ↓] 在规范化模型上等于 Σ_q [σ↓q]"""
        return float(sum(self.row(sigma).values()))

    def as_dict(self) -> Dict[str, Dict[str, float]]:
        """{sigma: {q: value}}，覆盖整个字母表"""
        return {str(sigma): self.row(sigma) for sigma in self.model.alphabet}

    def metadata(self) -> Dict[str, object]:
        return {
            "method": self.method,
            "iterations": self.iterations,
            "achieved_tol": self.achieved_tol,
            "converged": self.converged,
        }


class TerminationSolver(ABC):
    """
    终止概率求解器抽象基类

    子类实现 _iterate，从零向量出发逼近最小非负不动点。
    """

    method: str = ""

    def __init__(self, tol: float = 1e-12, max_iter: Optional[int] = None, strict: bool = False):
        if tol <= 0:
            raise ValueError(f"容差必须为正数: {tol}")
        self.tol = tol
        self.max_iter = max_iter if max_iter is not None else self.default_max_iter()
        self.strict = strict

    @classmethod
    @abstractmethod
    def default_max_iter(cls) -> int:
        pass

    @abstractmethod
    def _iterate(self, system: EquationSystem) -> TermMatrix:
        """
        执行迭代

        返回:
            未经收敛检查的 TermMatrix
        """
        pass

    def solve(self, system: EquationSystem) -> TermMatrix:
        """
        求解方程组

        参数:
            system: 终止概率方程组

        返回:
            TermMatrix；未收敛时 converged=False（strict 模式下抛出 ConvergenceError）
        """
        start = time.time()
        logger.debug(f"{self.method} 求解开始: 变量 {system.size} 个, tol={self.tol}")
        if system.size == 0:
            return TermMatrix(system, np.zeros(0), self.method, 0, 0.0, True)

        result = self._iterate(system)
        elapsed = time.time() - start
        if result.converged:
            logger.debug(
                f"{self.method} 已收敛: 迭代 {result.iterations} 次, 误差 {result.achieved_tol:.3e}, 用时 {elapsed:.3f}s")
        else:
            message = (f"{self.method} 未收敛: 迭代 {result.iterations} 次后误差 {result.achieved_tol:.3e}"
                       f"，要求 {self.tol:.1e}")
            if self.strict:
                raise ConvergenceError(message, result.iterations, result.achieved_tol)
            logger.warning(message)
        return result
