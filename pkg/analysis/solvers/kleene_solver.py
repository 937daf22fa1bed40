import logging

import numpy as np

from analysis.errors import SolverError
from analysis.solvers.abstract_solver import TermMatrix, TerminationSolver
from analysis.solvers.equations import EquationSystem

logger = logging.getLogger(__name__)

# 浮点舍入允许的单调性偏差
_MONOTONE_SLACK = 1e-15


class KleeneSolver(TerminationSolver):
    """
    Kleene 不动点迭代 x⁰ = 0, x^{k+1} = f(x^k)

    迭代单调不减且不超过 1，从下方收敛到最小不动点。每次迭代都检查单调性，
    严格模式下出现下降分量即抛出 SolverError。
    """

    method = "kleene"

    @classmethod
    def default_max_iter(cls) -> int:
        return 1_000_000

    def _iterate(self, system: EquationSystem) -> TermMatrix:
        x = np.zeros(system.size)
        change = np.inf
        monotone = True
        iterations = 0
        while iterations < self.max_iter:
            iterations += 1
            fx = np.minimum(system.evaluate(x), 1.0)
            if monotone and np.any(fx < x - _MONOTONE_SLACK):
                monotone = False
                message = f"Kleene 迭代第 {iterations} 次出现非单调分量"
                if self.strict:
                    raise SolverError(message)
                logger.warning(message)
            change = float(np.max(np.abs(fx - x)))
            x = fx
            if change < self.tol:
                return TermMatrix(system, x, self.method, iterations, change, True, monotone)
        return TermMatrix(system, x, self.method, iterations, change, False, monotone)
