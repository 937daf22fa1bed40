import logging
import warnings

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from analysis.solvers.abstract_solver import TermMatrix, TerminationSolver
from analysis.solvers.equations import EquationSystem

logger = logging.getLogger(__name__)


class NewtonSolver(TerminationSolver):
    """
    带投影的全局牛顿法，求解 g(x) = f(x) − x = 0

    每一步解 (I − J) Δ = f(x) − x，结果截断到 [0,1]，并且逐分量不低于
    Kleene 更新 min(f(x), 1)。线性系统奇异时该步退化为 Kleene 步。
    """

    method = "newton"

    @classmethod
    def default_max_iter(cls) -> int:
        return 200

    def _newton_step(self, system: EquationSystem, x: np.ndarray, fx: np.ndarray):
        n = system.size
        matrix = sparse.identity(n, format="csr") - system.jacobian(x)
        with warnings.catch_warnings():
            warnings.simplefilter("error", MatrixRankWarning)
            try:
                delta = np.atleast_1d(np.asarray(spsolve(matrix.tocsc(), fx - x), dtype=float))
            except (MatrixRankWarning, RuntimeError) as e:
                logger.debug(f"牛顿步线性系统奇异: {str(e)}")
                return None
        if delta.shape != x.shape or not np.all(np.isfinite(delta)):
            return None
        return x + delta

    def _iterate(self, system: EquationSystem) -> TermMatrix:
        x = np.zeros(system.size)
        step = np.inf
        fallbacks = 0
        iterations = 0
        while iterations < self.max_iter:
            iterations += 1
            fx = system.evaluate(x)
            kleene = np.minimum(fx, 1.0)
            candidate = self._newton_step(system, x, fx)
            if candidate is None:
                fallbacks += 1
                x_new = kleene
            else:
                x_new = np.maximum(np.clip(candidate, 0.0, 1.0), kleene)
            step = float(np.max(np.abs(x_new - x)))
            x = x_new
            if step < self.tol:
                break
        if fallbacks:
            logger.info(f"牛顿法有 {fallbacks} 步退化为 Kleene 步")
        return TermMatrix(system, x, self.method, iterations, step, step < self.tol)
