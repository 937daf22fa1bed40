"""
终止概率求解：方程组构建、Kleene 迭代、牛顿法与精确零集
"""

from typing import Optional

from analysis.model import PsjsModel
from analysis.solvers.abstract_solver import TermMatrix, TerminationSolver
from analysis.solvers.equations import (
    EquationSystem,
    Monomial,
    build_equation_system,
    positive_states,
    zero_set,
)
from analysis.solvers.kleene_solver import KleeneSolver
from analysis.solvers.newton_solver import NewtonSolver

SOLVERS = {
    KleeneSolver.method: KleeneSolver,
    NewtonSolver.method: NewtonSolver,
}


def kleene_solve(system: EquationSystem, tol: float = 1e-12, max_iter: Optional[int] = None,
                 strict: bool = False) -> TermMatrix:
    return KleeneSolver(tol=tol, max_iter=max_iter, strict=strict).solve(system)


def newton_solve(system: EquationSystem, tol: float = 1e-12, max_iter: Optional[int] = None,
                 strict: bool = False) -> TermMatrix:
    return NewtonSolver(tol=tol, max_iter=max_iter, strict=strict).solve(system)


def solve_termination(model: PsjsModel, method: str = "newton", tol: float = 1e-12,
                      max_iter: Optional[int] = None, strict: bool = False) -> TermMatrix:
    """
    构建方程组并求解

    参数:
    - model: 已校验的模型
    - method: 'kleene' 或 'newton'
    - tol: 收敛容差

    返回:
    - TermMatrix: 终止概率
    """
    if method not in SOLVERS:
        raise ValueError(f"不支持的求解方法: {method}")
    solver = SOLVERS[method](tol=tol, max_iter=max_iter, strict=strict)
    return solver.solve(build_equation_system(model))


__all__ = [
    "EquationSystem",
    "Monomial",
    "TermMatrix",
    "TerminationSolver",
    "KleeneSolver",
    "NewtonSolver",
    "SOLVERS",
    "build_equation_system",
    "positive_states",
    "zero_set",
    "kleene_solve",
    "newton_solve",
    "solve_termination",
]
