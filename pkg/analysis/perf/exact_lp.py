"""
精确有理数线性规划可行性判定（两阶段单纯形法的第一阶段，Bland 规则防止循环）
"""

import logging
from fractions import Fraction
from typing import List, Optional, Sequence

from analysis.errors import AnalysisError

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


def _pivot(tableau: List[List[Fraction]], cost: List[Fraction], row: int, col: int) -> None:
    pivot_row = tableau[row]
    factor = pivot_row[col]
    tableau[row] = pivot_row = [v / factor for v in pivot_row]
    nonzero = [j for j, v in enumerate(pivot_row) if v != 0]
    for i, other in enumerate(tableau):
        if i == row or other[col] == 0:
            continue
        scale = other[col]
        for j in nonzero:
            other[j] -= scale * pivot_row[j]
    scale = cost[col]
    if scale != 0:
        for j in nonzero:
            if j < len(cost):
                cost[j] -= scale * pivot_row[j]


def phase_one_feasible(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction],
                       max_pivots: Optional[int] = None) -> bool:
    """
    判断 {x ≥ 0 | rows · x = rhs} 是否非空

    参数:
    - rows: 等式约束的系数矩阵（有理数）
    - rhs: 右端项
    - max_pivots: 主元次数上限，缺省不限

    返回:
    - bool: 第一阶段最优值为 0 时可行
    """
    m = len(rows)
    if m == 0:
        return True
    width = len(rows[0])
    tableau: List[List[Fraction]] = []
    for i, (row, b) in enumerate(zip(rows, rhs)):
        sign = -1 if b < 0 else 1
        artificial = [ZERO] * m
        artificial[i] = Fraction(1)
        tableau.append([sign * Fraction(v) for v in row] + artificial + [sign * Fraction(b)])
    basis = [width + i for i in range(m)]
    total = width + m
    cost = [-sum((t[j] for t in tableau), ZERO) for j in range(width)] + [ZERO] * m

    pivots = 0
    while True:
        entering = next((j for j in range(total) if cost[j] < 0), None)
        if entering is None:
            break
        best = None
        for i, t in enumerate(tableau):
            if t[entering] > 0:
                key = (t[-1] / t[entering], basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise AnalysisError("第一阶段单纯形无界，约束矩阵异常")
        leaving = best[1]
        _pivot(tableau, cost, leaving, entering)
        basis[leaving] = entering
        pivots += 1
        if max_pivots is not None and pivots > max_pivots:
            raise AnalysisError(f"单纯形主元次数超过上限 {max_pivots}")

    residual = sum((tableau[i][-1] for i in range(m) if basis[i] >= width), ZERO)
    logger.debug(f"精确单纯形: {pivots} 次主元, 人工变量残量 {residual}")
    return residual == 0
