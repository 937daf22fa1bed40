"""
分支过程的期望工作量

特征矩阵 A[X][Y] = Σ_{X →p α} p·|α|_Y。约简后的分支过程期望工作量有限当且仅当 ρ(A) < 1，
判定通过线性规划完成：不存在 x ≥ 0、Σx = 1 且 Ax ≥ x 时过程次临界。
"""

import logging
import math
from collections import defaultdict, deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.sparse.linalg import spsolve

from analysis.errors import AnalysisError
from analysis.model import PsjsModel, Symbol
from analysis.perf.exact_lp import phase_one_feasible

logger = logging.getLogger(__name__)

EXACT_DENOMINATOR_LIMIT = 2 ** 32
NEAR_CRITICAL = 1e-6
RESIDUAL_WARNING = 1e-6
DENSE_EIGEN_LIMIT = 800


@dataclass
class CharMatrix:
    """
    特征矩阵

    matrix 是浮点稀疏矩阵；规模不超过精确阈值且所有概率分母较小时 exact 保存有理数稠密矩阵。
    """
    symbols: Tuple[Symbol, ...]
    matrix: sparse.csr_matrix
    exact: Optional[List[List[Fraction]]] = None

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: Symbol) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise AnalysisError(f"符号 {symbol} 不在特征矩阵中")

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def entry(self, x: Symbol, y: Symbol) -> float:
        return float(self.matrix[self.index(x), self.index(y)])


def characteristic_matrix(bp: PsjsModel, exact_limit: int = 50) -> CharMatrix:
    """
    构造分支过程的特征矩阵

    参数:
    - bp: 分支过程
    - exact_limit: 精确有理数矩阵的规模上限

    返回:
    - CharMatrix: 行列按 Γ 的声明顺序排列
    """
    if not bp.flags.is_branching_process:
        raise AnalysisError("特征矩阵只对分支过程有定义")
    symbols = bp.process_symbols
    position = {sym: i for i, sym in enumerate(symbols)}
    entries: Dict[Tuple[int, int], Fraction] = defaultdict(Fraction)
    for rule in bp.rules:
        for child in rule.rhs:
            if child in position:
                entries[(position[rule.lhs], position[child])] += rule.prob

    n = len(symbols)
    keys = sorted(entries)
    rows = np.array([i for i, _ in keys], dtype=np.int64)
    cols = np.array([j for _, j in keys], dtype=np.int64)
    data = np.array([float(entries[key]) for key in keys], dtype=float)
    matrix = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))

    exact = None
    if n <= exact_limit and all(rule.prob.denominator < EXACT_DENOMINATOR_LIMIT for rule in bp.rules):
        exact = [[Fraction(0)] * n for _ in range(n)]
        for (i, j), value in entries.items():
            exact[i][j] = value
    return CharMatrix(symbols, matrix, exact)


def reduce_bp(bp: PsjsModel, x0: Symbol) -> PsjsModel:
    """只保留从 x0 可达的符号及其规则；已约简的模型原样返回"""
    if not bp.flags.is_branching_process:
        raise AnalysisError("约简只对分支过程有定义")
    if x0 not in bp.rules_by_lhs:
        raise AnalysisError(f"{x0} 不是分支过程的过程符号")
    seen = {x0}
    queue = deque([x0])
    while queue:
        current = queue.popleft()
        for rule in bp.rules_for(current):
            for child in rule.rhs:
                if child.is_process and child not in seen:
                    seen.add(child)
                    queue.append(child)
    if len(seen) == len(bp.process_symbols):
        return bp
    rules = tuple(rule for rule in bp.rules if rule.lhs in seen)
    logger.debug(f"分支过程约简: {len(bp.process_symbols)} -> {len(seen)} 个符号")
    return PsjsModel(
        sync_states=bp.sync_states,
        rules=rules,
        flags=bp.flags,
        start=x0,
        provenance=bp.provenance,
    )


def spectral_radius_estimate(matrix: Union[sparse.spmatrix, np.ndarray],
                             max_iter: int = 10000, tol: float = 1e-13) -> float:
    """
    ρ(A) 的数值估计，与线性规划判定一起报告

    规模不超过 DENSE_EIGEN_LIMIT 时直接求全部特征值；更大的矩阵对 A + I 做幂迭代（避开周期矩阵），结果减 1。
    """
    matrix = sparse.csr_matrix(matrix)
    n = matrix.shape[0]
    if n == 0:
        return 0.0
    if n <= DENSE_EIGEN_LIMIT:
        return float(np.max(np.abs(np.linalg.eigvals(matrix.toarray()))))
    shifted = matrix + sparse.identity(n, format="csr")
    x = np.full(n, 1.0 / n)
    estimate = 0.0
    for _ in range(max_iter):
        y = shifted @ x
        norm = float(y.sum())
        x = y / norm
        if abs(norm - estimate) < tol * max(1.0, norm):
            estimate = norm
            break
        estimate = norm
    return estimate - 1.0


@dataclass
class Subcriticality:
    """
    次临界判定结果，bool(result) 即 ρ(A) < 1

    method: exact（有理数单纯形）、highs（浮点线性规划）或 power（线性规划失败时的幂迭代退路）
    """
    subcritical: bool
    method: str
    rho_estimate: float
    lp_status: Optional[int] = None

    def __bool__(self) -> bool:
        return self.subcritical

    @property
    def near_critical(self) -> bool:
        return abs(self.rho_estimate - 1.0) <= NEAR_CRITICAL

    def to_dict(self) -> Dict[str, object]:
        return {
            "subcritical": self.subcritical,
            "method": self.method,
            "rho_estimate": self.rho_estimate,
            "near_critical": self.near_critical,
            "lp_status": self.lp_status,
        }


def _as_char_matrix(A: Union[CharMatrix, Sequence[Sequence[object]], np.ndarray]) -> CharMatrix:
    if isinstance(A, CharMatrix):
        return A
    rows = [list(row) for row in A]
    n = len(rows)
    symbols = tuple(Symbol.basic(f"x{i}") for i in range(n))
    exact = None
    if all(isinstance(v, (int, Fraction)) for row in rows for v in row):
        exact = [[Fraction(v) for v in row] for row in rows]
    dense = np.array([[float(v) for v in row] for row in rows], dtype=float).reshape(n, n)
    return CharMatrix(symbols, sparse.csr_matrix(dense), exact)


def _exact_feasible(exact: List[List[Fraction]]) -> bool:
    n = len(exact)
    rows: List[List[Fraction]] = []
    for i in range(n):
        row = [exact[i][j] - (1 if i == j else 0) for j in range(n)]
        slack = [Fraction(0)] * n
        slack[i] = Fraction(-1)
        rows.append(row + slack)
    rows.append([Fraction(1)] * n + [Fraction(0)] * n)
    rhs = [Fraction(0)] * n + [Fraction(1)]
    return phase_one_feasible(rows, rhs)


def is_subcritical(A: Union[CharMatrix, Sequence[Sequence[object]], np.ndarray],
                   lp_tol: float = 1e-9, exact_limit: int = 50) -> Subcriticality:
    """
    判定 ρ(A) < 1

    参数:
    - A: 特征矩阵，或有理数/浮点的方阵
    - lp_tol: 浮点线性规划中 Ax ≥ x 的放宽量
    - exact_limit: 使用精确单纯形的规模上限

    返回:
    - Subcriticality: 判定结果，附带幂迭代得到的 ρ 估计
    """
    char = _as_char_matrix(A)
    n = char.size
    rho = spectral_radius_estimate(char.matrix)
    if n == 0:
        return Subcriticality(True, "exact", rho)

    if char.exact is not None and n <= exact_limit:
        feasible = _exact_feasible(char.exact)
        return Subcriticality(not feasible, "exact", rho)

    # 近临界带内放宽量取 NEAR_CRITICAL
    slack = max(lp_tol, NEAR_CRITICAL) if abs(rho - 1.0) <= NEAR_CRITICAL else lp_tol
    identity = sparse.identity(n, format="csr")
    result = linprog(
        c=np.zeros(n),
        A_ub=(identity - char.matrix).tocsr(),
        b_ub=np.full(n, slack),
        A_eq=np.ones((1, n)),
        b_eq=np.array([1.0]),
        bounds=[(0, None)] * n,
        method="highs",
    )
    if result.status == 0:
        return Subcriticality(False, "highs", rho, result.status)
    if result.status == 2:
        return Subcriticality(True, "highs", rho, result.status)
    logger.warning(f"线性规划求解失败 (status={result.status}: {result.message})，改用幂迭代估计")
    return Subcriticality(rho < 1.0, "power", rho, result.status)


@dataclass
class WorkResult:
    """分支过程期望工作量；不可判定为有限时 value 为 math.inf"""
    value: float
    subcriticality: Optional[Subcriticality]
    residual: float = 0.0
    symbols: int = 0

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def to_dict(self) -> Dict[str, object]:
        return {
            "value": self.value if self.finite else "Infinite",
            "finite": self.finite,
            "residual": self.residual,
            "symbols": self.symbols,
            "subcriticality": self.subcriticality.to_dict() if self.subcriticality else None,
        }


def expected_work_bp(bp: PsjsModel, x0: Symbol, lp_tol: float = 1e-9, exact_limit: int = 50) -> WorkResult:
    """
    分支过程从 x0 出发的期望工作量 E W_{x0}

    参数:
    - bp: 分支过程
    - x0: 起始符号；同步状态的工作量为 0

    返回:
    - WorkResult: 约简后次临界时为 (I − A)^{-1}·1 在 x0 处的分量，否则为 math.inf
    """
    if not bp.flags.is_branching_process:
        raise AnalysisError("expected_work_bp 只接受分支过程")
    if x0.is_sync:
        return WorkResult(0.0, None)
    reduced = reduce_bp(bp, x0)
    char = characteristic_matrix(reduced, exact_limit)
    verdict = is_subcritical(char, lp_tol=lp_tol, exact_limit=exact_limit)
    if not verdict:
        logger.info(f"{x0}: 特征矩阵非次临界 (ρ≈{verdict.rho_estimate:.6g})，期望工作量无穷")
        return WorkResult(math.inf, verdict, symbols=char.size)

    n = char.size
    system = (sparse.identity(n, format="csc") - char.matrix.tocsc()).tocsc()
    ones = np.ones(n)
    work = np.atleast_1d(spsolve(system, ones))
    residual = float(np.max(np.abs(system @ work - ones)))
    if not np.all(np.isfinite(work)):
        raise AnalysisError(f"{x0}: 线性方程组 (I − A)w = 1 求解失败")
    if residual > RESIDUAL_WARNING:
        logger.warning(f"{x0}: 线性方程组残差较大 {residual:.3e}")
    return WorkResult(float(work[char.index(x0)]), verdict, residual, n)
