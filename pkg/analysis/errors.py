"""
异常定义模块
所有分析子模块共用的异常基类
"""

from typing import List, Optional


class PsjsError(Exception):
    """pSJS 分析通用异常基类"""
    pass


class ModelError(PsjsError):
    """模型相关异常"""
    pass


class ModelSyntaxError(ModelError):
    """模型文本语法错误，携带行号和列号"""

    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"第 {line} 行第 {column} 列: {message}")


class ModelValidationError(ModelError):
    """模型不满足不变量，携带诊断列表"""

    def __init__(self, diagnostics: List["object"]):
        self.diagnostics = list(diagnostics)
        summary = "; ".join(str(d) for d in self.diagnostics[:5])
        if len(self.diagnostics) > 5:
            summary += f"; ... 共 {len(self.diagnostics)} 条"
        super().__init__(f"模型校验失败: {summary}")


class SolverError(PsjsError):
    """求解器异常"""
    pass


class ConvergenceError(SolverError):
    """迭代未在预算内收敛（仅在严格模式下抛出）"""

    def __init__(self, message: str, iterations: int = 0, achieved_tol: Optional[float] = None):
        self.iterations = iterations
        self.achieved_tol = achieved_tol
        super().__init__(message)


class TransformError(PsjsError):
    """模型变换异常"""
    pass


class AnalysisError(PsjsError):
    """性能分析异常"""
    pass
