"""
pSJS 分析器
把模型加载、终止概率、空间、分布、期望、有限性、模拟和案例研究组织在一个对象上，供命令行调用
"""

import logging
import re
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from config import AnalysisConfig
from analysis.casestudies import CaseStudyTable, run_case_study
from analysis.errors import AnalysisError
from analysis.model import PsjsModel, Symbol, load_model
from analysis.perf import (
    Finiteness,
    Pmf,
    PsjsWork,
    SpaceResult,
    TailExpectation,
    WorkResult,
    conditional_expected_work,
    expected_work_psjs,
    finiteness,
    space_probability,
    tail_expectation,
    time_distribution,
    work_distribution,
)
from analysis.semantics import MonteCarloReport, estimate
from analysis.settings import AnalysisSettings
from analysis.solvers import TermMatrix
from analysis.transforms import Ppds, SerializationMap, ensure_normalised, normalise, serialise

logger = logging.getLogger(__name__)

JOIN_PATTERN = re.compile(r"^<\s*(\S+)\s+(\S+)\s*>$")
KINDS = ("time", "work")


class PsjsAnalyzer:
    """绑定配置的分析入口，所有方法都接受已校验的模型"""

    def __init__(self, config: AnalysisConfig, settings: AnalysisSettings):
        self.config = config
        self.settings = settings

    def load(self, path: Union[str, Path]) -> PsjsModel:
        return load_model(path)

    @staticmethod
    def resolve_symbol(model: PsjsModel, name: Optional[str]) -> Symbol:
        """
        把命令行给出的名字解析为模型中的符号

        参数:
        - model: 模型
        - name: 基本符号名、同步状态名或 "<q r>"；缺省取模型的起始符号

        返回:
        - Symbol: 字母表中的符号

        异常:
        - AnalysisError: 名字不在模型中，或未给出名字且模型没有起始符号
        """
        if name is None:
            if model.start is None:
                raise AnalysisError("模型没有声明起始符号，请用 --from 指定")
            return model.start
        name = name.strip()
        match = JOIN_PATTERN.match(name)
        if match:
            symbol = Symbol.join(match.group(1).strip('"'), match.group(2).strip('"'))
        elif name in model.sync_set:
            symbol = Symbol.sync(name)
        else:
            symbol = Symbol.basic(name.strip('"'))
        if symbol not in model.alphabet:
            raise AnalysisError(f"符号 {name} 不在模型中")
        return symbol

    def termination(self, model: PsjsModel) -> TermMatrix:
        return self.settings.solve(model)

    def space(self, model: PsjsModel, a: Symbol) -> SpaceResult:
        return space_probability(model, a, self.settings)

    def distribution(self, model: PsjsModel, a: Symbol, q: str, kind: str = "time",
                     K: Optional[int] = None) -> Pmf:
        if kind not in KINDS:
            raise AnalysisError(f"未知的分布类型: {kind}")
        K = self.settings.max_k if K is None else K
        if kind == "time":
            return time_distribution(model, a, q, K, self.settings)
        return work_distribution(model, a, q, K, self.settings)

    def expected_work(self, model: PsjsModel, a: Symbol, q: Optional[str] = None) -> Union[PsjsWork, WorkResult]:
        """q 为空时计算 E W_a，否则计算 E(W_a | Run↓q)"""
        if q is None:
            return expected_work_psjs(model, a, self.settings)
        return conditional_expected_work(model, a, q, self.settings)

    def expected_time(self, model: PsjsModel, a: Symbol, q: str, K: Optional[int] = None) -> TailExpectation:
        pmf = self.distribution(model, a, q, "time", K)
        return tail_expectation(pmf)

    def finiteness(self, model: PsjsModel, a: Symbol) -> Finiteness:
        return finiteness(model, a, self.settings)

    def simulate(self, model: PsjsModel, a: Symbol, runs: int, max_steps: Optional[int] = None,
                 max_space: Optional[int] = None, seed: Optional[int] = None,
                 threads: Optional[int] = None, progress: bool = False) -> MonteCarloReport:
        return estimate(
            model,
            a,
            runs,
            max_steps=self.config.max_steps if max_steps is None else max_steps,
            max_space=self.config.max_space if max_space is None else max_space,
            seed=self.config.seed if seed is None else seed,
            threads=self.config.threads if threads is None else threads,
            progress=progress,
        )

    def serialise(self, model: PsjsModel) -> Tuple[Ppds, SerializationMap]:
        return serialise(model)

    def normalise(self, model: PsjsModel, force: bool = False) -> Tuple[PsjsModel, Optional[str]]:
        """force 为真时总是执行规范化构造，否则结构上已规范的模型原样返回"""
        if force:
            return normalise(model)
        return ensure_normalised(model)

    def case_study(self, study: str, sweep: Sequence, variants: Optional[List[str]] = None,
                   n_max: int = 10, K: Optional[int] = None, threads: Optional[int] = None,
                   progress: bool = False) -> CaseStudyTable:
        return run_case_study(
            study,
            sweep,
            variants=variants,
            n_max=n_max,
            K=K,
            settings=self.settings,
            threads=self.config.threads if threads is None else threads,
            progress=progress,
        )

