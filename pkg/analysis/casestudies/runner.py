"""
案例研究的参数扫描

对每个参数点生成模型、求终止概率，再计算期望工作量（精确线性求解）和期望时间下界。
参数点之间相互独立，用线程池并行，结果按输入顺序排列。
"""

import concurrent.futures
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from analysis.casestudies.divcon import RESULT_STATE, DivConParams, gen_divcon, level_symbol
from analysis.casestudies.families import Probability, as_probability
from analysis.casestudies.gametree import CONDITION_STATE, VARIANTS, GameTreeParams, gen_gametree
from analysis.errors import AnalysisError
from analysis.model import PsjsModel, Symbol
from analysis.perf import (
    INFINITE,
    expected_work_psjs,
    pmf_from_table,
    tail_expectation,
    time_table,
)
from analysis.settings import DEFAULT_SETTINGS, AnalysisSettings
from analysis.transforms import ensure_normalised

logger = logging.getLogger(__name__)

STUDIES = ("divcon", "gametree")
DEFAULT_K = {"gametree": 300, "divcon": 400}
DEFAULT_N_MAX = 10
BASELINE = "seq"

GAMETREE_COLUMNS = ("variant", "p", "EW", "ET_lb", "ET_converged", "pct_vs_seq", "pct_work_vs_seq")
DIVCON_COLUMNS = ("n", "p", "EW", "ET_lb", "ET_converged", "ratio")


def parse_sweep(text: str) -> List[Fraction]:
    """
    解析参数扫描

    参数:
    - text: "a:b:step"（含两端）或逗号分隔的取值列表

    返回:
    - List[Fraction]: 精确有理数取值，0.05 按十进制解析为 1/20
    """
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"扫描格式应为 a:b:step: {text}")
        start, stop, step = (Fraction(part.strip()) for part in parts)
        if step <= 0:
            raise ValueError(f"扫描步长必须为正: {text}")
        values = []
        current = start
        while current <= stop:
            values.append(current)
            current += step
        return values
    values = [Fraction(part.strip()) for part in text.split(",") if part.strip()]
    if not values:
        raise ValueError("扫描取值为空")
    return values


def _percent(value: float, baseline: float) -> float:
    if not (math.isfinite(value) and math.isfinite(baseline)) or baseline <= 0:
        return math.inf
    return 100.0 * (value / baseline - 1.0)


@dataclass
class PointMeasures:
    """一个模型、一个起始符号在条件状态下的全部度量"""
    termination: float
    cond_prob: float
    work: float
    work_verdict: str
    time_lb: float
    time_converged: bool

    @property
    def ratio(self) -> float:
        if not math.isfinite(self.work) or self.time_lb <= 0:
            return math.inf
        return self.work / self.time_lb


def _measure_model(model: PsjsModel, starts: Sequence[Symbol], q: str, K: int,
                   settings: AnalysisSettings) -> List[PointMeasures]:
    normalised, _ = ensure_normalised(model)
    terms = settings.solve(normalised)
    table = time_table(terms.system, K)
    measures = []
    for start in starts:
        cond = terms.value(start, q)
        if cond <= 0:
            raise AnalysisError(f"[{start}↓{q}] = 0，条件期望无定义")
        work = expected_work_psjs(normalised, start, settings, terms)
        component = work.components.get(q)
        ew = component.value if component is not None and work.finite else math.inf
        tail = tail_expectation(pmf_from_table(terms, table, start, q, "time"))
        measures.append(PointMeasures(work.termination, cond, ew, work.verdict, tail.value, tail.converged))
    return measures


@dataclass
class GameTreeRow:
    variant: str
    p: Fraction
    measures: PointMeasures
    pct_vs_seq: float = math.nan
    pct_work_vs_seq: float = math.nan

    def csv_row(self) -> Tuple[object, ...]:
        m = self.measures
        return (self.variant, float(self.p), m.work, m.time_lb, m.time_converged,
                self.pct_vs_seq, self.pct_work_vs_seq)


@dataclass
class DivConRow:
    n: int
    p: Fraction
    measures: PointMeasures

    def csv_row(self) -> Tuple[object, ...]:
        m = self.measures
        return (self.n, float(self.p), m.work, m.time_lb, m.time_converged, m.ratio)


@dataclass
class CaseStudyTable:
    """扫描结果；rows 的顺序与输入参数顺序一致"""
    study: str
    rows: List[object]
    K: int
    models: Dict[str, PsjsModel] = field(default_factory=dict)

    @property
    def columns(self) -> Tuple[str, ...]:
        return GAMETREE_COLUMNS if self.study == "gametree" else DIVCON_COLUMNS

    def csv_rows(self) -> List[Tuple[object, ...]]:
        return [row.csv_row() for row in self.rows]


def _run_points(jobs: List[Tuple[str, object]], worker, threads: int, progress: bool, desc: str) -> List[object]:
    results: List[Optional[object]] = [None] * len(jobs)
    with tqdm(total=len(jobs), desc=desc, unit="点", disable=not progress) as pbar:
        with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
            futures = {executor.submit(worker, job): index for index, job in enumerate(jobs)}
            for future in concurrent.futures.as_completed(futures):
                results[futures[future]] = future.result()
                pbar.update(1)
    return results


def _gametree(sweep: Sequence[Fraction], variants: Sequence[str], K: int, settings: AnalysisSettings,
              threads: int, progress: bool) -> CaseStudyTable:
    wanted = list(dict.fromkeys(variants))
    computed = wanted if BASELINE in wanted else wanted + [BASELINE]
    jobs = [(variant, p) for variant in computed for p in sweep]

    def worker(job):
        variant, p = job
        params = GameTreeParams(variant, p)
        model = gen_gametree(params)
        measures = _measure_model(model, [params.root], CONDITION_STATE, K, settings)[0]
        logger.info(f"博弈树 {variant} p={float(params.p):g}: W={measures.work:.6g}, "
                    f"T≥{measures.time_lb:.6g} ({'收敛' if measures.time_converged else '未收敛'})")
        return f"gametree-{variant}-{float(params.p):g}", model, GameTreeRow(variant, params.p, measures)

    results = _run_points(jobs, worker, threads, progress, "博弈树扫描")
    models: Dict[str, PsjsModel] = {key: model for key, model, _ in results}
    rows: List[GameTreeRow] = [row for _, _, row in results]
    baseline = {row.p: row.measures for row in rows if row.variant == BASELINE}
    for row in rows:
        base = baseline[row.p]
        row.pct_vs_seq = _percent(row.measures.time_lb, base.time_lb)
        row.pct_work_vs_seq = _percent(row.measures.work, base.work)
    rows = [row for row in rows if row.variant in wanted]
    return CaseStudyTable("gametree", rows, K, models)


def _divcon(sweep: Sequence[Fraction], n_max: int, K: int, settings: AnalysisSettings,
            threads: int, progress: bool) -> CaseStudyTable:
    def worker(p):
        params = DivConParams(p, n_max)
        model = gen_divcon(params)
        levels = list(range(1, n_max + 1))
        measures = _measure_model(model, [level_symbol(n) for n in levels], RESULT_STATE, K, settings)
        logger.info(f"分治积分 p={float(params.p):g}: 已计算 n = 1..{n_max}")
        return f"divcon-{float(params.p):g}", model, [DivConRow(n, params.p, m) for n, m in zip(levels, measures)]

    results = _run_points(list(sweep), worker, threads, progress, "分治扫描")
    models = {key: model for key, model, _ in results}
    return CaseStudyTable("divcon", [row for _, _, chunk in results for row in chunk], K, models)


def run_case_study(study: str, sweep: Sequence[Probability], variants: Optional[Sequence[str]] = None,
                   n_max: int = DEFAULT_N_MAX, K: Optional[int] = None,
                   settings: AnalysisSettings = DEFAULT_SETTINGS, threads: int = 1,
                   progress: bool = False) -> CaseStudyTable:
    """
    运行案例研究扫描

    参数:
    - study: divcon 或 gametree
    - sweep: 参数 p 的取值
    - variants: 博弈树程序变体，缺省为全部；seq 作为基线总会计算
    - n_max: 分治积分的最大振荡等级
    - K: 时间分布的截断点，缺省 gametree 为 300、divcon 为 400
    - threads: 并行的参数点个数

    返回:
    - CaseStudyTable: 每个参数点一行（divcon 每个 (p, n) 一行）

    异常:
    - ValueError: 参数不合法
    """
    if study not in STUDIES:
        raise ValueError(f"未知的案例研究: {study}，可选 {', '.join(STUDIES)}")
    points = [as_probability(p) for p in sweep]
    if not points:
        raise ValueError("扫描取值为空")
    K = DEFAULT_K[study] if K is None else K
    logger.info(f"开始案例研究 {study}: {len(points)} 个参数点，K={K}")
    if study == "gametree":
        variants = list(variants) if variants else list(VARIANTS)
        for variant in variants:
            if variant not in VARIANTS:
                raise ValueError(f"未知的博弈树程序: {variant}，可选 {', '.join(VARIANTS)}")
        table = _gametree(points, variants, K, settings, threads, progress)
    else:
        table = _divcon(points, n_max, K, settings, threads, progress)
    infinite = sum(1 for row in table.rows if row.measures.work_verdict == INFINITE)
    if infinite:
        logger.info(f"{infinite} 个结果的期望工作量为无穷")
    return table
