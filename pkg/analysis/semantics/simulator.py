"""
蒙特卡洛模拟器
作为所有解析结果的独立参照：终止概率、终止状态、时间 T、工作量 W、空间 S
"""

import bisect
import concurrent.futures
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from analysis.model import PsjsModel, Rule, Symbol
from analysis.semantics.tree import (
    Outcome,
    RunStats,
    Tree,
    _rewrite,
    instantiate,
    leaf_count,
    terminal_state,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 100_000
DEFAULT_MAX_SPACE = 1_000_000
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


class _Sampler:
    """每个过程符号的累积概率表"""

    def __init__(self, model: PsjsModel):
        self.table: Dict[Symbol, Tuple[List[float], Tuple[Rule, ...], List[float]]] = {}
        for symbol, rules in model.rules_by_lhs.items():
            bounds, logs = [], []
            total = 0.0
            for rule in rules:
                total += float(rule.prob)
                bounds.append(total)
                logs.append(math.log(float(rule.prob)))
            self.table[symbol] = (bounds, rules, logs)

    def draw(self, symbol: Symbol, rng) -> Tuple[Rule, float]:
        bounds, rules, logs = self.table[symbol]
        index = min(bisect.bisect_right(bounds, rng.random()), len(rules) - 1)
        return rules[index], logs[index]


def simulate_run(model: PsjsModel, start: Symbol, max_steps: int = DEFAULT_MAX_STEPS,
                 max_space: int = DEFAULT_MAX_SPACE, rng=None, sampler: Optional[_Sampler] = None) -> RunStats:
    """
    从 Leaf(start) 出发反复执行 step，直到终止或触及预算

    参数:
    - model: 已校验的模型
    - start: 起始符号，须在 Σ 中
    - max_steps: 步数预算
    - max_space: 叶子数预算
    - rng: 随机源，需提供 random()；默认使用种子 0

    返回:
    - RunStats: 截断是结局而不是异常
    """
    if max_steps < 1 or max_space < 1:
        raise ValueError("步数预算和空间预算都必须至少为 1")
    if rng is None:
        rng = np.random.default_rng(0)
    sampler = sampler or _Sampler(model)

    tree: Tree = start
    time = work = 0
    space = 1
    log_prob = 0.0
    while True:
        rewrites = 0
        step_log = 0.0

        def replace(_pos, symbol: Symbol) -> Tree:
            nonlocal rewrites, step_log
            rule, log_value = sampler.draw(symbol, rng)
            rewrites += 1
            step_log += log_value
            return instantiate(rule)

        new_tree = _rewrite(model, tree, replace)
        if rewrites == 0:
            return RunStats(Outcome.TERMINATED, time, work, space, tree, terminal_state(model, tree), log_prob)

        tree = new_tree
        time += 1
        work += rewrites
        log_prob += step_log
        space = max(space, leaf_count(tree))
        if space > max_space:
            return RunStats(Outcome.CUTOFF_SPACE, time, work, space, log_prob=log_prob)
        if time >= max_steps:
            # 预算用尽时仍需判断最后一棵树是否已终止
            if not _has_process(model, tree):
                return RunStats(Outcome.TERMINATED, time, work, space, tree, terminal_state(model, tree), log_prob)
            return RunStats(Outcome.CUTOFF_STEPS, time, work, space, log_prob=log_prob)


def _has_process(model: PsjsModel, tree: Tree) -> bool:
    found = False

    def mark(_pos, symbol: Symbol) -> Tree:
        nonlocal found
        found = True
        return symbol

    _rewrite(model, tree, mark)
    return found


@dataclass
class OutcomeCount:
    count: int
    freq: float
    se: float

    @classmethod
    def of(cls, count: int, n_runs: int) -> "OutcomeCount":
        freq = count / n_runs
        return cls(count, freq, math.sqrt(freq * (1.0 - freq) / n_runs))


@dataclass
class SampleStats:
    mean: float
    se: float
    quantiles: Dict[str, float]

    @classmethod
    def of(cls, values: Sequence[int]) -> "SampleStats":
        data = np.asarray(values, dtype=float)
        se = float(data.std(ddof=1) / math.sqrt(len(data))) if len(data) > 1 else 0.0
        quantiles = {f"{q:g}": float(v) for q, v in zip(QUANTILES, np.quantile(data, QUANTILES))}
        return cls(float(data.mean()), se, quantiles)


@dataclass
class MonteCarloReport:
    """
    蒙特卡洛估计结果

    terminated 按同步状态统计；frozen 是停在冻结汇合上的终止树；cutoff 区分步数和空间截断。
    cond_stats 只在终止于对应状态的运行上统计。
    """
    n_runs: int
    seed: int
    terminated: Dict[str, OutcomeCount]
    frozen: OutcomeCount
    cutoff: Dict[str, OutcomeCount]
    cond_stats: Dict[str, Dict[str, SampleStats]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        def count_dict(c: OutcomeCount) -> Dict[str, float]:
            return {"count": c.count, "freq": c.freq, "se": c.se}

        return {
            "n_runs": self.n_runs,
            "seed": self.seed,
            "terminated": {q: count_dict(c) for q, c in self.terminated.items()},
            "frozen": count_dict(self.frozen),
            "cutoff": {k: count_dict(c) for k, c in self.cutoff.items()},
            "cond_stats": {
                q: {name: {"mean": s.mean, "se": s.se, "quantiles": s.quantiles} for name, s in stats.items()}
                for q, stats in self.cond_stats.items()
            },
        }


# 单次运行的紧凑结果 (结局, 终止状态, T, W, S)，便于跨进程传递
_Compact = Tuple[str, Optional[str], int, int, int]


def _run_chunk(model: PsjsModel, start: Symbol, max_steps: int, max_space: int,
               seed: int, first: int, last: int) -> List[_Compact]:
    sampler = _Sampler(model)
    results = []
    for run_index in range(first, last):
        rng = np.random.default_rng([seed, run_index])
        stats = simulate_run(model, start, max_steps, max_space, rng, sampler)
        results.append((stats.outcome.value, stats.terminal_state, stats.time, stats.work, stats.space))
    return results


def _summarise(model: PsjsModel, runs: List[_Compact], seed: int) -> MonteCarloReport:
    n_runs = len(runs)
    per_state: Dict[str, List[_Compact]] = {q: [] for q in model.sync_states}
    frozen = cutoff_steps = cutoff_space = 0
    for run in runs:
        outcome, state = run[0], run[1]
        if outcome == Outcome.TERMINATED.value:
            if state is None:
                frozen += 1
            else:
                per_state[state].append(run)
        elif outcome == Outcome.CUTOFF_STEPS.value:
            cutoff_steps += 1
        else:
            cutoff_space += 1

    cond_stats = {}
    for q, finished in per_state.items():
        if finished:
            cond_stats[q] = {
                "time": SampleStats.of([r[2] for r in finished]),
                "work": SampleStats.of([r[3] for r in finished]),
                "space": SampleStats.of([r[4] for r in finished]),
            }
    return MonteCarloReport(
        n_runs=n_runs,
        seed=seed,
        terminated={q: OutcomeCount.of(len(finished), n_runs) for q, finished in per_state.items()},
        frozen=OutcomeCount.of(frozen, n_runs),
        cutoff={"steps": OutcomeCount.of(cutoff_steps, n_runs), "space": OutcomeCount.of(cutoff_space, n_runs)},
        cond_stats=cond_stats,
    )


def estimate(model: PsjsModel, start: Symbol, n_runs: int, max_steps: int = DEFAULT_MAX_STEPS,
             max_space: int = DEFAULT_MAX_SPACE, seed: int = 0, threads: int = 1,
             progress: bool = False) -> MonteCarloReport:
    """
    蒙特卡洛估计

    参数:
    - model: 已校验的模型
    - start: 起始符号
    - n_runs: 运行次数
    - max_steps / max_space: 每次运行的预算
    - seed: 种子；第 i 次运行使用 default_rng([seed, i])，结果与 threads 无关
    - threads: 大于 1 时按固定分块在进程池中执行
    - progress: 是否显示 tqdm 进度条

    返回:
    - MonteCarloReport: 按运行顺序归约的统计结果
    """
    if n_runs < 1:
        raise ValueError(f"运行次数必须至少为 1: {n_runs}")
    logger.info(f"开始蒙特卡洛模拟: {n_runs} 次运行, 起点 {start}, 种子 {seed}, 并行度 {threads}")

    chunk = max(1, math.ceil(n_runs / max(1, threads * 4)))
    bounds = [(first, min(first + chunk, n_runs)) for first in range(0, n_runs, chunk)]
    runs: List[_Compact] = []
    if threads <= 1:
        with tqdm(total=n_runs, desc="模拟运行", unit="次", disable=not progress) as pbar:
            for first, last in bounds:
                runs.extend(_run_chunk(model, start, max_steps, max_space, seed, first, last))
                pbar.update(last - first)
    else:
        with tqdm(total=n_runs, desc="模拟运行", unit="次", disable=not progress) as pbar:
            with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as executor:
                futures = [
                    executor.submit(_run_chunk, model, start, max_steps, max_space, seed, first, last)
                    for first, last in bounds
                ]
                for future in concurrent.futures.as_completed(futures):
                    pbar.update(len(future.result()))
                for future in futures:
                    runs.extend(future.result())

    report = _summarise(model, runs, seed)
    summary = ", ".join(f"{q}: {c.freq:.4f}" for q, c in report.terminated.items())
    logger.info(f"模拟完成: 终止频率 {summary}; 冻结 {report.frozen.count}, "
                f"步数截断 {report.cutoff['steps'].count}, 空间截断 {report.cutoff['space'].count}")
    return report
