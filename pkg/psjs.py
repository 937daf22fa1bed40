#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
psjs: 概率分裂-汇合系统 (pSJS) 的命令行分析工具
计算终止概率、空间有限概率、时间与工作量的分布和期望，并运行蒙特卡洛模拟与案例研究
"""

import sys
import argparse
import logging
from pathlib import Path
from typing import List, Optional

from config import load_analysis_config
from analysis.analyzer import PsjsAnalyzer
from analysis.casestudies import STUDIES, VARIANTS, parse_sweep
from analysis.errors import (
    AnalysisError,
    ConvergenceError,
    ModelError,
    ModelSyntaxError,
    ModelValidationError,
    SolverError,
    TransformError,
)
from analysis.factory import create_analyzer
from analysis.model import PsjsModel, render_model
from analysis.perf import tail_expectation
from analysis.transforms import render_ppds
from reports import (
    CaseStudyReport,
    Convergence,
    DiagnosticItem,
    DistReport,
    ExpectReport,
    FiniteReport,
    NormaliseReport,
    Report,
    ReportError,
    ReportRenderer,
    SerialiseReport,
    SimulateReport,
    SpaceReport,
    TermReport,
    ValidateReport,
    finite_or_label,
    render_csv,
    render_json,
)

logger = logging.getLogger('psjs')

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MODEL = 2
EXIT_UNCONVERGED = 3

FORMATS = ('table', 'json', 'csv')


class UsageError(Exception):
    """命令行参数组合不合法"""
    pass


class PsjsArgumentParser(argparse.ArgumentParser):
    """参数错误时以退出码 1 结束"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: 错误: {message}\n")


def configure_logging(debug: bool, level_name: str, log_file: Optional[str]) -> None:
    level = logging.DEBUG if debug else getattr(logging, level_name, logging.INFO)
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )
    if debug:
        logger.debug("调试模式已启用")


def build_parser() -> argparse.ArgumentParser:
    """构造命令行解析器，公共选项可写在子命令之后"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=FORMATS, default='table', help="输出格式 (table, json 或 csv)")
    common.add_argument('--output', help="输出文件路径，缺省写到标准输出")
    common.add_argument('--debug', action='store_true', help="启用调试模式，显示详细日志信息")
    common.add_argument('--strict', action='store_true', help="迭代未收敛时以退出码 3 结束")
    common.add_argument('--threads', type=int, help="并行度上限，缺省取 PSJS_THREADS")
    common.add_argument('--seed', type=int, help="随机种子，缺省取 PSJS_SEED")
    common.add_argument('--method', choices=['kleene', 'newton'], help="终止概率求解方法")
    common.add_argument('--tol', type=float, help="求解容差，缺省取 PSJS_TOL")
    common.add_argument('--log-file', default='psjs.log', help="日志文件路径，传入空字符串则不写文件")

    parser = PsjsArgumentParser(prog='psjs', description="psjs: 概率分裂-汇合系统的终止、空间、时间与工作量分析")
    sub = parser.add_subparsers(dest='command', required=True, parser_class=PsjsArgumentParser)

    def model_command(name: str, help_text: str, with_from: bool = True) -> argparse.ArgumentParser:
        cmd = sub.add_parser(name, parents=[common], help=help_text)
        cmd.add_argument('model', help="模型文件路径")
        if with_from:
            cmd.add_argument('--from', dest='start', help="起始符号，缺省取模型的 start 声明")
        return cmd

    model_command('validate', "校验模型并列出诊断", with_from=False)
    model_command('term', "终止概率 [σ↓q]")
    model_command('space', "运行空间有限的概率")

    dist = model_command('dist', "时间或工作量的截断分布")
    dist.add_argument('--kind', choices=['time', 'work'], default='time', help="分布类型")
    dist.add_argument('--to', dest='state', required=True, help="条件终止状态 q")
    dist.add_argument('--max-k', type=int, help="截断点 K，缺省取 PSJS_MAX_K")

    expect = model_command('expect', "期望工作量或期望时间")
    expect.add_argument('--kind', choices=['work', 'time'], default='work', help="度量类型")
    expect.add_argument('--to', dest='state', help="条件终止状态 q；期望时间必须给出")
    expect.add_argument('--max-k', type=int, help="期望时间的截断点 K")

    model_command('finite', "期望工作量与期望时间的有限性判定")

    simulate = model_command('simulate', "蒙特卡洛模拟")
    simulate.add_argument('--runs', type=int, default=10000, help="运行次数")
    simulate.add_argument('--max-steps', type=int, help="每次运行的步数预算")
    simulate.add_argument('--max-space', type=int, help="每次运行的空间预算")

    model_command('serialise', "把 pSJS 串行化为 pPDS", with_from=False)

    normalise = model_command('normalise', "规范化模型并输出模型文本", with_from=False)
    normalise.add_argument('--force', action='store_true', help="即使模型已规范也执行规范化构造")

    case = sub.add_parser('casestudy', parents=[common], help="案例研究参数扫描")
    case.add_argument('study', choices=STUDIES, help="案例 (divcon 或 gametree)")
    case.add_argument('--p-sweep', required=True, help="参数 p 的扫描，a:b:step 或逗号分隔列表")
    case.add_argument('--variant', action='append', choices=VARIANTS, help="博弈树程序，可重复，缺省为全部")
    case.add_argument('--n-max', type=int, default=10, help="分治积分的最大振荡等级")
    case.add_argument('--max-k', type=int, help="时间分布截断点，缺省 gametree 300、divcon 400")
    case.add_argument('--models-dir', help="把生成的模型写入此目录")
    return parser


def _convergence(metadata: dict) -> Convergence:
    return Convergence(**metadata)


def _require_state(model: PsjsModel, state: Optional[str]) -> str:
    if state is None:
        raise UsageError("期望时间需要用 --to 指定条件终止状态")
    if state not in model.sync_set:
        raise AnalysisError(f"条件状态 {state} 不是模型的同步状态")
    return state


class CommandRunner:
    """执行一个子命令，返回报告和可选的 CSV 内容"""

    def __init__(self, analyzer: PsjsAnalyzer, args: argparse.Namespace):
        self.analyzer = analyzer
        self.args = args
        self.csv: Optional[str] = None
        self.unconverged = False

    def run(self) -> Report:
        handler = getattr(self, f"cmd_{self.args.command}")
        return handler()

    def _model_and_start(self):
        model = self.analyzer.load(self.args.model)
        return model, self.analyzer.resolve_symbol(model, self.args.start)

    def cmd_validate(self) -> Report:
        try:
            model = self.analyzer.load(self.args.model)
        except ModelSyntaxError as e:
            items = [DiagnosticItem(code='syntax', message=e.message, subject=f"{e.line}:{e.column}")]
            return ValidateReport(model=self.args.model, valid=False, diagnostics=items)
        except ModelValidationError as e:
            items = [DiagnosticItem(code=d.code, message=d.message, subject=d.subject) for d in e.diagnostics]
            return ValidateReport(model=self.args.model, valid=False, diagnostics=items)
        return ValidateReport(model=self.args.model, valid=True, summary=model.summary())

    def cmd_term(self) -> Report:
        model = self.analyzer.load(self.args.model)
        terms = self.analyzer.termination(model)
        self.unconverged = not terms.converged
        if self.args.start is not None:
            start = self.analyzer.resolve_symbol(model, self.args.start)
            values = {str(start): terms.row(start)}
        else:
            start = None
            values = terms.as_dict()
        states = list(model.sync_states)
        self.csv = render_csv(('sigma', 'q', 'value'),
                              [(sigma, q, row[q]) for sigma, row in values.items() for q in states])
        return TermReport(model=self.args.model, start=str(start) if start else None, states=states,
                          values=values, convergence=_convergence(terms.metadata()))

    def cmd_space(self) -> Report:
        model, start = self._model_and_start()
        result = self.analyzer.space(model, start)
        self.unconverged = not result.convergence.get('converged', True)
        return SpaceReport(model=self.args.model, symbol=str(start), p_finite=result.p_finite,
                           p_terminate=result.p_terminate, p_bounded_nonterm=result.p_bounded_nonterm,
                           bar_state=result.bar_state, convergence=_convergence(result.convergence))

    def cmd_dist(self) -> Report:
        model, start = self._model_and_start()
        pmf = self.analyzer.distribution(model, start, self.args.state, self.args.kind, self.args.max_k)
        self.unconverged = not pmf.convergence.get('converged', True)
        self.csv = render_csv(('k', 'mass', 'cdf', 'tail'), pmf.rows())
        return DistReport(model=self.args.model, symbol=str(start), state=self.args.state, measure=self.args.kind,
                          K=pmf.K, cond_prob=pmf.cond_prob, mass=[float(m) for m in pmf.mass], tail=pmf.tail,
                          convergence=_convergence(pmf.convergence))

    def cmd_expect(self) -> Report:
        model, start = self._model_and_start()
        if self.args.kind == 'time':
            state = _require_state(model, self.args.state)
            pmf = self.analyzer.distribution(model, start, state, 'time', self.args.max_k)
            tail = tail_expectation(pmf)
            self.unconverged = not (tail.converged and pmf.convergence.get('converged', True))
            if not tail.converged:
                logger.warning(f"截断点 K={tail.K} 处末项 {tail.last_term:.3e}，期望时间只是下界")
            return ExpectReport(model=self.args.model, symbol=str(start), measure='time', state=state,
                                value=finite_or_label(tail.value), finite=True, lower_bound=True,
                                converged=tail.converged,
                                detail={'K': tail.K, 'last_term': tail.last_term, 'cond_prob': pmf.cond_prob},
                                convergence=_convergence(pmf.convergence))

        result = self.analyzer.expected_work(model, start, self.args.state)
        if self.args.state is not None:
            return ExpectReport(model=self.args.model, symbol=str(start), measure='work', state=self.args.state,
                                value=finite_or_label(result.value), finite=result.finite, detail=result.to_dict())
        self.unconverged = not result.convergence.get('converged', True)
        return ExpectReport(model=self.args.model, symbol=str(start), measure='work',
                            value=finite_or_label(result.value), finite=result.finite,
                            detail={'verdict': result.verdict, 'termination': result.termination,
                                    'reason': result.reason},
                            convergence=_convergence(result.convergence) if result.convergence else None)

    def cmd_finite(self) -> Report:
        model, start = self._model_and_start()
        verdict = self.analyzer.finiteness(model, start)
        self.unconverged = not verdict.detail.convergence.get('converged', True)
        return FiniteReport(model=self.args.model, symbol=str(start), work=verdict.work, time=verdict.time,
                            termination=verdict.detail.termination, reason=verdict.detail.reason,
                            detail=verdict.detail.to_dict())

    def cmd_simulate(self) -> Report:
        model, start = self._model_and_start()
        config = self.analyzer.config
        max_steps = self.args.max_steps or config.max_steps
        max_space = self.args.max_space or config.max_space
        seed = config.seed if self.args.seed is None else self.args.seed
        report = self.analyzer.simulate(model, start, self.args.runs, max_steps, max_space, seed,
                                        self.args.threads, progress=sys.stderr.isatty())
        return SimulateReport(model=self.args.model, symbol=str(start), n_runs=report.n_runs, seed=seed,
                              max_steps=max_steps, max_space=max_space, result=report.to_dict())

    def cmd_serialise(self) -> Report:
        model = self.analyzer.load(self.args.model)
        ppds, mapping = self.analyzer.serialise(model)
        return SerialiseReport(model=self.args.model, ppds=render_ppds(ppds), mapping=mapping.to_dict(),
                               control_states=len(ppds.control_states), stack_symbols=len(ppds.stack_alphabet),
                               rules=len(ppds.rules))

    def cmd_normalise(self) -> Report:
        model = self.analyzer.load(self.args.model)
        normalised, check = self.analyzer.normalise(model, force=self.args.force)
        return NormaliseReport(model=self.args.model, changed=check is not None, check_state=check,
                               text=render_model(normalised))

    def cmd_casestudy(self) -> Report:
        try:
            sweep = parse_sweep(self.args.p_sweep)
        except (ValueError, ZeroDivisionError) as e:
            raise UsageError(f"--p-sweep 无效: {e}")
        table = self.analyzer.case_study(self.args.study, sweep, self.args.variant, self.args.n_max,
                                         self.args.max_k, self.args.threads, progress=sys.stderr.isatty())
        if self.args.models_dir:
            target = Path(self.args.models_dir)
            target.mkdir(parents=True, exist_ok=True)
            for name, model in sorted(table.models.items()):
                (target / f"{name}.psjs").write_text(render_model(model), encoding='utf-8')
            logger.info(f"已写出 {len(table.models)} 个模型到 {target}")
        self.csv = render_csv(table.columns, table.csv_rows())
        rows = []
        for values in table.csv_rows():
            rows.append({column: finite_or_label(v) if isinstance(v, float) else v
                         for column, v in zip(table.columns, values)})
        return CaseStudyReport(model=table.study, study=table.study, K=table.K, columns=list(table.columns),
                               rows=rows)


def emit(report: Report, args: argparse.Namespace, runner: CommandRunner) -> None:
    if args.format == 'json':
        text = render_json(report)
    elif args.format == 'csv':
        if runner.csv is None:
            raise UsageError(f"子命令 {args.command} 不支持 CSV 输出")
        text = runner.csv
    else:
        text = ReportRenderer().render(report)
    if args.output:
        Path(args.output).write_text(text, encoding='utf-8')
        logger.info(f"结果已写入 {args.output}")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def main(argv: Optional[List[str]] = None) -> int:
    """
    主函数，处理命令行参数

    返回:
    - int: 退出码，0 成功，1 用法或分析错误，2 模型或变换错误，3 严格模式下未收敛
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    config = load_analysis_config()
    configure_logging(args.debug, config.log_level, args.log_file)
    if args.tol is not None:
        if args.tol <= 0:
            parser.error("--tol 必须为正数")
        config.tolerance = args.tol
    if args.threads is not None:
        if args.threads < 1:
            parser.error("--threads 必须至少为 1")
        config.threads = args.threads
    if args.seed is not None:
        config.seed = args.seed

    try:
        analyzer = create_analyzer(config, method=args.method, strict=args.strict)
        runner = CommandRunner(analyzer, args)
        report = runner.run()
        emit(report, args, runner)
        if args.command == 'validate' and not report.valid:
            return EXIT_MODEL
        if args.strict and runner.unconverged:
            logger.error("严格模式: 计算未收敛")
            return EXIT_UNCONVERGED
        return EXIT_OK
    except KeyboardInterrupt:
        logger.info("操作被用户中断")
        return EXIT_USAGE
    except (ModelError, TransformError) as e:
        logger.error(str(e))
        return EXIT_MODEL
    except (ConvergenceError, SolverError) as e:
        logger.error(f"求解失败: {str(e)}")
        return EXIT_UNCONVERGED
    except UsageError as e:
        logger.error(str(e))
        return EXIT_USAGE
    except (AnalysisError, ReportError, ValueError) as e:
        logger.error(f"分析失败: {str(e)}")
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"文件读写失败: {str(e)}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
