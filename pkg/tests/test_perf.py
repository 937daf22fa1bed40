#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
性能度量测试: 测试分支过程期望工作量、次临界判定、空间概率、时间与工作量分布以及有限性判定
"""

import os
import sys
import logging
import math
import unittest
from fractions import Fraction

import numpy as np

# 确保可以导入项目模块
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

# 配置日志
logging.basicConfig(
    level=logging.DEBUG,
    format='%(asctime)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(),
    ]
)
logger = logging.getLogger(__name__)

from analysis.errors import AnalysisError
from analysis.model import ModelFlags, PsjsModel, Rule, Symbol, parse_model
from analysis.casestudies import doubler, doubler_psjs, ex1, random_model, random_walk_ppds, swapped_doubler
from analysis.perf import (
    FINITE,
    INFINITE,
    characteristic_matrix,
    conditional_expected_work,
    expected_time,
    expected_work_bp,
    expected_work_psjs,
    finiteness,
    is_subcritical,
    reduce_bp,
    space_probability,
    spectral_radius_estimate,
    tail_expectation,
    time_distribution,
    work_distribution,
)
from analysis.semantics import estimate
from analysis.settings import DEFAULT_SETTINGS, AnalysisSettings
from analysis.solvers import solve_termination
from analysis.transforms import BOTTOM, conditioned_bp, ensure_normalised, from_ppds

X = Symbol.basic("X")
Y = Symbol.basic("Y")


class BranchingProcessTest(unittest.TestCase):
    """测试特征矩阵、次临界判定与分支过程期望工作量"""

    def setUp(self):
        """测试前准备工作"""
        bottom = Symbol.sync(BOTTOM)
        self.two_symbol = PsjsModel((BOTTOM,), (
            Rule(X, (Y, Y), Fraction(1)),
            Rule(Y, (X,), Fraction(1, 2)),
            Rule(Y, (bottom,), Fraction(1, 2)),
        ), ModelFlags(is_branching_process=True))

    def test_characteristic_matrix(self):
        for p in (Fraction(1, 5), Fraction(1, 2), Fraction(3, 4)):
            char = characteristic_matrix(swapped_doubler(p))
            self.assertEqual(char.exact, [[2 * (1 - p)]])
            self.assertAlmostEqual(char.entry(X, X), float(2 * (1 - p)))

        char = characteristic_matrix(self.two_symbol)
        self.assertEqual(char.exact, [[0, 2], [Fraction(1, 2), 0]])

    def test_is_subcritical(self):
        self.assertTrue(is_subcritical([[Fraction(1, 2)]]))
        self.assertFalse(is_subcritical([[Fraction(1)]]))
        self.assertTrue(is_subcritical(np.array([[0.5]])))
        self.assertFalse(is_subcritical(np.array([[1.5]])))
        self.assertFalse(is_subcritical(characteristic_matrix(self.two_symbol)))

    def test_spectral_radius(self):
        self.assertAlmostEqual(spectral_radius_estimate(np.array([[0.0, 2.0], [0.5, 0.0]])), 1.0, places=9)

    def test_reduce_bp(self):
        """约简去掉从起点不可达的符号"""
        bottom = Symbol.sync(BOTTOM)
        z = Symbol.basic("Z")
        bp = PsjsModel((BOTTOM,), doubler(Fraction(1, 3)).rules + (Rule(z, (bottom,), Fraction(1)),),
                       ModelFlags(is_branching_process=True))
        self.assertEqual(reduce_bp(bp, X).process_symbols, (X,))
        with self.assertRaises(AnalysisError):
            reduce_bp(bp, Symbol.basic("W"))

    def test_doubler_work(self):
        """E W = 1/(1−2p)"""
        for p in (Fraction(1, 10), Fraction(1, 4), Fraction(2, 5), Fraction(49, 100)):
            with self.subTest(p=str(p)):
                result = expected_work_bp(doubler(p), X)
                self.assertTrue(result.finite)
                self.assertAlmostEqual(result.value, 1.0 / (1.0 - 2.0 * float(p)), places=9)

    def test_critical_doubler_is_infinite(self):
        result = expected_work_bp(doubler(Fraction(1, 2)), X)
        self.assertFalse(result.finite)
        self.assertEqual(result.to_dict()["value"], "Infinite")

    def test_single_step(self):
        bp = PsjsModel((BOTTOM,), (Rule(X, (Symbol.sync(BOTTOM),), Fraction(1)),),
                       ModelFlags(is_branching_process=True))
        self.assertEqual(expected_work_bp(bp, X).value, 1.0)


class SpaceTest(unittest.TestCase):
    """测试有限空间概率"""

    def test_random_walk(self):
        """
        随机游走 p ≤ 1/2 时空间几乎必然有限，p > 1/2 时 P(S < ∞) = (1−p)/p

        p = 1/2 是临界点，浮点求解只能精确到约 1e-8，因此只比较判定结果。
        """
        start = Symbol.join("q", "a")
        for tol in (1e-10, 1e-12):
            settings = AnalysisSettings(tol=tol)
            with self.subTest(p=0.3, tol=tol):
                result = space_probability(from_ppds(random_walk_ppds(0.3)), start, settings)
                self.assertLessEqual(abs(result.p_finite - 1.0), 1e-10)
            with self.subTest(p=0.5, tol=tol):
                result = space_probability(from_ppds(random_walk_ppds(0.5)), start, settings)
                self.assertGreater(result.p_finite, 1.0 - 1e-6)
            for p in (0.6, 0.75):
                with self.subTest(p=p, tol=tol):
                    result = space_probability(from_ppds(random_walk_ppds(p)), start, settings)
                    self.assertLess(result.p_finite, 1.0 - 1e-3)
                    self.assertLessEqual(abs(result.p_finite - (1 - p) / p), 1e-10)

    def test_bounded_loop(self):
        """b → b 永不终止但空间为 1"""
        model = parse_model("states: q\nb -> b : 1\n")
        result = space_probability(model, Symbol.basic("b"))
        self.assertAlmostEqual(result.p_finite, 1.0, places=12)
        self.assertAlmostEqual(result.p_terminate, 0.0, places=12)
        self.assertAlmostEqual(result.p_bounded_nonterm, 1.0, places=12)
        self.assertIn("iterations", result.convergence)

    def test_requires_process_symbol(self):
        with self.assertRaises(AnalysisError):
            space_probability(ex1(), Symbol.sync("q"))


class DistributionTest(unittest.TestCase):
    """测试时间与工作量分布"""

    def setUp(self):
        """测试前准备工作"""
        self.model = ex1()

    def test_ex1_first_masses(self):
        pmf = time_distribution(self.model, X, "q", 60)
        self.assertEqual(pmf.K, 60)
        self.assertEqual(pmf.mass[0], 0.0)
        self.assertAlmostEqual(pmf.mass[1], 0.3, places=12)
        self.assertAlmostEqual(pmf.total, pmf.cond_prob, delta=1e-6)
        self.assertLessEqual(pmf.total, pmf.cond_prob + 1e-12)
        self.assertEqual(len(pmf.rows()), 61)

        work = work_distribution(self.model, X, "q", 60)
        self.assertAlmostEqual(work.mass[1], 0.3, places=12)
        self.assertAlmostEqual(work.cond_prob, pmf.cond_prob, places=12)

    def test_unknown_state(self):
        with self.assertRaises(AnalysisError):
            time_distribution(self.model, X, "nope", 10)

    def test_sync_symbol_distribution(self):
        pmf = time_distribution(self.model, Symbol.sync("q"), "q", 5)
        self.assertEqual(pmf.mass[0], 1.0)
        self.assertEqual(pmf.total, 1.0)

    def test_conditioned_work_matches(self):
        """条件工作量分布等于条件分支过程中 ⟨σ q⟩ 的工作量分布"""
        K = 40
        for seed in range(10):
            model, _ = ensure_normalised(random_model(seed))
            terms = DEFAULT_SETTINGS.solve(model)
            cond = conditioned_bp(model, terms)
            for (sigma, q), symbol in cond.symbols.items():
                if sigma != model.start:
                    continue
                original = work_distribution(model, sigma, q, K, terms=terms)
                conditioned = work_distribution(cond.model, symbol, BOTTOM, K)
                with self.subTest(seed=seed, q=q):
                    np.testing.assert_allclose(original.conditional(), conditioned.mass, rtol=0, atol=1e-8)

    def test_conditioned_time_dominates(self):
        """条件时间分布的 CDF 逐点不超过条件分支过程的时间 CDF"""
        K = 40
        for seed in range(10):
            model, _ = ensure_normalised(random_model(seed))
            terms = DEFAULT_SETTINGS.solve(model)
            cond = conditioned_bp(model, terms)
            for (sigma, q), symbol in cond.symbols.items():
                if sigma != model.start:
                    continue
                original = time_distribution(model, sigma, q, K, terms=terms)
                conditioned = time_distribution(cond.model, symbol, BOTTOM, K)
                with self.subTest(seed=seed, q=q):
                    self.assertTrue(np.all(original.cdf() / original.cond_prob <= conditioned.cdf() + 1e-9))


class ExpectationTest(unittest.TestCase):
    """测试期望工作量、期望时间与有限性判定"""

    def test_single_rule(self):
        model = parse_model("states: q\nX -> q : 1\n")
        work = expected_work_psjs(model, X)
        self.assertAlmostEqual(work.value, 1.0, places=12)
        self.assertEqual(work.verdict, FINITE)
        self.assertAlmostEqual(expected_time(model, X, "q", K=10).value, 1.0, places=12)

    def test_doubler_psjs_work(self):
        """每次分裂多一次汇合改写：E W = (1+p)/(1−2p)"""
        model = doubler_psjs(Fraction(1, 4))
        work = expected_work_psjs(model, X)
        self.assertTrue(work.finite)
        self.assertAlmostEqual(work.value, 2.5, places=7)
        self.assertAlmostEqual(conditional_expected_work(model, X, "q").value, 2.5, places=7)
        self.assertEqual(set(work.components), {"q"})

    def test_nonterminating_runs_give_infinite_work(self):
        work = expected_work_psjs(ex1(), X)
        self.assertFalse(work.finite)
        self.assertEqual(work.to_dict()["value"], INFINITE)
        self.assertLess(work.termination, 1.0)
        # 条件期望仍然有限
        self.assertTrue(conditional_expected_work(ex1(), X, "q").finite)

    def test_finiteness(self):
        self.assertEqual(finiteness(doubler_psjs(0.49), X).work, FINITE)
        verdict = finiteness(doubler_psjs(Fraction(1, 2)), X)
        self.assertEqual(verdict.work, INFINITE)
        self.assertEqual(verdict.time, INFINITE)

    def test_tail_expectation(self):
        critical = time_distribution(doubler_psjs(Fraction(1, 2)), X, "q", 200)
        self.assertFalse(tail_expectation(critical).converged)

        pmf = time_distribution(doubler_psjs(Fraction(1, 4)), X, "q", 500)
        result = tail_expectation(pmf)
        self.assertTrue(result.converged)
        self.assertTrue(math.isfinite(result.value))
        with self.assertRaises(AnalysisError):
            tail_expectation(pmf, cond_prob=0.0)

    def test_work_time_ratio_grows(self):
        """分支过程的 E W / E T 随分裂概率严格增大"""
        ratios = []
        for p in (Fraction(3, 10), Fraction(2, 5), Fraction(9, 20), Fraction(12, 25)):
            model = doubler(p)
            work = expected_work_bp(model, X).value
            time = tail_expectation(time_distribution(model, X, BOTTOM, 1500))
            self.assertTrue(time.converged)
            ratios.append(work / time.value)
        self.assertEqual(ratios, sorted(ratios))
        self.assertEqual(len(set(ratios)), len(ratios))

    def test_monte_carlo_agreement(self):
        """条件均值与蒙特卡洛样本均值在统计误差内一致"""
        model = doubler_psjs(Fraction(1, 4))
        report = estimate(model, X, 5000, seed=2)
        stats = report.cond_stats["q"]
        work = expected_work_psjs(model, X).value
        time = tail_expectation(time_distribution(model, X, "q", 500)).value
        self.assertLess(abs(stats["work"].mean - work), 4 * stats["work"].se + 0.01)
        self.assertLess(abs(stats["time"].mean - time), 4 * stats["time"].se + 0.01)


class MonteCarloTest(unittest.TestCase):
    """终止频率与条件平均工作量和解析值在统计误差内一致"""

    RUNS = 4000

    def setUp(self):
        """测试前准备工作"""
        self.runs = self.RUNS

    def assert_frequency(self, report, terms, start, q):
        count = report.terminated[q]
        expected = terms.value(start, q)
        se = max(count.se, math.sqrt(expected * (1 - expected) / self.runs))
        self.assertLess(abs(count.freq - expected), 4 * se + 0.005)

    def assert_mean_work(self, report, q, expected):
        stats = report.cond_stats[q]["work"]
        self.assertLess(abs(stats.mean - expected), 4 * stats.se + 0.02)

    def test_doubler_branching_process(self):
        for p in (Fraction(1, 4), Fraction(2, 5)):
            with self.subTest(p=str(p)):
                model = doubler(p)
                report = estimate(model, X, self.runs, seed=2)
                self.assert_frequency(report, solve_termination(model), X, BOTTOM)
                self.assert_mean_work(report, BOTTOM, expected_work_bp(model, X).value)

    def test_doubler_psjs(self):
        for p in (Fraction(1, 4), Fraction(2, 5)):
            with self.subTest(p=str(p)):
                model = doubler_psjs(p)
                report = estimate(model, X, self.runs, seed=3)
                self.assert_frequency(report, solve_termination(model), X, "q")
                self.assert_mean_work(report, "q", expected_work_psjs(model, X).components["q"].value)

    def test_ex1(self):
        model = ex1()
        report = estimate(model, X, self.runs, max_steps=5000, max_space=5000, seed=4)
        terms = solve_termination(model)
        for q in ("q", "r"):
            with self.subTest(state=q):
                self.assert_frequency(report, terms, X, q)
                self.assert_mean_work(report, q, conditional_expected_work(model, X, q).value)


if __name__ == '__main__':
    unittest.main()
