#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
案例研究测试: 测试分治积分与博弈树求值模型的生成和参数扫描
"""

import os
import sys
import logging
import math
import unittest
from fractions import Fraction

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

from analysis.model import Symbol, validate
from analysis.casestudies import (
    CONDITION_STATE,
    VARIANTS,
    DivConParams,
    GameTreeParams,
    gen_divcon,
    gen_gametree,
    leaf_weights,
    ominus,
    oplus,
    parse_sweep,
    run_case_study,
    split_weight,
)
from analysis.perf import FINITE, INFINITE, expected_work_psjs, finiteness
from analysis.semantics import estimate
from analysis.solvers import solve_termination

# 顺序程序的条件期望工作量，p = 0, 0.05, ..., 0.3
SEQ_WORK = [1.00, 1.43, 1.96, 2.63, 3.50, 4.68, 6.33]


class SweepParseTest(unittest.TestCase):
    """测试参数扫描解析"""

    def test_range(self):
        values = parse_sweep("0:0.3:0.05")
        self.assertEqual(len(values), 7)
        self.assertEqual(values[1], Fraction(1, 20))
        self.assertEqual(values[-1], Fraction(3, 10))

    def test_list(self):
        self.assertEqual(parse_sweep("0.1, 1/5,0.3"), [Fraction(1, 10), Fraction(1, 5), Fraction(3, 10)])

    def test_invalid(self):
        for text in ("0:1", "0:1:0", "", "a,b"):
            with self.subTest(text=text):
                with self.assertRaises(ValueError):
                    parse_sweep(text)


class DivConModelTest(unittest.TestCase):
    """测试分治积分模型"""

    def setUp(self):
        """测试前准备工作"""
        self.params = DivConParams(Fraction(4, 5), 4)

    def test_split_weights_sum_to_one(self):
        for n in range(1, 6):
            total = sum(split_weight(Fraction(4, 5), n, n1, n2) for n1 in range(n + 1) for n2 in range(n - n1 + 1))
            self.assertEqual(total, 1)

    def test_model_shape(self):
        model = gen_divcon(self.params)
        self.assertEqual(validate(model), [])
        self.assertEqual(model.sync_states, ("q",))
        self.assertEqual(model.start, Symbol.basic("4"))
        self.assertEqual(len(model.rules_for(Symbol.basic("0"))), 1)
        # 等级 n 有 (n+1)(n+2)/2 条分裂规则
        self.assertEqual(len(model.rules_for(Symbol.basic("3"))), 10)

    def test_terminates_almost_surely(self):
        terms = solve_termination(gen_divcon(self.params))
        self.assertAlmostEqual(terms.value(Symbol.basic("4"), "q"), 1.0, places=9)

    def test_invalid_params(self):
        with self.assertRaises(ValueError):
            DivConParams(1, 3)
        with self.assertRaises(ValueError):
            DivConParams(Fraction(1, 2), -1)

    def test_ratio_grows_with_level(self):
        """p = 0.8 时 E W_n、E T_n 与二者之比都随 n 严格增大"""
        table = run_case_study("divcon", [Fraction(4, 5)], n_max=10)
        self.assertEqual([row.n for row in table.rows], list(range(1, 11)))
        work = [row.measures.work for row in table.rows]
        time = [row.measures.time_lb for row in table.rows]
        ratio = [row.measures.ratio for row in table.rows]
        for values in (work, time, ratio):
            self.assertTrue(all(a < b for a, b in zip(values, values[1:])), values)
        self.assertTrue(all(row.measures.time_converged for row in table.rows))
        self.assertEqual(len(table.csv_rows()[0]), len(table.columns))


class GameTreeModelTest(unittest.TestCase):
    """测试博弈树模型的生成"""

    def test_saturating_arithmetic(self):
        self.assertEqual(oplus(3, 3), 4)
        self.assertEqual(oplus(1, 2), 3)
        self.assertEqual(ominus(1, 3), 0)
        self.assertEqual(ominus(4, 1), 3)

    def test_leaf_weights(self):
        weights = leaf_weights(Fraction(1, 5), 2)
        self.assertEqual(sum(weights), Fraction(4, 5))
        self.assertEqual(weights[1] / weights[0], 4)
        self.assertEqual((weights[1] * 6) / (weights[2] * 4), 1)
        self.assertEqual(weights[3], weights[1])

    def test_models_are_valid(self):
        for variant in VARIANTS:
            for p in (Fraction(0), Fraction(1, 10), Fraction(3, 10)):
                with self.subTest(variant=variant, p=str(p)):
                    params = GameTreeParams(variant, p)
                    model = gen_gametree(params)
                    self.assertEqual(validate(model), [])
                    self.assertEqual(model.start, params.root)
                    self.assertIn(CONDITION_STATE, model.sync_states)

    def test_result_distribution(self):
        """根节点以概率 1 终止，且只终止于取值状态"""
        model = gen_gametree(GameTreeParams("ybw", Fraction(1, 5)))
        terms = solve_termination(model)
        row = terms.row(GameTreeParams("ybw", Fraction(1, 5)).root)
        self.assertAlmostEqual(sum(row.values()), 1.0, places=8)
        values = {str(v) for v in range(5)}
        for q, value in row.items():
            if q not in values:
                self.assertAlmostEqual(value, 0.0, places=12)
        self.assertGreater(row[CONDITION_STATE], 0.0)

    def test_invalid_params(self):
        with self.assertRaises(ValueError):
            GameTreeParams("dfs", Fraction(1, 10))
        with self.assertRaises(ValueError):
            GameTreeParams("seq", 1)


class GameTreeSweepTest(unittest.TestCase):
    """测试博弈树参数扫描"""

    @classmethod
    def setUpClass(cls):
        """三个程序在 p = 0.1, 0.2, 0.3 上的扫描只计算一次"""
        cls.table = run_case_study("gametree", parse_sweep("0.1,0.2,0.3"), variants=["ybw", "seq"])

    def rows(self, variant):
        return {row.p: row for row in self.table.rows if row.variant == variant}

    def test_seq_work_row(self):
        table = run_case_study("gametree", parse_sweep("0:0.3:0.05"), variants=["seq"])
        work = [row.measures.work for row in table.rows]
        self.assertEqual(len(work), len(SEQ_WORK))
        for value, expected in zip(work, SEQ_WORK):
            self.assertAlmostEqual(value, expected, delta=0.006)
        self.assertTrue(all(row.pct_vs_seq == 0.0 for row in table.rows))

    def test_ybw_is_not_slower(self):
        ybw, seq = self.rows("ybw"), self.rows("seq")
        for p, row in ybw.items():
            with self.subTest(p=str(p)):
                self.assertLessEqual(row.measures.time_lb, seq[p].measures.time_lb + 1e-9)
                self.assertLessEqual(row.pct_vs_seq, 1e-9)

    def test_ybw_work_overhead(self):
        """ybw 相对 seq 多做的工作不超过 0.5%"""
        for p, row in self.rows("ybw").items():
            with self.subTest(p=str(p)):
                self.assertGreaterEqual(row.pct_work_vs_seq, -1e-9)
                self.assertLessEqual(row.pct_work_vs_seq, 0.5)

    def test_rows_keep_order(self):
        self.assertEqual([row.variant for row in self.table.rows], ["ybw"] * 3 + ["seq"] * 3)
        self.assertEqual([row.p for row in self.table.rows[:3]], [Fraction(1, 10), Fraction(1, 5), Fraction(3, 10)])

    def test_par_diverges_at_one_third(self):
        """p = 1/3 时并行程序的期望工作量无穷，顺序程序有限"""
        par = GameTreeParams("par", Fraction(1, 3))
        seq = GameTreeParams("seq", Fraction(1, 3))
        par_verdict = finiteness(gen_gametree(par), par.root)
        seq_verdict = finiteness(gen_gametree(seq), seq.root)
        self.assertEqual((par_verdict.work, par_verdict.time), (INFINITE, INFINITE))
        self.assertEqual((seq_verdict.work, seq_verdict.time), (FINITE, FINITE))

    def test_unknown_study(self):
        with self.assertRaises(ValueError):
            run_case_study("matrix", [Fraction(1, 2)])
        with self.assertRaises(ValueError):
            run_case_study("gametree", [Fraction(1, 10)], variants=["dfs"])

    def test_models_keep_sweep_order(self):
        expected = [f"gametree-{variant}-{p}" for variant in ("ybw", "seq") for p in ("0.1", "0.2", "0.3")]
        self.assertEqual(list(self.table.models), expected)

    def test_monte_carlo_agreement(self):
        """p = 0.2 时三个程序的根结果频率与条件均值工作量都与模拟一致"""
        runs = 3000
        for variant in VARIANTS:
            with self.subTest(variant=variant):
                params = GameTreeParams(variant, Fraction(1, 5))
                model = gen_gametree(params)
                report = estimate(model, params.root, runs, seed=9)
                terms = solve_termination(model)
                for value in ("0", "1", "2", "3", "4"):
                    count = report.terminated[value]
                    expected = terms.value(params.root, value)
                    se = max(count.se, math.sqrt(expected * (1 - expected) / runs))
                    self.assertLess(abs(count.freq - expected), 4 * se + 0.005)
                stats = report.cond_stats[CONDITION_STATE]["work"]
                work = expected_work_psjs(model, params.root).components[CONDITION_STATE].value
                self.assertFalse(math.isnan(stats.mean))
                self.assertLess(abs(stats.mean - work), 4 * stats.se + 0.02)


if __name__ == '__main__':
    unittest.main()
