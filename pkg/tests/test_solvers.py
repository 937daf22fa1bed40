#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
求解器测试: 测试终止概率方程组、Kleene 迭代、牛顿法与零集
"""

import os
import sys
import logging
import unittest
from fractions import Fraction
from unittest import mock

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

from analysis.errors import ConvergenceError, SolverError
from analysis.model import Symbol, parse_model
from analysis.casestudies import (
    VARIANTS,
    DivConParams,
    GameTreeParams,
    doubler,
    doubler_psjs,
    ex1,
    gen_divcon,
    gen_gametree,
    random_model,
)
from analysis.perf import spectral_radius_estimate
from analysis.settings import AnalysisSettings
from analysis.solvers import (
    SOLVERS,
    KleeneSolver,
    NewtonSolver,
    build_equation_system,
    kleene_solve,
    newton_solve,
    positive_states,
    solve_termination,
    zero_set,
)

X = Symbol.basic("X")

# 雅可比谱半径距 1 不超过该值的模型视为临界，Kleene 迭代只能次线性收敛
CRITICAL_BAND = 1e-3


def corpus_models():
    """交叉验证用的模型集合: (名字, 模型, 是否可以构建不剪枝的方程组)"""
    models = [("ex1", ex1(), True)]
    for p in (Fraction(1, 4), Fraction(2, 5), Fraction(2, 3)):
        models.append((f"doubler-{p}", doubler(p), True))
        models.append((f"doubler-psjs-{p}", doubler_psjs(p), True))
    for p in (Fraction(1, 2), Fraction(4, 5)):
        models.append((f"divcon-{p}", gen_divcon(DivConParams(p, 10)), True))
    for variant in VARIANTS:
        models.append((f"gametree-{variant}", gen_gametree(GameTreeParams(variant, Fraction(1, 5))), False))
    for seed in range(20):
        models.append((f"random-{seed}", random_model(seed), True))
    return models


class EquationSystemTest(unittest.TestCase):
    """测试方程组构建"""

    def setUp(self):
        """测试前准备工作"""
        self.model = ex1()
        self.system = build_equation_system(self.model)

    def test_ex1_equations(self):
        """a = 0.5·a²·b + 0.3，b = 0.5·a·b² + 0.2"""
        system = self.system
        a = system.variable(X, "q")
        b = system.variable(X, "r")
        self.assertIsNotNone(a)
        self.assertIsNotNone(b)
        values = [0.0] * system.size
        values[a], values[b] = 0.4, 0.7
        for i, (sigma, q) in enumerate(system.variables):
            if sigma.is_join:
                values[i] = 0.4 if q == "q" else 0.7
        fx = system.evaluate(values)
        self.assertAlmostEqual(fx[a], 0.5 * 0.4 ** 2 * 0.7 + 0.3)
        self.assertAlmostEqual(fx[b], 0.5 * 0.4 * 0.7 ** 2 + 0.2)

    def test_constants(self):
        """同步状态的值是常量，冻结汇合的值为 0"""
        system = self.system
        self.assertEqual(system.constant(Symbol.sync("q"), "q"), 1.0)
        self.assertEqual(system.constant(Symbol.sync("q"), "r"), 0.0)
        self.assertEqual(system.constant(Symbol.join("r", "q"), "q"), 0.0)
        self.assertIsNone(system.constant(X, "q"))

    def test_positive_states(self):
        positive = positive_states(self.model)
        self.assertEqual(positive[X], frozenset({"q", "r"}))

    def test_pruning(self):
        """布尔预分析去掉恒为零的变量"""
        model = parse_model("states: q r\nX -> q : 1\n")
        self.assertEqual(build_equation_system(model).size, 1)
        self.assertEqual(build_equation_system(model, prune=False).size, 2)

    def test_describe(self):
        lines = self.system.describe()
        self.assertEqual(len(lines), self.system.size)


class ZeroSetTest(unittest.TestCase):
    """测试精确零集"""

    def setUp(self):
        """测试前准备工作"""
        self.model = parse_model(
            "states: q\n"
            "A -> <B C> : 1\n"
            "B -> q : 1\n"
            "C -> C : 1\n"
            "<q q> -> q : 1\n"
        )

    def test_nonterminating_child(self):
        """子进程永不终止时父进程的终止概率为 0"""
        zeros = zero_set(build_equation_system(self.model, prune=False))
        self.assertIn((Symbol.basic("A"), "q"), zeros)
        self.assertIn((Symbol.basic("C"), "q"), zeros)
        self.assertNotIn((Symbol.basic("B"), "q"), zeros)

    def test_zero_set_agrees_with_solvers(self):
        zeros = zero_set(build_equation_system(ex1()))
        terms = solve_termination(ex1())
        for sigma, q in build_equation_system(ex1()).pairs():
            with self.subTest(sigma=str(sigma), q=q):
                if (sigma, q) in zeros:
                    self.assertEqual(terms.value(sigma, q), 0.0)
                else:
                    self.assertGreater(terms.value(sigma, q), 0.0)


class SolverTest(unittest.TestCase):
    """测试 Kleene 迭代与牛顿法"""

    def setUp(self):
        """测试前准备工作"""
        self.ex1_system = build_equation_system(ex1())

    def test_doubler_roots(self):
        """x = p·x² + (1−p) 的最小非负根"""
        cases = [(Fraction(2, 3), 0.5), (Fraction(1, 4), 1.0), (Fraction(1, 10), 1.0)]
        for p, expected in cases:
            system = build_equation_system(doubler(p))
            for solve in (kleene_solve, newton_solve):
                with self.subTest(p=str(p), solver=solve.__name__):
                    terms = solve(system, tol=1e-13)
                    self.assertTrue(terms.converged)
                    self.assertAlmostEqual(terms.value(X, "⊥"), expected, places=9)

    def test_methods_agree_on_ex1(self):
        kleene = kleene_solve(self.ex1_system, tol=1e-14)
        newton = newton_solve(self.ex1_system, tol=1e-14)
        for q in ("q", "r"):
            self.assertAlmostEqual(kleene.value(X, q), newton.value(X, q), places=10)
        self.assertTrue(kleene.monotone)
        self.assertLessEqual(newton.iterations, kleene.iterations)

    def test_ex1_fixed_point(self):
        """解满足方程组"""
        terms = newton_solve(self.ex1_system)
        a, b = terms.value(X, "q"), terms.value(X, "r")
        self.assertAlmostEqual(a, 0.5 * a * a * b + 0.3, places=10)
        self.assertAlmostEqual(b, 0.5 * a * b * b + 0.2, places=10)
        self.assertLessEqual(terms.termination_probability(X), 1.0)

    def test_linear_system_newton(self):
        """线性方程组上牛顿法一步即可收敛"""
        model = parse_model("states: q\nX -> Y : 1/2\nX -> q : 1/2\nY -> X : 1/2\nY -> q : 1/2\n")
        terms = newton_solve(build_equation_system(model))
        self.assertAlmostEqual(terms.value(X, "q"), 1.0, places=12)
        self.assertLessEqual(terms.iterations, 3)

    def test_strict_mode(self):
        """严格模式下迭代预算用尽抛出 ConvergenceError"""
        with self.assertRaises(ConvergenceError):
            KleeneSolver(max_iter=1, strict=True).solve(self.ex1_system)
        terms = KleeneSolver(max_iter=1).solve(self.ex1_system)
        self.assertFalse(terms.converged)
        self.assertEqual(terms.metadata()["iterations"], 1)

    def test_invalid_parameters(self):
        with self.assertRaises(ValueError):
            NewtonSolver(tol=0)
        with self.assertRaises(ValueError):
            solve_termination(ex1(), method="bisection")

    def test_registry_and_settings(self):
        self.assertEqual(set(SOLVERS), {"kleene", "newton"})
        settings = AnalysisSettings(method="kleene", tol=1e-13)
        terms = settings.solve(ex1())
        self.assertEqual(terms.method, "kleene")
        self.assertAlmostEqual(terms.value(X, "q"), solve_termination(ex1()).value(X, "q"), places=9)


class CrossValidationTest(unittest.TestCase):
    """Kleene 迭代、牛顿法与零集在整个模型集合上的一致性"""

    def setUp(self):
        """测试前准备工作"""
        self.models = corpus_models()

    def solve_pair(self, system):
        """返回 (kleene, newton, 误差上界)；临界模型上 Kleene 只给出近似值"""
        newton = newton_solve(system, tol=1e-13)
        rho = spectral_radius_estimate(system.jacobian(newton.values)) if system.size else 0.0
        if rho < 1.0 - CRITICAL_BAND:
            return kleene_solve(system, tol=1e-14, strict=True), newton, 1e-10
        logger.info(f"临界方程组 (ρ≈{rho:.12f})，Kleene 迭代限制为 100000 次")
        return kleene_solve(system, tol=1e-14, max_iter=100_000), newton, 1e-3

    def test_methods_agree(self):
        for name, model, _ in self.models:
            with self.subTest(model=name):
                system = build_equation_system(model)
                kleene, newton, bound = self.solve_pair(system)
                self.assertTrue(kleene.monotone)
                gap = float(np.max(np.abs(kleene.values - newton.values), initial=0.0))
                self.assertLessEqual(gap, bound)
                # Kleene 从下方逼近最小不动点
                self.assertTrue(np.all(kleene.values <= newton.values + 1e-10))

    def test_zero_set_matches_kleene(self):
        """(σ, q) 在零集中当且仅当 Kleene 分量恰为 0"""
        for name, model, full in self.models:
            with self.subTest(model=name):
                system = build_equation_system(model, prune=not full)
                zeros = zero_set(system)
                kleene = kleene_solve(system, tol=1e-14, max_iter=5000)
                for sigma, q in system.pairs():
                    self.assertEqual(kleene.value(sigma, q) == 0.0, (sigma, q) in zeros,
                                     f"{name}: ({sigma}, {q})")

    def test_pruned_zero_set_is_the_same(self):
        for name, model, full in self.models:
            if full:
                with self.subTest(model=name):
                    self.assertEqual(zero_set(build_equation_system(model)),
                                     zero_set(build_equation_system(model, prune=False)))

    def test_strict_kleene_rejects_decrease(self):
        """严格模式下任何一次迭代出现下降都抛出 SolverError"""
        system = build_equation_system(parse_model("states: q\nX -> q : 1\n"))
        values = [np.array([0.5]), np.array([0.2]), np.array([0.2])]
        with mock.patch.object(system, "evaluate", side_effect=list(values)):
            with self.assertRaises(SolverError):
                kleene_solve(system, strict=True)
        with mock.patch.object(system, "evaluate", side_effect=list(values)):
            terms = kleene_solve(system)
        self.assertFalse(terms.monotone)
        self.assertTrue(terms.converged)


if __name__ == '__main__':
    unittest.main()
