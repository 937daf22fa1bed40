#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
命令行测试: 测试 psjs 各子命令的输出格式与退出码
"""

import os
import sys
import io
import json
import logging
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest import mock

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

import psjs
from analysis.model import Symbol
from analysis.casestudies import EX1_TEXT, ex1
from analysis.solvers import solve_termination

DOUBLER_TEXT = """\
states: q
start: X
X -> <X X> : 1/4
X -> q : 3/4
<q q> -> q : 1
"""

BROKEN_TEXT = """\
states: q
X -> q : 1/5
X -> X : 1/5
"""


class CliTest(unittest.TestCase):
    """测试命令行入口"""

    def setUp(self):
        """测试前准备工作：写出模型文件并清除相关环境变量"""
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.ex1 = self.write("ex1.psjs", EX1_TEXT)
        self.doubler = self.write("doubler.psjs", DOUBLER_TEXT)
        self.broken = self.write("broken.psjs", BROKEN_TEXT)

        patcher = mock.patch.dict(os.environ, {}, clear=False)
        patcher.start()
        self.addCleanup(patcher.stop)
        for name in list(os.environ):
            if name.startswith("PSJS_") or name == "LOG_LEVEL":
                os.environ.pop(name)

    def write(self, name, text):
        path = self.dir / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    def run_cli(self, *argv):
        """执行命令行，返回 (退出码, 标准输出)"""
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = psjs.main(list(argv) + ["--log-file", ""])
        return code, out.getvalue()

    def run_json(self, *argv):
        code, text = self.run_cli(*argv, "--format", "json")
        return code, json.loads(text)

    def test_validate(self):
        code, doc = self.run_json("validate", self.ex1)
        self.assertEqual(code, psjs.EXIT_OK)
        self.assertEqual(doc["schema_version"], "1.0")
        self.assertTrue(doc["valid"])

        code, doc = self.run_json("validate", self.broken)
        self.assertEqual(code, psjs.EXIT_MODEL)
        self.assertFalse(doc["valid"])
        self.assertEqual([d["code"] for d in doc["diagnostics"]], ["prob-sum"])

    def test_term_json(self):
        code, doc = self.run_json("term", self.ex1, "--from", "X")
        self.assertEqual(code, psjs.EXIT_OK)
        expected = solve_termination(ex1())
        for q in ("q", "r"):
            self.assertAlmostEqual(doc["values"]["X"][q], expected.value(Symbol.basic("X"), q), places=10)
        self.assertTrue(doc["convergence"]["converged"])
        self.assertEqual(doc["convergence"]["method"], "newton")

    def test_term_csv_and_table(self):
        code, text = self.run_cli("term", self.ex1, "--format", "csv", "--method", "kleene")
        self.assertEqual(code, psjs.EXIT_OK)
        lines = text.splitlines()
        self.assertEqual(lines[0], "sigma,q,value")
        self.assertTrue(any(line.startswith("X,q,") for line in lines))

        code, text = self.run_cli("term", self.ex1)
        self.assertEqual(code, psjs.EXIT_OK)
        self.assertIn("终止概率", text)

    def test_model_errors(self):
        """模型无效时退出码为 2"""
        code, _ = self.run_cli("term", self.broken)
        self.assertEqual(code, psjs.EXIT_MODEL)
        code, _ = self.run_cli("serialise", self.write("bp.psjs", "flags: branching\nstates: b\nX -> b : 1\n"))
        self.assertEqual(code, psjs.EXIT_MODEL)

    def test_usage_errors(self):
        """参数错误时退出码为 1"""
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                psjs.main(["dist", self.ex1])
        self.assertEqual(ctx.exception.code, psjs.EXIT_USAGE)

        code, _ = self.run_cli("space", self.ex1, "--format", "csv")
        self.assertEqual(code, psjs.EXIT_USAGE)
        code, _ = self.run_cli("term", self.ex1, "--from", "Nope")
        self.assertEqual(code, psjs.EXIT_USAGE)
        code, _ = self.run_cli("term", str(self.dir / "missing.psjs"))
        self.assertEqual(code, psjs.EXIT_USAGE)

    def test_strict_unconverged(self):
        """严格模式下迭代预算不足时退出码为 3"""
        os.environ["PSJS_KLEENE_MAX_ITER"] = "1"
        code, _ = self.run_cli("term", self.ex1, "--method", "kleene", "--strict")
        self.assertEqual(code, psjs.EXIT_UNCONVERGED)
        code, _ = self.run_cli("term", self.ex1, "--method", "kleene")
        self.assertEqual(code, psjs.EXIT_OK)

    def test_expect_work(self):
        code, doc = self.run_json("expect", self.doubler, "--kind", "work")
        self.assertEqual(code, psjs.EXIT_OK)
        self.assertAlmostEqual(doc["value"], 2.5, places=7)
        self.assertTrue(doc["finite"])

        code, doc = self.run_json("expect", self.ex1, "--kind", "work")
        self.assertEqual(code, psjs.EXIT_OK)
        self.assertEqual(doc["value"], "Infinite")

    def test_expect_time_requires_state(self):
        code, _ = self.run_cli("expect", self.doubler, "--kind", "time")
        self.assertEqual(code, psjs.EXIT_USAGE)
        code, doc = self.run_json("expect", self.doubler, "--kind", "time", "--to", "q", "--max-k", "500")
        self.assertEqual(code, psjs.EXIT_OK)
        self.assertTrue(doc["lower_bound"])
        self.assertTrue(doc["converged"])

    def test_dist(self):
        code, text = self.run_cli("dist", self.ex1, "--to", "q", "--max-k", "20", "--format", "csv")
        self.assertEqual(code, psjs.EXIT_OK)
        lines = text.splitlines()
        self.assertEqual(lines[0], "k,mass,cdf,tail")
        self.assertEqual(len(lines), 22)
        k, mass = lines[2].split(",")[:2]
        self.assertEqual(k, "1")
        self.assertAlmostEqual(float(mass), 0.3, places=12)

    def test_finite_and_space(self):
        code, doc = self.run_json("finite", self.doubler)
        self.assertEqual(code, psjs.EXIT_OK)
        self.assertEqual((doc["work"], doc["time"]), ("Finite", "Finite"))

        code, doc = self.run_json("space", self.doubler)
        self.assertEqual(code, psjs.EXIT_OK)
        self.assertAlmostEqual(doc["p_finite"], 1.0, places=8)

    def test_simulate_is_deterministic(self):
        """相同种子输出逐字节相同"""
        first = self.run_cli("simulate", self.doubler, "--runs", "300", "--seed", "7", "--format", "json")
        second = self.run_cli("simulate", self.doubler, "--runs", "300", "--seed", "7", "--format", "json")
        self.assertEqual(first[0], psjs.EXIT_OK)
        self.assertEqual(first[1], second[1])
        self.assertEqual(json.loads(first[1])["result"]["n_runs"], 300)

    def test_normalise_and_serialise(self):
        code, doc = self.run_json("normalise", self.ex1)
        self.assertEqual(code, psjs.EXIT_OK)
        self.assertTrue(doc["changed"])
        self.assertIn("flags: normalised", doc["text"])

        code, doc = self.run_json("serialise", self.ex1)
        self.assertEqual(code, psjs.EXIT_OK)
        self.assertEqual(doc["control_states"], 3)

    def test_casestudy_csv(self):
        models_dir = self.dir / "models"
        output = self.dir / "seq.csv"
        code, _ = self.run_cli("casestudy", "gametree", "--p-sweep", "0.1", "--variant", "seq",
                               "--format", "csv", "--output", str(output), "--models-dir", str(models_dir))
        self.assertEqual(code, psjs.EXIT_OK)
        lines = output.read_text(encoding="utf-8").splitlines()
        self.assertEqual(lines[0], "variant,p,EW,ET_lb,ET_converged,pct_vs_seq,pct_work_vs_seq")
        self.assertEqual(len(lines), 2)
        self.assertTrue(lines[1].startswith("seq,0.1,"))
        self.assertEqual(len(list(models_dir.glob("*.psjs"))), 1)

        code, _ = self.run_cli("casestudy", "divcon", "--p-sweep", "0:1", "--n-max", "2")
        self.assertEqual(code, psjs.EXIT_USAGE)


if __name__ == '__main__':
    unittest.main()
