#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
报告测试: 测试 JSON 文档、CSV 输出与 Jinja2 表格模板的渲染
"""

import os
import sys
import json
import logging
import math
import tempfile
import unittest

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

from reports import (
    SCHEMA_VERSION,
    CaseStudyReport,
    Convergence,
    DiagnosticItem,
    DistReport,
    ExpectReport,
    FiniteReport,
    NormaliseReport,
    ReportError,
    ReportRenderer,
    SerialiseReport,
    SimulateReport,
    SpaceReport,
    TermReport,
    ValidateReport,
    finite_or_label,
    format_number,
    render_csv,
    render_json,
)

CONVERGENCE = Convergence(method="newton", iterations=7, achieved_tol=1e-14, converged=True)


def simulate_result():
    count = {"count": 10, "freq": 0.5, "se": 0.1}
    stat = {"mean": 2.0, "se": 0.2, "quantiles": [1.0, 2.0, 3.0]}
    return {
        "n_runs": 20,
        "seed": 3,
        "terminated": {"q": count},
        "frozen": {"count": 0, "freq": 0.0, "se": 0.0},
        "cutoff": {"steps": count, "space": {"count": 0, "freq": 0.0, "se": 0.0}},
        "cond_stats": {"q": {"time": stat, "work": stat, "space": stat}},
    }


class ReportRenderTest(unittest.TestCase):
    """测试每种报告的表格模板"""

    def setUp(self):
        """测试前准备工作"""
        self.renderer = ReportRenderer()
        self.reports = [
            ValidateReport(model="m.psjs", valid=True, summary="|Γ|=1, |Q|=1, 规则数=1"),
            ValidateReport(model="m.psjs", valid=False,
                           diagnostics=[DiagnosticItem(code="prob-sum", message="概率之和为 2/5", subject="X")]),
            TermReport(model="m.psjs", start="X", states=["q", "r"],
                       values={"X": {"q": 0.25, "r": 0.5}}, convergence=CONVERGENCE),
            SpaceReport(model="m.psjs", symbol="X", p_finite=1.0, p_terminate=0.75, p_bounded_nonterm=0.25,
                        bar_state="q̄", convergence=CONVERGENCE),
            DistReport(model="m.psjs", symbol="X", state="q", measure="time", K=2, cond_prob=0.5,
                       mass=[0.0, 0.3, 0.1], tail=0.1, convergence=CONVERGENCE),
            ExpectReport(model="m.psjs", symbol="X", measure="work", value=finite_or_label(math.inf), finite=False,
                         detail={"verdict": "Infinite"}),
            ExpectReport(model="m.psjs", symbol="X", measure="time", state="q", value=3.5, finite=True,
                         lower_bound=True, converged=False, detail={"K": 10}),
            FiniteReport(model="m.psjs", symbol="X", work="Finite", time="Finite", termination=1.0,
                         reason="subcritical"),
            SimulateReport(model="m.psjs", symbol="X", n_runs=20, seed=3, max_steps=100, max_space=100,
                           result=simulate_result()),
            SerialiseReport(model="m.psjs", ppds="control: box\n", mapping={"box": "box"}, control_states=1,
                            stack_symbols=1, rules=1),
            NormaliseReport(model="m.psjs", changed=True, check_state="q̌", text="states: q q̌\n"),
            CaseStudyReport(model="gametree", study="gametree", K=300, columns=["variant", "p", "EW"],
                            rows=[{"variant": "seq", "p": 0.1, "EW": 1.43}]),
        ]

    def test_every_template_renders(self):
        for report in self.reports:
            with self.subTest(kind=report.kind.value):
                text = self.renderer.render(report)
                self.assertTrue(text.strip())

    def test_term_table(self):
        text = self.renderer.render(self.reports[2])
        lines = text.splitlines()
        self.assertIn("方法=newton", lines[0])
        self.assertEqual(lines[2].split("\t"), ["X", "0.25", "0.5", "0.75"])

    def test_validate_lists_diagnostics(self):
        text = self.renderer.render(self.reports[1])
        self.assertIn("[prob-sum]", text)
        self.assertIn("(X)", text)

    def test_missing_template_dir(self):
        with self.assertRaises(ReportError):
            ReportRenderer(os.path.join(tempfile.gettempdir(), "psjs-no-such-templates"))

    def test_missing_template(self):
        with tempfile.TemporaryDirectory() as empty:
            with self.assertRaises(ReportError):
                ReportRenderer(empty).render(self.reports[0])


class ReportFormatTest(unittest.TestCase):
    """测试 JSON 与 CSV 输出"""

    def test_json_document(self):
        report = ExpectReport(model="m.psjs", symbol="X", measure="work", value=finite_or_label(math.inf),
                              finite=False)
        doc = json.loads(render_json(report))
        self.assertEqual(doc["schema_version"], SCHEMA_VERSION)
        self.assertEqual(doc["kind"], "expect")
        self.assertEqual(doc["value"], "Infinite")

    def test_labels(self):
        self.assertEqual(finite_or_label(math.inf), "Infinite")
        self.assertEqual(finite_or_label(math.nan), "NaN")
        self.assertEqual(finite_or_label(2), 2.0)
        self.assertEqual(format_number(math.inf), "Infinite")
        self.assertEqual(format_number(True), "True")
        self.assertEqual(format_number(1 / 3, 3), "0.333")

    def test_csv(self):
        text = render_csv(("k", "mass"), [(0, 0.0), (1, 0.1 + 0.2), (2, math.inf)])
        self.assertEqual(text.splitlines(), ["k,mass", "0,0.0", "1,0.30000000000000004", "2,Infinite"])


if __name__ == '__main__':
    unittest.main()
