"""
报告渲染
表格输出由 templates/ 下的 Jinja2 模板生成；JSON 与 CSV 直接由报告模型生成
"""

import csv
import io
import logging
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

try:
    import jinja2
except ImportError:
    raise ImportError("请安装jinja2库: pip install jinja2")

from analysis.errors import PsjsError
from reports.models import INFINITE, Report

logger = logging.getLogger(__name__)

DEFAULT_TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"


class ReportError(PsjsError):
    """报告渲染相关错误"""
    pass


def format_number(value, digits: int = 10) -> str:
    """浮点数按有效数字输出，无穷写作 Infinite"""
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, str):
        return value
    if isinstance(value, float) and math.isinf(value):
        return INFINITE
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


class ReportRenderer:
    """基于 Jinja2 的表格渲染器，模板名与报告类型一致"""

    def __init__(self, template_dir: Union[str, Path, None] = None):
        self.template_dir = Path(template_dir) if template_dir else DEFAULT_TEMPLATE_DIR
        if not self.template_dir.is_dir():
            raise ReportError(f"模板目录不存在: {self.template_dir}")
        self.env = jinja2.Environment(
            loader=jinja2.FileSystemLoader(str(self.template_dir), encoding="utf-8"),
            undefined=jinja2.StrictUndefined,
            keep_trailing_newline=True,
            trim_blocks=True,
            lstrip_blocks=True,
        )
        self.env.filters["num"] = format_number

    def render(self, report: Report) -> str:
        """
        渲染报告为文本表格

        参数:
            report: 报告模型

        返回:
            渲染后的字符串

        异常:
            ReportError: 模板不存在或渲染失败
        """
        template_name = f"{report.kind.value}.j2"
        try:
            template = self.env.get_template(template_name)
        except jinja2.TemplateNotFound as e:
            error_msg = f"模板文件不存在: {self.template_dir / template_name}"
            logger.error(error_msg)
            raise ReportError(error_msg) from e
        try:
            return template.render(report=report.model_dump(mode="json"))
        except jinja2.TemplateError as e:
            error_msg = f"渲染模板 '{template_name}' 失败: {str(e)}"
            logger.error(error_msg)
            raise ReportError(error_msg) from e


def render_json(report: Report) -> str:
    return report.model_dump_json(indent=2) + "\n"


def render_csv(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    """按固定列顺序输出 CSV，浮点数使用 repr 精度以保证输出可复现"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(value) for value in row])
    return buffer.getvalue()


def _csv_cell(value: object) -> Optional[object]:
    if isinstance(value, float):
        if math.isinf(value):
            return INFINITE
        return repr(value)
    return value
