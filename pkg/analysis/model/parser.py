"""
模型文件解析与渲染

文件格式（UTF-8，每行一条语句）:
    # 注释
    states: q r
    start: X
    flags: branching degree3
    X -> <X X> : 1/2
    <q r> -> X : 1
"""

import logging
import re
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple, Union

from analysis.errors import ModelError, ModelSyntaxError
from analysis.model.symbols import ModelFlags, PsjsModel, Rule, Symbol
from analysis.model.validation import ensure_valid

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r'''
    (?P<space>\s+)
  | (?P<comment>\#.*)
  | (?P<quoted>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<lt><)
  | (?P<gt>>)
  | (?P<colon>:)
  | (?P<name>(?:[^\s"<>:\#-]|-(?!>))+)
''', re.VERBOSE)

_PLAIN_NAME_RE = re.compile(r'(?:[^\s"<>:#,()-]|-(?!>))+')

_DIRECTIVES = ("states", "start", "flags")
_FLAG_NAMES = {"branching": "is_branching_process", "degree3": "degree3", "normalised": "normalised"}

# 未解析的引用：("name", 名字) 或 ("join", 左, 右)
RawRef = Tuple[str, ...]


class _Token:
    __slots__ = ("kind", "value", "column")

    def __init__(self, kind: str, value: str, column: int):
        self.kind = kind
        self.value = value
        self.column = column


def _tokenize(line: str, line_no: int) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    while pos < len(line):
        match = _TOKEN_RE.match(line, pos)
        if match is None:
            raise ModelSyntaxError(line_no, pos + 1, f"无法识别的字符 {line[pos]!r}")
        kind = match.lastgroup
        if kind == "comment":
            break
        if kind != "space":
            value = match.group(kind)
            if kind == "quoted":
                kind, value = "name", value[1:-1]
                if not value:
                    raise ModelSyntaxError(line_no, pos + 1, "引号内的名字不能为空")
            tokens.append(_Token(kind, value, pos + 1))
        pos = match.end()
    return tokens


class _Cursor:
    """单行 token 游标"""

    def __init__(self, tokens: List[_Token], line_no: int, line: str):
        self.tokens = tokens
        self.index = 0
        self.line_no = line_no
        self.line = line

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def error(self, message: str) -> ModelSyntaxError:
        token = self.peek()
        column = token.column if token else len(self.line.rstrip()) + 1
        return ModelSyntaxError(self.line_no, column, message)

    def take(self, kind: str, what: str) -> _Token:
        token = self.peek()
        if token is None or token.kind != kind:
            raise self.error(f"此处应为 {what}")
        self.index += 1
        return token

    def at_end(self) -> bool:
        return self.index >= len(self.tokens)


def _parse_ref(cursor: _Cursor) -> RawRef:
    """name 或 <name name>"""
    token = cursor.peek()
    if token is not None and token.kind == "lt":
        cursor.index += 1
        left = cursor.take("name", "同步状态名").value
        right = cursor.take("name", "同步状态名").value
        cursor.take("gt", "'>'")
        return ("join", left, right)
    return ("name", cursor.take("name", "符号名").value)


def _parse_rhs(cursor: _Cursor) -> List[RawRef]:
    token = cursor.peek()
    if token is None or token.kind != "lt":
        return [("name", cursor.take("name", "右部符号").value)]
    cursor.index += 1
    elements = []
    while True:
        token = cursor.peek()
        if token is None:
            raise cursor.error("右部缺少 '>'")
        if token.kind == "gt":
            cursor.index += 1
            break
        elements.append(_parse_ref(cursor))
    if len(elements) not in (2, 3):
        raise ModelSyntaxError(cursor.line_no, token.column, f"右部 <...> 必须含 2 或 3 个元素，实际 {len(elements)} 个")
    return elements


def _parse_prob(token: _Token, line_no: int) -> Fraction:
    try:
        return Fraction(token.value)
    except (ValueError, ZeroDivisionError):
        raise ModelSyntaxError(line_no, token.column, f"无法解析概率 {token.value!r}")


def parse_model(text: str) -> PsjsModel:
    """
    解析模型文本

    参数:
    - text: 模型文件内容

    返回:
    - PsjsModel: 已校验的模型，小数概率转换为精确有理数

    异常:
    - ModelSyntaxError: 语法错误（含行列号）
    - ModelValidationError: 模型不变量不成立
    """
    states: List[str] = []
    flags = {}
    start_ref: Optional[RawRef] = None
    raw_rules: List[Tuple[RawRef, List[RawRef], Fraction]] = []

    for line_no, line in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(line, line_no)
        if not tokens:
            continue
        cursor = _Cursor(tokens, line_no, line)
        head = tokens[0]
        if head.kind == "name" and head.value in _DIRECTIVES and len(tokens) > 1 and tokens[1].kind == "colon":
            cursor.index = 2
            if head.value == "states":
                while not cursor.at_end():
                    states.append(cursor.take("name", "同步状态名").value)
            elif head.value == "start":
                start_ref = _parse_ref(cursor)
            else:
                while not cursor.at_end():
                    flag = cursor.take("name", "标志名")
                    if flag.value not in _FLAG_NAMES:
                        raise ModelSyntaxError(line_no, flag.column, f"未知标志 {flag.value!r}")
                    flags[_FLAG_NAMES[flag.value]] = True
            if not cursor.at_end():
                raise cursor.error("语句末尾有多余内容")
            continue

        lhs = _parse_ref(cursor)
        cursor.take("arrow", "'->'")
        rhs = _parse_rhs(cursor)
        cursor.take("colon", "':'")
        prob = _parse_prob(cursor.take("name", "概率"), line_no)
        if not cursor.at_end():
            raise cursor.error("规则末尾有多余内容")
        raw_rules.append((lhs, rhs, prob))

    declared = set(states)

    def resolve(ref: RawRef) -> Symbol:
        if ref[0] == "join":
            return Symbol.join(ref[1], ref[2])
        name = ref[1]
        return Symbol.sync(name) if name in declared else Symbol.basic(name)

    rules = []
    for lhs_ref, rhs_refs, prob in raw_rules:
        rhs = tuple(resolve(ref) for ref in rhs_refs)
        rules.append(Rule(resolve(lhs_ref), rhs, prob))

    model = PsjsModel(
        sync_states=tuple(states),
        rules=tuple(rules),
        flags=ModelFlags(**flags),
        start=resolve(start_ref) if start_ref else None,
    )
    ensure_valid(model)
    logger.debug(f"模型解析完成: {model.summary()}")
    return model


def load_model(path: Union[str, Path]) -> PsjsModel:
    """从文件读取并解析模型"""
    text = Path(path).read_text(encoding="utf-8")
    model = parse_model(text)
    logger.info(f"已加载模型 {path}: {model.summary()}")
    return model


def quote_name(name: str) -> str:
    if _PLAIN_NAME_RE.fullmatch(name) and name not in _DIRECTIVES:
        return name
    if '"' in name or "\n" in name:
        raise ModelError(f"名字 {name!r} 含有无法渲染的字符")
    return f'"{name}"'


def _render_ref(symbol: Symbol) -> str:
    if symbol.is_join:
        return f"<{quote_name(symbol.left)} {quote_name(symbol.right)}>"
    return quote_name(symbol.name)


def render_model(model: PsjsModel) -> str:
    """
    把模型渲染为文件格式，概率写成既约分数 num/den

    parse_model(render_model(m)) == m 对所有已校验模型成立
    """
    lines = []
    if model.provenance:
        lines.append(f"# provenance: {model.provenance}")
    flag_names = model.flags.names()
    if flag_names:
        lines.append("flags: " + " ".join(flag_names))
    lines.append("states:" + "".join(" " + quote_name(q) for q in model.sync_states))
    if model.start is not None:
        lines.append("start: " + _render_ref(model.start))
    for rule in model.rules:
        if rule.arity == 1:
            rhs = _render_ref(rule.rhs[0])
        else:
            rhs = "<" + " ".join(_render_ref(s) for s in rule.rhs) + ">"
        lines.append(f"{_render_ref(rule.lhs)} -> {rhs} : {rule.prob.numerator}/{rule.prob.denominator}")
    return "\n".join(lines) + "\n"
