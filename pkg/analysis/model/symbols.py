"""
pSJS 语法定义
符号、规则与模型的不可变数据结构
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple


class SymbolKind(str, Enum):
    """符号种类"""
    BASIC = "basic"  # 基本进程符号
    SYNC = "sync"  # 同步状态
    JOIN = "join"  # 汇合符号 <q r>


@dataclass(frozen=True, order=True)
class Symbol:
    """
    字母表中的一个元素

    汇合符号的 name 形如 "<q r>"，left/right 为两个同步状态名
    """
    kind: SymbolKind
    name: str
    left: Optional[str] = None
    right: Optional[str] = None

    @classmethod
    def basic(cls, name: str) -> "Symbol":
        return cls(SymbolKind.BASIC, name)

    @classmethod
    def sync(cls, name: str) -> "Symbol":
        return cls(SymbolKind.SYNC, name)

    @classmethod
    def join(cls, left: str, right: str) -> "Symbol":
        return cls(SymbolKind.JOIN, f"<{left} {right}>", left, right)

    @property
    def is_sync(self) -> bool:
        return self.kind is SymbolKind.SYNC

    @property
    def is_join(self) -> bool:
        return self.kind is SymbolKind.JOIN

    @property
    def is_process(self) -> bool:
        """基本符号和汇合符号都可以作为规则左部"""
        return self.kind is not SymbolKind.SYNC

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Rule:
    """
    概率规则 lhs -> rhs : prob

    rhs 长度为 1（Single）、2（Pair）或 3（Triple，仅限三叉分支过程）
    """
    lhs: Symbol
    rhs: Tuple[Symbol, ...]
    prob: Fraction

    @property
    def arity(self) -> int:
        return len(self.rhs)

    @property
    def is_split(self) -> bool:
        return len(self.rhs) >= 2

    def __str__(self) -> str:
        if len(self.rhs) == 1:
            right = str(self.rhs[0])
        else:
            right = "<" + " ".join(str(s) for s in self.rhs) + ">"
        return f"{self.lhs} -> {right} : {self.prob}"


@dataclass(frozen=True)
class ModelFlags:
    """模型标志位"""
    is_branching_process: bool = False
    degree3: bool = False
    normalised: bool = False

    def names(self) -> List[str]:
        flags = []
        if self.is_branching_process:
            flags.append("branching")
        if self.degree3:
            flags.append("degree3")
        if self.normalised:
            flags.append("normalised")
        return flags


@dataclass(frozen=True)
class PsjsModel:
    """
    概率 split-join 系统

    过程符号集合 Γ 由规则左部按首次出现顺序导出，同步状态按声明顺序保存。
    构造后不可变，可在并发分析之间只读共享。
    """
    sync_states: Tuple[str, ...]
    rules: Tuple[Rule, ...]
    flags: ModelFlags = field(default_factory=ModelFlags)
    start: Optional[Symbol] = None
    provenance: str = field(default="", compare=False)

    @cached_property
    def process_symbols(self) -> Tuple[Symbol, ...]:
        seen: Dict[Symbol, None] = {}
        for rule in self.rules:
            seen.setdefault(rule.lhs, None)
        return tuple(seen)

    @cached_property
    def gamma(self) -> FrozenSet[Symbol]:
        return frozenset(self.process_symbols)

    @cached_property
    def sync_set(self) -> FrozenSet[str]:
        return frozenset(self.sync_states)

    @cached_property
    def sync_symbols(self) -> Tuple[Symbol, ...]:
        return tuple(Symbol.sync(q) for q in self.sync_states)

    @cached_property
    def alphabet(self) -> Tuple[Symbol, ...]:
        """Σ = Γ ∪ Q"""
        return self.process_symbols + self.sync_symbols

    @cached_property
    def rules_by_lhs(self) -> Dict[Symbol, Tuple[Rule, ...]]:
        grouped: Dict[Symbol, List[Rule]] = {}
        for rule in self.rules:
            grouped.setdefault(rule.lhs, []).append(rule)
        return {lhs: tuple(rules) for lhs, rules in grouped.items()}

    @cached_property
    def names(self) -> FrozenSet[str]:
        """模型中已使用的所有名字，用于生成新鲜名字"""
        used = set(self.sync_states)
        for rule in self.rules:
            used.add(rule.lhs.name)
            for sym in rule.rhs:
                used.add(sym.name)
        return frozenset(used)

    def rules_for(self, symbol: Symbol) -> Tuple[Rule, ...]:
        return self.rules_by_lhs.get(symbol, ())

    def has_join(self, left: str, right: str) -> bool:
        return Symbol.join(left, right) in self.gamma

    def with_flags(self, **changes) -> "PsjsModel":
        return replace(self, flags=replace(self.flags, **changes))

    def summary(self) -> str:
        return f"|Γ|={len(self.process_symbols)}, |Q|={len(self.sync_states)}, 规则数={len(self.rules)}"


def fresh_name(used: Iterable[str], base: str) -> str:
    """
    生成不与已有名字冲突的新鲜名字

    参数:
    - used: 已占用的名字
    - base: 保留前缀开头的候选名

    返回:
    - str: base 本身，或带数字后缀的变体
    """
    taken = set(used)
    if base not in taken:
        return base
    index = 1
    while f"{base}~{index}" in taken:
        index += 1
    return f"{base}~{index}"
