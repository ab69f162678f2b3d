"""Tokenizer and recursive-descent parser for noncommutative Laurent expressions in U, V.

Grammar::

    expr    := [sign] term (('+'|'-') term)*
    term    := factor (('*'|'·') factor)*
    factor  := atom ['^' signed-int] ["'"]
    atom    := 'U' | 'V' | number | number 'i' | 'i' | '(' expr ')'

Whitespace is insignificant.  The parser produces a small AST that can be
lowered to normal form (``rotalg.services.ncpoly``) or evaluated directly on
matrices (:func:`evaluate_tree`), the latter serving as an independent oracle.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from rotalg.models.errors import EmptyExpression, ExpressionSyntaxError, NotInvertible

_NUMBER = r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"

_TOKEN_TABLE = [
    ("imag", re.compile(_NUMBER + r"i")),
    ("number", re.compile(_NUMBER)),
    ("unit_i", re.compile(r"i")),
    ("gen", re.compile(r"[UV]")),
    ("plus", re.compile(r"\+")),
    ("minus", re.compile(r"-")),
    ("times", re.compile(r"\*|·")),
    ("power", re.compile(r"\^")),
    ("adjoint", re.compile(r"'")),
    ("openpar", re.compile(r"\(")),
    ("closepar", re.compile(r"\)")),
    ("whitespace", re.compile(r"\s+")),
]


@dataclass(frozen=True)
class Token:
    tag: str
    text: str
    pos: int


def tokenize(expr: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(expr):
        for tag, pattern in _TOKEN_TABLE:
            m = pattern.match(expr, pos)
            if m:
                if tag != "whitespace":
                    tokens.append(Token(tag, m.group(0), pos))
                pos = m.end()
                break
        else:
            raise ExpressionSyntaxError(f"无法识别的字符 {expr[pos]!r}", position=pos)
    return tokens


# ---- AST ----
@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Gen:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Adjoint:
    operand: "Node"


Node = Union[Const, Gen, Neg, Add, Sub, Mul, Pow, Adjoint]


class _Parser:
    def __init__(self, text: str, tokens: List[Token]):
        self.text = text
        self.tokens = tokens
        self.index = 0

    # 游标工具
    def peek(self) -> Optional[Token]:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def advance(self) -> Token:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def at(self, *tags: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.tag in tags

    def error(self, message: str) -> ExpressionSyntaxError:
        tok = self.peek()
        pos = tok.pos if tok is not None else len(self.text)
        return ExpressionSyntaxError(message, position=pos)

    def parse(self) -> Node:
        node = self.parse_expr()
        if self.peek() is not None:
            raise self.error(f"多余的输入 {self.peek().text!r}")
        return node

    def parse_expr(self) -> Node:
        negate = False
        if self.at("plus", "minus"):
            negate = self.advance().tag == "minus"
        node = self.parse_term()
        if negate:
            node = Neg(node)
        while self.at("plus", "minus"):
            op = self.advance()
            right = self.parse_term()
            node = Add(node, right) if op.tag == "plus" else Sub(node, right)
        return node

    def parse_term(self) -> Node:
        node = self.parse_factor()
        while self.at("times"):
            self.advance()
            node = Mul(node, self.parse_factor())
        return node

    def parse_factor(self) -> Node:
        node = self.parse_atom()
        if self.at("power"):
            self.advance()
            sign = 1
            if self.at("plus", "minus"):
                sign = -1 if self.advance().tag == "minus" else 1
            if not self.at("number") or not self.peek().text.isdigit():
                raise self.error("'^' 之后需要整数指数")
            node = Pow(node, sign * int(self.advance().text))
        if self.at("adjoint"):
            self.advance()
            node = Adjoint(node)
        return node

    def parse_atom(self) -> Node:
        tok = self.peek()
        if tok is None:
            raise self.error("表达式意外结束")
        if tok.tag == "gen":
            self.advance()
            return Gen(tok.text)
        if tok.tag == "number":
            self.advance()
            return Const(complex(float(tok.text), 0.0))
        if tok.tag == "imag":
            self.advance()
            return Const(complex(0.0, float(tok.text[:-1])))
        if tok.tag == "unit_i":
            self.advance()
            return Const(1j)
        if tok.tag == "openpar":
            self.advance()
            node = self.parse_expr()
            if not self.at("closepar"):
                raise self.error("缺少右括号 ')'")
            self.advance()
            return node
        raise self.error(f"此处不能出现 {tok.text!r}")


def parse_tree(expr: str) -> Node:
    """解析为 AST；空表达式抛出 EmptyExpression"""
    if expr is None or not str(expr).strip():
        raise EmptyExpression("表达式为空")
    text = str(expr)
    return _Parser(text, tokenize(text)).parse()


def evaluate_tree(node: Node, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """直接在矩阵上求值 AST（U、V 为生成元的像）"""
    dim = U.shape[0]
    if isinstance(node, Const):
        return node.value * np.eye(dim, dtype=complex)
    if isinstance(node, Gen):
        return np.array(U if node.name == "U" else V, dtype=complex)
    if isinstance(node, Neg):
        return -evaluate_tree(node.operand, U, V)
    if isinstance(node, Add):
        return evaluate_tree(node.left, U, V) + evaluate_tree(node.right, U, V)
    if isinstance(node, Sub):
        return evaluate_tree(node.left, U, V) - evaluate_tree(node.right, U, V)
    if isinstance(node, Mul):
        return evaluate_tree(node.left, U, V) @ evaluate_tree(node.right, U, V)
    if isinstance(node, Pow):
        base = evaluate_tree(node.base, U, V)
        try:
            return np.linalg.matrix_power(base, node.exponent)
        except np.linalg.LinAlgError as e:
            raise NotInvertible("负幂次的底不可逆") from e
    if isinstance(node, Adjoint):
        return evaluate_tree(node.operand, U, V).conj().T
    raise TypeError(f"未知的节点类型 {type(node).__name__}")
