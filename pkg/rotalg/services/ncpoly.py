"""Noncommutative Laurent polynomials Σ c(m,n) U^m V^n kept in normal form under UV = ωVU."""

import logging
from typing import Dict, Iterable, Mapping, Tuple, Union

from rotalg.models.data_models import ModularParams
from rotalg.models.errors import NotInvertible, ParamsMismatch
from rotalg.services.expression_parser import (
    Add,
    Adjoint,
    Const,
    Gen,
    Mul,
    Neg,
    Node,
    Pow,
    Sub,
    parse_tree,
)
from rotalg.utils.helpers import format_complex

logger = logging.getLogger(__name__)

# 低于双精度噪声的系数直接剪除
PRUNE_TOL = 1e-15

Monomial = Tuple[int, int]
Scalar = Union[int, float, complex]


def _pruned(coeffs: Iterable[Tuple[Monomial, complex]]) -> Dict[Monomial, complex]:
    return {(int(m), int(n)): complex(c) for (m, n), c in coeffs if abs(c) >= PRUNE_TOL}


class NCLaurentPoly:
    """有限支撑的系数映射 (m,n) -> c(m,n)，U 的幂在左、V 的幂在右"""

    __slots__ = ("params", "_coeffs")

    def __init__(self, params: ModularParams, coeffs: Mapping[Monomial, Scalar] = None):
        self.params = params
        self._coeffs = _pruned((coeffs or {}).items())

    # ---- 构造 ----
    @classmethod
    def zero(cls, params: ModularParams) -> "NCLaurentPoly":
        return cls(params)

    @classmethod
    def constant(cls, params: ModularParams, c: Scalar) -> "NCLaurentPoly":
        return cls(params, {(0, 0): c})

    @classmethod
    def monomial(cls, params: ModularParams, m: int, n: int, c: Scalar = 1.0) -> "NCLaurentPoly":
        return cls(params, {(m, n): c})

    # ---- 访问 ----
    @property
    def coeffs(self) -> Dict[Monomial, complex]:
        return dict(self._coeffs)

    def coefficient(self, m: int, n: int) -> complex:
        return self._coeffs.get((m, n), 0j)

    def support(self) -> Tuple[Monomial, ...]:
        return tuple(sorted(self._coeffs))

    def is_zero(self) -> bool:
        return not self._coeffs

    def is_monomial(self) -> bool:
        return len(self._coeffs) == 1

    def __len__(self) -> int:
        return len(self._coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NCLaurentPoly):
            return NotImplemented
        return self.params.same_algebra(other.params) and self._coeffs == other._coeffs

    __hash__ = None

    def __repr__(self) -> str:
        return f"NCLaurentPoly(p={self.params.p}, q={self.params.q}, {render(self)})"

    # ---- 运算 ----
    def _check(self, other: "NCLaurentPoly") -> None:
        if not self.params.same_algebra(other.params):
            raise ParamsMismatch(
                "两个多项式属于不同的代数",
                left=(self.params.p, self.params.q),
                right=(other.params.p, other.params.q),
            )

    def _coerce(self, other) -> "NCLaurentPoly":
        if isinstance(other, NCLaurentPoly):
            self._check(other)
            return other
        if isinstance(other, (int, float, complex)):
            return NCLaurentPoly.constant(self.params, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._coeffs)
        for mono, c in other._coeffs.items():
            acc[mono] = acc.get(mono, 0j) + c
        return NCLaurentPoly(self.params, acc)

    __radd__ = __add__

    def __neg__(self) -> "NCLaurentPoly":
        return NCLaurentPoly(self.params, {mono: -c for mono, c in self._coeffs.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._coeffs)
        for mono, c in other._coeffs.items():
            acc[mono] = acc.get(mono, 0j) - c
        return NCLaurentPoly(self.params, acc)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return NCLaurentPoly(self.params, {mono: c * other for mono, c in self._coeffs.items()})
        if isinstance(other, NCLaurentPoly):
            return multiply(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return NCLaurentPoly(self.params, {mono: other * c for mono, c in self._coeffs.items()})
        return NotImplemented

    def __pow__(self, exponent: int) -> "NCLaurentPoly":
        return power(self, exponent)

    def adjoint(self) -> "NCLaurentPoly":
        return adjoint(self)

    def is_selfadjoint(self, tol: float = 1e-10) -> bool:
        return is_selfadjoint(self, tol)

    def render(self) -> str:
        return render(self)


def multiply(a: NCLaurentPoly, b: NCLaurentPoly) -> NCLaurentPoly:
    """(U^m V^n)(U^m' V^n') = ω^{-n·m'} U^{m+m'} V^{n+n'}，双线性扩展"""
    a._check(b)
    params = a.params
    acc: Dict[Monomial, complex] = {}
    for (m1, n1), c1 in a._coeffs.items():
        for (m2, n2), c2 in b._coeffs.items():
            mono = (m1 + m2, n1 + n2)
            acc[mono] = acc.get(mono, 0j) + c1 * c2 * params.omega_power(-n1 * m2)
    return NCLaurentPoly(params, acc)


def adjoint(a: NCLaurentPoly) -> NCLaurentPoly:
    """(c U^m V^n)* = conj(c) ω^{-mn} U^{-m} V^{-n}"""
    params = a.params
    acc: Dict[Monomial, complex] = {}
    for (m, n), c in a._coeffs.items():
        mono = (-m, -n)
        acc[mono] = acc.get(mono, 0j) + c.conjugate() * params.omega_power(-m * n)
    return NCLaurentPoly(params, acc)


def is_selfadjoint(a: NCLaurentPoly, tol: float = 1e-10) -> bool:
    diff = adjoint(a) - a
    return all(abs(c) <= tol for c in diff._coeffs.values())


def inverse(a: NCLaurentPoly) -> NCLaurentPoly:
    """单项式的逆：(c U^m V^n)^{-1} = c^{-1} ω^{-mn} U^{-m} V^{-n}"""
    if not a.is_monomial():
        raise NotInvertible("只有单项式可以取负幂次", terms=len(a))
    ((m, n), c), = a._coeffs.items()
    return NCLaurentPoly(a.params, {(-m, -n): a.params.omega_power(-m * n) / c})


def power(a: NCLaurentPoly, exponent: int) -> NCLaurentPoly:
    """a^k；单项式用闭式 (c U^m V^n)^k = c^k ω^{-mn·k(k-1)/2} U^{km} V^{kn}，其余用平方乘"""
    exponent = int(exponent)
    base = inverse(a) if exponent < 0 else a
    k = abs(exponent)
    if base.is_monomial():
        ((m, n), c), = base._coeffs.items()
        phase = base.params.omega_power(-m * n * (k * (k - 1) // 2))
        return NCLaurentPoly(a.params, {(k * m, k * n): c ** k * phase})
    result = NCLaurentPoly.constant(a.params, 1.0)
    while k:
        if k & 1:
            result = multiply(result, base)
        k >>= 1
        if k:
            base = multiply(base, base)
    return result


def from_tree(node: Node, params: ModularParams) -> NCLaurentPoly:
    """把 AST 降为正规形"""
    if isinstance(node, Const):
        return NCLaurentPoly.constant(params, node.value)
    if isinstance(node, Gen):
        return NCLaurentPoly.monomial(params, 1, 0) if node.name == "U" else NCLaurentPoly.monomial(params, 0, 1)
    if isinstance(node, Neg):
        return -from_tree(node.operand, params)
    if isinstance(node, Add):
        return from_tree(node.left, params) + from_tree(node.right, params)
    if isinstance(node, Sub):
        return from_tree(node.left, params) - from_tree(node.right, params)
    if isinstance(node, Mul):
        return multiply(from_tree(node.left, params), from_tree(node.right, params))
    if isinstance(node, Pow):
        return power(from_tree(node.base, params), node.exponent)
    if isinstance(node, Adjoint):
        return adjoint(from_tree(node.operand, params))
    raise TypeError(f"未知的节点类型 {type(node).__name__}")


def parse(expr: str, params: ModularParams) -> NCLaurentPoly:
    poly = from_tree(parse_tree(expr), params)
    logger.debug(f"解析表达式 {expr!r} -> {len(poly)} 项 (p={params.p}, q={params.q})")
    return poly


def _format_coefficient(c: complex) -> str:
    return f"({format_complex(c)})"


def render(a: NCLaurentPoly) -> str:
    """规范文本：按 (m,n) 字典序排列，系数保留 17 位有效数字"""
    if a.is_zero():
        return "0"
    terms = [f"{_format_coefficient(c)}·U^{m}·V^{n}" for (m, n), c in sorted(a._coeffs.items())]
    return " + ".join(terms)


def harper_element(params: ModularParams, coupling: float = 1.0) -> NCLaurentPoly:
    """U + U* + λ(V + V*)；λ = 1 即 Harper 元"""
    return NCLaurentPoly(
        params,
        {(1, 0): 1.0, (-1, 0): 1.0, (0, 1): coupling, (0, -1): coupling},
    )
