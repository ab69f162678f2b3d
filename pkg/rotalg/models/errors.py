"""Exception hierarchy shared by services and the CLI.

Every domain error derives from :class:`RotAlgError` (itself a ``ValueError``)
and carries an optional ``context`` dict, e.g. the offending ``(p, q)`` when a
batch computation fails part-way.
"""

from __future__ import annotations

from typing import Any, Optional


class RotAlgError(ValueError):
    """计算库的基础异常"""

    def __init__(self, message: str = "", **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context: dict = dict(context)

    def with_context(self, **context: Any) -> "RotAlgError":
        self.context.update(context)
        return self

    def __str__(self) -> str:
        if not self.context:
            return self.message
        ctx = ", ".join(f"{k}={v}" for k, v in self.context.items())
        return f"{self.message} [{ctx}]"


# ---- 表达式语法类（CLI 退出码 2） ----
class ExpressionError(RotAlgError):
    pass


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message: str, position: Optional[int] = None, **context: Any) -> None:
        super().__init__(message, **context)
        self.position = position
        if position is not None:
            self.context.setdefault("position", position)


class EmptyExpression(ExpressionError):
    pass


# ---- 定义域 / 前置条件类（CLI 退出码 3） ----
class DomainError(RotAlgError):
    pass


class CoprimalityError(DomainError):
    pass


class RangeError(DomainError):
    pass


class DimensionMismatch(DomainError):
    pass


class ParamsMismatch(DomainError):
    pass


class NotSelfAdjoint(DomainError):
    pass


class NotUnitary(DomainError):
    pass


class NotInvertible(DomainError):
    pass


class IndexOutOfRange(DomainError):
    pass


class ResolutionTooLow(DomainError):
    pass


class ResolutionNotDivisible(DomainError):
    pass


class MembershipViolation(DomainError):
    pass


class AliasingRisk(DomainError):
    pass


class PhaseJumpTooLarge(DomainError):
    pass


# ---- 输入文件格式（CLI 退出码 4） ----
class InputFormatError(RotAlgError):
    pass
