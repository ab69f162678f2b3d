import os
from typing import Optional

from rotalg.models.errors import RangeError


def ensure_directory_exists(directory: str):
    """确保目录存在"""
    if directory and not os.path.exists(directory):
        os.makedirs(directory, exist_ok=True)


def format_float(value: float) -> str:
    """17 位有效数字，保证往返精确"""
    return format(float(value), '.17g')


def format_complex(value: complex) -> str:
    value = complex(value)
    if value.imag == 0:
        return format_float(value.real)
    sign = '-' if value.imag < 0 else '+'
    return f"{format_float(value.real)}{sign}{format_float(abs(value.imag))}i"


def parse_complex_token(token: str, name: Optional[str] = None) -> complex:
    """解析命令行中的复数：'1'、'-0.5'、'i'、'-i'、'2i'、'0.6+0.8i'"""
    text = (token or "").strip().replace(' ', '')
    if not text:
        raise RangeError("复数参数为空", name=name)
    try:
        return complex(text.replace('i', 'j'))
    except ValueError as e:
        raise RangeError(f"无法解析复数 {token!r}", name=name) from e
