"""Modular parameters, clock-and-shift generators and Hilbert–Schmidt structure of M_q."""

import logging
import math
from functools import lru_cache
from typing import Callable

import numpy as np

from rotalg.models.data_models import ComplexMatrix, ModularParams, root_of_unity
from rotalg.models.errors import CoprimalityError, DimensionMismatch, NotUnitary, RangeError

logger = logging.getLogger(__name__)


def make_params(p: int, q: int) -> ModularParams:
    """构造 (p, q, r, ω, σ)；r 为 p 模 q 的逆元，取值 1..q-1"""
    p, q = int(p), int(q)
    if q < 2:
        raise RangeError("q 必须 ≥ 2", p=p, q=q)
    if not 1 <= p <= q - 1:
        raise RangeError("p 必须位于 [1, q-1]", p=p, q=q)
    if math.gcd(p, q) != 1:
        raise CoprimalityError("p 与 q 必须互素", p=p, q=q)
    r = pow(p, -1, q)
    return ModularParams(p=p, q=q, r=r, omega=root_of_unity(p, q), sigma=root_of_unity(1, q))


@lru_cache(maxsize=256)
def _shift_power(q: int, j: int) -> np.ndarray:
    m = np.roll(np.eye(q, dtype=complex), j % q, axis=1)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=256)
def _clock_power(p: int, q: int, k: int) -> np.ndarray:
    diag = [root_of_unity(k * p * l, q) for l in range(q)]
    m = np.diag(np.array(diag, dtype=complex))
    m.setflags(write=False)
    return m


def shift_matrix(params: ModularParams) -> ComplexMatrix:
    """U₀：第 j 行在 j+1 (mod q) 列为 1 的循环移位矩阵"""
    return _shift_power(params.q, 1).copy()


def clock_matrix(params: ModularParams) -> ComplexMatrix:
    """V₀ = diag(1, ω, …, ω^{q-1})"""
    return _clock_power(params.p, params.q, 1).copy()


def generator_power(params: ModularParams, j: int, k: int) -> ComplexMatrix:
    """U₀^j V₀^k，指数先对 q 取模"""
    q = params.q
    return _shift_power(q, int(j) % q) @ _clock_power(params.p, q, int(k) % q)


@lru_cache(maxsize=64)
def _basis_stack(p: int, q: int) -> np.ndarray:
    params = ModularParams(p=p, q=q, r=pow(p, -1, q), omega=root_of_unity(p, q), sigma=root_of_unity(1, q))
    stack = np.array([generator_power(params, j, k) for j in range(q) for k in range(q)])
    stack.setflags(write=False)
    return stack


def basis_stack(params: ModularParams) -> np.ndarray:
    """按 (j,k) 行主序堆叠的 {U₀^j V₀^k}，形状 (q², q, q)"""
    return _basis_stack(params.p, params.q)


def _as_square(m, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} 必须是方阵", shape=arr.shape)
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(f"{name} 含有非有限元素")
    return arr


def hs_inner(a: ComplexMatrix, b: ComplexMatrix) -> complex:
    """Hilbert–Schmidt 内积 <a,b> = Trace(b* a)"""
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape:
        raise DimensionMismatch("内积两侧矩阵维数不同", a=a.shape, b=b.shape)
    return complex(np.vdot(b, a))


def basis_expand(M: ComplexMatrix, params: ModularParams) -> np.ndarray:
    """d(j,k) = <M, U₀^j V₀^k> / q，返回 q×q 系数表"""
    M = _as_square(M, "M")
    q = params.q
    if M.shape != (q, q):
        raise DimensionMismatch("矩阵维数必须等于 q", q=q, shape=M.shape)
    coeffs = np.einsum("kij,ij->k", basis_stack(params).conj(), M) / q
    return coeffs.reshape(q, q)


def basis_reconstruct(d: np.ndarray, params: ModularParams) -> ComplexMatrix:
    q = params.q
    d = np.asarray(d, dtype=complex)
    if d.shape != (q, q):
        raise DimensionMismatch("系数表形状必须为 q×q", q=q, shape=d.shape)
    return np.tensordot(d.reshape(q * q), basis_stack(params), axes=1)


def matrix_norm(M: ComplexMatrix) -> float:
    """算子范数：sqrt(M*M 的最大特征值)"""
    M = np.asarray(M, dtype=complex)
    gram = M.conj().T @ M
    top = np.linalg.eigvalsh(gram)[-1]
    return float(math.sqrt(max(float(top), 0.0)))


def is_unitary(M: ComplexMatrix, tol: float = 1e-9) -> bool:
    M = _as_square(M, "M")
    eye = np.eye(M.shape[0])
    return bool(np.max(np.abs(M.conj().T @ M - eye)) <= tol and np.max(np.abs(M @ M.conj().T - eye)) <= tol)


def is_special_unitary(M: ComplexMatrix, tol: float = 1e-9) -> bool:
    return is_unitary(M, tol) and abs(np.linalg.det(M) - 1.0) <= tol


def inner_automorphism(a: ComplexMatrix, tol: float = 1e-9) -> Callable[[ComplexMatrix], ComplexMatrix]:
    """酉矩阵 a 诱导的 *-自同构 M ↦ a M a*"""
    a = _as_square(a, "a")
    if not is_unitary(a, tol):
        raise NotUnitary("共轭矩阵必须是酉矩阵")
    a_star = a.conj().T

    def _apply(M: ComplexMatrix) -> ComplexMatrix:
        M = np.asarray(M, dtype=complex)
        if M.shape != a.shape:
            raise DimensionMismatch("矩阵维数与共轭矩阵不同", a=a.shape, M=M.shape)
        return a @ M @ a_star

    return _apply
