"""Irreducible representations ρ_{z1,z2}: evaluation, unitary equivalence and Schur commutants."""

import cmath
import logging
import math
from functools import lru_cache
from typing import Literal, Sequence, Tuple

import numpy as np
from scipy import linalg

from rotalg.models.data_models import ComplexMatrix, ModularParams, RepPoint
from rotalg.models.errors import DimensionMismatch, RangeError
from rotalg.services.algebra_core import clock_matrix, generator_power, make_params, shift_matrix
from rotalg.services.ncpoly import NCLaurentPoly

logger = logging.getLogger(__name__)

_TWO_PI = 2.0 * math.pi


@lru_cache(maxsize=128)
def _evaluation_basis(p: int, q: int, support: Tuple[Tuple[int, int], ...]) -> np.ndarray:
    params = make_params(p, q)
    stack = np.array([generator_power(params, m, n) for m, n in support]) if support else np.zeros((0, q, q), dtype=complex)
    stack.setflags(write=False)
    return stack


def evaluation_data(a: NCLaurentPoly) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """返回 (系数, 指数 (K,2), 基矩阵 (K,q,q))，供网格批量求值复用"""
    support = a.support()
    coeffs = np.array([a.coefficient(m, n) for m, n in support], dtype=complex)
    exponents = np.array(support, dtype=float).reshape(len(support), 2)
    return coeffs, exponents, _evaluation_basis(a.params.p, a.params.q, support)


def evaluate_on_angles(a: NCLaurentPoly, phi1: np.ndarray, phi2: np.ndarray) -> np.ndarray:
    """在一批角度 (φ1, φ2) 上求 ρ(a)，返回形状 phi1.shape + (q, q)"""
    coeffs, exponents, basis = evaluation_data(a)
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.broadcast_to(np.asarray(phi2, dtype=float), phi1.shape)
    q = a.params.q
    if coeffs.size == 0:
        return np.zeros(phi1.shape + (q, q), dtype=complex)
    phase = np.exp(1j * (phi1[..., None] * exponents[:, 0] + phi2[..., None] * exponents[:, 1]))
    weights = phase * coeffs
    return np.tensordot(weights, basis, axes=([-1], [0]))


def rep_evaluate(a: NCLaurentPoly, pt: RepPoint) -> ComplexMatrix:
    """ρ_{z1,z2}(a) = Σ c(m,n) z1^m z2^n U₀^m V₀^n"""
    coeffs, exponents, basis = evaluation_data(a)
    q = a.params.q
    result = np.zeros((q, q), dtype=complex)
    for c, (m, n), B in zip(coeffs, exponents.astype(int), basis):
        result = result + c * (pt.z1 ** int(m)) * (pt.z2 ** int(n)) * B
    return result


def rep_generators(pt: RepPoint, params: ModularParams) -> Tuple[ComplexMatrix, ComplexMatrix]:
    return pt.z1 * shift_matrix(params), pt.z2 * clock_matrix(params)


def reps_equivalent(pt_a: RepPoint, pt_b: RepPoint, q: int, tol: float = 1e-9) -> bool:
    """ρ_a ≅ ρ_b 当且仅当 (z1'/z1)^q = (z2'/z2)^q = 1"""
    ratio1 = (pt_b.z1 / pt_a.z1) ** int(q)
    ratio2 = (pt_b.z2 / pt_a.z2) ** int(q)
    return abs(ratio1 - 1.0) <= tol and abs(ratio2 - 1.0) <= tol


def class_label(pt: RepPoint, q: int) -> Tuple[complex, complex]:
    """等价类不变量 (z1^q, z2^q)"""
    return (pt.z1 ** int(q), pt.z2 ** int(q))


def eigenvalue_signature(generator: Literal["U", "V"], pt: RepPoint, params: ModularParams) -> np.ndarray:
    """ρ(U) 或 ρ(V) 的特征值 {z·ω^j}，按 [0, 2π) 内的辐角升序"""
    if generator not in ("U", "V"):
        raise RangeError("生成元只能是 'U' 或 'V'", generator=generator)
    z = pt.z1 if generator == "U" else pt.z2
    values = np.array([z * params.omega_power(j) for j in range(params.q)], dtype=complex)
    return _sort_by_angle(values)


def _sort_by_angle(values: np.ndarray) -> np.ndarray:
    angles = np.mod(np.angle(values), _TWO_PI)
    return values[np.argsort(angles, kind="stable")]


def signatures_match(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """多重集比较：按辐角排序后逐点比较，轮换对齐以处理 2π 处的环绕"""
    a = _sort_by_angle(np.asarray(a, dtype=complex))
    b = _sort_by_angle(np.asarray(b, dtype=complex))
    if a.shape != b.shape:
        return False
    for shift in range(len(b)):
        if np.all(np.abs(a - np.roll(b, shift)) <= tol):
            return True
    return False


def commutant_dimension(mats: Sequence[ComplexMatrix], tol: float = 1e-9) -> int:
    """{X : XA = AX, ∀A} 的复维数，取实化算子 X ↦ (XA − AX) 的零度"""
    arrays = [np.asarray(m, dtype=complex) for m in mats]
    if not arrays:
        raise DimensionMismatch("矩阵族不能为空")
    n = arrays[0].shape[0]
    for A in arrays:
        if A.shape != (n, n):
            raise DimensionMismatch("矩阵族维数不一致", expected=(n, n), got=A.shape)
    eye = np.eye(n)
    # 列主序向量化：vec(XA − AX) = (Aᵀ ⊗ I − I ⊗ A) vec(X)
    blocks = [np.kron(A.T, eye) - np.kron(eye, A) for A in arrays]
    L = np.vstack(blocks)
    real_form = np.block([[L.real, -L.imag], [L.imag, L.real]])
    sv = linalg.svdvals(real_form)
    top = float(sv[0]) if sv.size else 0.0
    if top == 0.0:
        return n * n
    rank = int(np.sum(sv > tol * top))
    real_nullity = 2 * n * n - rank
    logger.debug(f"交换子空间：n={n}, 实秩={rank}, 实零度={real_nullity}")
    return real_nullity // 2


def is_irreducible(mats: Sequence[ComplexMatrix], tol: float = 1e-9) -> bool:
    return commutant_dimension(mats, tol) == 1


def random_rep_point(rng: np.random.Generator) -> RepPoint:
    phi1, phi2 = rng.uniform(0.0, _TWO_PI, size=2)
    return RepPoint(cmath.exp(1j * phi1), cmath.exp(1j * phi2))
