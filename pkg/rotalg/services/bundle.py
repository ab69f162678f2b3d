"""Sampled sections of the matrix bundle over the torus.

An element of the algebra is a q-periodic ``M_q``-valued function on the plane
obeying two twisted equivariance relations.  Sections are sampled on the
lattice x = (q·a/n, q·b/n); shifting x by 1 is a shift of n/q lattice steps.
"""

import logging
import math
from typing import FrozenSet, Optional

import numpy as np

from rotalg.config.settings import Config
from rotalg.models.data_models import CoeffTable, ComplexMatrix, MembershipReport, ModularParams, SectionGrid
from rotalg.models.errors import (
    AliasingRisk,
    MembershipViolation,
    PhaseJumpTooLarge,
    RangeError,
    ResolutionNotDivisible,
    ResolutionTooLow,
)
from rotalg.services.algebra_core import basis_stack, generator_power, make_params, shift_matrix
from rotalg.services.ncpoly import NCLaurentPoly
from rotalg.services.reps import evaluate_on_angles
from rotalg.utils.parallel import map_ordered

logger = logging.getLogger(__name__)

_TWO_PI = 2.0 * math.pi


def default_resolution(params: ModularParams) -> int:
    factor = int(Config.get_compute_config().get("section_resolution_factor", 8))
    return max(4, factor) * params.q


def synthesize_section(a: NCLaurentPoly, n: Optional[int] = None) -> SectionGrid:
    """格点 (a,b) 上的 Σ c(m,n) e^{2πi(m·x1+n·x2)/q} U₀^m V₀^n"""
    params = a.params
    n = default_resolution(params) if n is None else int(n)
    if n < 4 * params.q:
        raise ResolutionTooLow("截面分辨率需满足 n ≥ 4q", n=n, q=params.q)
    # x = q·idx/n 代入 e^{2πi m x/q} 即角度 2π·idx/n
    angles = _TWO_PI * np.arange(n) / n

    def _row(row: int) -> np.ndarray:
        return evaluate_on_angles(a, np.full(n, angles[row]), angles)

    values = np.stack(map_ordered(_row, range(n)), axis=0)
    logger.debug(f"合成截面：p={params.p}, q={params.q}, n={n}, 项数 {len(a)}")
    return SectionGrid(params=params, n=n, values=values)


def constant_section(params: ModularParams, matrix: ComplexMatrix, n: Optional[int] = None) -> SectionGrid:
    n = default_resolution(params) if n is None else int(n)
    matrix = np.asarray(matrix, dtype=complex)
    return SectionGrid(params=params, n=n, values=np.broadcast_to(matrix, (n, n) + matrix.shape).copy())


def check_membership(s: SectionGrid, tol: Optional[float] = None) -> MembershipReport:
    """检验 a(x1+1,x2) = V₀^{-r} a V₀^{r} 与 a(x1,x2+1) = U₀^{r} a U₀^{-r}"""
    params = s.params
    q, r, n = params.q, params.r, s.n
    if n % q != 0:
        raise ResolutionNotDivisible("分辨率 n 必须是 q 的倍数", n=n, q=q)
    if tol is None:
        tol = Config.get_tolerances().get("membership", 1e-8)
    step = n // q
    values = s.values

    shifted1 = np.roll(values, -step, axis=0)
    expected1 = generator_power(params, 0, -r) @ values @ generator_power(params, 0, r)
    shifted2 = np.roll(values, -step, axis=1)
    expected2 = generator_power(params, r, 0) @ values @ generator_power(params, -r, 0)

    violation = max(float(np.max(np.abs(shifted1 - expected1))), float(np.max(np.abs(shifted2 - expected2))))
    report = MembershipReport(is_member=violation <= tol, max_violation=violation)
    logger.debug(f"等变性检验：max_violation={violation:.3e}, tol={tol}")
    return report


def fourier_coefficients(
    s: SectionGrid,
    m_max: int,
    membership_tol: Optional[float] = None,
    prune_tol: Optional[float] = None,
) -> CoeffTable:
    """c(m,n) = (1/q³)∫ e^{-2πi(m·x1+n·x2)/q} Trace((U₀^mV₀^n)* a(x)) dx，格点上用 FFT 计算"""
    params = s.params
    q, res = params.q, s.n
    m_max = int(m_max)
    if m_max < 0:
        raise RangeError("M_max 不能为负", m_max=m_max)
    tolerances = Config.get_tolerances()
    if membership_tol is None:
        membership_tol = tolerances.get("membership", 1e-8)
    if prune_tol is None:
        prune_tol = tolerances.get("fourier_prune", 1e-12)

    report = check_membership(s, membership_tol)
    if not report.is_member:
        raise MembershipViolation("截面不满足扭曲等变性", max_violation=report.max_violation, tol=membership_tol)
    if 2 * m_max >= res:
        raise AliasingRisk("M_max 超过 Nyquist 限制 n/2", m_max=m_max, n=res)

    # traces[a, b, j, k] = Trace((U₀^j V₀^k)* a(x_ab))
    traces = np.einsum("kij,abij->abk", basis_stack(params).conj(), s.values).reshape(res, res, q, q)
    spectrum = np.fft.fft2(traces, axes=(0, 1)) / (res * res * q)

    coeffs = {}
    for m in range(-m_max, m_max + 1):
        for n in range(-m_max, m_max + 1):
            c = complex(spectrum[m % res, n % res, m % q, n % q])
            if abs(c) >= prune_tol:
                coeffs[(m, n)] = c
    logger.debug(f"Fourier 系数：M_max={m_max}，非零 {len(coeffs)} 项")
    return CoeffTable(coeffs=coeffs, m_max=m_max)


# ---- 粘合函数 ----
def clutching_matrix(params: ModularParams, z: complex) -> ComplexMatrix:
    """G(z) = diag(1, …, 1, z)·U₀，det G(z) = (−1)^{q−1} z"""
    diag = np.ones(params.q, dtype=complex)
    diag[-1] = z
    return np.diag(diag) @ shift_matrix(params)


def clutching_winding(params: ModularParams, samples: Optional[int] = None) -> int:
    """z ↦ det(G(z)^r) 绕单位圆一周的卷绕数"""
    q, r = params.q, params.r
    minimum = 16 * q * r
    samples = 4 * minimum if samples is None else int(samples)
    if samples < minimum:
        raise ResolutionTooLow("采样数需满足 samples ≥ 16·q·r", samples=samples, minimum=minimum)

    t = np.linspace(0.0, _TWO_PI, samples + 1)
    base = np.array([clutching_matrix(params, complex(np.cos(x), np.sin(x))) for x in t])
    dets = np.linalg.det(np.linalg.matrix_power(base, r))

    steps = np.angle(dets[1:] / dets[:-1])
    worst = float(np.max(np.abs(steps)))
    if worst >= math.pi - 1e-12:
        raise PhaseJumpTooLarge("相邻采样点的相位跳变过大", max_step=worst, samples=samples)
    phase = np.unwrap(np.angle(dets))
    winding = int(round((phase[-1] - phase[0]) / _TWO_PI))
    logger.debug(f"卷绕数：p={params.p}, q={q}, r={r}, samples={samples} -> {winding}")
    return winding


def clutching_class(params: ModularParams) -> FrozenSet[int]:
    """粘合函数的同伦类（模 q 的 {r, −r}）"""
    return frozenset({params.r % params.q, (-params.r) % params.q})


def classify_isomorphic(p: int, q: int, p2: int, q2: int) -> bool:
    """A_{p/q} ≅ A_{p2/q2} 当且仅当 q2 = q 且 p2 ∈ {p, q−p}"""
    first = make_params(p, q)
    second = make_params(p2, q2)
    if first.q != second.q:
        return False
    return second.p in (first.p, first.q - first.p)
