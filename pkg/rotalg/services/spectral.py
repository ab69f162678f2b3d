"""Operator norms, band spectra and spectral families.

Norms and spectra are obtained by sweeping the irreducible representations
over a discretised torus: every lattice row is evaluated as one batch
(``evaluate_on_angles`` + a batched Hermitian eigensolver) and rows are fanned
out through :func:`rotalg.utils.parallel.map_ordered`, so the reductions run in
lattice order whatever the worker count.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, optimize

from rotalg.config.settings import Config
from rotalg.models.data_models import (
    BandSpectrum,
    ButterflyRow,
    ComplexMatrix,
    LaurentCoefficients,
    NormResult,
    RepPoint,
    SpectralFamily,
    TorusGrid,
)
from rotalg.models.errors import IndexOutOfRange, NotSelfAdjoint, NotUnitary, RangeError, RotAlgError
from rotalg.services.algebra_core import _as_square, is_unitary, make_params
from rotalg.services.ncpoly import NCLaurentPoly, is_selfadjoint, parse
from rotalg.services.reps import evaluate_on_angles
from rotalg.utils.parallel import map_ordered

logger = logging.getLogger(__name__)

_TWO_PI = 2.0 * math.pi
BUTTERFLY_QMAX_LIMIT = 50
SELFADJOINT_TOL = 1e-10
REFINE_GAIN_TOL = 1e-12
REFINE_EXTRA_ROUNDS = 20


def default_grid() -> TorusGrid:
    n1, n2 = Config.get_compute_config().get("grid", [64, 64])
    return TorusGrid(int(n1), int(n2))


# ---- 网格求值 ----
def _row_angles(grid: TorusGrid, row: int) -> Tuple[np.ndarray, np.ndarray]:
    phi2 = grid.angles2()
    phi1 = np.full_like(phi2, grid.angles1()[row])
    return phi1, phi2


def _top_singular_sq(mats: np.ndarray) -> np.ndarray:
    gram = np.conj(np.swapaxes(mats, -1, -2)) @ mats
    return np.linalg.eigvalsh(gram)[..., -1]


def _norm_surface(a: NCLaurentPoly, grid: TorusGrid) -> np.ndarray:
    """(n1, n2) 网格上的 ‖ρ(a)‖"""

    def _row(row: int) -> np.ndarray:
        phi1, phi2 = _row_angles(grid, row)
        return _top_singular_sq(evaluate_on_angles(a, phi1, phi2))

    rows = map_ordered(_row, range(grid.n1))
    return np.sqrt(np.clip(np.vstack(rows), 0.0, None))


def _point_norm(a: NCLaurentPoly, phi1: float, phi2: float) -> float:
    mat = evaluate_on_angles(a, np.array(phi1), np.array(phi2))
    return float(math.sqrt(max(float(_top_singular_sq(mat)), 0.0)))


def _local_maxima(surface: np.ndarray, limit: int) -> List[Tuple[int, int]]:
    """周期网格上的局部极大（不小于 8 个邻点），按值降序、下标升序取前 limit 个"""
    is_peak = np.ones(surface.shape, dtype=bool)
    for d1 in (-1, 0, 1):
        for d2 in (-1, 0, 1):
            if d1 or d2:
                is_peak &= surface >= np.roll(surface, (d1, d2), axis=(0, 1))
    idx = np.argwhere(is_peak)
    if idx.size == 0:
        idx = np.argwhere(surface == surface.max())
    values = surface[idx[:, 0], idx[:, 1]]
    order = np.lexsort((idx[:, 1], idx[:, 0], -values))
    return [(int(i), int(j)) for i, j in idx[order][:limit]]


def _refine(a: NCLaurentPoly, phi1: float, phi2: float, value: float, spacing: Tuple[float, float], steps: int):
    """坐标轮换的有界一维搜索，每轮在 ±网格间距内先调 φ1 再调 φ2。

    至少跑 ``steps`` 轮，之后一轮增益低于 REFINE_GAIN_TOL 即停，最多再多跑 REFINE_EXTRA_ROUNDS 轮。
    """
    h1, h2 = spacing
    for done in range(steps + REFINE_EXTRA_ROUNDS):
        start = value
        res = optimize.minimize_scalar(
            lambda t: -_point_norm(a, t, phi2), bounds=(phi1 - h1, phi1 + h1), method="bounded",
            options={"xatol": 1e-12},
        )
        if -res.fun > value:
            phi1, value = float(res.x), float(-res.fun)
        res = optimize.minimize_scalar(
            lambda t: -_point_norm(a, phi1, t), bounds=(phi2 - h2, phi2 + h2), method="bounded",
            options={"xatol": 1e-12},
        )
        if -res.fun > value:
            phi2, value = float(res.x), float(-res.fun)
        if done + 1 >= steps and value - start < REFINE_GAIN_TOL:
            break
    return phi1, phi2, value


def _grid_optimum(a: NCLaurentPoly, grid: TorusGrid, steps: int, candidates: int) -> Tuple[float, float, float]:
    """网格最大值及其精化；两个方向都可对半时并入半分辨率网格的结果，加倍网格不会让结果变小"""
    surface = _norm_surface(a, grid)
    angles1, angles2 = grid.angles1(), grid.angles2()
    peaks = _local_maxima(surface, max(1, candidates))
    i, j = peaks[0]
    best = (float(angles1[i]), float(angles2[j]), float(surface[i, j]))
    logger.debug(f"网格 {grid.n1}x{grid.n2} 最大值 {best[2]:.17g}，候选峰 {len(peaks)} 个")
    if not steps:
        return best

    for i, j in peaks:
        found = _refine(a, float(angles1[i]), float(angles2[j]), float(surface[i, j]), grid.spacing, steps)
        if found[2] > best[2]:
            best = found
    if grid.n1 % 2 == 0 and grid.n2 % 2 == 0 and min(grid.n1, grid.n2) >= 8:
        coarse = _grid_optimum(a, TorusGrid(grid.n1 // 2, grid.n2 // 2), steps, candidates)
        if coarse[2] > best[2]:
            best = coarse
    return best


def operator_norm_result(
    a: NCLaurentPoly,
    grid: Optional[TorusGrid] = None,
    refine_steps: Optional[int] = None,
    candidates: Optional[int] = None,
) -> NormResult:
    """‖a‖ = max over 𝕋² of ‖ρ_{z1,z2}(a)‖：网格最大值 + 局部精化，返回下界"""
    compute = Config.get_compute_config()
    grid = grid or default_grid()
    refine_steps = int(compute.get("refine", 3) if refine_steps is None else refine_steps)
    candidates = int(compute.get("refine_candidates", 4) if candidates is None else candidates)
    if refine_steps < 0:
        raise RangeError("refine 不能为负", refine=refine_steps)

    if a.is_zero():
        return NormResult(norm=0.0, argmax=RepPoint(1.0, 1.0), grid=grid, refine=refine_steps)

    phi1, phi2, norm = _grid_optimum(a, grid, refine_steps, candidates)
    logger.info(f"算子范数 {norm:.17g} (p={a.params.p}, q={a.params.q}, grid={grid.n1}x{grid.n2}, refine={refine_steps})")
    return NormResult(norm=norm, argmax=RepPoint.from_angles(phi1, phi2), grid=grid, refine=refine_steps)


def operator_norm(a: NCLaurentPoly, grid: Optional[TorusGrid] = None, refine_steps: Optional[int] = None) -> float:
    return operator_norm_result(a, grid, refine_steps).norm


# ---- 能带谱 ----
def _eigen_surface(a: NCLaurentPoly, grid: TorusGrid) -> np.ndarray:
    """(n1·n2, q) 的升序本征值，按格点行主序"""

    def _row(row: int) -> np.ndarray:
        phi1, phi2 = _row_angles(grid, row)
        mats = evaluate_on_angles(a, phi1, phi2)
        herm = 0.5 * (mats + np.conj(np.swapaxes(mats, -1, -2)))
        return np.linalg.eigvalsh(herm)

    return np.concatenate(map_ordered(_row, range(grid.n1)), axis=0)


def merge_intervals(intervals: Sequence[Tuple[float, float]], merge_tol: float) -> List[Tuple[float, float]]:
    merged: List[Tuple[float, float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1] + merge_tol:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((float(lo), float(hi)))
    return merged


def spectrum_selfadjoint(
    a: NCLaurentPoly, grid: Optional[TorusGrid] = None, merge_tol: Optional[float] = None
) -> BandSpectrum:
    if not is_selfadjoint(a, SELFADJOINT_TOL):
        raise NotSelfAdjoint("元素不是自伴的", p=a.params.p, q=a.params.q)
    grid = grid or default_grid()
    eig = _eigen_surface(a, grid)
    # 第 k 条能带 = 第 k 个本征值在环面上的取值范围
    bands = list(zip(eig.min(axis=0).tolist(), eig.max(axis=0).tolist()))
    if merge_tol is None:
        merge_tol = 1e-6 * (float(eig.max()) - float(eig.min()))
    spectrum = BandSpectrum(merge_intervals(bands, merge_tol))
    logger.debug(f"谱：{len(spectrum)} 条能带 (p={a.params.p}, q={a.params.q})")
    return spectrum


def butterfly(
    q_max: int, expr: str, grid: Optional[TorusGrid] = None, merge_tol: Optional[float] = None
) -> List[ButterflyRow]:
    """所有互素 (p,q)，2 ≤ q ≤ q_max 的能带表，按 (q, p, lo) 排序"""
    q_max = int(q_max)
    if q_max < 2:
        raise RangeError("q_max < 2：没有满足 q ≥ 2 的 (p,q)", q_max=q_max)
    if q_max > BUTTERFLY_QMAX_LIMIT:
        raise RangeError(f"q_max 不能超过 {BUTTERFLY_QMAX_LIMIT}", q_max=q_max)
    grid = grid or default_grid()

    rows: List[ButterflyRow] = []
    for q in range(2, q_max + 1):
        for p in range(1, q):
            if math.gcd(p, q) != 1:
                continue
            try:
                params = make_params(p, q)
                spectrum = spectrum_selfadjoint(parse(expr, params), grid, merge_tol)
            except RotAlgError as e:
                raise e.with_context(p=p, q=q)
            rows.extend(ButterflyRow(p, q, p / q, lo, hi) for lo, hi in spectrum.intervals)
    rows.sort(key=ButterflyRow.sort_key)
    logger.info(f"蝴蝶图数据：q_max={q_max}，共 {len(rows)} 行")
    return rows


# ---- 酉矩阵的谱分解 ----
def spectral_decomposition(M: ComplexMatrix, tol: float = 1e-9, cluster_tol: Optional[float] = None) -> SpectralFamily:
    """U = Σ e^{iφ_k} P_k，φ_k ∈ (0, 2π]；本征值 1 记为相位 2π（E_0 = 0）"""
    M = _as_square(M, "M")
    if not is_unitary(M, tol):
        raise NotUnitary("矩阵不是酉矩阵", tol=tol)
    if cluster_tol is None:
        cluster_tol = Config.get_tolerances().get("cluster", 1e-9)

    T, Z = linalg.schur(M, output="complex")
    eigvals = np.diag(T)
    phases = np.mod(np.angle(eigvals), _TWO_PI)
    near_one = np.abs(eigvals - 1.0) <= cluster_tol
    phases[near_one | (phases == 0.0)] = _TWO_PI
    order = np.argsort(phases, kind="stable")

    clusters: List[List[int]] = []
    for idx in order:
        if clusters and abs(eigvals[idx] - eigvals[clusters[-1][-1]]) <= cluster_tol:
            clusters[-1].append(int(idx))
        else:
            clusters.append([int(idx)])

    out_phases: List[float] = []
    projections: List[ComplexMatrix] = []
    for members in clusters:
        if any(phases[i] == _TWO_PI for i in members):
            phase = _TWO_PI
        else:
            phase = float(np.mean(phases[members]))
        vecs = Z[:, members]
        out_phases.append(phase)
        projections.append(vecs @ vecs.conj().T)
    logger.debug(f"谱分解：维数 {M.shape[0]}，不同本征相位 {len(out_phases)} 个")
    return SpectralFamily(out_phases, projections)


def projection_as_polynomial(M: ComplexMatrix, family: SpectralFamily, k: int) -> LaurentCoefficients:
    """Laurent 插值多项式 p 使 p(M) = P_k：在不同本征值上 p(λ_j) = δ_jk。
    指数取平衡区间 [-m, s-1-m]，m = (s-1)//2，s 为不同本征值个数。
    """
    s = len(family.phases)
    if not 0 <= int(k) < s:
        raise IndexOutOfRange("相位下标越界", k=k, count=s)
    k = int(k)
    if s == 1:
        return LaurentCoefficients(min_power=0, coeffs=np.array([1.0 + 0j]))
    lam = np.exp(1j * np.asarray(family.phases, dtype=float))
    others = np.delete(lam, k)
    m = (s - 1) // 2
    # Q(u) = λ_k^m Π_{j≠k} (u − λ_j)/(λ_k − λ_j)，p(u) = u^{-m} Q(u)
    scale = lam[k] ** m / np.prod(lam[k] - others)
    coeffs = (np.poly(others) * scale)[::-1]
    result = LaurentCoefficients(min_power=-m, coeffs=np.asarray(coeffs, dtype=complex))
    residual = float(np.max(np.abs(result.evaluate(M) - family.projections[k])))
    logger.debug(f"投影多项式：k={k}, 次数 [{-m}, {result.max_power}], 残差 {residual:.3e}")
    return result


def uniform_partition(eps: float) -> np.ndarray:
    """0 = ψ_0 < … < ψ_N = 2π，步长不超过 eps"""
    if not eps > 0:
        raise RangeError("分划步长必须为正", eps=eps)
    count = max(1, int(math.ceil(_TWO_PI / eps)))
    return np.linspace(0.0, _TWO_PI, count + 1)


def riemann_stieltjes_sum(
    family: SpectralFamily, partition: Sequence[float], tags: Optional[Sequence[float]] = None
) -> ComplexMatrix:
    """Σ_k e^{iφ_k}(E_{ψ_k} − E_{ψ_{k-1}})，φ_k ∈ [ψ_{k-1}, ψ_k]，缺省取右端点"""
    points = np.asarray(partition, dtype=float)
    if points.ndim != 1 or points.size < 2:
        raise RangeError("分划至少需要两个点")
    if abs(points[0]) > 1e-12 or abs(points[-1] - _TWO_PI) > 1e-12:
        raise RangeError("分划必须从 0 开始、在 2π 结束", start=float(points[0]), end=float(points[-1]))
    if np.any(np.diff(points) <= 0):
        raise RangeError("分划点必须严格递增")
    points = points.copy()
    points[0], points[-1] = 0.0, _TWO_PI
    if tags is None:
        tags = points[1:]
    tags = np.asarray(tags, dtype=float)
    if tags.shape != (points.size - 1,):
        raise RangeError("标记点数量必须等于子区间数", tags=tags.size, intervals=points.size - 1)
    if np.any(tags < points[:-1]) or np.any(tags > points[1:]):
        raise RangeError("标记点必须落在对应子区间内")

    total = np.zeros((family.dim, family.dim), dtype=complex)
    previous = family.cumulative(points[0])
    for psi, tag in zip(points[1:], tags):
        current = family.cumulative(psi)
        total = total + np.exp(1j * tag) * (current - previous)
        previous = current
    return total
