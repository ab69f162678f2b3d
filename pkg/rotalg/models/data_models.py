import cmath
import math
from dataclasses import dataclass, field
from typing import List, Dict, Any, Optional, Tuple, Literal

import numpy as np
import numpy.typing as npt

from rotalg.models.errors import RangeError, DimensionMismatch, ResolutionTooLow

ComplexMatrix = npt.NDArray[np.complex128]

# 单位模长容差（RepPoint 构造时校验）
UNIT_MODULUS_TOL = 1e-12

_QUARTER_TURNS = (1 + 0j, 1j, -1 + 0j, -1j)


def root_of_unity(k: int, q: int) -> complex:
    """exp(2πi·k/q)，先对 k 取模再按角度计算，四分之一圈的角度给出精确值。"""
    k = int(k) % q
    if (4 * k) % q == 0:
        return _QUARTER_TURNS[(4 * k) // q]
    angle = 2.0 * math.pi * k / q
    return complex(math.cos(angle), math.sin(angle))


def matrix_to_pairs(m: np.ndarray) -> List[List[List[float]]]:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m)]


@dataclass(frozen=True)
class ModularParams:
    """固定有理旋转代数的算术参数 (p, q, r, ω, σ)"""

    p: int
    q: int
    r: int
    omega: complex
    sigma: complex

    @property
    def theta(self) -> float:
        return self.p / self.q

    def omega_power(self, k: int) -> complex:
        return root_of_unity(int(k) * self.p, self.q)

    def sigma_power(self, k: int) -> complex:
        return root_of_unity(int(k), self.q)

    def same_algebra(self, other: "ModularParams") -> bool:
        return (self.p, self.q) == (other.p, other.q)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "q": self.q,
            "r": self.r,
            "omega": [self.omega.real, self.omega.imag],
            "sigma": [self.sigma.real, self.sigma.imag],
        }


@dataclass(frozen=True)
class RepPoint:
    """环面上的点 (z1, z2)，标记不可约表示 ρ_{z1,z2}"""

    z1: complex
    z2: complex

    def __post_init__(self):
        for name in ("z1", "z2"):
            z = complex(getattr(self, name))
            object.__setattr__(self, name, z)
            if abs(abs(z) - 1.0) > UNIT_MODULUS_TOL:
                raise RangeError(f"{name} 不在单位圆上", value=z)

    @classmethod
    def from_angles(cls, phi1: float, phi2: float) -> "RepPoint":
        return cls(cmath.exp(1j * phi1), cmath.exp(1j * phi2))

    @property
    def angles(self) -> Tuple[float, float]:
        return (cmath.phase(self.z1) % (2 * math.pi), cmath.phase(self.z2) % (2 * math.pi))

    def to_dict(self) -> Dict[str, Any]:
        phi1, phi2 = self.angles
        return {
            "z1": [self.z1.real, self.z1.imag],
            "z2": [self.z2.real, self.z2.imag],
            "phi1": phi1,
            "phi2": phi2,
        }


@dataclass(frozen=True)
class TorusGrid:
    """环面离散化：格点 (e^{2πi a/n1}, e^{2πi b/n2})"""

    n1: int = 64
    n2: int = 64

    def __post_init__(self):
        if int(self.n1) < 4 or int(self.n2) < 4:
            raise RangeError("网格每个方向至少需要 4 个采样点", n1=self.n1, n2=self.n2)

    @classmethod
    def from_spec(cls, spec: str) -> "TorusGrid":
        """解析 'N1xN2' 形式的网格描述"""
        text = (spec or "").strip().lower()
        parts = text.split("x")
        if len(parts) != 2:
            raise RangeError(f"无法解析网格描述 {spec!r}，应为 N1xN2")
        try:
            return cls(int(parts[0]), int(parts[1]))
        except ValueError as e:
            raise RangeError(f"无法解析网格描述 {spec!r}，应为 N1xN2") from e

    def angles1(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n1) / self.n1

    def angles2(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n2) / self.n2

    @property
    def spacing(self) -> Tuple[float, float]:
        return (2.0 * math.pi / self.n1, 2.0 * math.pi / self.n2)

    def to_dict(self) -> Dict[str, Any]:
        return {"n1": self.n1, "n2": self.n2}


@dataclass
class SpectralFamily:
    """酉矩阵的谱族：(0, 2π] 内升序本征相位与对应的正交投影"""

    phases: List[float]
    projections: List[ComplexMatrix]

    def __post_init__(self):
        if len(self.phases) != len(self.projections):
            raise DimensionMismatch("相位与投影数量不一致")

    @property
    def dim(self) -> int:
        return int(self.projections[0].shape[0]) if self.projections else 0

    def cumulative(self, phi: float) -> ComplexMatrix:
        """E_φ：所有相位 ≤ φ 的跳跃投影之和；约定 E_0 = 0"""
        result = np.zeros((self.dim, self.dim), dtype=complex)
        for phase, proj in zip(self.phases, self.projections):
            if phase <= phi:
                result = result + proj
        return result

    def reconstruct(self) -> ComplexMatrix:
        result = np.zeros((self.dim, self.dim), dtype=complex)
        for phase, proj in zip(self.phases, self.projections):
            result = result + cmath.exp(1j * phase) * proj
        return result

    def to_dict(self) -> Dict[str, Any]:
        return {
            "phases": [float(p) for p in self.phases],
            "projections": [matrix_to_pairs(P) for P in self.projections],
        }


@dataclass
class BandSpectrum:
    """自伴元的谱：升序、互不相交的闭区间"""

    intervals: List[Tuple[float, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.intervals)

    @property
    def lo(self) -> float:
        return self.intervals[0][0]

    @property
    def hi(self) -> float:
        return self.intervals[-1][1]

    def to_dict(self) -> Dict[str, Any]:
        return {"intervals": [[float(lo), float(hi)] for lo, hi in self.intervals]}


@dataclass
class SectionGrid:
    """[0,q)² 上采样的矩阵值截面，格点 (a,b) 对应 x = (q·a/n, q·b/n)"""

    params: ModularParams
    n: int
    values: np.ndarray

    def __post_init__(self):
        q = self.params.q
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.n, self.n, q, q):
            raise DimensionMismatch(
                "截面数组形状不符", expected=(self.n, self.n, q, q), got=self.values.shape
            )
        if self.n < 4 * q:
            raise ResolutionTooLow("截面分辨率需满足 n ≥ 4q", n=self.n, q=q)

    def value_at(self, a: int, b: int) -> ComplexMatrix:
        return self.values[a % self.n, b % self.n]

    def to_dict(self) -> Dict[str, Any]:
        flat = self.values.reshape(self.n * self.n, self.params.q, self.params.q)
        return {
            "p": self.params.p,
            "q": self.params.q,
            "n": self.n,
            "values": [matrix_to_pairs(m) for m in flat],
        }


@dataclass
class CoeffTable:
    """Fourier 系数表 (m,n) -> c(m,n)，|m|,|n| ≤ m_max"""

    coeffs: Dict[Tuple[int, int], complex]
    m_max: int

    def __len__(self) -> int:
        return len(self.coeffs)

    def get(self, m: int, n: int) -> complex:
        return self.coeffs.get((m, n), 0j)

    def to_poly(self, params: ModularParams):
        from rotalg.services.ncpoly import NCLaurentPoly

        return NCLaurentPoly(params, self.coeffs)

    def rows(self) -> List[Tuple[int, int, float, float]]:
        return [(m, n, c.real, c.imag) for (m, n), c in sorted(self.coeffs.items())]


@dataclass
class MembershipReport:
    """扭曲等变性检验结果"""

    is_member: bool
    max_violation: float

    def to_dict(self) -> Dict[str, Any]:
        return {"is_member": self.is_member, "max_violation": self.max_violation}


@dataclass
class NormResult:
    """算子范数及其最大值点"""

    norm: float
    argmax: RepPoint
    grid: TorusGrid
    refine: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "norm": self.norm,
            "argmax": self.argmax.to_dict(),
            "grid": [self.grid.n1, self.grid.n2],
            "refine": self.refine,
        }


@dataclass
class ButterflyRow:
    """蝴蝶图数据行：一个 (p,q) 的一条能带"""

    p: int
    q: int
    theta: float
    band_lo: float
    band_hi: float

    def sort_key(self) -> Tuple[int, int, float]:
        return (self.q, self.p, self.band_lo)


@dataclass
class LaurentCoefficients:
    """单变量 Laurent 多项式 Σ_k c_k u^{min_power+k}"""

    min_power: int
    coeffs: np.ndarray

    @property
    def max_power(self) -> int:
        return self.min_power + len(self.coeffs) - 1

    def as_dict(self) -> Dict[int, complex]:
        return {self.min_power + i: complex(c) for i, c in enumerate(self.coeffs)}

    def evaluate(self, M: ComplexMatrix) -> ComplexMatrix:
        """Horner 形式计算 p(M)，负幂次通过 M^{-1} 的幂给出"""
        M = np.asarray(M, dtype=complex)
        acc = np.zeros_like(M)
        for c in self.coeffs[::-1]:
            acc = acc @ M + c * np.eye(M.shape[0], dtype=complex)
        if self.min_power:
            acc = acc @ np.linalg.matrix_power(M, self.min_power)
        return acc


@dataclass
class RunConfig:
    """CLI 单次运行的配置"""

    command: str
    p: Optional[int] = None
    q: Optional[int] = None
    expr: str = ""
    grid: Tuple[int, int] = (64, 64)
    refine: int = 3
    tolerance: float = 1e-9
    output: Optional[str] = None
    format: Literal["csv", "json"] = "json"
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "p": self.p,
            "q": self.q,
            "expr": self.expr,
            "grid": list(self.grid),
            "refine": self.refine,
            "tolerance": self.tolerance,
            "output": self.output,
            "format": self.format,
        }
