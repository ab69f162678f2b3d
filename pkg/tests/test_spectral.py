import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from rotalg.models.data_models import RepPoint, SpectralFamily, TorusGrid
from rotalg.models.errors import IndexOutOfRange, NotSelfAdjoint, NotUnitary, RangeError
from rotalg.services.algebra_core import clock_matrix, make_params, shift_matrix
from rotalg.services.ncpoly import NCLaurentPoly, harper_element, parse
from rotalg.services.reps import random_rep_point, rep_evaluate
from rotalg.services.spectral import (
    butterfly,
    merge_intervals,
    operator_norm,
    operator_norm_result,
    projection_as_polynomial,
    riemann_stieltjes_sum,
    spectral_decomposition,
    spectrum_selfadjoint,
    uniform_partition,
)

GRID = TorusGrid(64, 64)
SQRT8 = 2 * math.sqrt(2)


def _coprime_pairs(q_max):
    return [(p, q) for q in range(2, q_max + 1) for p in range(1, q) if math.gcd(p, q) == 1]


# ---- 范数 ----
def test_norm_of_generator_is_one():
    assert operator_norm(parse("U", make_params(1, 3)), GRID, 3) == pytest.approx(1.0, abs=1e-12)


def test_norm_of_harper_at_one_half(params_12):
    assert operator_norm(harper_element(params_12), GRID, 3) == pytest.approx(SQRT8, abs=1e-6)


def test_norm_of_u_plus_v_at_one_half(params_12):
    assert operator_norm(parse("U+V", params_12), GRID, 3) == pytest.approx(2.0, abs=1e-6)


def test_norm_of_zero(params_25):
    result = operator_norm_result(NCLaurentPoly.zero(params_25), GRID, 3)
    assert result.norm == 0.0
    assert result.to_dict()["grid"] == [64, 64]


def test_norm_result_reports_argmax(params_12):
    result = operator_norm_result(harper_element(params_12), GRID, 3)
    a = harper_element(params_12)
    assert np.linalg.norm(rep_evaluate(a, result.argmax), 2) == pytest.approx(result.norm, abs=1e-9)
    assert result.refine == 3


def test_norm_rejects_negative_refine(params_12):
    with pytest.raises(RangeError):
        operator_norm(harper_element(params_12), GRID, -1)


def test_refinement_recovers_off_grid_maximum():
    # 最大值点 φ1 − φ2 = π/2 不在 10×10 网格上
    params = make_params(1, 2)
    a = parse("U+V", params)
    coarse = operator_norm(a, TorusGrid(10, 10), 0)
    refined = operator_norm(a, TorusGrid(10, 10), 3)
    assert coarse < 2.0 - 1e-4
    assert refined >= coarse
    assert refined == pytest.approx(2.0, abs=1e-6)


def test_norm_grid_monotone_and_bounded(rng, params_25):
    a = parse("U^2*V - 0.5*V' + (1+i)*U'", params_25)
    coarse = operator_norm(a, TorusGrid(16, 16), 0)
    fine = operator_norm(a, TorusGrid(32, 32), 0)
    assert fine >= coarse
    assert operator_norm(a, TorusGrid(32, 32), 3) >= operator_norm(a, TorusGrid(16, 16), 3)
    assert operator_norm(a, GRID, 3) <= sum(abs(c) for c in a.coeffs.values()) + 1e-12


def test_refined_norm_never_drops_when_grid_doubles(rng):
    params = make_params(3, 7)
    for _ in range(12):
        coeffs = {}
        for _ in range(int(rng.integers(2, 6))):
            m, n = (int(v) for v in rng.integers(-2, 3, size=2))
            coeffs[(m, n)] = complex(rng.normal(), rng.normal())
        a = NCLaurentPoly(params, coeffs)
        assert operator_norm(a, TorusGrid(16, 16), 3) >= operator_norm(a, TorusGrid(8, 8), 3)


def test_norm_dominates_every_representation(rng):
    for trial in range(20):
        params = make_params(1, 2 + trial % 3)
        coeffs = {}
        for _ in range(int(rng.integers(1, 5))):
            m, n = (int(v) for v in rng.integers(-2, 3, size=2))
            coeffs[(m, n)] = complex(rng.normal(), rng.normal())
        a = NCLaurentPoly(params, coeffs)
        bound = operator_norm(a, GRID, 3)
        for _ in range(5):
            pt = random_rep_point(rng)
            assert np.linalg.norm(rep_evaluate(a, pt), 2) <= bound + 1e-8


def test_norm_is_independent_of_worker_count(monkeypatch, params_25):
    a = parse("U+2*V-U*V'", params_25)
    monkeypatch.setenv("ROTALG_THREADS", "1")
    single = operator_norm_result(a, TorusGrid(24, 24), 2)
    monkeypatch.setenv("ROTALG_THREADS", "4")
    multi = operator_norm_result(a, TorusGrid(24, 24), 2)
    assert single.norm == multi.norm
    assert single.argmax == multi.argmax


# ---- 能带谱 ----
def test_spectrum_of_identity(params_25):
    spectrum = spectrum_selfadjoint(parse("1", params_25), GRID)
    np.testing.assert_allclose(spectrum.intervals, [[1.0, 1.0]], atol=1e-14)


@pytest.mark.parametrize("p, q", [(1, 2), (1, 3), (2, 5), (3, 7)])
def test_spectrum_of_v_plus_v_adjoint(p, q):
    spectrum = spectrum_selfadjoint(parse("V+V'", make_params(p, q)), GRID)
    assert len(spectrum) == 1
    assert spectrum.lo == pytest.approx(-2.0, abs=1e-12)
    assert spectrum.hi == pytest.approx(2.0, abs=1e-12)


def test_spectrum_of_harper_at_one_half(params_12):
    spectrum = spectrum_selfadjoint(harper_element(params_12), GRID)
    assert len(spectrum) == 1
    assert spectrum.lo == pytest.approx(-SQRT8, abs=1e-12)
    assert spectrum.hi == pytest.approx(SQRT8, abs=1e-12)


def test_spectrum_requires_selfadjoint(params_25):
    with pytest.raises(NotSelfAdjoint) as exc_info:
        spectrum_selfadjoint(parse("U+V", params_25), GRID)
    assert exc_info.value.context["q"] == 5


def test_merge_intervals():
    assert merge_intervals([(2.0, 3.0), (0.0, 1.0), (1.0 + 1e-9, 1.5)], 1e-6) == [(0.0, 1.5), (2.0, 3.0)]
    assert merge_intervals([(0.0, 1.0), (1.1, 2.0)], 1e-6) == [(0.0, 1.0), (1.1, 2.0)]


def _bands(p, q):
    return np.array(spectrum_selfadjoint(harper_element(make_params(p, q)), GRID).intervals)


def test_harper_band_symmetries():
    """E ↦ −E symmetry, equality for (p,q) and (q−p,q), at most q bands, q ≤ 10."""
    for p, q in _coprime_pairs(10):
        bands = _bands(p, q)
        assert 1 <= len(bands) <= q
        mirrored = -bands[::-1, ::-1]
        np.testing.assert_allclose(bands, mirrored, atol=1e-8)
        np.testing.assert_allclose(bands, _bands(q - p, q), atol=1e-8)


def test_butterfly_rows_for_one_half():
    rows = butterfly(2, "U+U'+V+V'", GRID)
    assert [(r.p, r.q) for r in rows] == [(1, 2)]
    assert rows[0].theta == 0.5
    assert rows[0].band_lo == pytest.approx(-SQRT8, abs=1e-12)
    assert rows[0].band_hi == pytest.approx(SQRT8, abs=1e-12)


def test_butterfly_row_order_and_isomorphism_symmetry():
    rows = butterfly(5, "U+U'+V+V'", TorusGrid(32, 32))
    keys = [r.sort_key() for r in rows]
    assert keys == sorted(keys)
    assert {(r.p, r.q) for r in rows} == set(_coprime_pairs(5))
    by_pair = {}
    for r in rows:
        by_pair.setdefault((r.p, r.q), []).append((r.band_lo, r.band_hi))
    for (p, q), bands in by_pair.items():
        np.testing.assert_allclose(bands, by_pair[(q - p, q)], atol=1e-8)


@pytest.mark.parametrize("q_max", [1, 0, 51])
def test_butterfly_rejects_out_of_range_qmax(q_max):
    with pytest.raises(RangeError):
        butterfly(q_max, "U+U'+V+V'", GRID)


def test_butterfly_reports_offending_pair():
    with pytest.raises(NotSelfAdjoint) as exc_info:
        butterfly(3, "U+V", TorusGrid(8, 8))
    assert (exc_info.value.context["p"], exc_info.value.context["q"]) == (1, 2)


# ---- 谱分解 ----
def test_decomposition_of_identity():
    family = spectral_decomposition(np.eye(3))
    assert family.phases == [2 * math.pi]
    np.testing.assert_allclose(family.projections[0], np.eye(3), atol=1e-12)


def test_decomposition_of_shift_q2(params_12):
    family = spectral_decomposition(shift_matrix(params_12))
    assert family.phases == pytest.approx([math.pi, 2 * math.pi])
    np.testing.assert_allclose(family.projections[0], [[0.5, -0.5], [-0.5, 0.5]], atol=1e-12)
    np.testing.assert_allclose(family.projections[1], [[0.5, 0.5], [0.5, 0.5]], atol=1e-12)


def test_decomposition_of_clock_q4():
    family = spectral_decomposition(clock_matrix(make_params(1, 4)))
    assert family.phases == pytest.approx([math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi])
    for k, expected_index in enumerate([1, 2, 3, 0]):
        unit = np.zeros((4, 4))
        unit[expected_index, expected_index] = 1.0
        np.testing.assert_allclose(family.projections[k], unit, atol=1e-12)


def test_decomposition_clusters_degenerate_eigenvalues():
    M = np.diag([1j, 1j, -1.0])
    family = spectral_decomposition(M)
    assert family.phases == pytest.approx([math.pi / 2, math.pi])
    assert np.trace(family.projections[0]).real == pytest.approx(2.0)


def test_decomposition_requires_unitary():
    with pytest.raises(NotUnitary):
        spectral_decomposition(2 * np.eye(2))


def _check_family(M, family):
    dim = M.shape[0]
    eye = np.eye(dim)
    phases = family.phases
    assert all(0 < a < b for a, b in zip(phases, phases[1:])) or len(phases) == 1
    assert 0 < phases[0] and phases[-1] <= 2 * math.pi
    for P in family.projections:
        assert np.max(np.abs(P - P.conj().T)) <= 1e-10
        assert np.max(np.abs(P @ P - P)) <= 1e-10
    cumulative = [family.cumulative(phi) for phi in phases]
    for i, Ei in enumerate(cumulative):
        for Ej in cumulative[i:]:
            assert np.max(np.abs(Ei @ Ej - Ei)) <= 1e-10
    assert np.max(np.abs(cumulative[-1] - eye)) <= 1e-10
    assert np.max(np.abs(family.cumulative(0.0))) == 0.0
    assert np.max(np.abs(M - family.reconstruct())) <= 1e-10


@pytest.mark.parametrize("q", range(2, 17))
def test_random_unitaries_decompose(q):
    rng = np.random.default_rng(1000 + q)
    for _ in range(100):
        M = unitary_group.rvs(q, random_state=rng)
        family = spectral_decomposition(M)
        _check_family(M, family)
        for k in range(len(family.phases)):
            poly = projection_as_polynomial(M, family, k)
            assert poly.max_power - poly.min_power < len(family.phases)
            assert np.max(np.abs(poly.evaluate(M) - family.projections[k])) <= 1e-9
        for eps in (0.5, 0.1):
            approx = riemann_stieltjes_sum(family, uniform_partition(eps))
            assert np.linalg.norm(M - approx, 2) <= eps


def test_projection_polynomial_two_point_example():
    M = np.diag([1.0, -1.0]).astype(complex)
    family = spectral_decomposition(M)
    poly = projection_as_polynomial(M, family, 0)
    assert poly.min_power == 0
    np.testing.assert_allclose(poly.coeffs, [0.5, -0.5], atol=1e-15)
    np.testing.assert_allclose(poly.evaluate(M), np.diag([0.0, 1.0]), atol=1e-15)

    U0 = shift_matrix(make_params(1, 2))
    family_u = spectral_decomposition(U0)
    np.testing.assert_allclose(
        projection_as_polynomial(U0, family_u, 0).evaluate(U0), [[0.5, -0.5], [-0.5, 0.5]], atol=1e-12
    )


def test_projection_polynomial_on_cube_roots():
    V0 = clock_matrix(make_params(1, 3))
    family = spectral_decomposition(V0)
    for k in range(3):
        poly = projection_as_polynomial(V0, family, k)
        assert (poly.min_power, poly.max_power) == (-1, 1)
        assert np.max(np.abs(poly.evaluate(V0) - family.projections[k])) <= 1e-9


def test_projection_polynomial_index_checks():
    family = spectral_decomposition(np.eye(2))
    assert projection_as_polynomial(np.eye(2), family, 0).as_dict() == {0: 1}
    with pytest.raises(IndexOutOfRange):
        projection_as_polynomial(np.eye(2), family, 1)
    with pytest.raises(IndexOutOfRange):
        projection_as_polynomial(np.eye(2), family, -1)


def test_riemann_stieltjes_validates_partition():
    family = SpectralFamily([2 * math.pi], [np.eye(2)])
    with pytest.raises(RangeError):
        uniform_partition(0.0)
    with pytest.raises(RangeError):
        riemann_stieltjes_sum(family, [0.0, 1.0])
    with pytest.raises(RangeError):
        riemann_stieltjes_sum(family, [0.0, 3.0, 2.0, 2 * math.pi])
    with pytest.raises(RangeError):
        riemann_stieltjes_sum(family, [0.0, 2 * math.pi], tags=[7.0])
    np.testing.assert_allclose(riemann_stieltjes_sum(family, [0.0, 2 * math.pi], tags=[0.0]), np.eye(2))


def test_uniform_partition_mesh():
    points = uniform_partition(0.1)
    assert points[0] == 0.0 and points[-1] == 2 * math.pi
    assert np.max(np.diff(points)) <= 0.1
