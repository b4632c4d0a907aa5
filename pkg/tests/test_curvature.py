from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asdkit.curvature import (
    MetricChart, asd_sf_residuals, curvature_at, decompose_at, falloff_exponent, integrate,
    signature_integrand, gauss_bonnet_integrand, two_form_basis,
)
from asdkit.curvature.decomposition import pointwise_invariants
from asdkit.curvature.falloff import metric_deviation
from asdkit.errors import DivergenceError, DomainError, ParameterError, UnreliableEstimateError
from asdkit.metrics import (
    euclidean, flat_torus, fubini_study, gibbons_hawking, GibbonsHawkingSpec, hyperbolic4,
    lebrun, LeBrunSpec, product_s2_h2, round_s4,
)
from asdkit.yamabe import conformal_rescale, random_conformal_factor

coords = st.lists(st.floats(-1.0, 1.0), min_size=4, max_size=4).map(np.array)


def _conformally_flat(a: np.ndarray, b: np.ndarray) -> MetricChart:
    """g = exp(2 f) delta with f = sum_k a_k sin(b_k . x)."""
    def ev(x):
        f = np.sin(x @ b.T) @ a
        return np.exp(2 * f)[..., None, None] * np.eye(4)
    return MetricChart(ev, (-3,) * 4, (3,) * 4, name="conf")


def _conformal_scalar_oracle(a, b, x):
    # s = -6 exp(-2f) (sum_i d_i^2 f + |grad f|^2)
    f = np.sin(b @ x) @ a
    grad = (a * np.cos(b @ x)) @ b
    lap = -np.sum(a * np.sin(b @ x) * np.sum(b * b, axis=1))
    return -6 * math.exp(-2 * f) * (lap + grad @ grad)


# ---------------------------------------------------------------- tensors

def test_flat_metric_has_zero_curvature():
    fc = curvature_at(euclidean(), [0.3, -1.0, 2.0, 0.5])
    assert np.max(np.abs(fc.riemann)) < 1e-9 and abs(fc.scalar) < 1e-9


@pytest.mark.parametrize("radius", [0.5, 1.0, 3.0])
def test_round_s4_scalar(radius):
    chart = round_s4(radius)
    rng = np.random.default_rng(0)
    for x in rng.uniform(-1.5 * radius, 1.5 * radius, (5, 4)):
        fc = curvature_at(chart, x)
        assert abs(fc.scalar - 12 / radius ** 2) < 1e-6 / radius ** 2
        # constant sectional curvature: R_abcd = K (d_ac d_bd - d_ad d_bc)
        I = np.eye(4)
        model = (np.einsum("ac,bd->abcd", I, I) - np.einsum("ad,bc->abcd", I, I)) / radius ** 2
        assert np.max(np.abs(fc.riemann_orthonormal - model)) < 1e-6 / radius ** 2


@settings(max_examples=20, deadline=None)
@given(coords)
def test_conformally_flat_scalar_matches_closed_form(x):
    a = np.array([0.3, -0.2, 0.25])
    b = np.array([[1.0, 0.5, -0.3, 0.2], [0.1, -0.7, 0.4, 0.9], [0.6, 0.2, 0.8, -0.5]])
    fc = curvature_at(_conformally_flat(a, b), x)
    assert abs(fc.scalar - _conformal_scalar_oracle(a, b, x)) < 1e-6


def test_product_s2_h2():
    d = decompose_at(product_s2_h2(), [1.2, 0.4, 0.3, 1.1])
    assert abs(d.scalar) < 1e-6
    assert np.linalg.norm(d.w_plus) < 1e-6 and np.linalg.norm(d.w_minus) < 1e-6
    assert np.linalg.norm(d.ricci_traceless) == pytest.approx(2.0, abs=1e-6)
    assert np.allclose(np.linalg.svd(d.b_block, compute_uv=False), [1, 0, 0], atol=1e-6)


def test_hyperbolic_space():
    fc = curvature_at(hyperbolic4(), [0.1, 0.2, -0.1, 1.0])
    assert fc.scalar == pytest.approx(-12, abs=1e-6)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_riemann_symmetries_within_fd_error(seed):
    rng = np.random.default_rng(seed)
    chart = conformal_rescale(fubini_study(), random_conformal_factor(rng))
    fc = curvature_at(chart, rng.uniform(-1, 1, 4))
    tol = 10 * fc.delta_fd + 1e-9
    for name, v in fc.symmetry_defects().items():
        assert v <= tol, name


def test_domain_checks():
    gh = gibbons_hawking(GibbonsHawkingSpec((-1.0, 1.0)))
    with pytest.raises(DomainError):
        curvature_at(gh, [0.0, 0.02, 1.01, 0.5])
    with pytest.raises(DomainError):
        curvature_at(round_s4(1.0), [3.5, 0, 0, 0])


# ---------------------------------------------------------------- decomposition

def test_two_form_basis_orthonormal_and_orientation():
    for o in (1, -1):
        w = two_form_basis(o)
        assert np.allclose(np.einsum("pab,qab->pq", w, w), 2 * np.eye(6))
    # flipping the orientation swaps the self-dual and anti-self-dual halves
    assert np.allclose(two_form_basis(-1)[:3], two_form_basis(1)[3:])


def _points(chart, n=6, seed=0):
    return chart.sample(n, np.random.default_rng(seed), margin=0.1 * chart.scale)


@pytest.mark.parametrize("make", [fubini_study, product_s2_h2,
                                  lambda: lebrun(LeBrunSpec(3)),
                                  lambda: gibbons_hawking(GibbonsHawkingSpec((-1.0, 1.0)))])
def test_decomposition_reconstructs_operator(make):
    chart = make()
    for x in _points(chart, 4):
        d = decompose_at(chart, x)
        assert np.allclose(d.reconstruct(), d.operator, atol=1e-12)
        assert abs(np.trace(d.w_plus)) < 1e-6 and abs(np.trace(d.w_minus)) < 1e-6
        assert np.allclose(d.w_plus, d.w_plus.T, atol=1e-6)
        # |r0|^2 = 4 |B|^2
        assert np.linalg.norm(d.ricci_traceless) ** 2 == pytest.approx(
            4 * np.linalg.norm(d.b_block) ** 2, abs=1e-6)


def test_fubini_study_eigenvalues():
    d = decompose_at(fubini_study(), [0.3, -0.2, 0.5, 0.1])
    assert d.scalar == pytest.approx(24, abs=1e-5)
    assert np.allclose(np.linalg.eigvalsh(d.w_plus), [-2, -2, 4], atol=1e-5)
    assert np.linalg.norm(d.w_minus) < 1e-6
    assert np.linalg.norm(d.ricci_traceless) < 1e-6


@pytest.mark.parametrize("make", [fubini_study, lambda: lebrun(LeBrunSpec(3))])
def test_orientation_flip(make):
    chart = make()
    x = _points(chart, 1, seed=3)[0]
    d, f = decompose_at(chart, x), decompose_at(chart.flipped(), x)
    assert np.allclose(np.linalg.eigvalsh(d.w_plus), np.linalg.eigvalsh(f.w_minus), atol=1e-9)
    assert np.allclose(np.linalg.eigvalsh(d.w_minus), np.linalg.eigvalsh(f.w_plus), atol=1e-9)
    assert signature_integrand(chart.flipped(), x) == pytest.approx(-signature_integrand(chart, x), abs=1e-9)
    assert gauss_bonnet_integrand(chart.flipped(), x) == pytest.approx(gauss_bonnet_integrand(chart, x), abs=1e-9)


@pytest.mark.parametrize("make", [fubini_study, round_s4, product_s2_h2, lambda: lebrun(LeBrunSpec(2)),
                                  lambda: lebrun(LeBrunSpec(3))])
def test_b_vanishes_iff_einstein(make):
    chart = make()
    inv = pointwise_invariants(chart, _points(chart, 5))
    d = decompose_at(chart, _points(chart, 1)[0])
    b = np.linalg.norm(d.b_block)
    assert (b < 1e-6) == (np.max(inv["ricci0"]) < 1e-6)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_weyl_eigenvalues_conformally_covariant(seed):
    rng = np.random.default_rng(seed)
    base = lebrun(LeBrunSpec(3))
    u = random_conformal_factor(rng, center=(2.0, 1.5, 0.0, 0.0))
    x = _points(base, 1, seed=seed)[0]
    d0, d1 = decompose_at(base, x), decompose_at(conformal_rescale(base, u), x)
    factor = u(x) ** -2
    for a, b in ((d0.w_plus, d1.w_plus), (d0.w_minus, d1.w_minus)):
        assert np.allclose(np.linalg.eigvalsh(a) * factor, np.linalg.eigvalsh(b), atol=1e-6)


def test_residual_report_views():
    chart = lebrun(LeBrunSpec(3))
    rep = asd_sf_residuals(chart, _points(chart, 5))
    assert rep.sup()["sup_w_plus"] == rep.sup(flipped=True)["sup_w_minus"]
    d = rep.as_dict()
    assert d["flipped"]["orientation"] == -rep.orientation
    lines = rep.to_csv().strip().splitlines()
    assert lines[0] == "x1,x2,x3,x4,s,w_plus,w_minus,ricci0,delta_fd" and len(lines) == 6
    with pytest.raises(ParameterError):
        asd_sf_residuals(chart, np.zeros((0, 4)))


# ---------------------------------------------------------------- quadrature

def test_torus_volume():
    r = integrate(flat_torus(), "volume", 8)
    assert abs(r.value - (2 * math.pi) ** 4) < 1e-9
    assert r.estimated_error < 1e-9


def test_s4_volume():
    from asdkit.metrics import round_s4_atlas
    r = integrate(round_s4_atlas(1.0), "volume", 16)
    assert r.value == pytest.approx(8 * math.pi ** 2 / 3, rel=1e-3)


def test_divergence_detected():
    chart = euclidean(1.0)
    with pytest.raises(DivergenceError):
        integrate(chart, lambda c, X: np.cos(40 * X[:, 0]), 8)


def test_quadrature_rejects_low_resolution():
    with pytest.raises(ParameterError):
        integrate(flat_torus(), "volume", 4)
    with pytest.raises(ParameterError):
        integrate(flat_torus(), "nonsense", 8)


def test_quadrature_threads_identical():
    chart = round_s4(1.0)
    a = integrate(chart, "gauss_bonnet", 8, threads=1)
    b = integrate(chart, "gauss_bonnet", 8, threads=3)
    assert a.value == b.value and a.estimated_error == b.estimated_error


# ---------------------------------------------------------------- falloff

def test_metric_deviation_frame_independent():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(4, 4))
    g0 = A @ A.T + 4 * np.eye(4)
    g = g0 + 0.01 * np.eye(4)
    P = rng.normal(size=(4, 4))
    assert metric_deviation(g, g0) == pytest.approx(metric_deviation(P.T @ g @ P, P.T @ g0 @ P), rel=1e-9)


def test_falloff_gibbons_hawking():
    chart = gibbons_hawking(GibbonsHawkingSpec((-1.0, 1.0)))
    assert falloff_exponent(chart, np.geomspace(10, 100, 6), 20) == pytest.approx(-4, abs=0.1)


def test_falloff_lebrun():
    assert falloff_exponent(lebrun(LeBrunSpec(3)), np.geomspace(10, 100, 6), 20) == pytest.approx(-2, abs=0.1)


def test_falloff_refusals():
    with pytest.raises(ParameterError):
        falloff_exponent(euclidean(), [10, 100])
    chart = gibbons_hawking(GibbonsHawkingSpec((-1.0, 1.0)))
    with pytest.raises(ParameterError):
        falloff_exponent(chart, [10, 20])
    with pytest.raises(ParameterError):
        falloff_exponent(chart, [100, 10])
    flat = lebrun(LeBrunSpec(3))
    exact = MetricChart(flat.flat_model, flat.lo, flat.hi, flat_model=flat.flat_model,
                        radial_sampler=flat.radial_sampler)
    with pytest.raises(UnreliableEstimateError):
        falloff_exponent(exact, [10, 100])
