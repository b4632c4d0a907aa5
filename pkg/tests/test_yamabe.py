from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asdkit.curvature.tensors import curvature_batch
from asdkit.errors import ParameterError
from asdkit.kleinian.dimension import DimensionEstimate
from asdkit.metrics import (
    GibbonsHawkingSpec, LeBrunSpec, fubini_study, gibbons_hawking, hyperbolic4, lebrun,
    product_s2_h2, round_s4, round_s4_atlas,
)
from asdkit.yamabe import (
    ScalarField, conformal_law_residual, conformal_rescale, constant_field, cutoff_test_function,
    laplacian, negativity_budget, random_conformal_factor, rayleigh_quotient, s4_harmonic,
    scalar_sign_from_limit_set, smoothstep,
)


def test_unit_factor_leaves_metric_unchanged():
    chart = lebrun(LeBrunSpec(3))
    x = chart.sample(20, np.random.default_rng(0), margin=0.1)
    assert np.array_equal(conformal_rescale(chart, constant_field(1.0))(x), chart(x))


@pytest.mark.parametrize("c", [0.5, 2.0, 3.0])
def test_constant_rescale_scales_scalar_curvature(c):
    chart = round_s4(1.0)
    x = chart.sample(5, np.random.default_rng(1), margin=0.1)
    s = curvature_batch(chart, x)["s"]
    s_hat = curvature_batch(conformal_rescale(chart, constant_field(c)), x)["s"]
    assert np.allclose(s_hat, s / c ** 2, rtol=1e-6)


def test_rescale_rejects_nonpositive_factor():
    with pytest.raises(ParameterError):
        conformal_rescale(round_s4(1.0), ScalarField(lambda x: x[..., 0]))


def test_laplacian_of_harmonic_on_s4():
    # first spherical harmonics are eigenfunctions with eigenvalue n = 4 on the unit sphere
    chart = round_s4(1.0)
    u = s4_harmonic(1.0, 2)
    x = chart.sample(10, np.random.default_rng(2), margin=0.2)
    assert np.allclose(laplacian(chart, u, x), 4 * u(x), atol=1e-6)


@pytest.mark.parametrize("make", [round_s4, product_s2_h2, fubini_study, lambda: lebrun(LeBrunSpec(3)),
                                  lambda: gibbons_hawking(GibbonsHawkingSpec((-1.0, 1.0)))])
def test_conformal_law(make):
    chart = make()
    rng = np.random.default_rng(5)
    for _ in range(2):
        x0 = chart.sample(1, rng, margin=0.3 * chart.scale)[0]
        u = random_conformal_factor(rng, center=x0)
        x = x0 + rng.uniform(-0.05, 0.05, (4, 4)) * chart.scale
        x = x[chart.admissible(x, margin=0.1 * chart.scale)]
        assert np.max(conformal_law_residual(chart, u, x)) < 1e-5


def test_rayleigh_constant_on_s4():
    assert rayleigh_quotient(round_s4_atlas(1.0), constant_field(1.0), 12) == pytest.approx(12, abs=1e-3)


def test_rayleigh_invariant_under_scaling_u():
    atlas = round_s4_atlas(1.0)
    u = s4_harmonic(1.0, 0)
    v = ScalarField(lambda x: 3.0 * u(x), scale=u.scale)
    a, b = rayleigh_quotient(atlas, u, 16), rayleigh_quotient(atlas, v, 16)
    assert a == pytest.approx(b, rel=1e-10)
    # 6 * 4 + 12 = 36 for a first harmonic
    assert a == pytest.approx(36, abs=0.05)


def test_rayleigh_scales_inverse_square_with_metric():
    a = rayleigh_quotient(round_s4_atlas(1.0), constant_field(1.0), 12)
    b = rayleigh_quotient(round_s4_atlas(2.0), constant_field(1.0), 12)
    assert b == pytest.approx(a / 4, rel=1e-6)


def test_rayleigh_negative_on_hyperbolic():
    assert rayleigh_quotient(hyperbolic4(), constant_field(1.0), 8) == pytest.approx(-12, abs=1e-6)


def test_rayleigh_degenerate_norm():
    with pytest.raises(ParameterError):
        rayleigh_quotient(round_s4(1.0), constant_field(0.0), 8)


# ---------------------------------------------------------------- cutoff

def test_smoothstep_endpoints():
    assert smoothstep(np.array([-1.0, 0.0, 0.5, 1.0, 2.0])).tolist() == [0, 0, 0.5, 1, 1]


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.0, 3.0))
def test_cutoff_values_and_gradient(eps, d):
    u = cutoff_test_function([(0, 0, 0, 0)], eps)
    x = np.array([[d, 0, 0, 0]])
    v = u(x)[0]
    if d <= eps / 2:
        assert v == 0
    elif d >= eps:
        assert v == 1
    else:
        assert 0 <= v <= 1
    grad = np.linalg.norm(u.gradient(x)[0])
    assert grad <= 3 / eps * (1 + 1e-3)


def test_cutoff_gradient_bound_attained():
    eps = 0.2
    u = cutoff_test_function([(0, 0, 0, 0)], eps)
    mid = np.array([[0.75 * eps, 0, 0, 0]])
    assert np.linalg.norm(u.gradient(mid)[0]) == pytest.approx(3 / eps, rel=1e-6)


def test_cutoff_without_centers_is_one():
    u = cutoff_test_function([], 0.1)
    assert np.all(u(np.random.default_rng(0).normal(size=(10, 4))) == 1)


def test_cutoff_rejects_overlap():
    with pytest.raises(ParameterError):
        cutoff_test_function([(0, 0, 0, 0), (0.15, 0, 0, 0)], 0.1)
    with pytest.raises(ParameterError):
        cutoff_test_function([(0, 0, 0, 0)], 0.0)


# ---------------------------------------------------------------- budget

def test_budget_examples():
    c = 2 * math.pi ** 2
    assert negativity_budget(1.0, c, 0.01) == pytest.approx(54 * c * 1e-4 - (1 - c * 1e-8))
    assert negativity_budget(1.0, c, 0.01) < 0
    assert negativity_budget(0.01, c, 0.1) > 0


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 100), st.floats(0.1, 50), st.floats(1e-4, 0.5), st.floats(1e-4, 0.5))
def test_budget_monotone_in_epsilon(vol, c, e1, e2):
    lo, hi = sorted((e1, e2))
    assert negativity_budget(vol, c, lo) <= negativity_budget(vol, c, hi)


def test_budget_bisection_threshold():
    c = 2 * math.pi ** 2
    lo, hi = 1e-6, 0.99
    for _ in range(80):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if negativity_budget(1.0, c, mid) < 0 else (lo, mid)
    # approximately 54 c eps^2 = vol
    assert lo == pytest.approx(math.sqrt(1 / (54 * c)), rel=1e-3)


def test_budget_validation():
    for args in ((0, 1, 0.1), (1, 0, 0.1), (1, 1, 0), (1, 1, 1.0)):
        with pytest.raises(ParameterError):
            negativity_budget(*args)


# ---------------------------------------------------------------- sign from limit set

def _est(v, r=0.05):
    return DimensionEstimate(v, [1e-3, 1e-1], r, 5000)


@pytest.mark.parametrize("v,sign", [(0.12, 1), (0.85, 1), (1.0, "undetermined"), (1.05, "undetermined"),
                                    (1.2, -1), (1.8, -1)])
def test_sign_classifier(v, sign):
    assert scalar_sign_from_limit_set(_est(v)).sign == sign


def test_sign_classifier_rejects_bad_estimates():
    with pytest.raises(ParameterError):
        scalar_sign_from_limit_set(_est(0.5, 0.2))
    with pytest.raises(ParameterError):
        scalar_sign_from_limit_set(_est(float("nan")))
    with pytest.raises(ParameterError):
        scalar_sign_from_limit_set(DimensionEstimate(0.0, [], 0.0, 5000, degenerate=True))
