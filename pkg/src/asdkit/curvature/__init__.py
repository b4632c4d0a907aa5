"""Finite-difference curvature of 4-dimensional metric charts."""
from asdkit.curvature.chart import MetricChart, diag_metric
from asdkit.curvature.decomposition import (
    CurvatureDecomposition, ResidualReport, asd_sf_residuals, curvature_operator, decompose_at,
    gauss_bonnet_integrand, signature_integrand, two_form_basis,
)
from asdkit.curvature.falloff import falloff_exponent, metric_deviation
from asdkit.curvature.quadrature import IntegralResult, integrate, integrate_topology
from asdkit.curvature.tensors import FullCurvature, curvature_at

__all__ = [
    "MetricChart", "diag_metric", "CurvatureDecomposition", "ResidualReport", "asd_sf_residuals",
    "curvature_operator", "decompose_at", "gauss_bonnet_integrand", "signature_integrand",
    "two_form_basis", "falloff_exponent", "metric_deviation", "IntegralResult", "integrate",
    "integrate_topology", "FullCurvature", "curvature_at",
]
