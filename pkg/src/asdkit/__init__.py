"""Numerical companion for scalar-flat anti-self-dual 4-manifolds.

Subpackages: :mod:`asdkit.kleinian` (groups, limit sets, dimension),
:mod:`asdkit.curvature` (tensor calculus on metric charts); modules
:mod:`asdkit.mobius`, :mod:`asdkit.metrics`, :mod:`asdkit.yamabe`, :mod:`asdkit.cli`.
"""
__version__ = "0.1.0"
