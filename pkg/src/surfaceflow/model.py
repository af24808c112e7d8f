"""Covariant Horn-Schunck energy on a graph surface.

The flow field u = (u1, u2) lives in surface coordinates.  The energy is the
Riemann sum

    E(u) = 1/2 * sum_p w_p * (alpha * r_p^2 + |D u|_F^2),
    w_p  = sqrt(det g)_p * h^2,

with r the optical-flow-constraint residual fx1*u1 + fx2*u2 + ft and D the
covariant derivative D_j u^i = d_j u^i + G^i_j1 u^1 + G^i_j2 u^2 whose
Frobenius norm is the plain sum of squared entries.  The gradient here is the
exact derivative of this discrete sum (adjoint stencils, not a discretized
continuous Euler-Lagrange operator), so finite-difference checks hold to
rounding and descent methods inherit exact monotonicity.

Summations use np.sum, whose pairwise reduction is deterministic for a fixed
shape, so energies and gradients are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    SurfaceGeometry,
    embed_tangent,
    flat_geometry,
    surface_gradient_coeffs,
)
from .grid import (
    ScalarField,
    VectorField,
    diff_t,
    diff_x1,
    diff_x1_adjoint_array,
    diff_x1_array,
    diff_x2,
    diff_x2_adjoint_array,
    diff_x2_array,
)

__all__ = [
    "FlowProblem",
    "CovariantDerivative",
    "problem_from_frames",
    "ofc_residual",
    "intrinsic_ofc_residual",
    "covariant_derivative",
    "energy",
    "energy_gradient",
]


@dataclass(frozen=True, eq=False)
class FlowProblem:
    """Data term derivatives, geometry and coupling weight for one frame pair.

    ``fx1``, ``fx2``, ``ft`` are the spatial and temporal derivatives of the
    intensity sequence evaluated on the grid; ``alpha`` weights the data term
    against the regularizer.
    """

    geom: SurfaceGeometry
    fx1: ScalarField
    fx2: ScalarField
    ft: ScalarField
    alpha: float = 10.0

    def __post_init__(self) -> None:
        spec = self.geom.spec
        for name in ("fx1", "fx2", "ft"):
            if getattr(self, name).spec != spec:
                raise ValueError(f"{name} does not match the geometry grid spec")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")

    @property
    def spec(self):
        return self.geom.spec


@dataclass(frozen=True, eq=False)
class CovariantDerivative:
    """Entries d_ij = D_j u^i of the covariant derivative of a vector field."""

    d11: ScalarField
    d12: ScalarField
    d21: ScalarField
    d22: ScalarField


def problem_from_frames(
    frame_a: ScalarField,
    frame_b: ScalarField,
    geom: SurfaceGeometry | None = None,
    alpha: float = 10.0,
    dt: float | None = None,
) -> FlowProblem:
    """Differentiate a frame pair into a :class:`FlowProblem`.

    Spatial derivatives are taken on the first frame and the time derivative
    is the forward difference (frame_b - frame_a) / dt.  Omitting ``geom``
    poses the problem on the flat plane.
    """
    if geom is None:
        geom = flat_geometry(frame_a.spec)
    if frame_a.spec != geom.spec:
        raise ValueError("frames do not match the geometry grid spec")
    return FlowProblem(
        geom=geom,
        fx1=diff_x1(frame_a),
        fx2=diff_x2(frame_a),
        ft=diff_t(frame_a, frame_b, dt),
        alpha=alpha,
    )


def ofc_residual(problem: FlowProblem, u: VectorField) -> ScalarField:
    """Pulled-back optical-flow-constraint residual fx1*u1 + fx2*u2 + ft."""
    if u.spec != problem.spec:
        raise ValueError("flow field does not match the problem grid spec")
    r = (
        problem.fx1.values * u.u1.values
        + problem.fx2.values * u.u2.values
        + problem.ft.values
    )
    return ScalarField(problem.spec, r)


def intrinsic_ofc_residual(
    geom: SurfaceGeometry,
    fx1: ScalarField,
    fx2: ScalarField,
    f_param_t: ScalarField,
    v_tan_coeffs: VectorField,
) -> ScalarField:
    """Surface form of the constraint residual for an absolute velocity field.

    ``v_tan_coeffs`` holds coordinates (in the tangent basis J) of the data's
    absolute tangential velocity: motion relative to space, not to the
    moving parametrization.  The residual is

        <grad_M f, J v> + (f_param_t - <grad_M f, xdot>),

    with grad_M f the embedded surface gradient, xdot = (0, 0, zt) the
    parametrization velocity, and all inner products taken in ambient
    3-space on embedded vectors; the bracketed term is the normal time
    derivative of the data.  Adding the tangential coordinates of xdot to
    the parametric flow u makes this equal the pulled-back residual
    identically, so a static surface (zt = 0) reduces it to
    :func:`ofc_residual`.
    """
    spec = geom.spec
    for name, field in (("fx1", fx1), ("fx2", fx2), ("f_param_t", f_param_t)):
        if field.spec != spec:
            raise ValueError(f"{name} does not match the geometry grid spec")
    if v_tan_coeffs.spec != spec:
        raise ValueError("velocity field does not match the geometry grid spec")
    grad3 = embed_tangent(geom, surface_gradient_coeffs(geom, fx1, fx2))
    v3 = embed_tangent(geom, v_tan_coeffs)
    advect = np.sum(grad3 * v3, axis=-1)
    # parametrization velocity (0, 0, zt): only the third component survives
    grad_dot_xdot = grad3[..., 2] * geom.zt.values
    return ScalarField(spec, advect + f_param_t.values - grad_dot_xdot)


def covariant_derivative(geom: SurfaceGeometry, u: VectorField) -> CovariantDerivative:
    """All four entries D_j u^i on the grid."""
    if u.spec != geom.spec:
        raise ValueError("vector field does not match the geometry grid spec")
    d11, d12, d21, d22 = _covd_arrays(geom, u.u1.values, u.u2.values)
    wrap = lambda a: ScalarField(geom.spec, a)
    return CovariantDerivative(wrap(d11), wrap(d12), wrap(d21), wrap(d22))


def energy(problem: FlowProblem, u: VectorField) -> float:
    """Discrete energy value; the quantity every solver step must not increase."""
    if u.spec != problem.spec:
        raise ValueError("flow field does not match the problem grid spec")
    geom = problem.geom
    u1, u2 = u.u1.values, u.u2.values
    r = (
        problem.fx1.values * u1
        + problem.fx2.values * u2
        + problem.ft.values
    )
    d11, d12, d21, d22 = _covd_arrays(geom, u1, u2)
    w = _quad_weights(geom)
    total = np.sum(
        w * (problem.alpha * r * r + d11 * d11 + d12 * d12 + d21 * d21 + d22 * d22)
    )
    return 0.5 * float(total)


def energy_gradient(problem: FlowProblem, u: VectorField) -> VectorField:
    """Exact gradient of :func:`energy` with respect to the flow values."""
    if u.spec != problem.spec:
        raise ValueError("flow field does not match the problem grid spec")
    g1, g2 = _gradient_arrays(problem, u.u1.values, u.u2.values)
    return VectorField.from_arrays(problem.spec, g1, g2)


def _quad_weights(geom: SurfaceGeometry) -> np.ndarray:
    return geom.sqrt_detg.values * (geom.spec.h * geom.spec.h)


def _covd_arrays(geom: SurfaceGeometry, u1: np.ndarray, u2: np.ndarray):
    h = geom.spec.h
    c1_11 = geom.gamma1_11.values
    c1_12 = geom.gamma1_12.values
    c1_22 = geom.gamma1_22.values
    c2_11 = geom.gamma2_11.values
    c2_12 = geom.gamma2_12.values
    c2_22 = geom.gamma2_22.values
    d11 = diff_x1_array(u1, h) + c1_11 * u1 + c1_12 * u2
    d12 = diff_x2_array(u1, h) + c1_12 * u1 + c1_22 * u2
    d21 = diff_x1_array(u2, h) + c2_11 * u1 + c2_12 * u2
    d22 = diff_x2_array(u2, h) + c2_12 * u1 + c2_22 * u2
    return d11, d12, d21, d22


def _gradient_arrays(problem: FlowProblem, u1: np.ndarray, u2: np.ndarray):
    """Adjoint assembly of the energy gradient as plain arrays.

    With s_ij = w * d_ij, the regularizer contributes the transposed stencils
    applied to s plus the Christoffel multipliers regrouped by the flow
    component each entry multiplies.
    """
    geom = problem.geom
    h = geom.spec.h
    w = _quad_weights(geom)
    d11, d12, d21, d22 = _covd_arrays(geom, u1, u2)
    s11, s12, s21, s22 = w * d11, w * d12, w * d21, w * d22

    c1_11 = geom.gamma1_11.values
    c1_12 = geom.gamma1_12.values
    c1_22 = geom.gamma1_22.values
    c2_11 = geom.gamma2_11.values
    c2_12 = geom.gamma2_12.values
    c2_22 = geom.gamma2_22.values

    g1 = (
        diff_x1_adjoint_array(s11, h)
        + diff_x2_adjoint_array(s12, h)
        + c1_11 * s11
        + c1_12 * s12
        + c2_11 * s21
        + c2_12 * s22
    )
    g2 = (
        diff_x1_adjoint_array(s21, h)
        + diff_x2_adjoint_array(s22, h)
        + c1_12 * s11
        + c1_22 * s12
        + c2_12 * s21
        + c2_22 * s22
    )

    fx1, fx2, ft = problem.fx1.values, problem.fx2.values, problem.ft.values
    aw = problem.alpha * w
    r = fx1 * u1 + fx2 * u2 + ft
    g1 = g1 + aw * r * fx1
    g2 = g2 + aw * r * fx2
    return g1, g2
