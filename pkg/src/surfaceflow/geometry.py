"""Differential geometry of a surface given as the graph of a height field.

For the parametrization x(x1, x2) = (x1, x2, z(x1, x2)) the induced metric,
its inverse, determinant and the Christoffel symbols all have closed forms
in the first and second derivatives of z:

    g      = I2 + grad(z) grad(z)^T,      det g = 1 + |grad(z)|^2,
    G^i_jk = d_i z * d_jk z / det g.

The closed form is the production path.  The general Levi-Civita formula
(half the contracted metric-derivative combination) is also implemented,
with metric derivatives taken by the same grid stencils; the two agree to
second order away from the boundary and serve as mutual validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    GridSpec,
    ScalarField,
    VectorField,
    diff_x1,
    diff_x1_array,
    diff_x2,
    diff_x2_array,
    hessian,
)

__all__ = [
    "SurfaceGeometry",
    "build_geometry",
    "flat_geometry",
    "surface_gradient_coeffs",
    "embed_tangent",
    "unit_normal",
    "tangential_surface_velocity",
    "tangent_coords",
    "christoffel_from_metric",
]


@dataclass(frozen=True, eq=False)
class SurfaceGeometry:
    """Pointwise metric data of the graph surface at a fixed time.

    Christoffel symbols are stored once per symmetric pair; use
    :meth:`christoffel` for arbitrary (i, j, k) access.  ``zt`` is the height
    rate (d/dt z) between the frame pair; ``evolving`` records whether a
    second height frame was supplied (a static build keeps zt = 0 but must
    not be asked for surface velocities).
    """

    spec: GridSpec
    z: ScalarField
    dz1: ScalarField
    dz2: ScalarField
    z11: ScalarField
    z12: ScalarField
    z22: ScalarField
    g11: ScalarField
    g12: ScalarField
    g22: ScalarField
    detg: ScalarField
    sqrt_detg: ScalarField
    ginv11: ScalarField
    ginv12: ScalarField
    ginv22: ScalarField
    gamma1_11: ScalarField
    gamma1_12: ScalarField
    gamma1_22: ScalarField
    gamma2_11: ScalarField
    gamma2_12: ScalarField
    gamma2_22: ScalarField
    zt: ScalarField
    evolving: bool

    def christoffel(self, i: int, j: int, k: int) -> ScalarField:
        """Symbol with upper index i and symmetric lower pair (j, k)."""
        if i not in (1, 2) or j not in (1, 2) or k not in (1, 2):
            raise ValueError(f"indices must be 1 or 2, got ({i}, {j}, {k})")
        j, k = min(j, k), max(j, k)
        return getattr(self, f"gamma{i}_{j}{k}")


def build_geometry(
    z: ScalarField,
    z_next: ScalarField | None = None,
    spec: GridSpec | None = None,
    dt: float | None = None,
) -> SurfaceGeometry:
    """Derive all metric quantities of the graph of ``z``.

    ``z_next`` is the height field of the following frame; when given, the
    height rate is the forward difference ``(z_next - z) / dt`` with ``dt``
    defaulting to the grid's temporal displacement.  Without it the surface
    is treated as static.
    """
    if spec is not None and z.spec != spec:
        raise ValueError("height field does not match the requested grid spec")
    spec = z.spec
    if z_next is not None and z_next.spec != spec:
        raise ValueError("z_next must share the grid spec of z")

    a1 = diff_x1_array(z.values, spec.h)
    a2 = diff_x2_array(z.values, spec.h)
    hz = hessian(z)
    z11, z12, z22 = hz.d11.values, hz.d12.values, hz.d22.values

    g11 = 1.0 + a1 * a1
    g12 = a1 * a2
    g22 = 1.0 + a2 * a2
    # graph identity det g = 1 + |grad z|^2; guarantees det g >= 1 exactly
    detg = 1.0 + a1 * a1 + a2 * a2
    ginv11 = g22 / detg
    ginv12 = -g12 / detg
    ginv22 = g11 / detg

    _check_inverse(g11, g12, g22, ginv11, ginv12, ginv22)

    if z_next is None:
        zt = np.zeros(spec.shape)
        evolving = False
    else:
        step = spec.dt if dt is None else float(dt)
        if not step > 0:
            raise ValueError(f"dt must be positive, got {step}")
        zt = (z_next.values - z.values) / step
        evolving = True

    wrap = lambda a: ScalarField(spec, a)
    return SurfaceGeometry(
        spec=spec,
        z=z,
        dz1=wrap(a1),
        dz2=wrap(a2),
        z11=hz.d11,
        z12=hz.d12,
        z22=hz.d22,
        g11=wrap(g11),
        g12=wrap(g12),
        g22=wrap(g22),
        detg=wrap(detg),
        sqrt_detg=wrap(np.sqrt(detg)),
        ginv11=wrap(ginv11),
        ginv12=wrap(ginv12),
        ginv22=wrap(ginv22),
        gamma1_11=wrap(a1 * z11 / detg),
        gamma1_12=wrap(a1 * z12 / detg),
        gamma1_22=wrap(a1 * z22 / detg),
        gamma2_11=wrap(a2 * z11 / detg),
        gamma2_12=wrap(a2 * z12 / detg),
        gamma2_22=wrap(a2 * z22 / detg),
        zt=wrap(zt),
        evolving=evolving,
    )


def flat_geometry(spec: GridSpec) -> SurfaceGeometry:
    """Geometry of the flat plane z = 0 (Euclidean reduction)."""
    return build_geometry(ScalarField.zeros(spec))


def _check_inverse(g11, g12, g22, i11, i12, i22) -> None:
    """g * g^-1 = I pointwise to 1e-12 relative; construction guarantee."""
    scale = np.maximum(1.0, np.abs(g11) + np.abs(g12) + np.abs(g22))
    off = np.maximum(np.abs(g11 * i12 + g12 * i22), np.abs(g12 * i11 + g22 * i12))
    diag = np.maximum(np.abs(g11 * i11 + g12 * i12 - 1.0), np.abs(g12 * i12 + g22 * i22 - 1.0))
    if np.any(np.maximum(off, diag) > 1e-12 * scale):
        raise ValueError("metric inverse check failed; height field too extreme")


def surface_gradient_coeffs(
    geom: SurfaceGeometry, fx1: ScalarField, fx2: ScalarField
) -> VectorField:
    """Coefficients g^-1 grad(f); the embedded surface gradient is J times this."""
    if fx1.spec != geom.spec or fx2.spec != geom.spec:
        raise ValueError("data derivatives must share the geometry grid spec")
    c1 = geom.ginv11.values * fx1.values + geom.ginv12.values * fx2.values
    c2 = geom.ginv12.values * fx1.values + geom.ginv22.values * fx2.values
    return VectorField.from_arrays(geom.spec, c1, c2)


def embed_tangent(geom: SurfaceGeometry, u: VectorField) -> np.ndarray:
    """Push coefficients through J; columns of J are (1,0,d1 z), (0,1,d2 z).

    Returns an array of shape (height, width, 3).
    """
    if u.spec != geom.spec:
        raise ValueError("vector field must share the geometry grid spec")
    a1, a2 = u.u1.values, u.u2.values
    out = np.empty(geom.spec.shape + (3,))
    out[..., 0] = a1
    out[..., 1] = a2
    out[..., 2] = a1 * geom.dz1.values + a2 * geom.dz2.values
    return out


def unit_normal(geom: SurfaceGeometry) -> np.ndarray:
    """Upward unit normal (-d1 z, -d2 z, 1) / sqrt(det g), shape (H, W, 3)."""
    inv = 1.0 / geom.sqrt_detg.values
    out = np.empty(geom.spec.shape + (3,))
    out[..., 0] = -geom.dz1.values * inv
    out[..., 1] = -geom.dz2.values * inv
    out[..., 2] = inv
    return out


def tangential_surface_velocity(geom: SurfaceGeometry) -> np.ndarray:
    """Projection of the parametrization velocity (0, 0, zt) onto the tangent plane."""
    if not geom.evolving:
        raise ValueError("geometry was built static; no surface velocity available")
    xdot = np.zeros(geom.spec.shape + (3,))
    xdot[..., 2] = geom.zt.values
    n = unit_normal(geom)
    normal_part = np.sum(xdot * n, axis=-1)
    return xdot - normal_part[..., None] * n


def tangent_coords(geom: SurfaceGeometry, vectors: np.ndarray) -> VectorField:
    """Coefficients of the tangential part of per-point 3-vectors in the basis J.

    Solves g c = J^T v pointwise; any normal component of ``v`` is annihilated
    by J^T and therefore ignored.
    """
    if vectors.shape != geom.spec.shape + (3,):
        raise ValueError(
            f"expected per-point 3-vectors of shape {geom.spec.shape + (3,)}, "
            f"got {vectors.shape}"
        )
    p1 = vectors[..., 0] + vectors[..., 2] * geom.dz1.values
    p2 = vectors[..., 1] + vectors[..., 2] * geom.dz2.values
    c1 = geom.ginv11.values * p1 + geom.ginv12.values * p2
    c2 = geom.ginv12.values * p1 + geom.ginv22.values * p2
    return VectorField.from_arrays(geom.spec, c1, c2)


def christoffel_from_metric(
    g11: ScalarField, g12: ScalarField, g22: ScalarField
) -> dict[tuple[int, int, int], ScalarField]:
    """Levi-Civita symbols from metric derivatives (validation path).

    Evaluates 0.5 * sum_m g^{mi} (d_j g_km + d_k g_mj - d_m g_jk) with the
    same central/one-sided stencils used everywhere else.  Returns the six
    symbols keyed by (i, j, k) with j <= k.  Boundary-adjacent values are
    low-order; comparisons against the closed graph form should stay two or
    more points away from the boundary.
    """
    spec = g11.spec
    if g12.spec != spec or g22.spec != spec:
        raise ValueError("metric components must share one grid spec")
    g = {(1, 1): g11.values, (1, 2): g12.values, (2, 1): g12.values, (2, 2): g22.values}
    det = g11.values * g22.values - g12.values * g12.values
    ginv = {
        (1, 1): g22.values / det,
        (1, 2): -g12.values / det,
        (2, 1): -g12.values / det,
        (2, 2): g11.values / det,
    }
    d = {}
    for (j, k), comp in g.items():
        d[(1, j, k)] = diff_x1_array(comp, spec.h)
        d[(2, j, k)] = diff_x2_array(comp, spec.h)

    out: dict[tuple[int, int, int], ScalarField] = {}
    for i in (1, 2):
        for j, k in ((1, 1), (1, 2), (2, 2)):
            acc = np.zeros(spec.shape)
            for m in (1, 2):
                acc += ginv[(m, i)] * (d[(j, k, m)] + d[(k, m, j)] - d[(m, j, k)])
            out[(i, j, k)] = ScalarField(spec, 0.5 * acc)
    return out
