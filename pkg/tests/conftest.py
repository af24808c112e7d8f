"""Shared builders for randomized fields, geometries, and flow problems."""

import numpy as np
import pytest

from surfaceflow.grid import GridSpec, ScalarField, VectorField
from surfaceflow.geometry import build_geometry
from surfaceflow.model import FlowProblem


def random_field(spec: GridSpec, rng, scale: float = 1.0) -> ScalarField:
    return ScalarField(spec, scale * rng.standard_normal((spec.height, spec.width)))


def random_vector_field(spec: GridSpec, rng, scale: float = 1.0) -> VectorField:
    return VectorField(spec, random_field(spec, rng, scale), random_field(spec, rng, scale))


def smooth_field(spec: GridSpec, rng, scale: float = 1.0, waves: int = 3) -> ScalarField:
    """Random band-limited field: a few low-frequency sinusoids, so stencil
    derivatives are well resolved."""
    x1 = np.arange(spec.width) / max(spec.width - 1, 1)
    x2 = np.arange(spec.height) / max(spec.height - 1, 1)
    xx1, xx2 = np.meshgrid(x1, x2, indexing="xy")
    out = np.zeros_like(xx1)
    for _ in range(waves):
        k1, k2 = rng.uniform(-3.0, 3.0, 2)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        out += rng.uniform(-1.0, 1.0) * np.sin(k1 * xx1 + k2 * xx2 + phase)
    return ScalarField(spec, scale * out)


def random_geometry(spec: GridSpec, rng, amplitude: float = 0.3, evolving: bool = False):
    z = smooth_field(spec, rng, scale=amplitude)
    if not evolving:
        return build_geometry(z)
    z_next = ScalarField(spec, z.values + spec.dt * smooth_field(spec, rng, 0.2 * amplitude).values)
    return build_geometry(z, z_next)


def random_problem(spec: GridSpec, rng, alpha: float = 10.0, curved: bool = False) -> FlowProblem:
    geom = random_geometry(spec, rng, amplitude=0.3) if curved else build_geometry(
        ScalarField.zeros(spec)
    )
    return FlowProblem(
        geom=geom,
        fx1=random_field(spec, rng),
        fx2=random_field(spec, rng),
        ft=random_field(spec, rng),
        alpha=alpha,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
