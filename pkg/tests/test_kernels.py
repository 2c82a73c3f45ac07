import os
import subprocess
import sys

import numpy as np
import pytest

from cptsim import kernels
from cptsim.geometry import mesh, standard_geometry
from oracles import quad_field, quad_potential

BACKENDS = kernels.available_backends()


def _single_panel_mesh():
    m = mesh(standard_geometry(0.3, 0.01, slab_enabled=False), 1)
    return m


@pytest.fixture(scope="module")
def small_mesh():
    # n=6 at 5 cm has many pairs exactly three panel diagonals apart
    return mesh(standard_geometry(0.30, 0.05), 6)


TARGETS = np.array([
    [-0.40, 0.05, -0.005 + 0.02],   # above plate 1, near
    [-0.30, 0.00, 0.004],           # close to the plate surface
    [-0.60, 0.20, 0.0],             # off the plate edge
    [0.10, -0.10, 0.3],             # far field (centroid approximation)
])


@pytest.mark.parametrize("backend", BACKENDS)
def test_potential_against_quadrature(backend):
    m = _single_panel_mesh()
    i = 0  # plate 1
    got = kernels.potential_block(TARGETS, m, far_factor=1e9, backend=backend)[:, i]
    ref = [quad_potential(t, m.centroid[i], m.u[i], m.v[i], m.half_u[i], m.half_v[i]) for t in TARGETS]
    np.testing.assert_allclose(got, ref, rtol=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_field_against_quadrature(backend):
    m = _single_panel_mesh()
    i = 0
    normals = np.array([[0, 0, 1.0], [1.0, 0, 0], [0, 0.6, 0.8], [0, 1.0, 0]])
    got = kernels.field_block(TARGETS, normals, m, far_factor=1e9, backend=backend)[:, i]
    ref = [quad_field(t, n, m.centroid[i], m.u[i], m.v[i], m.half_u[i], m.half_v[i])
           for t, n in zip(TARGETS, normals)]
    np.testing.assert_allclose(got, ref, rtol=1e-7, atol=1e-12)


def test_self_potential_closed_form():
    # centroid of a square panel of side h: (h/pi) * asinh(1)
    m = _single_panel_mesh()
    h = 2 * m.half_u[0]
    got = kernels.potential_block(m.centroid[:1], m, backend="python")[0, 0]
    assert got == pytest.approx(h * np.arcsinh(1.0) / np.pi, rel=1e-13)


def test_coplanar_field_is_zero():
    m = _single_panel_mesh()
    e = kernels.field_block(m.centroid, m.normal, m, backend="python")
    assert e[0, 0] == 0.0 and e[0, 1] == 0.0


def test_far_field_approximation_is_close():
    m = _single_panel_mesh()
    t = np.array([[-0.45, 0.0, 1.0]])  # > 3 diameters away
    exact = kernels.potential_block(t, m, far_factor=1e9, backend="python")[0, 0]
    approx = kernels.potential_block(t, m, far_factor=3.0, backend="python")[0, 0]
    assert approx == pytest.approx(exact, rel=5e-3)


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")
def test_backends_agree(small_mesh):
    m = small_mesh
    p_c = kernels.potential_block(m.centroid, m, backend="cython")
    p_p = kernels.potential_block(m.centroid, m, backend="python")
    np.testing.assert_allclose(p_c, p_p, rtol=1e-12, atol=1e-15)
    e_c = kernels.field_block(m.centroid, m.normal, m, backend="cython")
    e_p = kernels.field_block(m.centroid, m.normal, m, backend="python")
    np.testing.assert_allclose(e_c, e_p, rtol=1e-11, atol=1e-13)


def test_fallback_selected_by_environment():
    env = dict(os.environ, CPTSIM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from cptsim import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
