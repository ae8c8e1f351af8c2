import numpy as np
import pytest

from _isometries import random_unitary, realify
from lagbonnet.catalog import make_constant_solution
from lagbonnet.chart import ConformalChart
from lagbonnet.integrability import integrability_residuals
from lagbonnet.reconstruction import (
    Frame,
    IntegrabilityError,
    PathError,
    ambient_metric,
    coefficient_matrices,
    complex_structure,
    expected_gram,
    frame_invariants,
    hermitian_form,
    hopf_project,
    initial_frame,
    integrate_frame_path,
    monodromy_defect,
    reconstruct_grid,
)

CONSTANTS = {0: (0.0, 1.0, 1.0), 1: (0.0, 0.0, 1.0), -1: (0.0, 1.0, 0.0)}


def _data(c, n=32):
    return make_constant_solution(ConformalChart(n, n), c, *CONSTANTS[c])


def test_complex_structure_squares_to_minus_one():
    for n in (4, 6):
        J = complex_structure(n)
        assert np.array_equal(J @ J, -np.eye(n))
        assert np.array_equal(J.T, -J)


@pytest.mark.parametrize("c", [0, 1, -1])
def test_initial_frame_is_adapted(c):
    d = _data(c)
    fr = initial_frame(d, (3, 5))
    inv = frame_invariants(c, fr.sigma, np.exp(d.u[5, 3]))
    assert max(float(np.max(v)) for v in inv.values()) <= 1e-13
    G = fr.sigma.T @ ambient_metric(c) @ fr.sigma
    assert np.allclose(G, expected_gram(c, np.exp(d.u[5, 3])))


def test_coefficient_matrices_vectorize():
    uz = np.array([0.1 + 0.2j, -0.3j])
    U, V = coefficient_matrices(1, uz, np.array([1.0, 2.0]), np.array([1j, 0.5]), np.array([1.0, 2.0 + 1j]))
    U0, V0 = coefficient_matrices(1, uz[0], 1.0, 1j, 1.0)
    assert U.shape[0] == 2 and np.allclose(U[0], U0) and np.allclose(V[0], V0)


@pytest.mark.parametrize("c", [0, 1, -1])
def test_reconstruct_constant_data(c):
    imm = reconstruct_grid(_data(c))
    assert imm.cross_defect <= 1e-12
    assert max(imm.drift.values()) <= 1e-6
    assert imm.points.shape == (32, 32, 4 if c == 0 else 6)


def test_flat_plane_is_recovered():
    # u = 0, phi = psi = 0 with c = 0 is the totally geodesic Lagrangian plane
    ch = ConformalChart(16, 16)
    z0 = np.zeros(ch.shape)
    from lagbonnet.surface_data import SurfaceData

    imm = reconstruct_grid(SurfaceData(ch, 0, z0, z0, z0))
    F = imm.complex_points
    X, Y = ch.grid()
    # f_z = (1, 0)/sqrt(2)-type: the image is an affine Lagrangian plane, distances scale by sqrt(2)
    d = np.linalg.norm(imm.points - imm.points[0, 0], axis=-1)
    assert np.allclose(d, np.sqrt(2) * np.hypot(X, Y), atol=1e-12)


def test_integrability_gate():
    d = _data(0).replace(psi=np.full((32, 32), 1.2 + 0j))
    with pytest.raises(IntegrabilityError):
        reconstruct_grid(d)
    imm = reconstruct_grid(d, check=False, ceiling=None)
    assert imm.cross_defect > 1e-4


@pytest.mark.parametrize("c", [0, 1, -1])
def test_gauge_covariance(c, rng):
    d = _data(c)
    f0 = initial_frame(d, (0, 0))
    R = realify(random_unitary(rng, c))
    path = [(i, 0) for i in range(12)] + [(11, j) for j in range(1, 9)]
    a = integrate_frame_path(d, path)
    b = integrate_frame_path(d, path, f0.apply_isometry(R))
    assert np.allclose(b.frames, R @ a.frames, atol=1e-12)
    assert b.drift.keys() == a.drift.keys()


def test_path_errors():
    d = _data(0)
    with pytest.raises(PathError):
        integrate_frame_path(d, [])
    with pytest.raises(PathError):
        integrate_frame_path(d, [(0, 0), (2, 0)])
    with pytest.raises(PathError):
        monodromy_defect(d, [(0, 0), (1, 0), (1, 1)])


def test_periodic_path_wraps():
    ch = ConformalChart(256, 8, 0.0, 2 * np.pi, 0.0, 1.0, periodic_x=True)
    d = make_constant_solution(ch, 1, *CONSTANTS[1])
    res = integrate_frame_path(d, [(i, 0) for i in range(257)])
    assert len(res.points) == 257 and max(res.drift.values()) <= 1e-6
    # constant data: the frame returns to itself after a full period up to RK4 error
    assert np.allclose(res.frames[-1], res.frames[0], atol=1e-6)


def test_monodromy_separates_compatible_and_incompatible():
    ch = ConformalChart(129, 129)
    good = make_constant_solution(ch, 0, *CONSTANTS[0])
    bad = good.replace(psi=np.full(ch.shape, np.sqrt(1.1) + 0j))
    assert integrability_residuals(bad).norms["gauss"].linf == pytest.approx(0.1)
    loop = (0, 0, 128, 128)
    m_good, m_bad = monodromy_defect(good, loop), monodromy_defect(bad, loop)
    assert m_good <= 1e-6 and m_bad >= 1e-3


def test_hopf_projection_is_fibre_invariant(rng):
    F = np.array([0.3 + 0.1j, 0.5 - 0.2j, 0.4j])
    F = F / np.sqrt(hermitian_form(1, F, F).real)
    p = hopf_project(F, 1)
    assert np.allclose(hopf_project(np.exp(1.234j) * F, 1), p)
    assert abs(p[0].imag) < 1e-15 and p[0].real > 0
    with pytest.raises(ValueError):
        hopf_project(2 * F, 1)
    with pytest.raises(ValueError):
        hopf_project(F, 0)


@pytest.mark.parametrize("c", [1, -1])
def test_projective_representatives(c):
    imm = reconstruct_grid(_data(c, 32))
    P = imm.projective(tol=1e-4)
    q = np.array([[hermitian_form(c, P[i, j], P[i, j]).real for j in range(32)] for i in range(32)])
    assert np.allclose(q, c, atol=1e-9)


def test_project_option_keeps_quadric():
    d = _data(1, 48)
    a = reconstruct_grid(d)
    b = reconstruct_grid(d, project=True)
    assert b.drift["quadric"] <= a.drift["quadric"] + 1e-15
    assert b.drift["quadric"] <= 1e-12


def test_frame_state_round_trip():
    d = _data(0)
    fr = initial_frame(d, (1, 1))
    back = Frame.from_state(0, fr.state())
    assert np.array_equal(back.sigma, fr.sigma) and np.array_equal(back.position, fr.position)
