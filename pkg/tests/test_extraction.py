import numpy as np
import pytest

from _isometries import random_unitary, realify
from lagbonnet.catalog import make_constant_solution, solve_profile_ode
from lagbonnet.chart import ConformalChart
from lagbonnet.extraction import DegenerateImmersionError, data_distance, extract_data
from lagbonnet.reconstruction import Immersion, reconstruct_grid

CONSTANTS = {0: (0.0, 1.0, 1.0), 1: (0.0, 0.0, 1.0), -1: (0.0, 1.0, 0.0)}


@pytest.mark.parametrize("c", [0, 1, -1])
def test_round_trip_constant(c):
    d = make_constant_solution(ConformalChart(64, 64), c, *CONSTANTS[c])
    ex = extract_data(reconstruct_grid(d))
    dist = data_distance(ex.data, d, tol=1e-4, margin=4)
    assert dist.congruent, dist
    assert max(n.linf for n in ex.diagnostics["norms"].values()) <= 1e-6


def test_round_trip_profile_converges():
    # nonconstant u: the generators use finite-difference u_z, so the lift drifts off
    # the quadric at O(h^2) and the round-trip error shrinks at second order
    errs = []
    for n in (48, 96):
        ch = ConformalChart(n, 12, 0.0, 1.0, 0.0, 11 / (n - 1))
        d = solve_profile_ode(ch, 1, 1.0, 0.05, 0.0)
        ex = extract_data(reconstruct_grid(d), quadric_tol=1e-3)
        dist = data_distance(ex.data, d, margin=4)
        errs.append(max(dist.du, dist.dphi, dist.dpsi))
    assert errs[1] <= 1e-3
    assert 3.0 <= errs[0] / errs[1] <= 5.0


@pytest.mark.parametrize("c", [0, 1, -1])
def test_extraction_is_isometry_invariant(c, rng):
    d = make_constant_solution(ConformalChart(32, 32), c, *CONSTANTS[c])
    imm = reconstruct_grid(d)
    R = realify(random_unitary(rng, c))
    shift = rng.standard_normal(4) if c == 0 else None
    pts = imm.points @ R.T + (shift if shift is not None else 0.0)
    moved = Immersion(imm.chart, c, pts)
    a, b = extract_data(imm).data, extract_data(moved).data
    dist = data_distance(a, b, tol=1e-9)
    assert dist.congruent, dist


def test_degenerate_immersion_rejected():
    ch = ConformalChart(16, 16)
    with pytest.raises(DegenerateImmersionError):
        extract_data(Immersion(ch, 0, np.zeros(ch.shape + (4,))))
    with pytest.raises(ValueError):
        extract_data(Immersion(ch, 1, np.zeros(ch.shape + (4,))))


def test_lift_off_quadric_rejected():
    d = make_constant_solution(ConformalChart(16, 16), 1, *CONSTANTS[1])
    imm = reconstruct_grid(d)
    with pytest.raises(DegenerateImmersionError):
        extract_data(Immersion(imm.chart, 1, 1.01 * imm.points))


def test_distance_detects_rotated_psi():
    ch = ConformalChart(16, 16)
    d = make_constant_solution(ch, 1, *CONSTANTS[1])
    e = d.replace(psi=1j * d.psi)
    dist = data_distance(d, e)
    assert not dist.congruent and dist.dpsi == pytest.approx(np.sqrt(2))
    with pytest.raises(ValueError):
        data_distance(d, make_constant_solution(ch, 0, *CONSTANTS[0]))
