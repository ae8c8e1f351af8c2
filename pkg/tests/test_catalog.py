import numpy as np
import pytest
from scipy.signal import argrelextrema

from lagbonnet.catalog import (
    Bump,
    CatalogError,
    gauss_constant_residual,
    make_constant_solution,
    perturb,
    profile_equilibrium,
    solve_profile_ode,
)
from lagbonnet.chart import ConformalChart, d_z, d_zbar, wirtinger_laplacian
from lagbonnet.integrability import integrability_residuals


def test_constant_solution_rejects_inconsistent_constants(unit64):
    with pytest.raises(CatalogError):
        make_constant_solution(unit64, 0, 0.0, 1.0, 2.0)
    assert gauss_constant_residual(1, 0.0, 0.0, 1.0) == 0.0


def test_equilibrium():
    assert profile_equilibrium(1, 8.0) == pytest.approx(np.log(4.0))
    with pytest.raises(CatalogError):
        profile_equilibrium(0, 1.0)


def test_profile_at_equilibrium_is_constant(unit64):
    d = solve_profile_ode(unit64, 1, 1.0, 0.0, 0.0)
    assert np.all(d.u == 0.0)
    assert integrability_residuals(d).ok


def test_profile_half_period():
    # linearizing u'' = -4(e^u - e^{-2u}) at u = 0 gives frequency sqrt(12)
    ch = ConformalChart(2001, 4, 0.0, 3.0, 0.0, 1.0)
    u = solve_profile_ode(ch, 1, 1.0, 0.01, 0.0).u[0]
    first_min = argrelextrema(u, np.less)[0][0]
    assert ch.x[first_min] == pytest.approx(np.pi / np.sqrt(12), rel=0.01)


def test_profile_is_second_order_consistent():
    errs = []
    for n in (32, 64, 128):
        ch = ConformalChart(n, n, 0.0, 2.0, 0.0, 1.0)
        errs.append(integrability_residuals(solve_profile_ode(ch, 1, 1.0, 0.01, 0.0)).norms["gauss"].linf)
    assert 3.5 <= errs[0] / errs[1] <= 4.5 and 3.5 <= errs[1] / errs[2] <= 4.5


@pytest.mark.parametrize("c,psi0", [(-1, 1.0), (0, 1.0)])
def test_profile_rejections(unit64, c, psi0):
    with pytest.raises(CatalogError):
        solve_profile_ode(unit64, c, psi0, 0.0, 0.0)


def test_profile_escape_is_reported():
    ch = ConformalChart(64, 4, 0.0, 20.0, 0.0, 1.0)
    with pytest.raises(CatalogError):
        solve_profile_ode(ch, 1, 1.0, -3.0, -50.0, cap=10.0)


def test_bump_derivatives_match_finite_differences():
    ch = ConformalChart(128, 128, 0.0, 1.0, 0.0, 1.0)
    b = Bump(0.4 + 0.55j, 0.15)
    z = ch.z()
    v = b.value(z)
    for got, want in ((d_z(ch, v), b.d_z(z)), (d_zbar(ch, v), b.d_zbar(z)), (wirtinger_laplacian(ch, v), b.d_zzbar(z))):
        # truncation error of a Gaussian of width w scales like (h / w)^2
        assert np.max(np.abs(got - want)[2:-2, 2:-2]) < 2 * (ch.h / b.width) ** 2 * np.max(np.abs(want))


@pytest.mark.parametrize("which", ["u", "phi", "psi"])
def test_perturbation_prediction_and_linearity(which):
    ch = ConformalChart(96, 96, 0.0, 1.0, 0.0, 1.0)
    base = make_constant_solution(ch, 0, 0.0, 1.0, 1.0)
    norms = []
    for eps in (1e-4, 2e-4, 4e-4):
        p = perturb(base, which, eps)
        res = integrability_residuals(p.data)
        w = 0.15  # default bump width on the unit chart
        for k in ("closedness", "gauss", "codazzi"):
            diff = np.abs(res[k] - p.predicted[k])[2:-2, 2:-2]
            # second-order truncation of a width-w bump plus the quadratic remainder
            assert np.max(diff) <= eps * ch.h**2 / w**4 + 10 * eps**2
        norms.append(max(n.linf for n in res.norms.values()))
    assert norms[1] / norms[0] == pytest.approx(2.0, rel=1e-2)
    assert norms[2] / norms[1] == pytest.approx(2.0, rel=1e-2)


def test_perturbation_mismatch_converges_at_second_order():
    b = Bump(0.5 + 0.5j, 0.12)
    out = []
    for n in (48, 96):
        ch = ConformalChart(n, n)
        p = perturb(make_constant_solution(ch, 0, 0.0, 1.0, 1.0), "u", 1e-4, b)
        res = integrability_residuals(p.data)
        out.append(max(np.max(np.abs(res[k] - p.predicted[k])[2:-2, 2:-2]) for k in res.fields))
    assert 3.5 <= out[0] / out[1] <= 4.5


def test_perturb_rejects_unknown_field(unit64):
    with pytest.raises(ValueError):
        perturb(make_constant_solution(unit64, 1, 0.0, 0.0, 1.0), "c", 0.1)
