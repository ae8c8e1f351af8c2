"""Generators of exact and semi-exact data triples."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import ConformalChart
from .surface_data import SurfaceData, check_space_form


class CatalogError(ValueError):
    pass


def gauss_constant_residual(c: int, u0: float, phi0: complex, psi0: complex) -> float:
    return abs(phi0) ** 2 + c * np.exp(u0) - np.exp(-2 * u0) * abs(psi0) ** 2


def make_constant_solution(chart: ConformalChart, c: int, u0: float, phi0: complex, psi0: complex,
                           tol: float = 1e-12) -> SurfaceData:
    """Constant data; the only nontrivial structure equation is ``|phi|^2 + c e^u = e^{-2u} |psi|^2``."""
    c = check_space_form(c)
    r = gauss_constant_residual(c, u0, phi0, psi0)
    if abs(r) > tol:
        raise CatalogError(f"constants violate the Gauss equation: residual {r:.3e}")
    shape = chart.shape
    return SurfaceData(
        chart, c,
        np.full(shape, float(u0)),
        np.full(shape, complex(phi0)),
        np.full(shape, complex(psi0)),
        meta={"generator": "constant", "u0": u0, "phi0": complex(phi0), "psi0": complex(psi0)},
    )


def profile_equilibrium(c: int, psi0: complex) -> float:
    """Constant solution ``u*`` of ``c e^u = e^{-2u} |psi0|^2`` (``c = 1``): ``e^{u*} = |psi0|^{2/3}``."""
    if c != 1 or psi0 == 0:
        raise CatalogError("an equilibrium profile exists only for c = 1 and psi0 != 0")
    return (2.0 / 3.0) * np.log(abs(psi0))


def _profile_rhs(c: int, a2: float):
    # u'' = -4 (c e^u - e^{-2u} |psi0|^2), written as a first-order system
    def f(s):
        u, v = s
        return np.array([v, -4.0 * (c * np.exp(u) - np.exp(-2 * u) * a2)])

    return f


def solve_profile_ode(chart: ConformalChart, c: int, psi0: complex, u_init: float, du_init: float,
                      cap: float = 50.0) -> SurfaceData:
    """Minimal data ``phi = 0``, ``psi = psi0`` with ``u = u(x)`` solving the reduced Gauss equation.

    With ``u_{z zbar} = u''/4`` the Gauss equation becomes
    ``u''/4 + c e^u - e^{-2u} |psi0|^2 = 0``; it is integrated by RK4 at the
    grid spacing from ``x_min`` and broadcast along ``y``.
    """
    c = check_space_form(c)
    if c == -1:
        raise CatalogError("no minimal profile for c = -1: -e^u - e^{-2u}|psi0|^2 < 0 forces u'' > 0 without bound")
    if c == 0 and psi0 != 0:
        raise CatalogError("c = 0 profiles need psi0 = 0 (no bounded minimal profile otherwise)")
    if chart.periodic_x:
        raise CatalogError("profile solutions live on charts open in x")
    meta = {"generator": "profile", "psi0": complex(psi0), "u_init": u_init, "du_init": du_init}
    if c == 1 and psi0 != 0:
        ustar = profile_equilibrium(c, psi0)
        if abs(u_init - ustar) < 1e-12 and du_init == 0:
            u = np.full(chart.shape, ustar)
            return SurfaceData(chart, c, u, np.zeros(chart.shape), np.full(chart.shape, complex(psi0)), meta=meta)
    f = _profile_rhs(c, abs(psi0) ** 2)
    h = chart.hx
    prof = np.empty(chart.nx)
    s = np.array([u_init, du_init], dtype=float)
    prof[0] = s[0]
    for i in range(1, chart.nx):
        # an escaping profile may overflow inside a stage; the check below reports it
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = f(s)
            k2 = f(s + 0.5 * h * k1)
            k3 = f(s + 0.5 * h * k2)
            k4 = f(s + h * k3)
            s = s + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(s)) or abs(s[0]) > cap:
            raise CatalogError(f"profile escapes |u| <= {cap} near x = {chart.x[i]:.6g}")
        prof[i] = s[0]
    u = np.broadcast_to(prof, chart.shape).copy()
    return SurfaceData(chart, c, u, np.zeros(chart.shape, complex), np.full(chart.shape, complex(psi0)), meta=meta)


@dataclass(frozen=True)
class Bump:
    """Gaussian ``exp(-|z - center|^2 / (2 width^2))`` with closed-form Wirtinger derivatives."""

    center: complex
    width: float

    def value(self, z):
        return np.exp(-np.abs(z - self.center) ** 2 / (2 * self.width**2))

    def d_z(self, z):
        # b_z = -conj(z - z0) / (2 w^2) * b
        return -np.conj(z - self.center) / (2 * self.width**2) * self.value(z)

    def d_zbar(self, z):
        return -(z - self.center) / (2 * self.width**2) * self.value(z)

    def d_zzbar(self, z):
        w2 = self.width**2
        r2 = np.abs(z - self.center) ** 2
        return (r2 / (4 * w2**2) - 1 / (2 * w2)) * self.value(z)


@dataclass
class Perturbation:
    data: SurfaceData
    predicted: dict


def perturb(data: SurfaceData, which: str, epsilon: float, bump: Bump | None = None) -> Perturbation:
    """Add ``epsilon * bump`` to one of ``u``, ``phi``, ``psi``.

    ``predicted`` holds the first-order change of each structure residual,
    evaluated in closed form from the bump derivatives. Terms involving
    derivatives of the base fields are dropped, so the prediction is the
    exact linearization only about constant base data.
    """
    ch = data.chart
    if bump is None:
        zc = 0.5 * (ch.x_min + ch.x_max) + 0.5j * (ch.y_min + ch.y_max)
        bump = Bump(zc, 0.15 * min(ch.x_max - ch.x_min, ch.y_max - ch.y_min))
    z = ch.z()
    b, bz, bzb, bzzb = bump.value(z), bump.d_z(z), bump.d_zbar(z), bump.d_zzbar(z)
    u, phi, psi, c = data.u, data.phi, data.psi, data.c
    eps = float(epsilon)
    zero = np.zeros(ch.shape, complex)
    if which == "u":
        new = data.replace(u=u + eps * b)
        pred = {
            "closedness": zero,
            "gauss": eps * (bzzb.real + (c * np.exp(u) + 2 * np.exp(-2 * u) * np.abs(psi) ** 2) * b),
            "codazzi": eps * np.exp(-u) * phi * bz,
        }
    elif which == "phi":
        new = data.replace(phi=phi + eps * b)
        pred = {
            "closedness": eps * (bzb - bz),
            "gauss": eps * 2 * (np.conj(phi) * b).real,
            "codazzi": -eps * np.exp(-u) * bz,
        }
    elif which == "psi":
        new = data.replace(psi=psi + eps * b)
        pred = {
            "closedness": zero,
            "gauss": -eps * 2 * np.exp(-2 * u) * (np.conj(psi) * b).real,
            "codazzi": eps * np.exp(-2 * u) * bzb,
        }
    else:
        raise ValueError(f"cannot perturb field {which!r}")
    new.meta.update({"perturbed": which, "epsilon": eps})
    return Perturbation(new, pred)
