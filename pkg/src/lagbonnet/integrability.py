"""Residuals of the Gauss-Codazzi system and the classification predicates.

For data ``(u, phi, psi)`` in a space form of curvature ``4c`` the structure
equations are

* closedness: ``phi_zbar - conj(phi)_z = 0``
* Gauss:      ``u_{z zbar} + |phi|^2 + c e^u - e^{-2u} |psi|^2 = 0``
* Codazzi:    ``e^{-2u} psi_zbar - (e^{-u} phi)_z = 0``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import FieldNorms, d_z, d_zbar, field_norms, wirtinger_laplacian
from .surface_data import SurfaceData

TOL_CLASSES = ("exact", "h2", "h4")


def tolerance(chart, tol: float = 1e-8, tol_class: str = "exact", C: float = 10.0) -> float:
    """Pass/fail threshold: ``tol`` for exact data, ``C h^2`` or ``C h^4`` for sampled data."""
    if tol_class == "exact":
        return tol
    if tol_class == "h2":
        return C * chart.h**2
    if tol_class == "h4":
        return C * chart.h**4
    raise ValueError(f"unknown tolerance class {tol_class!r}")


@dataclass
class Residuals:
    fields: dict
    norms: dict
    tol: float

    @property
    def verdicts(self) -> dict:
        return {k: n.linf <= self.tol for k, n in self.norms.items()}

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def __getitem__(self, key):
        return self.fields[key]


def integrability_residuals(data: SurfaceData, tol: float | None = None, tol_class: str = "exact",
                            order: int = 2) -> Residuals:
    ch, u, phi, psi = data.chart, data.u, data.phi, data.psi
    closedness = d_zbar(ch, phi, order) - d_z(ch, np.conj(phi), order)
    u_zzb = wirtinger_laplacian(ch, u, order).real
    gauss = u_zzb + np.abs(phi) ** 2 + data.c * np.exp(u) - np.exp(-2 * u) * np.abs(psi) ** 2
    codazzi = np.exp(-2 * u) * d_zbar(ch, psi, order) - d_z(ch, np.exp(-u) * phi, order)
    fields = {"closedness": closedness, "gauss": gauss, "codazzi": codazzi}
    norms = {k: field_norms(ch, v) for k, v in fields.items()}
    if tol is None:
        tol = tolerance(ch, tol_class=tol_class)
    return Residuals(fields, norms, tol)


def classify(data: SurfaceData, tol: float | None = None, tol_class: str = "exact",
             order: int = 2) -> Residuals:
    """Minimal, Hamiltonian-stationary and conformal-Maslov residuals.

    * minimal: ``|phi|``
    * Hamiltonian stationary (``Phi`` holomorphic): ``|phi_zbar|``
    * conformal Maslov form: ``|(e^{-u} phi)_z|``

    ``psi_holomorphy`` is ``|e^{-2u} psi_zbar|``, which equals the
    conformal-Maslov residual whenever the Codazzi equation holds.
    """
    ch = data.chart
    fields = {
        "minimal": np.abs(data.phi),
        "hamiltonian_stationary": np.abs(d_zbar(ch, data.phi, order)),
        "conformal_maslov": np.abs(d_z(ch, np.exp(-data.u) * data.phi, order)),
        "psi_holomorphy": np.abs(np.exp(-2 * data.u) * d_zbar(ch, data.psi, order)),
    }
    norms = {k: field_norms(ch, v) for k, v in fields.items()}
    if tol is None:
        tol = tolerance(ch, tol_class=tol_class)
    return Residuals(fields, norms, tol)


def norms_dict(norms: dict[str, FieldNorms]) -> dict:
    return {k: {"linf": n.linf, "l2": n.l2} for k, n in norms.items()}
