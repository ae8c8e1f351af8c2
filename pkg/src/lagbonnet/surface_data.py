"""The data triple ``(u, phi, psi)`` of a conformal Lagrangian surface.

The induced metric is ``g = 2 e^u dz dzbar``, the mean curvature form is
``phi dz`` and the cubic Hopf differential is ``psi dz^3``. The ambient
space form has holomorphic sectional curvature ``4c`` with ``c`` in
``{-1, 0, 1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chart import ConformalChart, check_field, d_x, d_y, wirtinger_laplacian

SPACE_FORMS = (-1, 0, 1)


def check_space_form(c) -> int:
    if isinstance(c, bool) or c not in SPACE_FORMS:
        raise ValueError(f"space form constant must be -1, 0 or 1, got {c!r}")
    return int(c)


@dataclass(frozen=True, eq=False)
class SurfaceData:
    chart: ConformalChart
    c: int
    u: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "c", check_space_form(self.c))
        u = check_field(self.chart, self.u, "u")
        if np.iscomplexobj(u):
            if np.any(u.imag != 0):
                raise ValueError("u must be real")
            u = u.real
        object.__setattr__(self, "u", np.array(u, dtype=float))
        object.__setattr__(self, "phi", np.array(check_field(self.chart, self.phi, "phi"), dtype=complex))
        object.__setattr__(self, "psi", np.array(check_field(self.chart, self.psi, "psi"), dtype=complex))
        for name in ("u", "phi", "psi"):
            if getattr(self, name).shape != self.chart.shape:
                raise ValueError(f"{name} must be a scalar field of shape {self.chart.shape}")

    def replace(self, **changes) -> "SurfaceData":
        kw = dict(chart=self.chart, c=self.c, u=self.u, phi=self.phi, psi=self.psi, meta=dict(self.meta))
        kw.update(changes)
        return SurfaceData(**kw)


@dataclass(frozen=True)
class DerivedInvariants:
    K: np.ndarray
    H_norm: np.ndarray
    maslov_dx: np.ndarray
    maslov_dy: np.ndarray


def gauss_curvature(data: SurfaceData, order: int = 2) -> np.ndarray:
    """Gauss curvature ``K = -e^{-u} u_{z zbar}`` of the metric alone."""
    return -np.exp(-data.u) * wirtinger_laplacian(data.chart, data.u, order).real


def mean_curvature_norm(data: SurfaceData) -> np.ndarray:
    """``|H|`` from ``|phi|^2 = |H|^2 e^u / 2``."""
    return np.sqrt(2.0 * np.abs(data.phi) ** 2 * np.exp(-data.u))


def invariant_identity_residual(data: SurfaceData, order: int = 2) -> np.ndarray:
    """``|psi|^2 - e^{3u} (e^{-u} |phi|^2 + c - K)``; vanishes exactly where the Gauss equation holds."""
    K = gauss_curvature(data, order)
    u = data.u
    return np.abs(data.psi) ** 2 - np.exp(3 * u) * (np.exp(-u) * np.abs(data.phi) ** 2 + data.c - K)


def maslov_form(data: SurfaceData) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients ``(a, b)`` of ``sigma_H = -(Phi + conj Phi) = a dx + b dy``."""
    return -2.0 * data.phi.real, 2.0 * data.phi.imag


def maslov_exterior_derivative(data: SurfaceData, order: int = 2) -> np.ndarray:
    """Coefficient of ``dx ^ dy`` in ``d sigma_H``."""
    a, b = maslov_form(data)
    return d_x(data.chart, b, order) - d_y(data.chart, a, order)


def derived_invariants(data: SurfaceData, order: int = 2) -> DerivedInvariants:
    a, b = maslov_form(data)
    return DerivedInvariants(gauss_curvature(data, order), mean_curvature_norm(data), a, b)
