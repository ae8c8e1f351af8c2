"""Recover ``(u, phi, psi)`` from a sampled immersion or horizontal lift."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import d_z, d_zbar, field_norms
from .reconstruction import Immersion, ambient_metric, complex_structure
from .surface_data import SurfaceData


class DegenerateImmersionError(ValueError):
    pass


@dataclass
class Extraction:
    data: SurfaceData
    diagnostics: dict


def extract_data(imm: Immersion, c: int | None = None, *, floor: float = 1e-12, quadric_tol: float = 1e-6,
                 order: int = 4) -> Extraction:
    """Data triple of a sampled immersion.

    ``u = log <f_z, f_zbar>``, ``phi = e^{-u} <f_{z zbar}, J f_z>`` and
    ``psi = <f_zz, J f_z>`` with the complex-bilinear ambient product.
    Derivatives are nested first differences of the given ``order``; the
    default fourth-order stencils keep the differencing error well below
    the integration error of ``reconstruct_grid`` on moderate grids.
    """
    c = imm.c if c is None else c
    ch = imm.chart
    X = np.asarray(imm.points, dtype=float)
    n = X.shape[-1]
    if n != (4 if c == 0 else 6):
        raise ValueError(f"immersion has {n} real coordinates, c = {c} needs {4 if c == 0 else 6}")
    B = ambient_metric(c)
    J = complex_structure(n)
    dot = lambda a, b: np.sum(a * (b @ B), axis=-1)

    fz = d_z(ch, X, order)
    fzz = d_z(ch, fz, order)
    fzzb = d_zbar(ch, fz, order)
    Jfz = fz @ J.T
    eu = dot(fz, np.conj(fz)).real
    if np.min(eu) <= floor:
        iy, ix = np.unravel_index(int(np.argmin(eu)), eu.shape)
        raise DegenerateImmersionError(f"metric degenerates at grid point ({ix}, {iy})")
    u = np.log(eu)
    phi = dot(fzzb, Jfz) / eu
    psi = dot(fzz, Jfz)

    diag = {
        "conformality": np.abs(dot(fz, fz)),
        "lagrangian": np.abs(dot(fz, np.conj(Jfz))),
    }
    if c != 0:
        quad = np.abs(dot(X, X) - c)
        if np.max(quad) > quadric_tol:
            raise DegenerateImmersionError(f"lift leaves the quadric by {np.max(quad):.3e}")
        diag["quadric"] = quad
        diag["horizontality"] = np.abs(dot(fz, X @ J.T))
    diag_norms = {k: field_norms(ch, v, margin=order) for k, v in diag.items()}
    data = SurfaceData(ch, c, u, phi, psi)
    return Extraction(data, {"fields": diag, "norms": diag_norms})


@dataclass
class DataDistance:
    du: float
    dphi: float
    dpsi: float
    tol: float

    @property
    def congruent(self) -> bool:
        return max(self.du, self.dphi, self.dpsi) <= self.tol


def data_distance(a: SurfaceData, b: SurfaceData, tol: float = 1e-8, margin: int = 0) -> DataDistance:
    """L-infinity distances between two data triples on the same chart.

    Reconstruction fixes the gauge, so equal data means congruent immersions.
    ``margin`` drops boundary layers on open axes (useful for extracted data).
    """
    if a.chart != b.chart:
        raise ValueError("data live on different charts")
    if a.c != b.c:
        raise ValueError("data live in different space forms")
    n = lambda f: field_norms(a.chart, f, margin=margin).linf
    return DataDistance(n(a.u - b.u), n(a.phi - b.phi), n(a.psi - b.psi), tol)
