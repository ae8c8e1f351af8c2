"""Pointwise conditions a Bonnet surface's Hopf differential must satisfy."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..chart import d_z, d_zbar, field_norms, wirtinger_laplacian
from ..integrability import Residuals, tolerance
from ..surface_data import SurfaceData, gauss_curvature


class EmptyMaskError(ValueError):
    pass


def nonvanishing_mask(chart, f, floor: float | None = None, eps_rel: float = 1e-3, grow: int = 2) -> np.ndarray:
    """Points where ``|f|`` exceeds ``floor`` and no stencil reaches a near-zero.

    The default floor is ``eps_rel * median |f|``.
    """
    mag = np.abs(f)
    if floor is None:
        floor = eps_rel * float(np.median(mag))
    bad = mag <= floor
    if grow and bad.any():
        bad = ndimage.binary_dilation(bad, structure=np.ones((3, 3), bool), iterations=grow)
    return ~bad


def bonnet_admissibility(data: SurfaceData, tol: float | None = None, tol_class: str = "h2",
                         floor: float | None = None, order: int = 2) -> Residuals:
    """Residual fields of the Bonnet-surface conditions on ``psi``.

    ========== ==========================================================
    r17        ``(log psi)_{z zbar} - |(log psi)_zbar|^2``
    r18        ``(psi_zbar / |psi|^2)_z``; equals ``r17 / conj(psi)``
    r19        ``((e^{-u} phi)_z / (|phi|^2 + e^u (c - K)))_z``
    r20        ``(log(e^{3u}(e^{-u}|phi|^2 + c - K)))_{z zbar}
               - 2 e^u |(e^{-u} phi)_z|^2 / (e^{-u}|phi|^2 + c - K)``
    r21        flat Laplacian of ``arg psi``
    r_iso      ``Im (log psi)_{z zbar}`` (zero iff isothermic)
    r_invpsi   ``(1/psi)_{z zbar}``
    ========== ==========================================================

    Logarithms are never formed directly for ``psi``: ``(log psi)_zbar`` is
    ``psi_zbar / psi``, so no branch cut enters.
    """
    ch = data.chart
    u, phi, psi, c = data.u, data.phi, data.psi, data.c
    mask = nonvanishing_mask(ch, psi, floor)
    if not mask.any():
        raise EmptyMaskError("psi vanishes on the whole chart")
    safe = np.where(mask, psi, 1.0)

    L = d_zbar(ch, psi, order) / safe
    Lz = d_z(ch, L, order)
    r17 = Lz - np.abs(L) ** 2
    r18 = d_z(ch, d_zbar(ch, psi, order) / np.where(mask, np.abs(psi) ** 2, 1.0), order)

    K = gauss_curvature(data, order)
    g_z = d_z(ch, np.exp(-u) * phi, order)
    inner = np.exp(-u) * np.abs(phi) ** 2 + c - K
    D = np.exp(u) * inner
    mask_d = mask & (np.abs(D) > 1e-12) & (inner > 0)
    r19 = d_z(ch, g_z / np.where(mask_d, D, 1.0), order)
    logterm = np.log(np.exp(3 * u) * np.where(mask_d, inner, 1.0))
    r20 = wirtinger_laplacian(ch, logterm, order).real - 2 * np.exp(u) * np.abs(g_z) ** 2 / np.where(mask_d, inner, 1.0)

    fields = {
        "r17": r17,
        "r18": r18,
        "r19": r19,
        "r20": r20,
        "r21": 4.0 * Lz.imag,
        "r_iso": Lz.imag,
        "r_invpsi": wirtinger_laplacian(ch, 1.0 / safe, order),
    }
    masks = {k: (mask_d if k in ("r19", "r20") else mask) for k in fields}
    norms = {k: field_norms(ch, np.where(masks[k], v, 0.0)) for k, v in fields.items()}
    if tol is None:
        tol = tolerance(ch, tol_class=tol_class)
    res = Residuals(fields, norms, tol)
    res.mask = mask
    return res


def equivalence_agrees(res: Residuals) -> bool:
    """The two forms of the Bonnet condition give the same verdict."""
    v = res.verdicts
    return v["r17"] == v["r18"]
