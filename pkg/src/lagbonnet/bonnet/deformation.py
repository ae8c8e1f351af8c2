"""Isometric deformations ``psi -> e^{it} psi`` preserving the mean curvature form.

The deformation parameter ``t`` solves the total differential system

    t_zbar = i (1 - e^{-it}) psi_zbar / psi

(``t_z`` is its conjugate), i.e. along the chart axes

    t_x = 2 Re[i (1 - e^{-it}) B],   t_y = 2 Re[(1 - e^{-it}) B],   B = psi_zbar / psi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..chart import d_zbar
from ..integrability import tolerance
from ..surface_data import SurfaceData
from .admissibility import bonnet_admissibility


class NotBonnetError(ValueError):
    pass


def _rate_x(t, B):
    return 2.0 * (1j * (1.0 - np.exp(-1j * t)) * B).real


def _rate_y(t, B):
    return 2.0 * ((1.0 - np.exp(-1j * t)) * B).real


def _rk4(rate, t, B0, B1, h):
    Bm = 0.5 * (B0 + B1)
    k1 = rate(t, B0)
    k2 = rate(t + 0.5 * h * k1, Bm)
    k3 = rate(t + 0.5 * h * k2, Bm)
    k4 = rate(t + h * k3, B1)
    return t + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _sweep(rate, Bs, h, t0, start):
    """``Bs`` has the integration axis first; ``t0`` is batched over the rest."""
    n = Bs.shape[0]
    out = np.empty((n,) + np.shape(t0))
    out[start] = t0
    for step in (1, -1):
        t, i = t0, start
        while 0 <= i + step < n:
            t = _rk4(rate, t, Bs[i], Bs[i + step], step * h)
            i += step
            out[i] = t
    return out


@dataclass
class DeformationState:
    t: np.ndarray
    closure_defect: float
    closure_density: float
    cell_defects: np.ndarray
    sweep_gap: float

    @property
    def t_def(self) -> np.ndarray:
        return self.t


def integrate_pfaff(data: SurfaceData, t0: float, base: tuple[int, int] = (0, 0), *, check: bool = True,
                    tol: float | None = None, tol_class: str = "h2", ceiling: float | None = None,
                    order: int = 2, margin: int | None = None) -> DeformationState:
    """Solve for the deformation field ``t`` with ``t(base) = t0``.

    Integration runs along the base row and then up and down every column
    (RK4 at grid spacing). The closure defect is the largest mismatch after
    transporting ``t`` once around a single interior grid cell (cells within
    ``margin`` points of an open edge see one-sided stencils and are skipped;
    the default margin is ``order``). ``closure_density`` is
    that defect divided by the cell area, which stays ``O(h^2)`` for Bonnet
    data and ``O(1)`` otherwise. ``ceiling`` bounds the density (default
    ``10 h^2``). ``sweep_gap`` compares with the column-then-row sweep.
    """
    ch = data.chart
    psi = data.psi
    if np.min(np.abs(psi)) == 0.0:
        iy, ix = np.unravel_index(int(np.argmin(np.abs(psi))), psi.shape)
        raise NotBonnetError(f"psi vanishes on the integration tree at grid point ({ix}, {iy})")
    if check:
        adm = bonnet_admissibility(data, tol=tol, tol_class=tol_class, order=order)
        if not adm.verdicts["r18"]:
            raise NotBonnetError(f"admissibility residual r18 = {adm.norms['r18'].linf:.3e} exceeds {adm.tol:g}")
    if margin is None:
        margin = order
    B = d_zbar(ch, psi, order) / psi
    ix0, iy0 = base
    hx, hy = ch.hx, ch.hy

    row = _sweep(_rate_x, B[iy0], hx, float(t0), ix0)
    t = _sweep(_rate_y, B, hy, row, iy0)
    col = _sweep(_rate_y, B[:, ix0], hy, float(t0), iy0)
    t_alt = _sweep(_rate_x, B.T, hx, col, ix0).T
    gap = float(np.max(np.abs(t - t_alt)))

    # counterclockwise transport around every cell, starting at its lower-left corner
    s = t[:-1, :-1]
    s = _rk4(_rate_x, s, B[:-1, :-1], B[:-1, 1:], hx)
    s = _rk4(_rate_y, s, B[:-1, 1:], B[1:, 1:], hy)
    s = _rk4(_rate_x, s, B[1:, 1:], B[1:, :-1], -hx)
    s = _rk4(_rate_y, s, B[1:, :-1], B[:-1, :-1], -hy)
    cells = np.abs(s - t[:-1, :-1])
    inner = ch.interior_mask(margin)
    inner = inner[:-1, :-1] & inner[1:, 1:] & inner[:-1, 1:] & inner[1:, :-1]
    if not inner.any():
        raise ValueError("chart too small for an interior loop test")
    defect = float(np.max(cells[inner]))
    density = defect / (hx * hy)
    if ceiling is None:
        ceiling = tolerance(ch, tol_class="h2")
    if check and density > ceiling:
        raise NotBonnetError(f"Pfaff system not closed: defect density {density:.3e} exceeds {ceiling:g}")
    return DeformationState(t, defect, density, cells, gap)


def deform(data: SurfaceData, state) -> SurfaceData:
    """Deformed data ``(u, phi, e^{it} psi)``; ``state`` is a ``DeformationState`` or a ``t`` field/constant."""
    t = state.t if isinstance(state, DeformationState) else state
    t = np.broadcast_to(np.asarray(t, dtype=float), data.chart.shape)
    new = data.replace(psi=np.exp(1j * t) * data.psi)
    new.meta.update({"deformed": True})
    return new
