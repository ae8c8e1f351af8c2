"""Harmonic ``1/psi``, its holomorphic completion and the derived ``h``-structure checks."""

from __future__ import annotations

import numpy as np

from ..chart import ConformalChart, cr_residual, d_x, d_y, d_z, d_zbar, field_norms, wirtinger_laplacian
from ..integrability import Residuals, tolerance
from ..surface_data import SurfaceData


class NotHarmonicError(ValueError):
    pass


class PeriodError(ValueError):
    """The harmonic conjugate picks up a nonzero period around a periodic axis."""


class SingularCoordinateError(ValueError):
    pass


def _trapezoid(rate: np.ndarray, h: float, start: int) -> np.ndarray:
    """Cumulative trapezoid integral along axis 0, zero at ``start``."""
    steps = 0.5 * h * (rate[1:] + rate[:-1])
    acc = np.concatenate([np.zeros((1,) + rate.shape[1:]), np.cumsum(steps, axis=0)])
    return acc - acc[start]


def holomorphic_completion(chart: ConformalChart, r, base: tuple[int, int] = (0, 0), *,
                           tol: float | None = None, tol_class: str = "h2", period_tol: float | None = None,
                           order: int = 2) -> np.ndarray:
    """Holomorphic ``h`` with ``h + conj(h) = r`` and ``Im h(base) = 0``.

    The conjugate ``s`` of ``r`` (``ds = -r_y dx + r_x dy``) is integrated by
    the trapezoid rule along the base row and then along every column, and
    ``h = r/2 + i s/2``.

    On a periodic axis the conjugate must close up; the period is the
    integral of ``ds`` once around the axis and a nonzero value raises
    ``PeriodError`` (a cylinder chart models an annulus, where ``log |z|^2``
    has no single-valued conjugate).
    """
    r = np.asarray(r, dtype=float)
    if tol is None:
        tol = tolerance(chart, tol_class=tol_class)
    lap = wirtinger_laplacian(chart, r, order)
    lap_norm = field_norms(chart, lap, margin=order).linf
    if lap_norm > tol:
        raise NotHarmonicError(f"r is not harmonic: |r_zzbar| = {lap_norm:.3e} exceeds {tol:g}")
    rx, ry = d_x(chart, r, order), d_y(chart, r, order)
    ix0, iy0 = base
    if period_tol is None:
        period_tol = tol

    # periods: mean over the transverse lines of the closed-loop integral
    if chart.periodic_x:
        p = float(np.max(np.abs(np.sum(-ry, axis=1) * chart.hx)))
        if p > period_tol:
            raise PeriodError(f"conjugate has period {p:.3e} around the x direction")
    if chart.periodic_y:
        p = float(np.max(np.abs(np.sum(rx, axis=0) * chart.hy)))
        if p > period_tol:
            raise PeriodError(f"conjugate has period {p:.3e} around the y direction")

    row = _trapezoid(-ry[iy0], chart.hx, ix0)
    s = row[None, :] + _trapezoid(rx, chart.hy, iy0)
    return 0.5 * r + 0.5j * s


def h_ode_residual(chart: ConformalChart, h, order: int = 2) -> np.ndarray:
    """``E - conj(E)`` with ``E = h_zz (h + conj h) - h_z^2``; vanishes on the distinguished family."""
    hz = d_z(chart, h, order)
    E = d_z(chart, hz, order) * 2 * np.real(h) - hz**2
    return E - np.conj(E)


def s_derivative(chart: ConformalChart, f, hz, order: int = 2) -> np.ndarray:
    """Derivative of ``f`` along ``Im w`` at fixed ``Re w``, where ``dw = dz / h_z``.

    Since ``z_w = h_z``, ``d/ds = i (h_z d_z - conj(h_z) d_zbar)``.
    """
    return 1j * (hz * d_z(chart, f, order) - np.conj(hz) * d_zbar(chart, f, order))


def h_structure_checks(data: SurfaceData | None, h, *, chart: ConformalChart | None = None,
                       tol: float | None = None, tol_class: str = "h2", floor: float = 1e-10,
                       real_tol: float | None = None, order: int = 2) -> Residuals:
    """Residual bundle tying the data to a holomorphic ``h`` with ``1/psi = h + conj(h)``.

    Fields (each with a norm and verdict):

    * ``r22``: ``psi (h + conj h) - 1``
    * ``r24_a``, ``r24_b``: ``e^{2u}`` from ``psi_zbar / (e^{-u} phi)_z`` and from
      ``-conj(h_z) / ((h + conj h)^2 (e^{-u} phi)_z)``, minus the data's ``e^{2u}``
    * ``r_hode``: see ``h_ode_residual``
    * ``r_tonly_Q``: ``s``-derivative of ``Q_geom = |h_z|^2 / (h + conj h)``
    * ``r_tonly_phi``, ``r_tonly_e2u``, ``r_tonly_psi``: ``s``-derivatives of
      ``e^{-u} phi``, ``e^{2u}/h_z`` and ``|psi|/|h_z|``; only checked for
      ``c = 0`` and real ``phi``

    Items that do not apply are left out of the verdicts and explained in
    ``res.notes``. ``data`` may be ``None`` (pass ``chart``); then only the
    ``h``-intrinsic items are computed. ``res.Q_geom`` holds the field.
    """
    ch = data.chart if data is not None else chart
    if ch is None:
        raise ValueError("a chart is needed when no data is given")
    h = np.asarray(h, dtype=complex)
    if tol is None:
        tol = tolerance(ch, tol_class=tol_class)
    hz = d_z(ch, h, order)
    inner = ch.interior_mask(order)
    if np.min(np.abs(hz[inner])) <= floor:
        iy, ix = np.argwhere(inner & (np.abs(hz) <= floor))[0]
        raise SingularCoordinateError(f"h_z vanishes at grid point ({ix}, {iy}); the w coordinate is singular")
    two_re = 2 * np.real(h)
    pos = two_re > floor
    notes: dict[str, str] = {}
    fields: dict[str, np.ndarray] = {}
    masks: dict[str, np.ndarray] = {}

    fields["r_hode"] = h_ode_residual(ch, h, order)
    Q_geom = np.abs(hz) ** 2 / np.where(pos, two_re, 1.0)
    fields["r_tonly_Q"] = s_derivative(ch, Q_geom, hz, order)
    masks["r_tonly_Q"] = pos

    if data is not None:
        u, phi, psi = data.u, data.phi, data.psi
        fields["r22"] = psi * two_re - 1.0
        g_z = d_z(ch, np.exp(-u) * phi, order)
        ok = pos & (np.abs(g_z) > floor)
        if ok.any():
            den = np.where(ok, g_z, 1.0)
            e2u = np.exp(2 * u)
            fields["r24_a"] = d_zbar(ch, psi, order) / den - e2u
            fields["r24_b"] = -np.conj(hz) / (np.where(pos, two_re, 1.0) ** 2 * den) - e2u
            masks["r24_a"] = masks["r24_b"] = ok
        else:
            notes["r24"] = "not applicable: (e^{-u} phi)_z vanishes on the chart"
        if real_tol is None:
            real_tol = tol
        if data.c != 0:
            notes["r_tonly"] = "not applicable: the t-only property is stated for c = 0"
        elif np.max(np.abs(phi.imag)) > real_tol:
            notes["r_tonly"] = "not applicable: phi is not real"
        else:
            fields["r_tonly_phi"] = s_derivative(ch, np.exp(-u) * phi, hz, order)
            fields["r_tonly_e2u"] = s_derivative(ch, np.exp(2 * u) / hz, hz, order)
            fields["r_tonly_psi"] = s_derivative(ch, np.abs(psi) / np.abs(hz), hz, order)

    norms = {}
    for k, v in fields.items():
        m = inner & masks.get(k, True)
        norms[k] = field_norms(ch, np.where(m, v, 0.0), margin=0)
    res = Residuals(fields, norms, tol)
    res.notes = notes
    res.Q_geom = Q_geom
    res.cr = cr_residual(ch, h, order)[1]
    return res
