"""Phase diagnostics for two immersions with the same metric and mean curvature form.

With ``psi2 = e^{i theta} psi1`` and ``Q = 1 - e^{i theta}``, a genuine pair
has ``arg Q`` harmonic and ``log |Q|`` superharmonic with respect to the
induced metric. This module computes those quantities on a sampled chart.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..chart import ConformalChart, check_field, field_norms, metric_laplacian
from ..integrability import tolerance
from .admissibility import EmptyMaskError, nonvanishing_mask


class ModulusMismatchError(ValueError):
    pass


class BranchHolonomyError(ValueError):
    def __init__(self, msg: str, edges: list):
        super().__init__(msg)
        self.edges = edges


@dataclass
class LTDiagnostics:
    theta: np.ndarray
    Q: np.ndarray
    lap_log_absQ: np.ndarray
    lap_argQ: np.ndarray
    mask: np.ndarray
    norms: dict
    verdicts: dict
    seed: tuple[int, int]
    tol: float
    messages: list

    @property
    def Q_lt(self) -> np.ndarray:
        return self.Q


_NEIGHBOURS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _neighbours(chart: ConformalChart, ix: int, iy: int):
    for dx, dy in _NEIGHBOURS:
        jx, jy = ix + dx, iy + dy
        if chart.periodic_x:
            jx %= chart.nx
        if chart.periodic_y:
            jy %= chart.ny
        if 0 <= jx < chart.nx and 0 <= jy < chart.ny:
            yield jx, jy


def unwrap_phase(chart: ConformalChart, ratio: np.ndarray, mask: np.ndarray, seed: tuple[int, int]) -> np.ndarray:
    """Continuous ``arg ratio`` over the component of ``mask`` containing ``seed``.

    Breadth-first from ``seed`` with a fixed neighbour order, each step adds
    the principal angle of the quotient of neighbouring values. Points not
    reached stay NaN. Every edge between reached points is then compared
    with its principal increment; a mismatch means the phase has holonomy
    around some excluded region and raises ``BranchHolonomyError``.
    """
    theta = np.full(chart.shape, np.nan)
    ix, iy = seed
    theta[iy, ix] = np.angle(ratio[iy, ix]) % (2 * np.pi)
    queue = deque([seed])
    while queue:
        ix, iy = queue.popleft()
        for jx, jy in _neighbours(chart, ix, iy):
            if mask[jy, jx] and np.isnan(theta[jy, jx]):
                theta[jy, jx] = theta[iy, ix] + np.angle(ratio[jy, jx] / ratio[iy, ix])
                queue.append((jx, jy))

    reached = ~np.isnan(theta)
    bad = []
    for axis, periodic in ((1, chart.periodic_x), (0, chart.periodic_y)):
        nxt_t = np.roll(theta, -1, axis=axis)
        nxt_r = np.roll(ratio, -1, axis=axis)
        both = reached & np.roll(reached, -1, axis=axis)
        if not periodic:
            sl = [slice(None), slice(None)]
            sl[axis] = -1
            both[tuple(sl)] = False
        with np.errstate(invalid="ignore"):
            jump = (nxt_t - theta) - np.angle(nxt_r / ratio)
        hit = both & (np.abs(jump) > np.pi)
        for iy, ix in np.argwhere(hit):
            bad.append(((int(ix), int(iy)), "x" if axis == 1 else "y"))
    if bad:
        raise BranchHolonomyError(f"phase branch has holonomy; first cut edge at grid point {bad[0][0]} "
                                  f"along {bad[0][1]}", bad)
    return theta


def lt_diagnostics(chart: ConformalChart, psi1, psi2, u, *, tol: float | None = None, tol_class: str = "h2",
                   modulus_tol: float | None = None, floor: float | None = None, order: int = 2) -> LTDiagnostics:
    """Phase ``theta = arg(psi2/psi1)``, ``Q = 1 - e^{i theta}`` and metric Laplacians of ``log|Q|``, ``arg Q``.

    The mask drops the neighbourhoods of zeros of ``psi1`` and of ``Q``
    (where the two fields agree). ``theta`` is unwrapped from the masked
    point of largest ``|psi1|`` and shifted so that its seed value lies in
    ``[0, 2 pi)``. On the branch ``arg Q = (theta - pi) / 2``.

    Verdicts: ``argQ_harmonic`` (sup norm of ``Delta_g arg Q`` within
    ``tol``) and ``log_absQ_superharmonic`` (``Delta_g log|Q| <= tol``).
    """
    psi1 = check_field(chart, psi1, "psi1").astype(complex)
    psi2 = check_field(chart, psi2, "psi2").astype(complex)
    u = check_field(chart, u, "u").astype(float)
    if tol is None:
        tol = tolerance(chart, tol_class=tol_class)
    if modulus_tol is None:
        modulus_tol = tol
    mism = float(np.max(np.abs(np.abs(psi1) - np.abs(psi2))))
    if mism > modulus_tol:
        raise ModulusMismatchError(f"|psi1| and |psi2| differ by {mism:.3e} (> {modulus_tol:g})")

    mask = nonvanishing_mask(chart, psi1, floor)
    if not mask.any():
        raise EmptyMaskError("psi1 vanishes on the whole chart")
    ratio = np.where(mask, psi2 / np.where(mask, psi1, 1.0), 1.0)
    Q = 1.0 - ratio
    q_ok = np.abs(Q) > 1e-8
    if q_ok.any() and not q_ok.all():
        q_ok = ~ndimage.binary_dilation(~q_ok, structure=np.ones((3, 3), bool), iterations=2)
    mask &= q_ok
    if not mask.any():
        raise EmptyMaskError("psi1 and psi2 coincide wherever psi1 is nonzero")

    mag = np.where(mask, np.abs(psi1), -np.inf)
    iy, ix = np.unravel_index(int(np.argmax(mag)), mag.shape)
    seed = (int(ix), int(iy))
    theta = unwrap_phase(chart, ratio, mask, seed)
    reached = ~np.isnan(theta)
    messages = []
    if not reached[mask].all():
        messages.append("mask is disconnected; only the component of the seed is analysed")
    mask &= reached
    theta_f = np.where(mask, theta, np.pi)
    Q = np.where(mask, 1.0 - np.exp(1j * theta_f), 0.0)

    log_absQ = np.log(np.where(mask, 2 * np.abs(np.sin(theta_f / 2)), 1.0))
    argQ = (theta_f - np.pi) / 2
    lap_log = metric_laplacian(chart, log_absQ, u, order).real
    lap_arg = metric_laplacian(chart, argQ, u, order).real

    # stencils of points near the mask edge read filler values
    inner = ndimage.binary_erosion(mask, structure=np.ones((3, 3), bool), iterations=order, border_value=1)
    inner &= chart.interior_mask(order)
    norms = {
        "lap_log_absQ": field_norms(chart, lap_log, mask=inner, margin=0),
        "lap_argQ": field_norms(chart, lap_arg, mask=inner, margin=0),
    }
    top = float(np.max(lap_log[inner])) if inner.any() else 0.0
    verdicts = {
        "argQ_harmonic": norms["lap_argQ"].linf <= tol,
        "log_absQ_superharmonic": top <= tol,
    }
    if not verdicts["argQ_harmonic"]:
        messages.append("not a valid Bonnet-pair phase: arg Q is not harmonic")
    theta_out = np.where(mask, theta, np.nan)
    return LTDiagnostics(theta_out, Q, lap_log, lap_arg, mask, norms, verdicts, seed, tol, messages)
