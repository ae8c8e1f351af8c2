"""Pairs of isometric immersions: the ``(h, alpha)`` parametrization and umbilic divisors."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..chart import ConformalChart, WindingError, check_field, cr_residual, field_norms, winding_index


class NotAPairError(ValueError):
    pass


class ZeroFieldError(ValueError):
    pass


@dataclass
class PairDecomposition:
    h: np.ndarray
    q: np.ndarray
    alpha: np.ndarray
    mask: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def alpha_pair(self) -> np.ndarray:
        return self.alpha


def _relative_floor(f: np.ndarray, eps_rel: float) -> float:
    return eps_rel * float(np.median(np.abs(f)))


def _fit_leading(zeta: np.ndarray, vals: np.ndarray, k: int) -> complex:
    """Coefficient of ``zeta^k`` in a least-squares polynomial of degree ``k``."""
    V = np.vander(zeta, k + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(V, vals, rcond=None)
    return coef[k]


def _fill_alpha(chart: ConformalChart, h, q, alpha, mask, patch: int = 2) -> tuple[np.ndarray, list]:
    """Extend ``alpha`` over the unmasked clusters (near zeros of ``h``).

    A zero of order ``k`` at ``z0`` gives ``h ~ a (z - z0)^k`` and
    ``q ~ b (z - z0)^k``, so ``alpha(z0) = -i b / a``. The orders come from
    winding numbers; fits use the ``(2 patch + 1)^2`` points around the
    smallest ``|h|`` of the cluster. Clusters where this fails fall back to
    the nearest masked value.
    """
    alpha = alpha.copy()
    labels, n = ndimage.label(~mask, structure=np.ones((3, 3), bool))
    z = chart.z()
    events = []
    fallback = np.zeros(mask.shape, bool)
    for lab in range(1, n + 1):
        cl = labels == lab
        ys, xs = np.nonzero(cl)
        iy, ix = np.unravel_index(int(np.argmin(np.where(cl, np.abs(h), np.inf))), h.shape)
        try:
            k = winding_index(chart, h, (xs.min() - 1, ys.min() - 1, xs.max() + 1, ys.max() + 1))
            if k < 1:
                raise WindingError(f"winding {k}")
            sl = (slice(iy - patch, iy + patch + 1), slice(ix - patch, ix + patch + 1))
            if iy - patch < 0 or ix - patch < 0 or iy + patch >= h.shape[0] or ix + patch >= h.shape[1]:
                raise WindingError("patch leaves the chart")
            zeta = (z[sl] - z[iy, ix]).ravel()
            a = _fit_leading(zeta, h[sl].ravel(), k)
            b = _fit_leading(zeta, q[sl].ravel(), k)
            alpha[cl] = (-1j * b / a).real
            events.append({"cell": (int(ix), int(iy)), "order": k, "method": "polynomial"})
        except (WindingError, ValueError) as exc:
            fallback |= cl
            events.append({"cell": (int(ix), int(iy)), "order": None, "method": "nearest", "reason": str(exc)})
    if fallback.any():
        warnings.warn("alpha near some zeros of h filled from the nearest masked value", RuntimeWarning,
                      stacklevel=3)
        _, (iy_n, ix_n) = ndimage.distance_transform_edt(~mask, return_indices=True)
        alpha[fallback] = alpha[iy_n[fallback], ix_n[fallback]]
    return alpha, events


def pair_decompose(chart: ConformalChart, psi1, psi2, *, floor: float | None = None, eps_rel: float = 1e-3,
                   order: int = 2) -> PairDecomposition:
    """``h = psi1 - psi2``, ``q = psi1 + psi2`` and the real ratio ``alpha = -i q / h``.

    ``mask`` marks ``|h| > floor`` (default: ``eps_rel`` times the median of
    ``|h|``); off the mask ``alpha`` is extended as described in
    ``_fill_alpha``. The diagnostics hold the holomorphy residual of ``h``,
    the modulus mismatch and the imaginary part of ``-i q / h`` on the mask.
    """
    psi1 = check_field(chart, psi1, "psi1").astype(complex)
    psi2 = check_field(chart, psi2, "psi2").astype(complex)
    if np.array_equal(psi1, psi2):
        raise NotAPairError("not a pair: psi1 and psi2 coincide")
    h = psi1 - psi2
    q = psi1 + psi2
    if floor is None:
        floor = _relative_floor(h, eps_rel)
    mask = np.abs(h) > floor
    ratio = -1j * q / np.where(mask, h, 1.0)
    alpha = np.where(mask, ratio.real, 0.0)
    filled = []
    if not mask.all():
        alpha, filled = _fill_alpha(chart, h, q, alpha, mask)
    diag = {
        "cr_h": cr_residual(chart, h, order)[1],
        "modulus": field_norms(chart, np.abs(psi1) - np.abs(psi2), margin=0),
        "im_alpha": field_norms(chart, np.where(mask, ratio.imag, 0.0), margin=0),
        "orthogonality": field_norms(chart, (q * np.conj(h) + h * np.conj(q)).real, margin=0),
        "filled": filled,
        "floor": floor,
    }
    return PairDecomposition(h, q, alpha, mask, diag)


def pair_compose(h, alpha) -> tuple[np.ndarray, np.ndarray]:
    """``psi1 = h (i alpha + 1) / 2`` and ``psi2 = h (i alpha - 1) / 2``; equal moduli for real ``alpha``."""
    h = np.asarray(h, dtype=complex)
    alpha = np.asarray(alpha)
    if np.iscomplexobj(alpha):
        raise TypeError("alpha must be real")
    return 0.5 * h * (1j * alpha + 1), 0.5 * h * (1j * alpha - 1)


@dataclass(frozen=True)
class UmbilicPoint:
    cell: tuple[int, int]
    location: complex
    index: int
    margin: float


@dataclass
class UmbilicReport:
    points: list
    degree: int
    boundary_clusters: list
    threshold: float
    genus1_consistent: bool | None = None

    @property
    def count(self) -> int:
        return len(self.points)


def expected_divisor_degree(genus: int) -> int:
    """Degree of the divisor of a holomorphic cubic differential on a closed surface of the given genus."""
    return 6 * genus - 6


def _cell_winding(f: np.ndarray, periodic_x: bool, periodic_y: bool) -> np.ndarray:
    """Winding of ``f`` around each grid cell, attributed to its four corners."""
    g = f
    if periodic_x:
        g = np.concatenate([g, g[:, :1]], axis=1)
    if periodic_y:
        g = np.concatenate([g, g[:1, :]], axis=0)
    a, b, c, d = g[:-1, :-1], g[:-1, 1:], g[1:, 1:], g[1:, :-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        turn = np.angle(b / a) + np.angle(c / b) + np.angle(d / c) + np.angle(a / d)
    hit = np.abs(turn) > np.pi
    # open axes lose one cell; pad with False so rolling never wraps a hit
    hit = np.pad(hit, ((0, f.shape[0] - hit.shape[0]), (0, f.shape[1] - hit.shape[1])))
    return hit | np.roll(hit, 1, axis=1) | np.roll(hit, 1, axis=0) | np.roll(hit, (1, 1), axis=(0, 1))


def _seam_shift(bad: np.ndarray, axis: int) -> int:
    """Roll offset that puts a candidate-free line at index 0 (so no cluster straddles the seam)."""
    free = np.nonzero(~bad.any(axis=1 - axis))[0]
    return int(free[0]) if free.size else 0


def umbilic_analysis(chart: ConformalChart, f, *, eps_rel: float = 1e-3, radius: int = 2) -> UmbilicReport:
    """Isolated zeros of ``f`` with their winding indices.

    Candidates are points with ``|f| < eps_rel * median |f|`` together with
    the corners of grid cells around which ``f`` winds (simple zeros between
    grid points can stay above any small threshold). Candidates within
    ``radius`` cells are merged. Each cluster's index is the winding of ``f``
    along the rectangle one point outside it; clusters whose rectangle
    would leave an open edge are listed in ``boundary_clusters`` and not
    counted. On a doubly periodic chart ``genus1_consistent`` tells whether
    the degree vanishes, as it must for a torus.
    """
    f = check_field(chart, f).astype(complex)
    mag = np.abs(f)
    if not mag.any():
        raise ZeroFieldError("field vanishes identically")
    threshold = _relative_floor(f, eps_rel)
    cand = (mag < threshold) | _cell_winding(f, chart.periodic_x, chart.periodic_y)
    if radius:
        cand = ndimage.binary_dilation(cand, structure=np.ones((3, 3), bool), iterations=radius)
    sx = _seam_shift(cand, 1) if chart.periodic_x else 0
    sy = _seam_shift(cand, 0) if chart.periodic_y else 0
    fr = np.roll(f, (-sy, -sx), axis=(0, 1))
    cr = np.roll(cand, (-sy, -sx), axis=(0, 1))
    labels, n = ndimage.label(cr, structure=np.ones((3, 3), bool))
    points, boundary = [], []
    degree = 0
    for lab in range(1, n + 1):
        cl = labels == lab
        ys, xs = np.nonzero(cl)
        iy, ix = np.unravel_index(int(np.argmin(np.where(cl, np.abs(fr), np.inf))), fr.shape)
        cell = (int((ix + sx) % chart.nx), int((iy + sy) % chart.ny))
        loc = chart.point(*cell)
        loop = (int(xs.min()) - 1, int(ys.min()) - 1, int(xs.max()) + 1, int(ys.max()) + 1)
        try:
            k = winding_index(chart, fr, loop)
        except ValueError as exc:
            # loop leaves an open edge, or the field is too rough there
            boundary.append({"cell": cell, "location": loc, "reason": str(exc)})
            continue
        if k == 0:
            continue
        ring = np.zeros(cl.shape, bool)
        ring[max(loop[1], 0):loop[3] + 1, max(loop[0], 0):loop[2] + 1] = True
        margin = float(np.min(np.abs(fr[ring & ~cl]))) / threshold if threshold > 0 else np.inf
        points.append(UmbilicPoint(cell, loc, k, margin))
        degree += k
    points.sort(key=lambda p: (p.cell[1], p.cell[0]))
    torus = chart.periodic_x and chart.periodic_y
    return UmbilicReport(points, degree, boundary, threshold, (degree == 0) if torus else None)
