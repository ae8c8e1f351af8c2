"""Rectangular conformal charts and Wirtinger calculus on gridded fields.

Fields are numpy arrays of shape ``(ny, nx)`` (optionally with trailing
component axes), so that ``field.ravel()`` is the row-major layout with
index ``iy * nx + ix``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np


class FieldNorms(NamedTuple):
    linf: float
    l2: float


class WindingError(ValueError):
    """Base class for loops on which the winding index is undefined."""


class ZeroOnLoopError(WindingError):
    pass


class LoopTooCoarseError(WindingError):
    pass


@dataclass(frozen=True)
class ConformalChart:
    nx: int
    ny: int
    x_min: float = 0.0
    x_max: float = 1.0
    y_min: float = 0.0
    y_max: float = 1.0
    periodic_x: bool = False
    periodic_y: bool = False

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"chart needs nx, ny >= 4, got {self.nx}x{self.ny}")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("chart bounds must satisfy x_max > x_min and y_max > y_min")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def hx(self) -> float:
        n = self.nx if self.periodic_x else self.nx - 1
        return (self.x_max - self.x_min) / n

    @property
    def hy(self) -> float:
        n = self.ny if self.periodic_y else self.ny - 1
        return (self.y_max - self.y_min) / n

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.hx * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.y_min + self.hy * np.arange(self.ny)

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Y)`` coordinate arrays of shape ``(ny, nx)``."""
        return np.meshgrid(self.x, self.y, indexing="xy")

    def z(self) -> np.ndarray:
        X, Y = self.grid()
        return X + 1j * Y

    def sample(self, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Evaluate ``func(z)`` on the grid (``z`` complex, shape ``(ny, nx)``)."""
        return np.broadcast_to(np.asarray(func(self.z())), self.shape).copy()

    def point(self, ix: int, iy: int) -> complex:
        return complex(self.x_min + ix * self.hx, self.y_min + iy * self.hy)

    def index_of(self, x: float, y: float) -> tuple[int, int]:
        """Nearest grid index to the coordinate ``(x, y)``."""
        ix = int(round((x - self.x_min) / self.hx))
        iy = int(round((y - self.y_min) / self.hy))
        if self.periodic_x:
            ix %= self.nx
        if self.periodic_y:
            iy %= self.ny
        if not (0 <= ix < self.nx and 0 <= iy < self.ny):
            raise ValueError(f"point ({x}, {y}) lies outside the chart")
        return ix, iy

    def interior_mask(self, margin: int = 2) -> np.ndarray:
        """Points whose nested stencils never touch an open boundary.

        Periodic axes have no boundary, so the full axis is kept.
        """
        mask = np.ones(self.shape, dtype=bool)
        if not self.periodic_x:
            mask[:, :margin] = False
            mask[:, self.nx - margin:] = False
        if not self.periodic_y:
            mask[:margin, :] = False
            mask[self.ny - margin:, :] = False
        return mask

    def to_dict(self) -> dict:
        return {
            "nx": self.nx,
            "ny": self.ny,
            "x_min": self.x_min,
            "x_max": self.x_max,
            "y_min": self.y_min,
            "y_max": self.y_max,
            "periodic_x": self.periodic_x,
            "periodic_y": self.periodic_y,
        }


def check_field(chart: ConformalChart, f, name: str = "field") -> np.ndarray:
    f = np.asarray(f)
    if f.shape[:2] != chart.shape:
        raise ValueError(f"{name} has shape {f.shape[:2]}, chart expects {chart.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError(f"{name} contains non-finite values")
    return f


# one-sided fourth-order first-derivative weights for the first two points
_FWD4 = (
    np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0,
    np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0,
)


def _diff4(f: np.ndarray, h: float, axis: int, periodic: bool) -> np.ndarray:
    if periodic:
        r = lambda k: np.roll(f, -k, axis=axis)
        return (-r(2) + 8 * r(1) - 8 * r(-1) + r(-2)) / (12 * h)
    n = f.shape[axis]
    if n < 5:
        raise ValueError("fourth-order stencils need at least 5 points per open axis")
    g = np.moveaxis(f, axis, 0)
    out = np.empty_like(g, dtype=np.result_type(g, float))
    out[2:-2] = (-g[4:] + 8 * g[3:-1] - 8 * g[1:-3] + g[:-4]) / (12 * h)
    for k, w in enumerate(_FWD4):
        out[k] = np.tensordot(w, g[:5], axes=(0, 0)) / h
        out[n - 1 - k] = -np.tensordot(w, g[::-1][:5], axes=(0, 0)) / h
    return np.moveaxis(out, 0, axis)


def _diff(f: np.ndarray, h: float, axis: int, periodic: bool, order: int) -> np.ndarray:
    if order == 4:
        return _diff4(f, h, axis, periodic)
    if order != 2:
        raise ValueError(f"unsupported stencil order {order}")
    if periodic:
        return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2 * h)
    return np.gradient(f, h, axis=axis, edge_order=2)


def d_x(chart: ConformalChart, f, order: int = 2) -> np.ndarray:
    f = check_field(chart, f)
    return _diff(f, chart.hx, 1, chart.periodic_x, order)


def d_y(chart: ConformalChart, f, order: int = 2) -> np.ndarray:
    f = check_field(chart, f)
    return _diff(f, chart.hy, 0, chart.periodic_y, order)


def derivative(chart: ConformalChart, f, which: str = "d_z", order: int = 2) -> np.ndarray:
    """Wirtinger derivative ``d_z = (d_x - i d_y)/2`` or ``d_zbar = (d_x + i d_y)/2``.

    Central differences in the interior, periodic wrap on periodic axes and
    one-sided stencils of the same order at open boundaries.
    """
    fx = d_x(chart, f, order)
    fy = d_y(chart, f, order)
    if which == "d_z":
        return 0.5 * (fx - 1j * fy)
    if which == "d_zbar":
        return 0.5 * (fx + 1j * fy)
    raise ValueError(f"unknown derivative {which!r}")


def d_z(chart: ConformalChart, f, order: int = 2) -> np.ndarray:
    return derivative(chart, f, "d_z", order)


def d_zbar(chart: ConformalChart, f, order: int = 2) -> np.ndarray:
    return derivative(chart, f, "d_zbar", order)


def wirtinger_laplacian(chart: ConformalChart, f, order: int = 2) -> np.ndarray:
    """Flat ``f_{z zbar}`` by nested first differences (a quarter of the flat Laplacian)."""
    return d_zbar(chart, d_z(chart, f, order), order)


def metric_laplacian(chart: ConformalChart, f, u, order: int = 2) -> np.ndarray:
    """Laplace-Beltrami operator of ``g = 2 e^u |dz|^2``: ``2 e^{-u} f_{z zbar}``."""
    u = check_field(chart, u, "u")
    return 2.0 * np.exp(-u) * wirtinger_laplacian(chart, f, order)


def field_norms(chart: ConformalChart, r, mask=None, margin: int = 2) -> FieldNorms:
    """Interior L-infinity and discrete L2 norms of a residual field.

    On open charts the ``margin`` boundary layers are excluded; ``mask``
    further restricts the evaluation set.
    """
    r = np.abs(np.asarray(r))
    if r.ndim > 2:
        r = np.sqrt(np.sum(r.reshape(r.shape[0], r.shape[1], -1) ** 2, axis=-1))
    keep = chart.interior_mask(margin)
    if mask is not None:
        keep = keep & mask
    vals = r[keep]
    if vals.size == 0:
        return FieldNorms(0.0, 0.0)
    # np.sum is pairwise and independent of thread count
    l2 = float(np.sqrt(np.sum(vals**2) * chart.hx * chart.hy))
    return FieldNorms(float(np.max(vals)), l2)


def cr_residual(chart: ConformalChart, f, order: int = 2) -> tuple[np.ndarray, FieldNorms]:
    """Pointwise ``|d_zbar f|`` with its interior norms; zero for holomorphic ``f``."""
    res = np.abs(d_zbar(chart, f, order))
    return res, field_norms(chart, res, margin=1)


def loop_indices(chart: ConformalChart, loop: tuple[int, int, int, int]) -> list[tuple[int, int]]:
    """Grid points of the rectangle ``(ix0, iy0, ix1, iy1)`` walked counterclockwise.

    Indices outside the grid are wrapped on periodic axes and rejected on
    open ones. The returned list is closed (last point equals the first).
    """
    ix0, iy0, ix1, iy1 = loop
    if ix1 <= ix0 or iy1 <= iy0:
        raise ValueError(f"degenerate loop {loop}")
    pts = [(ix, iy0) for ix in range(ix0, ix1)]
    pts += [(ix1, iy) for iy in range(iy0, iy1)]
    pts += [(ix, iy1) for ix in range(ix1, ix0, -1)]
    pts += [(ix0, iy) for iy in range(iy1, iy0, -1)]
    pts.append((ix0, iy0))
    return [_wrap(chart, ix, iy) for ix, iy in pts]


def _wrap(chart: ConformalChart, ix: int, iy: int) -> tuple[int, int]:
    if chart.periodic_x:
        ix %= chart.nx
    if chart.periodic_y:
        iy %= chart.ny
    if not (0 <= ix < chart.nx and 0 <= iy < chart.ny):
        raise ValueError(f"grid point ({ix}, {iy}) leaves the chart")
    return ix, iy


def winding_index(
    chart: ConformalChart,
    f,
    loop: tuple[int, int, int, int],
    floor: float | None = None,
    max_step: float = 0.75 * np.pi,
    tol: float = 0.25,
) -> int:
    """Degree of ``f / |f|`` along the rectangular grid loop ``(ix0, iy0, ix1, iy1)``.

    Sums principal-branch phase increments between consecutive loop samples.
    Raises ``ZeroOnLoopError`` if ``|f|`` drops below ``floor`` on the loop
    (default: ``1e-10 * max |f|`` there) and ``LoopTooCoarseError`` if a single
    step turns by more than ``max_step`` radians.
    """
    f = check_field(chart, f)
    pts = loop_indices(chart, loop)
    vals = np.array([f[iy, ix] for ix, iy in pts], dtype=complex)
    mod = np.abs(vals)
    if floor is None:
        floor = 1e-10 * float(mod.max())
    if mod.min() <= floor:
        k = int(np.argmin(mod))
        raise ZeroOnLoopError(f"field vanishes on loop near grid point {pts[k]}")
    steps = np.angle(vals[1:] / vals[:-1])
    worst = int(np.argmax(np.abs(steps)))
    if abs(steps[worst]) >= max_step:
        raise LoopTooCoarseError(
            f"phase step {steps[worst]:.3f} rad at grid point {pts[worst]} exceeds {max_step:.3f}"
        )
    turns = float(np.sum(steps)) / (2 * np.pi)
    k = int(round(turns))
    if abs(turns - k) > tol:
        raise LoopTooCoarseError(f"non-integral winding {turns:.4f}")
    return k
