"""Immersions from data: integrate the moving-frame system.

All ambient vectors are kept in real coordinates and complexified, so the
complexification ``i`` (used for ``d_z``) never mixes with the complex
structure ``J``, which is a fixed real matrix.

* ``c = 0``: ambient ``R^4 = C^2``, frame ``(f_z, f_zbar, J f_z, J f_zbar)``;
  the immersion is integrated alongside from ``df = f_z dz + f_zbar dzbar``.
* ``c = +-1``: horizontal lift ``F`` into ``S^5`` or ``H^5_1`` inside
  ``R^6 = C^3``, frame ``(F, JF, F_z, F_zbar, JF_z, JF_zbar)``. The ``F``
  coefficient of ``F_{z zbar}`` is ``-c e^u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chart import ConformalChart, d_z, loop_indices
from .integrability import integrability_residuals, tolerance
from .surface_data import SurfaceData


class IntegrabilityError(ValueError):
    pass


class PathError(ValueError):
    pass


class ReconstructionError(RuntimeError):
    pass


def complex_structure(n: int) -> np.ndarray:
    """Multiplication by ``i`` on ``C^{n/2}`` in coordinates ``(Re w_1, Im w_1, ...)``."""
    J = np.zeros((n, n))
    for k in range(0, n, 2):
        J[k + 1, k] = 1.0
        J[k, k + 1] = -1.0
    return J


def ambient_metric(c: int) -> np.ndarray:
    """Real part of the Hermitian form: standard for ``c >= 0``, signature ``(-, +, +)`` on ``C^3`` for ``c = -1``."""
    if c == 0:
        return np.eye(4)
    B = np.eye(6)
    if c == -1:
        B[0, 0] = B[1, 1] = -1.0
    return B


def ambient_dim(c: int) -> int:
    return 4 if c == 0 else 6


def frame_width(c: int) -> int:
    return 4 if c == 0 else 6


def coefficient_matrices(c: int, uz, eu, phi, psi) -> tuple[np.ndarray, np.ndarray]:
    """Matrices ``(U, V)`` with ``sigma_z = sigma U`` and ``sigma_zbar = sigma V``.

    Arguments may be scalars or arrays; the matrices are stacked on the last
    two axes.
    """
    uz, eu, phi, psi = np.broadcast_arrays(*(np.asarray(a, dtype=complex) for a in (uz, eu, phi, psi)))
    uzb = np.conj(uz)
    phb, psb = np.conj(phi), np.conj(psi)
    q, qb = psi / eu, psb / eu
    m = frame_width(c)
    U = np.zeros(uz.shape + (m, m), dtype=complex)
    V = np.zeros_like(U)
    if c == 0:
        U[..., 0, 0] = uz
        U[..., 0, 2] = -phi
        U[..., 0, 3] = -phb
        U[..., 1, 2] = -q
        U[..., 1, 3] = -phi
        U[..., 2, 0] = phi
        U[..., 2, 1] = phb
        U[..., 2, 2] = uz
        U[..., 3, 0] = q
        U[..., 3, 1] = phi

        V[..., 0, 2] = -phb
        V[..., 0, 3] = -qb
        V[..., 1, 1] = uzb
        V[..., 1, 2] = -phi
        V[..., 1, 3] = -phb
        V[..., 2, 0] = phb
        V[..., 2, 1] = qb
        V[..., 3, 0] = phi
        V[..., 3, 1] = phb
        V[..., 3, 3] = uzb
        return U, V

    # columns: 0 F, 1 JF, 2 F_z, 3 F_zbar, 4 JF_z, 5 JF_zbar
    ce = -c * eu
    U[..., 2, 0] = 1.0
    U[..., 4, 1] = 1.0
    U[..., 2, 2], U[..., 4, 2], U[..., 5, 2] = uz, phi, q              # F_zz
    U[..., 0, 3], U[..., 4, 3], U[..., 5, 3] = ce, phb, phi            # F_{z zbar}
    U[..., 2, 4], U[..., 3, 4], U[..., 4, 4] = -phi, -q, uz            # J F_zz
    U[..., 1, 5], U[..., 2, 5], U[..., 3, 5] = ce, -phb, -phi          # J F_{z zbar}

    V[..., 3, 0] = 1.0
    V[..., 5, 1] = 1.0
    V[..., 0, 2], V[..., 4, 2], V[..., 5, 2] = ce, phb, phi            # F_{z zbar}
    V[..., 3, 3], V[..., 4, 3], V[..., 5, 3] = uzb, qb, phb            # F_{zbar zbar}
    V[..., 1, 4], V[..., 2, 4], V[..., 3, 4] = ce, -phb, -phi          # J F_{z zbar}
    V[..., 2, 5], V[..., 3, 5], V[..., 5, 5] = -qb, -phb, uzb          # J F_{zbar zbar}
    return U, V


def expected_gram(c: int, eu) -> np.ndarray:
    """Bilinear Gram matrix ``sigma^T B sigma`` an adapted frame must have."""
    eu = np.asarray(eu, dtype=float)
    m = frame_width(c)
    G = np.zeros(eu.shape + (m, m), dtype=complex)
    pairs = [(0, 1), (2, 3)] if c == 0 else [(2, 3), (4, 5)]
    for a, b in pairs:
        G[..., a, b] = G[..., b, a] = eu
    if c != 0:
        G[..., 0, 0] = G[..., 1, 1] = c
    return G


@dataclass
class Frame:
    """Adapted frame ``sigma`` (columns in complexified ambient coordinates) and base position."""

    c: int
    sigma: np.ndarray
    position: np.ndarray

    def state(self) -> np.ndarray:
        if self.c != 0:
            return np.array(self.sigma, dtype=complex)
        return np.concatenate([self.sigma, self.position.astype(complex)[:, None]], axis=1)

    @classmethod
    def from_state(cls, c: int, S: np.ndarray) -> "Frame":
        if c != 0:
            return cls(c, S, S[..., :, 0].real.copy())
        return cls(c, S[..., :, :4], S[..., :, 4].real.copy())

    def apply_isometry(self, R: np.ndarray, shift=None) -> "Frame":
        """Act by a real ambient linear isometry ``R`` (and a translation when ``c = 0``)."""
        sigma = R @ self.sigma
        pos = R @ self.position
        if shift is not None:
            pos = pos + shift
        return Frame(self.c, sigma, pos)


def frame_invariants(c: int, sigma: np.ndarray, eu, position=None) -> dict[str, np.ndarray]:
    """Pointwise violations of the adapted-frame relations (stacked frames allowed)."""
    n = sigma.shape[-2]
    B = ambient_metric(c)
    J = complex_structure(n)
    G = np.swapaxes(sigma, -1, -2) @ B @ sigma
    eu = np.asarray(eu, dtype=float)
    out = {"gram": np.max(np.abs(G - expected_gram(c, eu)), axis=(-1, -2))}
    if c == 0:
        fz, fzb, Jfz, Jfzb = (sigma[..., :, k] for k in range(4))
        dot = lambda a, b: np.sum(a * b, axis=-1)
        out["conformal"] = np.maximum(np.abs(dot(fz, fz)), np.abs(dot(fz, fzb) - eu))
        out["lagrangian"] = np.abs(dot(fz, Jfzb))
        out["reality"] = np.max(np.abs(fzb - np.conj(fz)), axis=-1)
        out["j_columns"] = np.maximum(
            np.max(np.abs(Jfz - fz @ J.T), axis=-1), np.max(np.abs(Jfzb - fzb @ J.T), axis=-1)
        )
    else:
        F, JF, Fz, Fzb, JFz, JFzb = (sigma[..., :, k] for k in range(6))
        dot = lambda a, b: np.sum(a * (b @ B), axis=-1)
        out["quadric"] = np.abs(dot(F, F) - c)
        out["horizontality"] = np.maximum(np.abs(dot(Fz, JF)), np.abs(dot(Fzb, JF)))
        out["conformal"] = np.maximum(np.abs(dot(Fz, Fz)), np.abs(dot(Fz, Fzb) - eu))
        out["lagrangian"] = np.abs(dot(Fz, JFzb))
        out["reality"] = np.maximum(np.max(np.abs(F.imag), axis=-1), np.max(np.abs(Fzb - np.conj(Fz)), axis=-1))
        out["j_columns"] = np.maximum(
            np.max(np.abs(JF - F @ J.T), axis=-1), np.max(np.abs(JFz - Fz @ J.T), axis=-1)
        )
    return out


def initial_frame(data: SurfaceData, base: tuple[int, int] = (0, 0)) -> Frame:
    """Canonical adapted frame at the grid point ``base = (ix, iy)``.

    With ``s = sqrt(2 e^u)``: for ``c = 0`` the base maps to the origin with
    ``f_x = s (1, 0)`` and ``f_y = s (0, 1)`` in ``C^2``; for ``c = +-1``
    ``F = (1, 0, 0)``, ``F_x = s (0, 1, 0)``, ``F_y = s (0, 0, 1)``.
    """
    ix, iy = base
    s = np.sqrt(2.0 * np.exp(data.u[iy, ix]))
    c = data.c
    n = ambient_dim(c)
    J = complex_structure(n)
    fx, fy = np.zeros(n), np.zeros(n)
    if c == 0:
        fx[0], fy[2] = s, s
        fz = 0.5 * (fx - 1j * fy)
        sigma = np.stack([fz, fz.conj(), J @ fz, J @ fz.conj()], axis=1)
        return Frame(0, sigma, np.zeros(n))
    F = np.zeros(n)
    F[0] = 1.0
    fx[2], fy[4] = s, s
    Fz = 0.5 * (fx - 1j * fy)
    sigma = np.stack([F.astype(complex), J @ F, Fz, Fz.conj(), J @ Fz, J @ Fz.conj()], axis=1)
    return Frame(c, sigma, F.copy())


class _Generators:
    """Per-grid-point generators of ``d/dx`` and ``d/dy`` for the (augmented) frame state."""

    def __init__(self, data: SurfaceData, order: int = 2):
        ch = data.chart
        self.c = data.c
        self.eu = np.exp(data.u)
        uz = d_z(ch, data.u, order)
        U, V = coefficient_matrices(data.c, uz, self.eu, data.phi, data.psi)
        Ax, Ay = U + V, 1j * (U - V)
        if data.c == 0:
            M = 5
            gx = np.zeros(ch.shape + (M, M), dtype=complex)
            gy = np.zeros_like(gx)
            gx[..., :4, :4], gy[..., :4, :4] = Ax, Ay
            gx[..., 0, 4] = gx[..., 1, 4] = 1.0
            gy[..., 0, 4], gy[..., 1, 4] = 1j, -1j
            Ax, Ay = gx, gy
        if not (np.all(np.isfinite(Ax)) and np.all(np.isfinite(Ay))):
            raise ValueError("non-finite frame coefficients")
        self.Ax, self.Ay = Ax, Ay
        self.hx, self.hy = ch.hx, ch.hy


def _rk4(S, A0, A1, h):
    """One classical RK4 step of ``S' = S A(s)`` with the midpoint generator interpolated linearly."""
    Am = 0.5 * (A0 + A1)
    k1 = S @ A0
    k2 = (S + 0.5 * h * k1) @ Am
    k3 = (S + 0.5 * h * k2) @ Am
    k4 = (S + h * k3) @ A1
    return S + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _renormalize(c: int, S: np.ndarray) -> np.ndarray:
    if c == 0:
        return S
    B = ambient_metric(c)
    F = S[..., :, 0].real
    q = np.sum(F * (F @ B), axis=-1)
    scale = 1.0 / np.sqrt(np.abs(q))
    S = S.copy()
    S[..., :, 0] = F * scale[..., None]
    S[..., :, 1] = S[..., :, 1] * scale[..., None]
    return S


def _step_dir(chart: ConformalChart, p, q):
    dx, dy = q[0] - p[0], q[1] - p[1]
    if (abs(dx), abs(dy)) not in ((1, 0), (0, 1)):
        raise PathError(f"path step {p} -> {q} is not a single grid step")
    return dx, dy


def _wrap(chart: ConformalChart, p):
    ix, iy = p
    if chart.periodic_x:
        ix %= chart.nx
    if chart.periodic_y:
        iy %= chart.ny
    if not (0 <= ix < chart.nx and 0 <= iy < chart.ny):
        raise PathError(f"path leaves the chart at grid point {p}")
    return ix, iy


@dataclass
class PathResult:
    points: list
    states: np.ndarray
    drift: dict = field(default_factory=dict)

    @property
    def frames(self) -> np.ndarray:
        return self.states[:, :, : (4 if self.states.shape[-1] == 5 else self.states.shape[-1])]

    @property
    def positions(self) -> np.ndarray:
        if self.states.shape[-1] == 5:
            return self.states[:, :, 4].real
        return self.states[:, :, 0].real


def integrate_frame_path(data: SurfaceData, path, frame0: Frame | None = None, project: bool = False,
                         order: int = 2, _gen: _Generators | None = None) -> PathResult:
    """Transport ``frame0`` along a polyline of grid points with RK4 at grid spacing.

    ``path`` is a sequence of ``(ix, iy)``; consecutive points must be grid
    neighbours. Indices beyond the grid wrap on periodic axes. Drift reports the
    maximum violation of each frame relation along the path.
    """
    ch = data.chart
    path = [tuple(int(v) for v in p) for p in path]
    if not path:
        raise PathError("empty path")
    gen = _gen or _Generators(data, order)
    if frame0 is None:
        frame0 = initial_frame(data, _wrap(ch, path[0]))
    S = frame0.state()
    states = [S]
    for p, q in zip(path[:-1], path[1:]):
        dx, dy = _step_dir(ch, p, q)
        a, b = _wrap(ch, p), _wrap(ch, q)
        A = gen.Ax if dx else gen.Ay
        h = (dx * gen.hx) if dx else (dy * gen.hy)
        S = _rk4(S, A[a[1], a[0]], A[b[1], b[0]], h)
        if project:
            S = _renormalize(data.c, S)
        states.append(S)
    states = np.array(states)
    res = PathResult(path, states)
    eu = np.array([gen.eu[_wrap(ch, p)[1], _wrap(ch, p)[0]] for p in path])
    m = frame_width(data.c)
    inv = frame_invariants(data.c, states[:, :, :m], eu)
    res.drift = {k: float(np.max(v)) for k, v in inv.items()}
    return res


@dataclass
class Immersion:
    """Sampled immersion in real ambient coordinates, shape ``(ny, nx, n)``."""

    chart: ConformalChart
    c: int
    points: np.ndarray
    frames: np.ndarray | None = None
    cross_defect: float = 0.0
    drift: dict = field(default_factory=dict)

    @property
    def complex_points(self) -> np.ndarray:
        return self.points[..., 0::2] + 1j * self.points[..., 1::2]

    def projective(self, tol: float = 1e-6) -> np.ndarray:
        if self.c == 0:
            raise ValueError("projective representatives exist only for c = +-1")
        F = self.complex_points
        out = np.empty_like(F)
        for idx in np.ndindex(F.shape[:2]):
            out[idx] = hopf_project(F[idx], self.c, tol)
        return out


def _sweep(gens: np.ndarray, h: float, S0: np.ndarray, start: int, project: bool, c: int) -> np.ndarray:
    """Integrate batched states from index ``start`` to every index of one axis.

    ``gens`` has shape ``(n, B, M, M)`` (integration index first), ``S0`` has
    shape ``(B, n_amb, M)``. Returns shape ``(n, B, n_amb, M)``.
    """
    n = gens.shape[0]
    out = np.empty((n,) + S0.shape, dtype=complex)
    out[start] = S0
    for direction in (1, -1):
        S = S0
        i = start
        while 0 <= i + direction < n:
            j = i + direction
            S = _rk4(S, gens[i], gens[j], direction * h)
            if project:
                S = _renormalize(c, S)
            out[j] = S
            i = j
    return out


def _grid_states(data: SurfaceData, gen: _Generators, base, row_first: bool, project: bool) -> np.ndarray:
    """Frame states on the whole grid, shape ``(ny, nx, n_amb, M)``."""
    ix0, iy0 = base
    S0 = initial_frame(data, base).state()[None]
    if row_first:
        row = _sweep(gen.Ax[iy0][:, None], gen.hx, S0, ix0, project, data.c)[:, 0]
        return _sweep(gen.Ay, gen.hy, row, iy0, project, data.c)
    col = _sweep(gen.Ay[:, ix0][:, None], gen.hy, S0, iy0, project, data.c)[:, 0]
    rows = _sweep(np.swapaxes(gen.Ax, 0, 1), gen.hx, col, ix0, project, data.c)
    return np.swapaxes(rows, 0, 1)


def reconstruct_grid(data: SurfaceData, base: tuple[int, int] = (0, 0), *, check: bool = True,
                     tol: float | None = None, tol_class: str = "h2", ceiling: float | None = 1e-3,
                     project: bool = False, order: int = 2) -> Immersion:
    """Integrate the frame system over the whole chart, row first then columns.

    The result is cross-checked against the column-then-row sweep; the maximum
    position disagreement is ``cross_defect``. Above ``ceiling`` a
    ``ReconstructionError`` is raised.
    """
    if check:
        res = integrability_residuals(data, tol=tol, tol_class=tol_class, order=order)
        if not res.ok:
            bad = {k: v.linf for k, v in res.norms.items() if v.linf > res.tol}
            raise IntegrabilityError(f"data fail integrability at tol {res.tol:g}: {bad}")
    gen = _Generators(data, order)
    S_rc = _grid_states(data, gen, base, True, project)
    S_cr = _grid_states(data, gen, base, False, project)
    frame = Frame.from_state(data.c, S_rc)
    other = Frame.from_state(data.c, S_cr)
    defect = float(np.max(np.linalg.norm(frame.position - other.position, axis=-1)))
    inv = frame_invariants(data.c, frame.sigma, gen.eu)
    imm = Immersion(data.chart, data.c, frame.position, frame.sigma, defect,
                    {k: float(np.max(v)) for k, v in inv.items()})
    if ceiling is not None and defect > ceiling:
        raise ReconstructionError(f"cross-consistency defect {defect:.3e} exceeds ceiling {ceiling:g}")
    return imm


def monodromy_defect(data: SurfaceData, loop, frame0: Frame | None = None, order: int = 2) -> float:
    """Spectral-norm distance between a frame transported around a closed loop and the start frame.

    ``loop`` is either a rectangle ``(ix0, iy0, ix1, iy1)`` walked
    counterclockwise or an explicit closed path of grid points.
    """
    if len(loop) == 4 and all(np.isscalar(v) for v in loop):
        path = _unwrapped_loop(loop)
    else:
        path = list(loop)
        if tuple(path[0]) != tuple(path[-1]):
            raise PathError("monodromy loop must be closed")
    res = integrate_frame_path(data, path, frame0, order=order)
    m = frame_width(data.c)
    return float(np.linalg.norm(res.states[-1][:, :m] - res.states[0][:, :m], ord=2))


def _unwrapped_loop(loop):
    ix0, iy0, ix1, iy1 = loop
    pts = [(ix, iy0) for ix in range(ix0, ix1)]
    pts += [(ix1, iy) for iy in range(iy0, iy1)]
    pts += [(ix, iy1) for ix in range(ix1, ix0, -1)]
    pts += [(ix0, iy) for iy in range(iy1, iy0, -1)]
    pts.append((ix0, iy0))
    return pts


def hermitian_form(c: int, Z, W) -> complex:
    Z, W = np.asarray(Z, dtype=complex), np.asarray(W, dtype=complex)
    s = -1.0 if c == -1 else 1.0
    return complex(s * Z[0] * np.conj(W[0]) + np.sum(Z[1:] * np.conj(W[1:])))


def hopf_project(F, c: int, tol: float = 1e-6) -> np.ndarray:
    """Fibre-invariant representative of the point ``[F]`` in CP^2 or CH^2.

    ``F`` is rescaled onto its quadric and its phase fixed so that the first
    non-negligible component is real positive. Quadric violations above ``tol``
    are rejected.
    """
    if c not in (-1, 1):
        raise ValueError("hopf_project needs c = +-1")
    F = np.asarray(F, dtype=complex)
    norm = float(np.linalg.norm(F))
    if norm == 0.0:
        raise ValueError("cannot project the zero vector")
    q = hermitian_form(c, F, F).real
    if abs(q - c) > tol:
        raise ValueError(f"lift value off the quadric: (F,F) = {q!r}, expected {c}")
    p = F / np.sqrt(abs(q))
    k = int(np.argmax(np.abs(p) > 1e-12 * norm))
    return p * (np.conj(p[k]) / abs(p[k]))
