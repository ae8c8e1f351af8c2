"""Symbolic check that the frame system is compatible exactly when the structure equations hold."""

import pytest
import sympy as sp

from lagbonnet.reconstruction import coefficient_matrices, frame_width


def _matrices(c):
    x, y = sp.symbols("x y", real=True)
    u = sp.Function("u", real=True)(x, y)
    a = sp.Function("a", real=True)(x, y)
    b = sp.Function("b", real=True)(x, y)
    p = sp.Function("p", real=True)(x, y)
    q = sp.Function("q", real=True)(x, y)
    phi, psi = a + sp.I * b, p + sp.I * q
    dz = lambda f: (sp.diff(f, x) - sp.I * sp.diff(f, y)) / 2
    dzb = lambda f: (sp.diff(f, x) + sp.I * sp.diff(f, y)) / 2

    import numpy as np

    m = frame_width(c)
    sym = {
        "uz": dz(u),
        "uzb": dzb(u),
        "phi": phi,
        "phb": sp.conjugate(phi),
        "q": sp.exp(-u) * psi,
        "qb": sp.exp(-u) * sp.conjugate(psi),
        "ce": -c * sp.exp(u),
    }
    # evaluate the numeric builder at a generic point and map each entry back to its symbol
    Un2, Vn2 = coefficient_matrices(c, 1.1 + 0.3j, 1.7, 0.2 + 0.9j, 0.4 - 1.3j)
    uz, eu, ph, ps = 1.1 + 0.3j, 1.7, 0.2 + 0.9j, 0.4 - 1.3j
    kinds = {
        "uz": uz, "uzb": np.conj(uz), "phi": ph, "phb": np.conj(ph),
        "q": ps / eu, "qb": np.conj(ps) / eu, "ce": -c * eu,
    }

    def lift(M):
        out = sp.zeros(m, m)
        for i in range(m):
            for j in range(m):
                v = M[i, j]
                if v == 0:
                    continue
                for name, k in kinds.items():
                    for sign in (1, -1):
                        if abs(v - sign * k) < 1e-12:
                            out[i, j] = sign * sym[name]
                            break
                    else:
                        continue
                    break
                else:
                    assert abs(v - 1) < 1e-12, (i, j, v)
                    out[i, j] = 1
        return out

    U, V = lift(Un2), lift(Vn2)
    return (x, y, u, a, b, p, q, phi, psi, dz, dzb, U, V)


def _real_split(expr):
    # derivatives of real functions are real; sympy does not infer that
    jets = {d: sp.Symbol(f"jet{k}", real=True) for k, d in enumerate(expr.atoms(sp.Derivative))}
    back = {v: k for k, v in jets.items()}
    re, im = expr.xreplace(jets).as_real_imag()
    return re.xreplace(back), im.xreplace(back)


@pytest.mark.parametrize("c", [0, 1, -1])
def test_zero_curvature_reduces_to_structure_equations(c):
    x, y, u, a, b, p, q, phi, psi, dz, dzb, U, V = _matrices(c)
    curvature = U.applyfunc(dzb) - V.applyfunc(dz) + V * U - U * V

    # structure equations solved for u_xx, b_x, p_x, q_x
    gauss = sp.Eq(sp.diff(u, x, 2), -sp.diff(u, y, 2) - 4 * (a**2 + b**2 + c * sp.exp(u)
                                                            - sp.exp(-2 * u) * (p**2 + q**2)))
    closed = sp.Eq(sp.diff(b, x), -sp.diff(a, y))
    psi_x = 2 * sp.exp(2 * u) * dz(sp.exp(-u) * phi) - sp.I * sp.diff(psi, y)
    psi_x = psi_x.subs(closed.lhs, closed.rhs)
    re, im = _real_split(sp.expand(psi_x))
    subs = {
        sp.diff(u, x, 2): gauss.rhs,
        sp.diff(b, x): closed.rhs,
        sp.diff(p, x): re,
        sp.diff(q, x): im,
    }
    reduced = curvature.applyfunc(lambda e: sp.simplify(sp.expand(e.subs(subs))))
    assert reduced == sp.zeros(*reduced.shape)


@pytest.mark.parametrize("c", [0, 1, -1])
def test_gauss_equation_is_needed(c):
    # without the Gauss substitution the curvature does not vanish
    x, y, u, a, b, p, q, phi, psi, dz, dzb, U, V = _matrices(c)
    curvature = U.applyfunc(dzb) - V.applyfunc(dz) + V * U - U * V
    closed = {sp.diff(b, x): -sp.diff(a, y)}
    assert any(sp.simplify(e.subs(closed)) != 0 for e in curvature)
