"""Compiled RK4 kernels for polynomial Hamiltonian flows.

The Hamiltonian derivatives are passed as per-stage coefficient tables over a
shared monomial basis ``x**ex[m] * y**ey[m]``; row order of the derivative axis
is (H_x, H_y, H_xx, H_xy, H_yy).
"""
import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _derivs(x, y, coef, ex, ey, xp, yp):
    deg = xp.shape[0] - 1
    xp[0] = 1.0
    yp[0] = 1.0
    for k in range(1, deg + 1):
        xp[k] = xp[k - 1] * x
        yp[k] = yp[k - 1] * y
    hx = 0.0
    hy = 0.0
    hxx = 0.0
    hxy = 0.0
    hyy = 0.0
    for m in range(ex.shape[0]):
        mono = xp[ex[m]] * yp[ey[m]]
        hx += coef[0, m] * mono
        hy += coef[1, m] * mono
        hxx += coef[2, m] * mono
        hxy += coef[3, m] * mono
        hyy += coef[4, m] * mono
    return hx, hy, hxx, hxy, hyy


@njit(cache=True)
def rk4_flow(pts, table, ex, ey, maxdeg, h):
    """Integrate X = (H_y, -H_x) over the whole table, carrying the
    variational equation dJ/dt = DX J on the same stages."""
    n = pts.shape[0]
    steps = table.shape[0]
    out = np.empty_like(pts)
    jac = np.zeros((n, 2, 2))
    xp = np.empty(maxdeg + 1)
    yp = np.empty(maxdeg + 1)
    for p in range(n):
        x = pts[p, 0]
        y = pts[p, 1]
        a = 1.0
        b = 0.0
        c = 0.0
        d = 1.0
        for s in range(steps):
            # stage 1
            hx, hy, hxx, hxy, hyy = _derivs(x, y, table[s, 0], ex, ey, xp, yp)
            kx1 = hy
            ky1 = -hx
            ka1 = hxy * a + hyy * c
            kb1 = hxy * b + hyy * d
            kc1 = -hxx * a - hxy * c
            kd1 = -hxx * b - hxy * d
            # stage 2
            x2 = x + 0.5 * h * kx1
            y2 = y + 0.5 * h * ky1
            hx, hy, hxx, hxy, hyy = _derivs(x2, y2, table[s, 1], ex, ey, xp, yp)
            kx2 = hy
            ky2 = -hx
            a2 = a + 0.5 * h * ka1
            b2 = b + 0.5 * h * kb1
            c2 = c + 0.5 * h * kc1
            d2 = d + 0.5 * h * kd1
            ka2 = hxy * a2 + hyy * c2
            kb2 = hxy * b2 + hyy * d2
            kc2 = -hxx * a2 - hxy * c2
            kd2 = -hxx * b2 - hxy * d2
            # stage 3
            x3 = x + 0.5 * h * kx2
            y3 = y + 0.5 * h * ky2
            hx, hy, hxx, hxy, hyy = _derivs(x3, y3, table[s, 1], ex, ey, xp, yp)
            kx3 = hy
            ky3 = -hx
            a3 = a + 0.5 * h * ka2
            b3 = b + 0.5 * h * kb2
            c3 = c + 0.5 * h * kc2
            d3 = d + 0.5 * h * kd2
            ka3 = hxy * a3 + hyy * c3
            kb3 = hxy * b3 + hyy * d3
            kc3 = -hxx * a3 - hxy * c3
            kd3 = -hxx * b3 - hxy * d3
            # stage 4
            x4 = x + h * kx3
            y4 = y + h * ky3
            hx, hy, hxx, hxy, hyy = _derivs(x4, y4, table[s, 2], ex, ey, xp, yp)
            kx4 = hy
            ky4 = -hx
            a4 = a + h * ka3
            b4 = b + h * kb3
            c4 = c + h * kc3
            d4 = d + h * kd3
            ka4 = hxy * a4 + hyy * c4
            kb4 = hxy * b4 + hyy * d4
            kc4 = -hxx * a4 - hxy * c4
            kd4 = -hxx * b4 - hxy * d4
            a += h / 6.0 * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4)
            b += h / 6.0 * (kb1 + 2.0 * kb2 + 2.0 * kb3 + kb4)
            c += h / 6.0 * (kc1 + 2.0 * kc2 + 2.0 * kc3 + kc4)
            d += h / 6.0 * (kd1 + 2.0 * kd2 + 2.0 * kd3 + kd4)
            x += h / 6.0 * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4)
            y += h / 6.0 * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4)
        out[p, 0] = x
        out[p, 1] = y
        jac[p, 0, 0] = a
        jac[p, 0, 1] = b
        jac[p, 1, 0] = c
        jac[p, 1, 1] = d
    return out, jac
