"""Numba-compiled twins of the kernels in `_impl_np`.

Same signatures, same update formulas, no fastmath, single threaded, so
results match the NumPy path to rounding (bit-exactly for the agent step).
"""

import numpy as np
from numba import njit

from . import rng as _rng

_U_PHI = np.uint64(_rng.PHI)
_U_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_U_MUL2 = np.uint64(0x94D049BB133111EB)
_U1 = np.uint64(1)
_U11 = np.uint64(11)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_INV53 = 2.0 ** -53


@njit(cache=True)
def _u(key, index):
    """Uniform in [0,1) addressed by (key, index); see rng.uniform_at."""
    z = key + (np.uint64(index) + _U1) * _U_PHI
    z = (z ^ (z >> _U30)) * _U_MUL1
    z = (z ^ (z >> _U27)) * _U_MUL2
    z = z ^ (z >> _U31)
    return (z >> _U11) * _INV53


@njit(cache=True)
def transport_sweep_x(f, nu, mirror):
    three, nx, ny, nv = f.shape
    out = np.empty_like(f)
    for j in range(3):
        for ix in range(nx):
            for iy in range(ny):
                for k in range(nv):
                    nuk = nu[k]
                    fc = f[j, ix, iy, k]
                    if nuk > 0.0:
                        if ix > 0:
                            up = f[j, ix - 1, iy, k]
                        else:
                            up = f[j, 0, iy, mirror[k]]
                        out[j, ix, iy, k] = fc - nuk * (fc - up)
                    elif nuk < 0.0:
                        if ix < nx - 1:
                            dn = f[j, ix + 1, iy, k]
                        else:
                            dn = f[j, nx - 1, iy, mirror[k]]
                        out[j, ix, iy, k] = fc - nuk * (dn - fc)
                    else:
                        out[j, ix, iy, k] = fc
    return out


@njit(cache=True)
def transport_sweep_y(f, nu, mirror):
    three, nx, ny, nv = f.shape
    out = np.empty_like(f)
    for j in range(3):
        for ix in range(nx):
            for iy in range(ny):
                for k in range(nv):
                    nuk = nu[k]
                    fc = f[j, ix, iy, k]
                    if nuk > 0.0:
                        if iy > 0:
                            up = f[j, ix, iy - 1, k]
                        else:
                            up = f[j, ix, 0, mirror[k]]
                        out[j, ix, iy, k] = fc - nuk * (fc - up)
                    elif nuk < 0.0:
                        if iy < ny - 1:
                            dn = f[j, ix, iy + 1, k]
                        else:
                            dn = f[j, ix, ny - 1, mirror[k]]
                        out[j, ix, iy, k] = fc - nuk * (dn - fc)
                    else:
                        out[j, ix, iy, k] = fc
    return out


@njit(cache=True)
def relax(f, w, inv_measure, decay):
    three, nx, ny, nv = f.shape
    out = np.empty_like(f)
    for j in range(3):
        for ix in range(nx):
            for iy in range(ny):
                m = 0.0
                for k in range(nv):
                    m += w[k] * f[j, ix, iy, k]
                m *= inv_measure
                d = decay[j, ix, iy]
                for k in range(nv):
                    out[j, ix, iy, k] = m + (f[j, ix, iy, k] - m) * d
    return out


@njit(cache=True)
def transition_kernel(f, alpha, beta, gamma, floor):
    three, nx, ny, nv = f.shape
    out = np.empty_like(f)
    for ix in range(nx):
        for iy in range(ny):
            for k in range(nv):
                fs = f[0, ix, iy, k]
                fi = f[1, ix, iy, k]
                fr = f[2, ix, iy, k]
                a_tot = fs + fi + fr
                if a_tot > floor:
                    b = beta[ix, iy, k] * fs * fi / a_tot
                else:
                    b = 0.0
                a = alpha[ix, iy, k] * fr
                g = gamma[ix, iy, k] * fi
                qs = a - b
                qi = b - g
                out[0, ix, iy, k] = qs
                out[1, ix, iy, k] = qi
                out[2, ix, iy, k] = -(qs + qi)
    return out


@njit(cache=True)
def abm_step_arrays(cls, xs, ys, dirs, nx, ny, dvx, dvy, mir_x, mir_y,
                    p_transmit, p_recover, p_wane, p_reorient,
                    key_con, key_rec, key_wan, key_reo, key_drw):
    n = cls.size
    ndir = dvx.size
    snap = cls.copy()

    n_inf = np.zeros(nx * ny * ndir, dtype=np.int64)
    for a in range(n):
        if snap[a] == 1:
            n_inf[(xs[a] * ny + ys[a]) * ndir + dirs[a]] += 1

    if p_transmit > 0.0:
        maxc = 0
        for s in range(n_inf.size):
            if n_inf[s] > maxc:
                maxc = n_inf[s]
        tbl = np.empty(maxc + 1)
        tbl[0] = 1.0
        for m in range(1, maxc + 1):
            tbl[m] = tbl[m - 1] * (1.0 - p_transmit)
        for a in range(n):
            if snap[a] == 0:
                c = n_inf[(xs[a] * ny + ys[a]) * ndir + dirs[a]]
                if c > 0 and _u(key_con, a) < 1.0 - tbl[c]:
                    cls[a] = 1

    if p_recover > 0.0:
        for a in range(n):
            if snap[a] == 1 and _u(key_rec, a) < p_recover:
                cls[a] = 2

    if p_wane > 0.0:
        for a in range(n):
            if snap[a] == 2 and _u(key_wan, a) < p_wane:
                cls[a] = 0

    if p_reorient > 0.0:
        for a in range(n):
            if _u(key_reo, a) < p_reorient:
                nd = np.int64(_u(key_drw, a) * ndir)
                if nd >= ndir:
                    nd = ndir - 1
                dirs[a] = nd

    for a in range(n):
        d = dirs[a]
        tx = xs[a] + dvx[d]
        if tx < 0 or tx >= nx:
            d = mir_x[d]
            tx = xs[a] + dvx[d]
            if tx < 0 or tx >= nx:
                tx = xs[a]
        ty = ys[a] + dvy[d]
        if ty < 0 or ty >= ny:
            d = mir_y[d]
            ty = ys[a] + dvy[d]
            if ty < 0 or ty >= ny:
                ty = ys[a]
        dirs[a] = d
        xs[a] = tx
        ys[a] = ty
