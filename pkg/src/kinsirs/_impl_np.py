"""Pure-NumPy implementations of the hot kernels.

Mirrors `_impl_nb`; the two modules expose the same functions with the same
argument conventions.  Field kernels agree with the compiled ones to
rounding (reduction order may differ); the agent-model step is bit-exact
across backends because every random draw is addressed by (key, agent).
"""

import numpy as np

from .rng import uniforms_at


def transport_sweep_x(f, nu, mirror):
    """Upwind advection sweep along x with specular-reflection walls.

    f: (3, nx, ny, nv); nu[k] = dt * vx_k / (eps * hx), |nu| <= 1.
    The ghost value outside a wall is the wall cell's value at the
    mirrored velocity, which makes wall fluxes cancel pairwise.
    """
    out = np.empty_like(f)
    nv = f.shape[3]
    for k in range(nv):
        fk = f[:, :, :, k]
        nuk = nu[k]
        if nuk > 0.0:
            up = np.empty_like(fk)
            up[:, 1:, :] = fk[:, :-1, :]
            up[:, 0, :] = f[:, 0, :, mirror[k]]
            out[:, :, :, k] = fk - nuk * (fk - up)
        elif nuk < 0.0:
            dn = np.empty_like(fk)
            dn[:, :-1, :] = fk[:, 1:, :]
            dn[:, -1, :] = f[:, -1, :, mirror[k]]
            out[:, :, :, k] = fk - nuk * (dn - fk)
        else:
            out[:, :, :, k] = fk
    return out


def transport_sweep_y(f, nu, mirror):
    """Upwind advection sweep along y; see transport_sweep_x."""
    out = np.empty_like(f)
    nv = f.shape[3]
    for k in range(nv):
        fk = f[:, :, :, k]
        nuk = nu[k]
        if nuk > 0.0:
            up = np.empty_like(fk)
            up[:, :, 1:] = fk[:, :, :-1]
            up[:, :, 0] = f[:, :, 0, mirror[k]]
            out[:, :, :, k] = fk - nuk * (fk - up)
        elif nuk < 0.0:
            dn = np.empty_like(fk)
            dn[:, :, :-1] = fk[:, :, 1:]
            dn[:, :, -1] = f[:, :, -1, mirror[k]]
            out[:, :, :, k] = fk - nuk * (dn - fk)
        else:
            out[:, :, :, k] = fk
    return out


def relax(f, w, inv_measure, decay):
    """Exact relaxation toward the velocity average.

    Returns mean + (f - mean) * decay with mean = (sum_k w_k f_k)/|V|
    and decay[j, ix, iy] = exp(-lam dt / eps^2).
    """
    mean = (f @ w) * inv_measure
    return mean[..., None] + (f - mean[..., None]) * decay[..., None]


def transition_kernel(f, alpha, beta, gamma, floor):
    """Class-transition kernel, pointwise in (x, v).

    Flows a = alpha f_R, b = beta f_S f_I / A, g = gamma f_I with
    A = f_S + f_I + f_R; the infection flow is zeroed where A <= floor.
    The R component is assembled as -(Q_S + Q_I) so the class sum is
    bitwise zero.
    """
    fs, fi, fr = f[0], f[1], f[2]
    a_tot = fs + fi + fr
    live = a_tot > floor
    denom = np.where(live, a_tot, 1.0)
    b = np.where(live, beta * fs * fi / denom, 0.0)
    a = alpha * fr
    g = gamma * fi
    qs = a - b
    qi = b - g
    out = np.empty_like(f)
    out[0] = qs
    out[1] = qi
    out[2] = -(qs + qi)
    return out


def abm_step_arrays(cls, xs, ys, dirs, nx, ny, dvx, dvy, mir_x, mir_y,
                    p_transmit, p_recover, p_wane, p_reorient,
                    key_con, key_rec, key_wan, key_reo, key_drw):
    """One lattice step, in place.  Order: contagion, recovery, waning,
    reorientation, movement; all class transitions read the step-start
    snapshot, so the three transition phases commute.
    """
    n = cls.size
    ndir = dvx.size
    snap = cls.copy()
    all_idx = np.arange(n, dtype=np.int64)

    slots = (xs * ny + ys) * ndir + dirs
    n_inf = np.bincount(slots[snap == 1], minlength=nx * ny * ndir)

    if p_transmit > 0.0:
        exposed = (snap == 0) & (n_inf[slots] > 0)
        idx = all_idx[exposed]
        if idx.size:
            maxc = int(n_inf.max())
            # survival table (1-p)^m built sequentially so both backends
            # produce the same rounding
            tbl = np.empty(maxc + 1)
            tbl[0] = 1.0
            np.cumprod(np.full(maxc, 1.0 - p_transmit), out=tbl[1:])
            p_inf = 1.0 - tbl[n_inf[slots[exposed]]]
            u = uniforms_at(key_con, idx)
            cls[idx[u < p_inf]] = 1

    if p_recover > 0.0:
        idx = all_idx[snap == 1]
        if idx.size:
            u = uniforms_at(key_rec, idx)
            cls[idx[u < p_recover]] = 2

    if p_wane > 0.0:
        idx = all_idx[snap == 2]
        if idx.size:
            u = uniforms_at(key_wan, idx)
            cls[idx[u < p_wane]] = 0

    if p_reorient > 0.0:
        u = uniforms_at(key_reo, all_idx)
        idx = all_idx[u < p_reorient]
        if idx.size:
            nd = (uniforms_at(key_drw, idx) * ndir).astype(np.int64)
            np.minimum(nd, ndir - 1, out=nd)
            dirs[idx] = nd

    d = dirs.copy()
    tx = xs + dvx[d]
    bad = (tx < 0) | (tx >= nx)
    d[bad] = mir_x[d[bad]]
    tx2 = xs + dvx[d]
    ok = (tx2 >= 0) & (tx2 < nx)
    tx = np.where(bad, np.where(ok, tx2, xs), tx)

    ty = ys + dvy[d]
    bad = (ty < 0) | (ty >= ny)
    d[bad] = mir_y[d[bad]]
    ty2 = ys + dvy[d]
    ok = (ty2 >= 0) & (ty2 < ny)
    ty = np.where(bad, np.where(ok, ty2, ys), ty)

    dirs[:] = d
    xs[:] = tx
    ys[:] = ty
