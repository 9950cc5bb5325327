"""Collision kernels: reorientation, perceived-risk turning, class transitions.

All three act pointwise in space; only the turning kernel reads spatial
gradients (of the infected distribution).  Shapes follow grids.py:
distributions are (..., nv) per class or (3, nx, ny, nv) stacked.
"""

import numpy as np

from . import backend
from .grids import velocity_moments


def q_reorientation(f_j, lam, vs):
    """Relaxation kernel lam * (rho/|V| - f) for one class.

    f_j: (..., nv); lam: scalar or broadcastable to f_j[..., 0].
    Conserves the local density exactly (up to rounding) and vanishes on
    velocity-uniform states.
    """
    rho = f_j @ vs.weights
    mean = rho / vs.total_measure
    lam = np.asarray(lam, dtype=float)
    return lam[..., None] * (mean[..., None] - f_j) if lam.ndim else lam * (mean[..., None] - f_j)


def _grad_dot_v(f_j, vs, grid):
    """g_k = v_k . grad_x f_j(x, v_k), second-order differences."""
    dfdx = np.gradient(f_j, grid.hx, axis=0) if grid.nx > 1 else np.zeros_like(f_j)
    g = vs.velocities[:, 0] * dfdx
    if grid.dim == 2 and grid.ny > 1:
        dfdy = np.gradient(f_j, grid.hy, axis=1)
        g += vs.velocities[:, 1] * dfdy
    return g


def q_preferred(f_s, f_i, eta, xi, vs, grid):
    """Turning kernel for S driven by gradients of the infected distribution.

    Turning from v' to v happens at rate -eta v.g(v) + xi v'.g(v') with
    g(v) = v . grad_x f_I(x, v): directions along which infection increases
    are entered less (eta) and left more (xi).  Returns the S component;
    the I and R components of this kernel are zero.
    """
    g = _grad_dot_v(f_i, vs, grid)
    w = vs.weights
    m0 = f_s @ w
    m1 = (g * f_s) @ w
    m2 = g @ w
    eta = np.asarray(eta, dtype=float)[..., None]
    xi = np.asarray(xi, dtype=float)[..., None]
    return (-eta * g * m0[..., None] + xi * m1[..., None]
            + eta * m2[..., None] * f_s - xi * vs.total_measure * g * f_s)


def vacuum_floor(f, vs):
    """Density floor 1e-12 times the global mean total density."""
    rho_tot = (f[0] + f[1] + f[2]) @ vs.weights
    return 1e-12 * float(rho_tot.mean())


def q_transition(f, alpha, beta, gamma, vs=None, floor=None):
    """SIRS class-transition kernel, pointwise in (x, v).

    Q_S = alpha f_R - beta f_S f_I / A, Q_I = beta f_S f_I / A - gamma f_I,
    Q_R = gamma f_I - alpha f_R, with A the local class sum.  The infection
    flow is zeroed where A is at or below the vacuum floor; if no floor is
    passed it is computed from f (requires vs) or taken as 0.
    """
    if floor is None:
        floor = vacuum_floor(f, vs) if vs is not None else 0.0
    f = np.ascontiguousarray(f)
    shape = f.shape[1:]
    alpha, beta, gamma = (
        np.ascontiguousarray(np.broadcast_to(np.asarray(r, dtype=float), shape))
        for r in (alpha, beta, gamma))
    return backend.kernels().transition_kernel(f, alpha, beta, gamma, float(floor))


def full_kernel(f, params, vs, grid, eps):
    """Total collision operator of the scale-separated equation,

        Q_eps = Q_reorientation + eps * Q_preferred + eps^2 * Q_transition,

    stacked over classes.  The solver applies its own 1/eps^2 time factor;
    this composition is the kernel exactly as it enters the scaled equation.
    """
    out = np.empty_like(f)
    for j in range(3):
        out[j] = q_reorientation(f[j], params.lam[j], vs)
    if np.any(params.eta != 0.0) or np.any(params.xi != 0.0):
        out[0] += eps * q_preferred(f[0], f[1], params.eta, params.xi, vs, grid)
    out += eps * eps * q_transition(f, params.alpha, params.beta, params.gamma, vs)
    return out


def kernel_mass_defect(q, vs, grid):
    """Total-population rate injected by a kernel output; zero for the real model."""
    rho, _ = velocity_moments(q.sum(axis=0), vs)
    return float(rho.sum() * grid.cell_measure)
