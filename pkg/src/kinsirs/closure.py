"""Diffusion-limit closure: auxiliary cell problems and transport coefficients.

The reorientation kernel restricted to zero-mean distributions is -lam times
the identity, so the cell problems Q[kappa] = -vF and Q[theta] = -(eta+xi)vF
have the closed forms kappa = vF/lam and theta = (eta+xi)vF/lam_S.  The
generic path solves the same equations with dense linear algebra on the
zero-mean subspace and is used to cross-check the closed forms.

Coefficient conventions: D_j = sum_k w_k v_k . kappa_jk is the trace of the
diffusion tensor (v0^2/lam_j on the circle); for an isotropic set the
per-axis diffusivity is D_j / dim.  Gamma = sum_k w_k v_k . theta_k.
"""

from dataclasses import dataclass

import numpy as np


def solve_reorientation_inverse(g, lam, vs, residual_tol=1e-10):
    """Solve Q_reorientation[f] = -g for the zero-mean f, generically.

    g must satisfy the compatibility condition sum_k w_k g_k = 0 (the
    kernel has no mass component in its range).  The system is solved on
    an orthonormal basis of the zero-mean subspace; the residual
    ||Q[f] + g||_inf is checked against residual_tol * max(1, ||g||_inf).
    """
    g = np.asarray(g, dtype=float)
    w = vs.weights
    nv = vs.nv
    scale = max(1.0, float(np.max(np.abs(g))))
    if abs(float(w @ g)) > residual_tol * scale * vs.total_measure:
        raise ValueError("incompatible right-hand side: nonzero velocity average")
    # columns 2..nv of the complete QR factor of w span {f : w.f = 0}
    q_full, _ = np.linalg.qr(w.reshape(-1, 1), mode="complete")
    basis = q_full[:, 1:]
    m = lam * (np.outer(np.ones(nv), w) / vs.total_measure - np.eye(nv))
    a_red = basis.T @ m @ basis
    b_red = -(basis.T @ g)
    try:
        y = np.linalg.solve(a_red, b_red)
    except np.linalg.LinAlgError:
        y = np.linalg.lstsq(a_red, b_red, rcond=None)[0]
    f = basis @ y
    residual = np.max(np.abs(m @ f + g))
    if residual > residual_tol * scale:
        raise RuntimeError(f"cell-problem residual {residual:g} above tolerance")
    return f


def compute_kappa_theta(params, vs):
    """Closed-form solutions of the two cell problems on every grid cell.

    Returns (kappa, theta) with shapes (3, nx, ny, nv, 2) and
    (nx, ny, nv, 2): kappa_j = v F / lam_j and theta = (eta+xi) v F / lam_S.
    """
    vf = vs.velocities * vs.equilibrium[:, None]      # (nv, 2)
    kappa = vf[None, None, None] / params.lam[..., None, None]
    theta = (params.eta + params.xi)[..., None, None] * vf[None, None] \
        / params.lam[0][..., None, None]
    return kappa, theta


def compute_D_Gamma(kappa, theta, vs):
    """Transport coefficients from the cell-problem solutions.

    D_j = sum_k w_k v_k . kappa_jk (per class, trace convention) and
    Gamma = sum_k w_k v_k . theta_k; shapes (3, nx, ny) and (nx, ny).
    """
    wv = vs.weights[:, None] * vs.velocities          # (nv, 2)
    d = np.einsum("jxykc,kc->jxy", kappa, wv)
    gamma_drift = np.einsum("xykc,kc->xy", theta, wv)
    return d, gamma_drift


def averaged_rates(alpha, beta, gamma, vs):
    """Velocity averages of the transition rates against the equilibrium.

    Uses the normalised weights u_k = w_k F_k / sum(w F), so constant
    rates are reproduced exactly.  Returns three (nx, ny) fields.
    """
    u = vs.eq_weights
    return alpha @ u, beta @ u, gamma @ u


@dataclass(frozen=True)
class ClosureCoefficients:
    """Everything the mesoscopic solver needs, resolved on the grid."""

    D: np.ndarray          # (3, nx, ny) trace-convention diffusion
    Gamma: np.ndarray      # (nx, ny) avoidance drift response
    alpha0: np.ndarray     # (nx, ny)
    beta0: np.ndarray
    gamma0: np.ndarray
    kappa: np.ndarray      # (3, nx, ny, nv, 2)
    theta: np.ndarray      # (nx, ny, nv, 2)

    def spatial_means(self):
        return {
            "alpha": float(self.alpha0.mean()),
            "beta": float(self.beta0.mean()),
            "gamma": float(self.gamma0.mean()),
            "D": [float(self.D[j].mean()) for j in range(3)],
            "Gamma": float(self.Gamma.mean()),
        }


def compute_closure(params, vs, method="analytic"):
    """Assemble ClosureCoefficients from the parameter fields.

    method='analytic' uses the closed forms; method='generic' solves the
    cell problems with dense linear algebra per distinct rate value and
    must agree with the closed forms to rounding (this is exercised by the
    validation suite).
    """
    if method == "analytic":
        kappa, theta = compute_kappa_theta(params, vs)
    elif method == "generic":
        kappa, theta = _generic_kappa_theta(params, vs)
    else:
        raise ValueError("method must be 'analytic' or 'generic'")
    d, gamma_drift = compute_D_Gamma(kappa, theta, vs)
    alpha0, beta0, gamma0 = averaged_rates(params.alpha, params.beta, params.gamma, vs)
    return ClosureCoefficients(
        D=d, Gamma=gamma_drift, alpha0=alpha0, beta0=beta0, gamma0=gamma0,
        kappa=kappa, theta=theta)


def _generic_kappa_theta(params, vs):
    """Cell problems via solve_reorientation_inverse, deduplicated by rate."""
    nx, ny = params.lam.shape[1:]
    vf = vs.velocities * vs.equilibrium[:, None]
    kappa = np.empty((3, nx, ny, vs.nv, 2))
    theta = np.empty((nx, ny, vs.nv, 2))
    for j in range(3):
        for lam in np.unique(params.lam[j]):
            cells = params.lam[j] == lam
            sol = np.stack(
                [solve_reorientation_inverse(vf[:, c], lam, vs) for c in range(2)],
                axis=1)
            kappa[j][cells] = sol
    drive = params.eta + params.xi
    lam_s = params.lam[0]
    pairs = np.stack([drive.ravel(), lam_s.ravel()], axis=1)
    for coef, lam in np.unique(pairs, axis=0):
        cells = (drive == coef) & (lam_s == lam)
        sol = np.stack(
            [solve_reorientation_inverse(coef * vf[:, c], lam, vs) for c in range(2)],
            axis=1)
        theta[cells] = sol
    return kappa, theta


@dataclass(frozen=True)
class ConfinementCoefficients:
    """Two-velocity transport coefficients, one spatial dimension.

    kappa_plus/minus are the cell-problem values on the +/- velocity;
    D_j = v_j^2 / lam_j and Gamma = (eta + xi) v_S^2 / lam_S (note the
    squared speed: it follows from Gamma = sum w v theta with
    theta = (eta+xi) v F / lam).
    """

    kappa_plus: np.ndarray   # (3,)
    kappa_minus: np.ndarray  # (3,)
    D: np.ndarray            # (3,)
    Gamma: float


def confinement_coefficients(speeds, lam, eta, xi):
    """Per-class coefficients for two-speed sets {+-v_j} with F = 1/2.

    speeds and lam are length-3 sequences (S, I, R); a zero speed confines
    that class (its diffusivity vanishes).
    """
    v = np.asarray(speeds, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if v.shape != (3,) or lam.shape != (3,):
        raise ValueError("speeds and lam must have one entry per class")
    if np.any(lam <= 0):
        raise ValueError("reorientation rates must be positive")
    if np.any(v < 0):
        raise ValueError("speeds must be non-negative")
    kappa_plus = v / (2.0 * lam)
    d = v * v / lam
    return ConfinementCoefficients(
        kappa_plus=kappa_plus,
        kappa_minus=-kappa_plus,
        D=d,
        Gamma=float((eta + xi) * v[0] * v[0] / lam[0]),
    )
