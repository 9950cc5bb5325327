"""Mesoscopic drift-diffusion solver for the class densities.

    d/dt rho_S = div(D_S grad rho_S + Gamma (grad rho_I) rho_S) + a0 rho_R - b0 rho_S rho_I / A
    d/dt rho_I = div(D_I grad rho_I)                            + b0 rho_S rho_I / A - g0 rho_I
    d/dt rho_R = div(D_R grad rho_R)                            + g0 rho_I - a0 rho_R

with A the local total density and no-flux walls.  Space: conservative
second-order fluxes for diffusion, donor-cell upwinding for the avoidance
drift.  Time: Heun's method (explicit trapezoidal RK2).
"""

from dataclasses import dataclass

import numpy as np

from .grids import MesoField, l2_cell_norm


@dataclass(frozen=True)
class MesoCoefficients:
    """Per-axis diffusivities and averaged rates on the grid.

    D here is what multiplies the Laplacian along each axis.  Closure
    output uses the trace convention, so conversion happens in
    `from_closure` via diffusion_reading: 'per_dim' divides the trace by
    the dimension (the tensor-consistent reading for isotropic sets),
    'scalar' applies the trace as-is.
    """

    D: np.ndarray        # (3, nx, ny)
    Gamma: np.ndarray    # (nx, ny)
    alpha0: np.ndarray   # (nx, ny)
    beta0: np.ndarray
    gamma0: np.ndarray

    @classmethod
    def from_closure(cls, closure, grid, diffusion_reading="per_dim"):
        if diffusion_reading == "per_dim":
            d = closure.D / grid.dim
            gam = closure.Gamma / grid.dim
        elif diffusion_reading == "scalar":
            d = closure.D.copy()
            gam = closure.Gamma.copy()
        else:
            raise ValueError("diffusion_reading must be 'per_dim' or 'scalar'")
        return cls(D=d, Gamma=gam, alpha0=closure.alpha0.copy(),
                   beta0=closure.beta0.copy(), gamma0=closure.gamma0.copy())

    @classmethod
    def constant(cls, grid, D, Gamma, alpha0, beta0, gamma0):
        shape = (grid.nx, grid.ny)
        d = np.broadcast_to(np.asarray(D, dtype=float), (3,))
        return cls(
            D=np.ascontiguousarray(np.broadcast_to(d[:, None, None], (3,) + shape)),
            Gamma=np.full(shape, float(Gamma)),
            alpha0=np.full(shape, float(alpha0)),
            beta0=np.full(shape, float(beta0)),
            gamma0=np.full(shape, float(gamma0)),
        )


def _diffusion_rhs(rho_j, d_j, grid):
    """div(D grad rho) with arithmetic face means and zero wall flux."""
    out = np.zeros_like(rho_j)
    if grid.nx > 1:
        dface = 0.5 * (d_j[1:, :] + d_j[:-1, :])
        flux = dface * (rho_j[1:, :] - rho_j[:-1, :]) / grid.hx
        out[:-1, :] += flux / grid.hx
        out[1:, :] -= flux / grid.hx
    if grid.ny > 1:
        dface = 0.5 * (d_j[:, 1:] + d_j[:, :-1])
        flux = dface * (rho_j[:, 1:] - rho_j[:, :-1]) / grid.hy
        out[:, :-1] += flux / grid.hy
        out[:, 1:] -= flux / grid.hy
    return out


def _drift_rhs(rho_s, rho_i, gamma_drift, grid):
    """div(Gamma (grad rho_I) rho_S), donor-cell upwinded.

    Written as advection with velocity c = -Gamma grad rho_I: the face
    flux is c_f * rho_S on the upwind side, and walls carry no flux.
    Returns (rhs, max Courant speed / h) so the caller can police dt.
    """
    out = np.zeros_like(rho_s)
    speed = 0.0
    if grid.nx > 1:
        gface = 0.5 * (gamma_drift[1:, :] + gamma_drift[:-1, :])
        c = -gface * (rho_i[1:, :] - rho_i[:-1, :]) / grid.hx
        up = np.where(c > 0.0, rho_s[:-1, :], rho_s[1:, :])
        flux = c * up
        out[:-1, :] -= flux / grid.hx
        out[1:, :] += flux / grid.hx
        if c.size:
            speed = max(speed, float(np.max(np.abs(c))) / grid.hx)
    if grid.ny > 1:
        gface = 0.5 * (gamma_drift[:, 1:] + gamma_drift[:, :-1])
        c = -gface * (rho_i[:, 1:] - rho_i[:, :-1]) / grid.hy
        up = np.where(c > 0.0, rho_s[:, :-1], rho_s[:, 1:])
        flux = c * up
        out[:, :-1] -= flux / grid.hy
        out[:, 1:] += flux / grid.hy
        if c.size:
            speed = max(speed, float(np.max(np.abs(c))) / grid.hy)
    return out, speed


def meso_rhs(rho, coeff, grid, floor=0.0):
    """Right-hand side on the full (3, nx, ny) state.

    The reaction block is assembled with the R rate as -(dS + dI) so its
    class sum is bitwise zero; the transport blocks are conservative by
    construction.  Returns (rhs, max drift Courant speed).
    """
    rho_s, rho_i, rho_r = rho[0], rho[1], rho[2]
    a_tot = rho_s + rho_i + rho_r
    live = a_tot > floor
    denom = np.where(live, a_tot, 1.0)
    b = np.where(live, coeff.beta0 * rho_s * rho_i / denom, 0.0)
    a = coeff.alpha0 * rho_r
    g = coeff.gamma0 * rho_i
    qs = a - b
    qi = b - g

    out = np.empty_like(rho)
    out[0] = qs + _diffusion_rhs(rho_s, coeff.D[0], grid)
    out[1] = qi + _diffusion_rhs(rho_i, coeff.D[1], grid)
    out[2] = -(qs + qi) + _diffusion_rhs(rho_r, coeff.D[2], grid)
    speed = 0.0
    if np.any(coeff.Gamma != 0.0):
        drift, speed = _drift_rhs(rho_s, rho_i, coeff.Gamma, grid)
        out[0] += drift
    return out, speed


@dataclass
class MesoConfig:
    """Run controls; dt must satisfy the explicit diffusion bound
    dt <= safety / (2 max_j D_j (1/hx^2 + 1/hy^2)) checked at run start,
    and the drift Courant number is policed during the run."""

    dt: float
    t_end: float
    output_every: int = 1
    safety: float = 0.9
    record_densities: bool = False
    clip_abort_rel: float = 1e-6

    def __post_init__(self):
        if self.dt <= 0 or self.t_end < 0:
            raise ValueError("dt must be positive and t_end non-negative")
        if not 0 < self.safety <= 1:
            raise ValueError("safety must lie in (0, 1]")
        if self.output_every < 1:
            raise ValueError("output_every must be a positive integer")


def diffusion_dt_limit(coeff, grid, safety=0.9):
    """Largest stable explicit step for the diffusive part."""
    dmax = float(np.max(coeff.D))
    if dmax == 0.0:
        return np.inf
    inv = 1.0 / grid.hx ** 2 + (1.0 / grid.hy ** 2 if grid.ny > 1 else 0.0)
    return safety / (2.0 * dmax * inv)


def meso_step(rho, dt, coeff, grid, floor=0.0):
    """One Heun step; returns (new state, clipped mass density sum, drift speed)."""
    k1, s1 = meso_rhs(rho, coeff, grid, floor)
    mid = rho + dt * k1
    k2, s2 = meso_rhs(mid, coeff, grid, floor)
    out = rho + (0.5 * dt) * (k1 + k2)
    neg = out < 0.0
    clipped = 0.0
    if np.any(neg):
        clipped = float(-out[neg].sum()) * grid.cell_measure
        out[neg] = 0.0
    return out, clipped, max(s1, s2)


@dataclass
class MesoResult:
    times: np.ndarray
    totals: np.ndarray       # (n_out, 3)
    l2_rho: np.ndarray       # (n_out, 3)
    rho_final: np.ndarray    # (3, nx, ny)
    densities: list | None
    clipped_total: float
    n_steps: int


def run_meso(rho0, cfg, coeff, grid, observers=()):
    """Advance a MesoField to t_end recording totals and spatial L2 norms."""
    if cfg.dt > diffusion_dt_limit(coeff, grid, cfg.safety) * (1 + 1e-12):
        raise ValueError(
            f"dt={cfg.dt:g} exceeds the explicit diffusion limit "
            f"{diffusion_dt_limit(coeff, grid, cfg.safety):g}")
    n_steps = int(round(cfg.t_end / cfg.dt))
    if abs(n_steps * cfg.dt - cfg.t_end) > 1e-9 * max(1.0, abs(cfg.t_end)):
        raise ValueError("t_end must be an integer multiple of dt")

    rho = rho0.data.copy()
    floor = 1e-12 * float((rho[0] + rho[1] + rho[2]).mean())
    mass0 = float(rho.sum()) * grid.cell_measure

    times, totals, l2s = [], [], []
    densities = [] if cfg.record_densities else None

    def record(step):
        t = step * cfg.dt
        times.append(t)
        totals.append(rho.sum(axis=(1, 2)) * grid.cell_measure)
        l2s.append([l2_cell_norm(rho[j], grid) for j in range(3)])
        if densities is not None:
            densities.append(rho.copy())
        for obs in observers:
            obs(t, MesoField(rho.copy()))

    record(0)
    clipped_total = 0.0
    for step in range(1, n_steps + 1):
        rho, clipped, speed = meso_step(rho, cfg.dt, coeff, grid, floor)
        clipped_total += clipped
        if clipped_total > cfg.clip_abort_rel * mass0:
            raise RuntimeError(
                f"clipped mass {clipped_total:g} exceeded "
                f"{cfg.clip_abort_rel:g} of the initial population {mass0:g}")
        if speed * cfg.dt > 1.0:
            raise RuntimeError(
                f"drift Courant number {speed * cfg.dt:g} above 1 at step {step}")
        if step % cfg.output_every == 0 or step == n_steps:
            record(step)

    return MesoResult(
        times=np.array(times),
        totals=np.array(totals),
        l2_rho=np.array(l2s),
        rho_final=rho.copy(),
        densities=densities,
        clipped_total=clipped_total,
        n_steps=n_steps,
    )
