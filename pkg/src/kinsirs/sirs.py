"""Spatially homogeneous SIRS dynamics,

    S' = alpha R - beta S I / N,   I' = beta S I / N - gamma I,
    R' = gamma I - alpha R,

integrated with classic RK4.  Every stage derivative is assembled with the
R component as -(dS + dI), so the population N only moves by the rounding
of the state updates (a few ulp over any run).
"""

from dataclasses import dataclass

import numpy as np


def sirs_rhs(y, alpha, beta, gamma):
    """Time derivative of (S, I, R); N is taken from the current state."""
    s, i, r = y
    n = s + i + r
    b = beta * s * i / n if n > 0.0 else 0.0
    ds = alpha * r - b
    di = b - gamma * i
    return np.array([ds, di, -(ds + di)])


def rk4_step(y, dt, alpha, beta, gamma):
    k1 = sirs_rhs(y, alpha, beta, gamma)
    k2 = sirs_rhs(y + 0.5 * dt * k1, alpha, beta, gamma)
    k3 = sirs_rhs(y + 0.5 * dt * k2, alpha, beta, gamma)
    k4 = sirs_rhs(y + dt * k3, alpha, beta, gamma)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def basic_reproduction_number(beta, gamma):
    return beta / gamma


def endemic_equilibrium(n, alpha, beta, gamma):
    """The positive fixed point (exists for beta > gamma, alpha > 0)."""
    if beta <= gamma:
        raise ValueError("no endemic state at or below the epidemic threshold")
    s = n * gamma / beta
    i = (n - s) / (1.0 + gamma / alpha)
    return np.array([s, i, n - s - i])


@dataclass
class SirsResult:
    times: np.ndarray
    y: np.ndarray           # (n_out, 3)
    n_steps: int
    stopped_early: bool


def run_sirs(y0, dt, t_end, alpha, beta, gamma, output_every=1, observers=()):
    """Integrate to t_end, recording every output_every steps (plus the
    endpoints).  With alpha == 0 the run stops once I falls below
    1e-12 N: nothing can change any more at that point.
    """
    if dt <= 0 or t_end < 0:
        raise ValueError("dt must be positive and t_end non-negative")
    n_steps = int(round(t_end / dt))
    if abs(n_steps * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError("t_end must be an integer multiple of dt")

    y = np.asarray(y0, dtype=float).copy()
    if y.shape != (3,) or np.any(y < 0):
        raise ValueError("y0 must be three non-negative populations")
    n_total = float(y.sum())

    times, out = [0.0], [y.copy()]
    stopped = False
    last_recorded = 0
    for step in range(1, n_steps + 1):
        y = rk4_step(y, dt, alpha, beta, gamma)
        if step % output_every == 0 or step == n_steps:
            times.append(step * dt)
            out.append(y.copy())
            last_recorded = step
            for obs in observers:
                obs(step * dt, y.copy())
        if alpha == 0.0 and y[1] < 1e-12 * n_total:
            if step != last_recorded:
                times.append(step * dt)
                out.append(y.copy())
            stopped = True
            n_steps = step
            break

    return SirsResult(times=np.array(times), y=np.array(out),
                      n_steps=n_steps, stopped_early=stopped)
