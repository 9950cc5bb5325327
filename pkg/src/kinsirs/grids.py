"""Spatial grids, discrete velocity sets, fields, parameters, scalings.

Conventions used everywhere downstream:

* epidemiological classes are indexed S=0, I=1, R=2;
* kinetic distributions live on arrays of shape (3, nx, ny, nv);
* cell densities (velocity averages removed) on (3, nx, ny);
* one-dimensional problems use ny = 1 with the y velocity component zero.
"""

from dataclasses import dataclass, field, replace

import numpy as np

CLASSES = ("S", "I", "R")
S, I, R = 0, 1, 2

_MIRROR_ATOL = 0.0  # mirrors must match bitwise; the constructors arrange this


@dataclass(frozen=True)
class VelocitySet:
    """Finite velocity set with quadrature weights and equilibrium values.

    Attributes
    ----------
    velocities : (nv, 2) float64
        Velocity vectors; vy == 0 for one-dimensional sets.
    weights : (nv,) float64
        Quadrature weights, all positive; sum equals ``total_measure``.
    equilibrium : (nv,) float64
        Values F_k of the normalised equilibrium distribution,
        sum_k w_k F_k == 1.
    total_measure : float
        |V|, the measure of the continuous velocity space represented.
    dim : int
        1 or 2, number of active spatial directions.
    mirror_x, mirror_y : (nv,) int64
        Index permutations sending v to its reflection through the y/x
        axis; used by reflecting walls.  Exact: velocities[mirror_x[k]]
        equals (-vx_k, vy_k) bitwise.
    """

    velocities: np.ndarray
    weights: np.ndarray
    equilibrium: np.ndarray
    total_measure: float
    dim: int
    mirror_x: np.ndarray
    mirror_y: np.ndarray

    def __post_init__(self):
        v, w, feq = self.velocities, self.weights, self.equilibrium
        nv = v.shape[0]
        if v.shape != (nv, 2) or w.shape != (nv,) or feq.shape != (nv,):
            raise ValueError("inconsistent velocity set shapes")
        if np.any(w <= 0):
            raise ValueError("quadrature weights must be positive")
        if abs(w.sum() - self.total_measure) > 1e-12 * self.total_measure:
            raise ValueError("weights do not sum to the velocity-space measure")
        if abs(float(w @ feq) - 1.0) > 1e-12:
            raise ValueError("equilibrium is not normalised against the weights")
        mean_v = w @ v
        if np.max(np.abs(mean_v)) > 1e-12 * max(1.0, np.max(np.abs(v))):
            raise ValueError("velocity set has a nonzero mean velocity")
        for mir, axis in ((self.mirror_x, 0), (self.mirror_y, 1)):
            flipped = v.copy()
            flipped[:, axis] = -flipped[:, axis]
            if not np.array_equal(v[mir], flipped):
                raise ValueError("mirror permutation is not an exact reflection")

    @property
    def nv(self):
        return self.velocities.shape[0]

    @property
    def speed_max(self):
        return float(np.max(np.hypot(self.velocities[:, 0], self.velocities[:, 1])))

    @property
    def eq_weights(self):
        """Normalised averaging weights u_k = w_k F_k / sum(w F)."""
        u = self.weights * self.equilibrium
        return u / u.sum()


def _mirror_permutation(v, axis):
    """Index permutation realising a bitwise reflection of velocity ``axis``."""
    nv = v.shape[0]
    target = v.copy()
    target[:, axis] = -target[:, axis]
    # exact negation of a float flips the sign bit only, so bitwise matching
    # works whenever the set was built with the symmetry in place
    perm = np.full(nv, -1, dtype=np.int64)
    for k in range(nv):
        hits = np.nonzero((v[:, 0] == target[k, 0]) & (v[:, 1] == target[k, 1]))[0]
        if hits.size != 1:
            raise ValueError("velocity set lacks an exact reflection symmetry")
        perm[k] = hits[0]
    return perm


def make_circle_velocity_set(n, v0):
    """n directions uniformly spaced on the circle of radius v0.

    n must be a multiple of 4 so that both coordinate reflections act as
    exact permutations of the set (the four quadrants are built from one
    by sign flips, which are exact in floating point).
    """
    if n < 4 or n % 4 != 0:
        raise ValueError("circle set needs n to be a positive multiple of 4")
    if v0 <= 0:
        raise ValueError("v0 must be positive")
    q = n // 4
    vx = np.empty(n)
    vy = np.empty(n)
    vx[0], vy[0] = v0, 0.0
    vx[q], vy[q] = 0.0, v0
    for k in range(1, q):
        th = 2.0 * np.pi * k / n
        vx[k] = v0 * np.cos(th)
        vy[k] = v0 * np.sin(th)
    for k in range(q + 1, 2 * q + 1):
        vx[k] = -vx[2 * q - k]
        vy[k] = vy[2 * q - k]
    for k in range(2 * q + 1, n):
        vx[k] = vx[n - k]
        vy[k] = -vy[n - k]
    v = np.stack([vx, vy], axis=1)
    measure = 2.0 * np.pi * v0
    w = np.full(n, measure / n)
    feq = np.full(n, 1.0 / measure)
    return VelocitySet(
        velocities=v,
        weights=w,
        equilibrium=feq,
        total_measure=measure,
        dim=2,
        mirror_x=_mirror_permutation(v, 0),
        mirror_y=_mirror_permutation(v, 1),
    )


def make_two_speed_set(v_plus, v_minus=None):
    """Two-point one-dimensional set {v_plus, v_minus}, default v_minus = -v_plus.

    Counting weights w_k = 1 (|V| = 2) and equilibrium F = 1/2, matching the
    two-velocity confinement setting.
    """
    if v_minus is None:
        v_minus = -v_plus
    if v_plus <= 0.0:
        raise ValueError("v_plus must be positive")
    if v_minus != -v_plus:
        raise ValueError("only symmetric two-speed sets keep a zero mean velocity")
    v = np.array([[v_plus, 0.0], [v_minus, 0.0]])
    w = np.ones(2)
    feq = np.full(2, 0.5)
    return VelocitySet(
        velocities=v,
        weights=w,
        equilibrium=feq,
        total_measure=2.0,
        dim=1,
        mirror_x=np.array([1, 0], dtype=np.int64),
        mirror_y=np.array([0, 1], dtype=np.int64),
    )


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform cell-centred grid on [0, Lx] x [0, Ly] with no-flux walls."""

    nx: int
    ny: int
    lx: float
    ly: float
    dim: int = 2

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one cell per direction")
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError("grid extents must be positive")
        if self.dim == 1 and self.ny != 1:
            raise ValueError("one-dimensional grids use ny = 1")
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")

    @classmethod
    def square(cls, n, length):
        return cls(nx=n, ny=n, lx=length, ly=length, dim=2)

    @classmethod
    def line(cls, n, length):
        return cls(nx=n, ny=1, lx=length, ly=1.0, dim=1)

    @property
    def hx(self):
        return self.lx / self.nx

    @property
    def hy(self):
        return self.ly / self.ny

    @property
    def h_min(self):
        return self.hx if self.dim == 1 else min(self.hx, self.hy)

    @property
    def cell_measure(self):
        return self.hx if self.dim == 1 else self.hx * self.hy

    @property
    def x_centers(self):
        return (np.arange(self.nx) + 0.5) * self.hx

    @property
    def y_centers(self):
        return (np.arange(self.ny) + 0.5) * self.hy


@dataclass
class PhaseField:
    """Kinetic state: class-resolved distributions on (3, nx, ny, nv)."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 4 or self.data.shape[0] != 3:
            raise ValueError("phase field data must have shape (3, nx, ny, nv)")

    @classmethod
    def uniform(cls, grid, vs, densities):
        """Velocity-uniform field with prescribed cell densities per class."""
        data = np.empty((3, grid.nx, grid.ny, vs.nv))
        for j in range(3):
            data[j] = densities[j] / vs.total_measure
        return cls(data)

    @classmethod
    def from_densities(cls, rho, vs):
        """Velocity-uniform field matching a (3, nx, ny) density array."""
        return cls(rho[..., None] / vs.total_measure * np.ones(vs.nv))

    def copy(self):
        return PhaseField(self.data.copy())

    def densities(self, vs):
        return self.data @ vs.weights

    def class_totals(self, vs, grid):
        return self.densities(vs).sum(axis=(1, 2)) * grid.cell_measure


@dataclass
class MesoField:
    """Mesoscopic state: class densities on (3, nx, ny)."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[0] != 3:
            raise ValueError("meso field data must have shape (3, nx, ny)")

    @classmethod
    def uniform(cls, grid, densities):
        data = np.empty((3, grid.nx, grid.ny))
        for j in range(3):
            data[j] = densities[j]
        return cls(data)

    def copy(self):
        return MesoField(self.data.copy())

    def class_totals(self, grid):
        return self.data.sum(axis=(1, 2)) * grid.cell_measure


@dataclass(frozen=True)
class ParamFields:
    """Model parameters resolved on the grid.

    alpha, beta, gamma are (nx, ny, nv) (transition rates may in principle
    depend on the velocity); lam is (3, nx, ny) (one reorientation rate per
    class); eta, xi are (nx, ny) avoidance responses.
    """

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    lam: np.ndarray
    eta: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        nx, ny, nv = self.alpha.shape
        if self.beta.shape != (nx, ny, nv) or self.gamma.shape != (nx, ny, nv):
            raise ValueError("rate fields must share the (nx, ny, nv) shape")
        if self.lam.shape != (3, nx, ny):
            raise ValueError("lam must have shape (3, nx, ny)")
        if self.eta.shape != (nx, ny) or self.xi.shape != (nx, ny):
            raise ValueError("eta and xi must have shape (nx, ny)")
        for name in ("alpha", "beta", "gamma"):
            if np.any(getattr(self, name) < 0):
                raise ValueError(f"{name} must be non-negative")
        if np.any(self.lam <= 0):
            raise ValueError("reorientation rates must be positive")

    @classmethod
    def constant(cls, grid, vs, alpha, beta, gamma, lam, eta=0.0, xi=0.0):
        """Spatially constant parameters; lam may be a scalar or per-class triple."""
        shape = (grid.nx, grid.ny, vs.nv)
        lam = np.broadcast_to(np.asarray(lam, dtype=float), (3,))
        return cls(
            alpha=np.full(shape, float(alpha)),
            beta=np.full(shape, float(beta)),
            gamma=np.full(shape, float(gamma)),
            lam=np.ascontiguousarray(
                np.broadcast_to(lam[:, None, None], (3, grid.nx, grid.ny))
            ),
            eta=np.full((grid.nx, grid.ny), float(eta)),
            xi=np.full((grid.nx, grid.ny), float(xi)),
        )


@dataclass(frozen=True)
class ScaleParams:
    """Reference scales and the resulting scale separation epsilon.

    epsilon = x0 / (v0 * t0): the ratio of the macroscopic time unit to the
    crossing time of the macroscopic length at the microscopic speed.
    """

    epsilon: float
    t0: float = 1.0
    x0: float = 1.0
    v0: float = 1.0
    f0: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if min(self.t0, self.x0, self.v0) <= 0 or min(self.f0) <= 0:
            raise ValueError("reference scales must be positive")

    @classmethod
    def from_scales(cls, t0, x0, v0, f0=(1.0, 1.0, 1.0)):
        if np.isscalar(f0):
            f0 = (float(f0),) * 3
        return cls(epsilon=x0 / (v0 * t0), t0=t0, x0=x0, v0=v0, f0=tuple(f0))

    @classmethod
    def from_epsilon(cls, epsilon):
        """Unit reference scales with an externally prescribed epsilon."""
        return cls(epsilon=float(epsilon))

    def consistent(self):
        return abs(self.epsilon - self.x0 / (self.v0 * self.t0)) <= 1e-12 * self.epsilon


_KIND_EXPONENTS = {
    # value_nondim = value_physical * t0**a * x0**b * v0**c
    "rate": (1, 0, 0),
    "time": (-1, 0, 0),
    "length": (0, -1, 0),
    "speed": (0, 0, -1),
    "dimensionless": (0, 0, 0),
}


def scale_quantity(value, kind, scales, inverse=False):
    """Convert a physical quantity to nondimensional form (or back).

    kind is one of 'rate', 'time', 'length', 'speed', 'dimensionless',
    or 'density_S' / 'density_I' / 'density_R'.
    """
    if kind.startswith("density_"):
        j = CLASSES.index(kind.split("_", 1)[1])
        factor = 1.0 / scales.f0[j]
    else:
        a, b, c = _KIND_EXPONENTS[kind]
        factor = scales.t0 ** a * scales.x0 ** b * scales.v0 ** c
    return value / factor if inverse else value * factor


def nondimensionalize(params, scales):
    """Rescale a ParamFields of physical rates to simulation units.

    All rates (alpha, beta, gamma, lam) are multiplied by t0.  eta and xi
    are passed through unchanged: they are treated as already
    nondimensional responses, since their physical calibration depends on
    the convention chosen for the velocity measure.

    Returns the rescaled ParamFields and epsilon.
    """
    t0 = scales.t0
    out = replace(
        params,
        alpha=params.alpha * t0,
        beta=params.beta * t0,
        gamma=params.gamma * t0,
        lam=params.lam * t0,
    )
    return out, scales.epsilon


def redimensionalize(params, scales):
    """Inverse of nondimensionalize on the parameter fields."""
    t0 = scales.t0
    return replace(
        params,
        alpha=params.alpha / t0,
        beta=params.beta / t0,
        gamma=params.gamma / t0,
        lam=params.lam / t0,
    )


def velocity_moments(f_j, vs):
    """Density and flux of one class distribution.

    f_j has shape (..., nv); returns (rho, flux) with shapes (...,) and
    (..., 2), where rho = sum_k w_k f_k and flux = sum_k w_k v_k f_k.
    """
    rho = f_j @ vs.weights
    flux = f_j @ (vs.weights[:, None] * vs.velocities)
    return rho, flux


def lp_phase_norm(f_j, vs, grid, p):
    """L^p norm of one class distribution over position x velocity."""
    weights = vs.weights * grid.cell_measure
    if np.isinf(p):
        return float(np.max(np.abs(f_j)))
    contrib = np.abs(f_j) ** p @ weights
    return float(contrib.sum() ** (1.0 / p))


def l2_cell_norm(rho_j, grid):
    """L^2 norm of one class density over the spatial domain."""
    return float(np.sqrt((rho_j ** 2).sum() * grid.cell_measure))
