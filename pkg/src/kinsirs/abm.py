"""Stochastic lattice agent model.

Agents carry a class (S/I/R), a lattice cell, and a discrete direction.
One step applies, in order: contagion, recovery, waning, reorientation,
movement.  All class transitions read the step-start snapshot, so the
three transition phases commute; contagion exposes an S agent to the
infectious agents sharing its (cell, direction) slot with probability
1 - (1-beta)^n.  Movement is one cell along the direction with specular
reflection at the walls.

Randomness comes from the addressed counter stream in rng.py: the draw
for agent a in phase ph of step s depends only on (seed, s, ph, a), which
makes runs reproducible across backends and step order irrelevant.
"""

from dataclasses import dataclass, field

import numpy as np

from . import backend, rng

# phase tags for the random stream
PH_CONTAGION = 0
PH_RECOVERY = 1
PH_WANING = 2
PH_REORIENT = 3
PH_REDRAW = 4
PH_INIT_X = 10
PH_INIT_Y = 11
PH_INIT_DIR = 12

# direction tables in angle order; mirrors are exact sign flips
_DIRS8 = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
_DIRS4 = [(1, 0), (0, 1), (-1, 0), (0, -1)]
_DIRS1 = [(0, 0)]
DIRECTION_SETS = {8: _DIRS8, 4: _DIRS4, 1: _DIRS1}


def direction_vectors(n_dirs):
    """(dvx, dvy, mir_x, mir_y) int64 arrays for an n-direction stencil."""
    if n_dirs not in DIRECTION_SETS:
        raise ValueError("n_dirs must be one of 1, 4, 8")
    table = DIRECTION_SETS[n_dirs]
    dvx = np.array([d[0] for d in table], dtype=np.int64)
    dvy = np.array([d[1] for d in table], dtype=np.int64)

    def find(tx, ty):
        for idx, (ax, ay) in enumerate(table):
            if ax == tx and ay == ty:
                return idx
        raise AssertionError("direction table lacks a mirror partner")

    mir_x = np.array([find(-dx, dy) for dx, dy in table], dtype=np.int64)
    mir_y = np.array([find(dx, -dy) for dx, dy in table], dtype=np.int64)
    return dvx, dvy, mir_x, mir_y


@dataclass(frozen=True)
class ABMParams:
    nx: int
    ny: int
    p_transmit: float
    p_recover: float
    p_wane: float
    p_reorient: float
    n_dirs: int = 8

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("lattice must have positive extents")
        for name in ("p_transmit", "p_recover", "p_wane", "p_reorient"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability")
        if self.n_dirs not in DIRECTION_SETS:
            raise ValueError("n_dirs must be one of 1, 4, 8")


@dataclass
class AgentWorld:
    params: ABMParams
    seed: int
    cls: np.ndarray    # (n,) int64, values 0/1/2
    xs: np.ndarray     # (n,) int64
    ys: np.ndarray     # (n,) int64
    dirs: np.ndarray   # (n,) int64
    step: int = 0

    @property
    def n_agents(self):
        return self.cls.size

    def counts(self):
        return np.bincount(self.cls, minlength=3).astype(np.int64)

    def occupancy(self):
        """Per-class occupation numbers, shape (3, nx, ny)."""
        p = self.params
        out = np.zeros((3, p.nx, p.ny), dtype=np.int64)
        cells = self.xs * p.ny + self.ys
        for j in range(3):
            sel = cells[self.cls == j]
            if sel.size:
                out[j] = np.bincount(sel, minlength=p.nx * p.ny).reshape(p.nx, p.ny)
        return out


def _block_origin(params, side, name):
    if side > min(params.nx, params.ny) or side < 1:
        raise ValueError(f"{name} must fit inside the lattice")
    return (params.nx - side) // 2, (params.ny - side) // 2


def init_population(params, counts, seed, block_side=None, i_block_side=None):
    """Place counts = (n_S, n_I, n_R) agents with random directions.

    With block_side set, agents start inside the centred square block of
    that side length; otherwise they are spread over the whole lattice.
    i_block_side gives the infectious class its own (typically tighter)
    centred block, which seeds an outbreak inside a susceptible cloud.
    Positions and directions come from the init phases of the seed's
    stream, so a population is a pure function of (params, counts, seed).
    """
    n = int(sum(counts))
    cls = np.repeat(np.arange(3, dtype=np.int64), np.asarray(counts, dtype=np.int64))
    if block_side is None:
        x0, y0 = 0, 0
        wx, wy = params.nx, params.ny
    else:
        x0, y0 = _block_origin(params, block_side, "block_side")
        wx = wy = block_side
    x0 = np.full(n, x0, dtype=np.int64)
    y0 = np.full(n, y0, dtype=np.int64)
    wx = np.full(n, wx, dtype=np.int64)
    wy = np.full(n, wy, dtype=np.int64)
    if i_block_side is not None:
        ix0, iy0 = _block_origin(params, i_block_side, "i_block_side")
        inf = cls == 1
        x0[inf], y0[inf] = ix0, iy0
        wx[inf] = wy[inf] = i_block_side
    idx = np.arange(n, dtype=np.int64)
    ux = rng.uniforms_at(rng.stream_key(seed, 0, PH_INIT_X), idx)
    uy = rng.uniforms_at(rng.stream_key(seed, 0, PH_INIT_Y), idx)
    ud = rng.uniforms_at(rng.stream_key(seed, 0, PH_INIT_DIR), idx)
    xs = x0 + np.minimum((ux * wx).astype(np.int64), wx - 1)
    ys = y0 + np.minimum((uy * wy).astype(np.int64), wy - 1)
    dirs = np.minimum((ud * params.n_dirs).astype(np.int64), params.n_dirs - 1)
    return AgentWorld(params=params, seed=int(seed), cls=cls, xs=xs, ys=ys, dirs=dirs)


def abm_step(world):
    """Advance the world by one step in place (and return it)."""
    p = world.params
    dvx, dvy, mir_x, mir_y = direction_vectors(p.n_dirs)
    step = world.step + 1
    keys = tuple(
        np.uint64(rng.stream_key(world.seed, step, ph))
        for ph in (PH_CONTAGION, PH_RECOVERY, PH_WANING, PH_REORIENT, PH_REDRAW))
    backend.kernels().abm_step_arrays(
        world.cls, world.xs, world.ys, world.dirs, p.nx, p.ny,
        dvx, dvy, mir_x, mir_y,
        p.p_transmit, p.p_recover, p.p_wane, p.p_reorient, *keys)
    world.step = step
    return world


@dataclass
class ABMResult:
    counts: np.ndarray           # (n_steps + 1, 3) class populations
    grids: dict = field(default_factory=dict)   # step -> (3, nx, ny) occupancy
    seed: int = 0
    n_agents: int = 0


def run_abm(world, n_steps, grid_steps=(), observers=()):
    """Run n_steps, recording class counts each step and occupancy grids
    at the requested step numbers (0 is allowed)."""
    grid_steps = set(int(s) for s in grid_steps)
    counts = [world.counts()]
    grids = {}
    if world.step in grid_steps:
        grids[world.step] = world.occupancy()
    n0 = world.n_agents
    for _ in range(n_steps):
        abm_step(world)
        counts.append(world.counts())
        if world.step in grid_steps:
            grids[world.step] = world.occupancy()
        for obs in observers:
            obs(world.step, world)
        if int(counts[-1].sum()) != n0:
            raise AssertionError("agent count changed during a step")
    return ABMResult(counts=np.array(counts), grids=grids,
                     seed=world.seed, n_agents=n0)


def mean_radius(occupancy_j, center=None):
    """Population-weighted mean distance from the lattice centre.

    occupancy_j is an (nx, ny) occupation count; center defaults to the
    geometric centre ((nx-1)/2, (ny-1)/2).  Returns nan for an empty class.
    """
    nx, ny = occupancy_j.shape
    if center is None:
        center = ((nx - 1) / 2.0, (ny - 1) / 2.0)
    total = float(occupancy_j.sum())
    if total == 0.0:
        return float("nan")
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    dist = np.hypot(ix - center[0], iy - center[1])
    return float((occupancy_j * dist).sum() / total)
