"""Timing comparison of the numba kernels against the NumPy fallback.

Runs each hot kernel (transport sweeps, relaxation, transition kernel,
agent step) on both backends, checks they agree (the agent step must be
bitwise identical, field kernels to rounding), and prints per-call times.

Usage: python benchmarks/bench_backends.py [--repeat N]
"""

import argparse
import time

import numpy as np

from kinsirs import backend, rng
from kinsirs.abm import ABMParams, direction_vectors, init_population
from kinsirs.grids import ParamFields, SpatialGrid, make_circle_velocity_set


def _field_setup(n=128, nv=16):
    grid = SpatialGrid.square(n, 1.0)
    vs = make_circle_velocity_set(nv, 1.0)
    u = rng.uniforms(rng.stream_key(0, 0, 99), 3 * n * n * nv)
    f = (0.5 + u).reshape(3, n, n, nv)
    params = ParamFields.constant(grid, vs, 0.1, 0.75, 0.5, 1.0)
    return grid, vs, f, params


def _abm_setup(n_agents=100_000):
    params = ABMParams(nx=100, ny=100, p_transmit=0.5, p_recover=0.3,
                       p_wane=0.05, p_reorient=0.4, n_dirs=8)
    world = init_population(params, (n_agents - 2000, 1500, 500), seed=3)
    return params, world


def _time(fn, repeat):
    fn()  # warm-up (also triggers JIT compilation)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    grid, vs, f, params = _field_setup()
    nu = 0.9 * vs.velocities[:, 0] / vs.speed_max
    decay = np.exp(-params.lam * 0.08)
    abm_params, _ = _abm_setup()
    dvx, dvy, mir_x, mir_y = direction_vectors(abm_params.n_dirs)
    keys = tuple(np.uint64(rng.stream_key(3, 1, ph)) for ph in range(5))

    cases = {}
    for name in ("numpy", "numba") if backend.HAS_NUMBA else ("numpy",):
        backend.force_backend(name)
        impl = backend.kernels()
        results = {}

        def run_transport(impl=impl):
            return impl.transport_sweep_x(f, nu, vs.mirror_x)

        def run_relax(impl=impl):
            return impl.relax(f.copy(), vs.weights, 1.0 / vs.total_measure, decay)

        def run_transition(impl=impl):
            return impl.transition_kernel(f, params.alpha, params.beta,
                                          params.gamma, 1e-12)

        def run_abm(impl=impl):
            _, world = _abm_setup()
            impl.abm_step_arrays(world.cls, world.xs, world.ys, world.dirs,
                                 abm_params.nx, abm_params.ny,
                                 dvx, dvy, mir_x, mir_y,
                                 abm_params.p_transmit, abm_params.p_recover,
                                 abm_params.p_wane, abm_params.p_reorient,
                                 *keys)
            return world.cls.copy(), world.xs.copy(), world.ys.copy(), world.dirs.copy()

        for label, fn in (("transport_sweep_x", run_transport),
                          ("relax", run_relax),
                          ("transition_kernel", run_transition),
                          ("abm_step (1e5 agents)", run_abm)):
            results[label] = (_time(fn, args.repeat), fn())
        cases[name] = results

    backend.force_backend(None)

    print(f"{'kernel':<24}" + "".join(f"{n:>12}" for n in cases) + "   agreement")
    for label in next(iter(cases.values())):
        line = f"{label:<24}"
        for name in cases:
            line += f"{cases[name][label][0] * 1e3:>10.3f}ms"
        if len(cases) == 2:
            a = cases["numpy"][label][1]
            b = cases["numba"][label][1]
            if label.startswith("abm"):
                same = all(np.array_equal(x, y) for x, y in zip(a, b))
                line += "   bitwise" if same else "   MISMATCH"
                assert same, "agent step diverged between backends"
            else:
                dev = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
                line += f"   max dev {dev:.2e}"
                assert dev < 1e-12, "field kernels diverged between backends"
        print(line)


if __name__ == "__main__":
    main()
