"""Acceptance suite: one test per release criterion, each printing a single
PASS/FAIL line with the measured quantity and its gate.

These are the quantitative guarantees the package ships with: cross-scale
agreement, exact coefficient values, conservation over long runs, the
diffusion-limit convergence order, decay/growth certificates, agent-level
statistics, and the final-size oracle.  The tolerances are contractual;
loosening one is an interface change, not a test fix.
"""

import time

import numpy as np

from kinsirs.abm import (ABMParams, AgentWorld, abm_step, init_population,
                         mean_radius, run_abm)
from kinsirs.closure import compute_closure, confinement_coefficients
from kinsirs.grids import (MesoField, ParamFields, PhaseField, SpatialGrid,
                           make_circle_velocity_set)
from kinsirs.io import render_class_panels
from kinsirs.kinetic import KineticConfig, run_kinetic
from kinsirs.meso import (MesoCoefficients, MesoConfig, diffusion_dt_limit,
                          run_meso)
from kinsirs.sirs import run_sirs
from kinsirs.validation import (_gaussian_bump, closure_consistency,
                                decay_certificate, epsilon_convergence,
                                homogeneous_consistency, lp_bound_check)


def _verdict(num, ok, detail):
    print(f"acceptance {num:02d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"acceptance {num:02d} failed: {detail}"


def test_01_homogeneous_scales_agree():
    # kinetic, meso, and ODE runs from matched uniform data
    # (beta 0.75, gamma 0.5, alpha 0, dt 1e-3, t in [0, 10])
    rep = homogeneous_consistency()
    dev = rep.metrics["max_rel_deviation"]
    ok = rep.passed and dev <= 1e-4 and rep.runtime_s < 10.0
    _verdict(1, ok,
             f"three-scale max rel deviation {dev:.3g} (gate 1e-4), "
             f"runtime {rep.runtime_s:.2f}s (gate 10s)")


def test_02_circle_closure_reference_values():
    # v0 = 1, n = 64, lam = 0.5, eta = xi = 1 -> D = 2, Gamma = 4 exactly
    t0 = time.perf_counter()
    grid = SpatialGrid.square(1, 1.0)
    vs = make_circle_velocity_set(64, 1.0)
    params = ParamFields.constant(grid, vs, 0.1, 0.75, 0.5, 0.5,
                                  eta=1.0, xi=1.0)
    closure = compute_closure(params, vs)
    elapsed = time.perf_counter() - t0
    dev_d = float(np.max(np.abs(closure.D - 2.0)))
    dev_g = float(np.max(np.abs(closure.Gamma - 4.0)))
    ok = dev_d <= 1e-12 and dev_g <= 1e-12 and elapsed < 1.0
    _verdict(2, ok,
             f"|D - 2| = {dev_d:.3g}, |Gamma - 4| = {dev_g:.3g} "
             f"(gate 1e-12), runtime {elapsed:.3f}s (gate 1s)")


def test_03_cell_problem_residuals():
    # generic solves on random positive rate fields: kernel residual and
    # agreement with the closed form kappa = vF/lam
    rep = closure_consistency(tol_match=1e-12, tol_residual=1e-10)
    res = rep.metrics["residual_max"]
    dev = max(rep.metrics["dev_kappa"], rep.metrics["dev_theta"],
              rep.metrics["dev_D"], rep.metrics["dev_Gamma"])
    ok = rep.passed and res <= 1e-10 and dev <= 1e-12
    _verdict(3, ok,
             f"kernel residual {res:.3g} (gate 1e-10), "
             f"generic vs closed form {dev:.3g} (gate 1e-12)")


def test_04_population_conserved_over_long_runs():
    n_steps = 10_000

    grid = SpatialGrid.square(4, 1.0)
    vs = make_circle_velocity_set(4, 1.0)
    params = ParamFields.constant(grid, vs, 0.1, 0.75, 0.5, 1.0,
                                  eta=0.5, xi=0.5)
    rho0 = np.empty((3, 4, 4))
    rho0[0] = 1.0
    rho0[1] = _gaussian_bump(grid, (0.5, 0.5), 0.2, 0.2)
    rho0[2] = 0.0
    dt = 0.05     # CFL bound at eps = 0.5 is ~0.119
    kin = run_kinetic(PhaseField.from_densities(rho0, vs),
                      KineticConfig(dt=dt, t_end=dt * n_steps, eps=0.5,
                                    output_every=1000, lp_orders=()),
                      params, vs, grid)
    mass = kin.totals.sum(axis=1)
    drift_kin = float(np.max(np.abs(mass - mass[0]))) / mass[0]

    grid1 = SpatialGrid.line(16, 1.0)
    coeff = MesoCoefficients.constant(grid1, (0.05, 0.05, 0.05), 0.5,
                                      0.1, 0.75, 0.5)
    rho1 = np.empty((3, 16, 1))
    rho1[0] = 1.0
    rho1[1] = np.where(grid1.x_centers[:, None] < 0.5, 0.2, 0.0)
    rho1[2] = 0.0
    mes = run_meso(MesoField(rho1),
                   MesoConfig(dt=1e-3, t_end=1e-3 * n_steps,
                              output_every=1000),
                   coeff, grid1)
    mass = mes.totals.sum(axis=1)
    drift_mes = float(np.max(np.abs(mass - mass[0]))) / mass[0]

    abm_params = ABMParams(nx=8, ny=8, p_transmit=0.2, p_recover=0.1,
                           p_wane=0.05, p_reorient=0.3)
    world = init_population(abm_params, (300, 100, 100), seed=7)
    res = run_abm(world, n_steps)
    exact = bool(np.all(res.counts.sum(axis=1) == 500))

    ok = drift_kin <= 1e-10 and drift_mes <= 1e-10 and exact
    _verdict(4, ok,
             f"mass drift over {n_steps} steps: kinetic {drift_kin:.3g}, "
             f"meso {drift_mes:.3g} (gate 1e-10), agent counts exact: {exact}")


def test_05_diffusion_limit_convergence_order():
    # eps in {0.4, 0.2, 0.1}, 64x64 grid, 16 velocities, t = 1
    rep = epsilon_convergence()
    order = rep.metrics["order_better"]
    mono = bool(rep.metrics["monotone_better"])
    ok = rep.passed and mono and order >= 0.9 and rep.runtime_s < 300.0
    _verdict(5, ok,
             f"errors strictly decreasing: {mono}, fitted order {order:.2f} "
             f"(gate 0.9), runtime {rep.runtime_s:.1f}s (gate 300s)")


def test_06_subcritical_infection_decays():
    # beta0 = 0.3 < gamma0 = 0.5: strict decay on both scales
    rep = decay_certificate(rate_min=0.19)
    rk = rep.metrics["tail_rate_kinetic"]
    rm = rep.metrics["tail_rate_meso"]
    mono = (rep.metrics["monotone_kinetic"] == 1.0
            and rep.metrics["monotone_meso"] == 1.0)
    ok = rep.passed and mono and min(rk, rm) >= 0.19
    _verdict(6, ok,
             f"strictly decreasing both scales: {mono}, tail rates "
             f"kinetic {rk:.4f} / meso {rm:.4f} (gate 0.19)")


def test_07_infection_norm_growth_envelope():
    # ||f_I(t)||_2 <= ||f_I(0)||_2 exp(max beta t) * 1.001 over t in [0, 5]
    rep = lp_bound_check()
    ratio = rep.metrics["max_ratio_I_p2"]
    ok = rep.passed and ratio <= 1.0
    _verdict(7, ok,
             f"worst I-envelope ratio (p=2, headroom 1.001) {ratio:.6f} "
             f"(gate 1.0)")


def test_08_zero_speed_class_stays_confined():
    # two-speed 1-D setting with v_I = 0: the infected density never leaves
    # its initial support, and D_j = v_j^2 / lam_j
    speeds = (1.0, 0.0, 0.5)
    lam = (1.0, 1.0, 1.0)
    conf = confinement_coefficients(speeds, lam, 0.5, 0.5)
    dev_d = float(np.max(np.abs(
        conf.D - np.array(speeds) ** 2 / np.array(lam))))

    grid = SpatialGrid.line(100, 1.0)
    coeff = MesoCoefficients.constant(grid, tuple(conf.D), conf.Gamma,
                                      0.0, 0.0, 0.0)
    rho0 = np.empty((3, 100, 1))
    rho0[0] = 1.0
    rho0[1] = np.where(grid.x_centers[:, None] < 0.5, 0.2, 0.0)
    rho0[2] = 0.0
    outside = grid.x_centers >= 0.5

    t_end = 0.05
    limit = diffusion_dt_limit(coeff, grid, 0.45)
    n = int(np.ceil(t_end / limit))
    res = run_meso(MesoField(rho0),
                   MesoConfig(dt=t_end / n, t_end=t_end,
                              output_every=max(1, n // 10),
                              record_densities=True),
                   coeff, grid)
    leak = max(float(np.max(np.abs(rho[1, outside, :])))
               for rho in res.densities)
    moved = float(np.max(np.abs(res.rho_final[0] - rho0[0])))

    ok = dev_d <= 1e-12 and leak <= 1e-14 and moved > 1e-3
    _verdict(8, ok,
             f"|D - v^2/lam| = {dev_d:.3g} (gate 1e-12), max rho_I outside "
             f"support {leak:.3g} (gate 1e-14) while S moved ({moved:.3g})")


def test_09_outbreak_spreads_from_seeded_block(tmp_path):
    # 50x50 lattice, 10000 S in a central 25x25 cloud with the 50 I seeded
    # in its central 5x5 block; p_transmit 0.75, p_recover 0.5, no waning,
    # p_reorient 0.5, 15 steps.  The infection front must travel outward.
    t0 = time.perf_counter()
    params = ABMParams(nx=50, ny=50, p_transmit=0.75, p_recover=0.5,
                       p_wane=0.0, p_reorient=0.5)
    record = (3, 6, 9, 12, 15)
    n_seeds = 32
    radii = np.empty((n_seeds, len(record)))
    monotone_r = True
    panel_grids = None
    for k in range(n_seeds):
        world = init_population(params, (10000, 50, 0), seed=k,
                                block_side=25, i_block_side=5)
        res = run_abm(world, 15, grid_steps=record)
        radii[k] = [mean_radius(res.grids[s][1]) for s in record]
        monotone_r = monotone_r and bool(
            np.all(np.diff(res.counts[:, 2]) >= 0))
        if k == 0:
            panel_grids = res.grids

    for step, occ in panel_grids.items():
        render_class_panels(str(tmp_path / f"outbreak_step{step:02d}"),
                            occ.astype(float))
    panels = sorted(p.name for p in tmp_path.glob("outbreak_*.ppm"))
    med = np.median(radii, axis=0)
    spread = bool(np.all(np.diff(med) > 0))
    elapsed = time.perf_counter() - t0

    ok = (spread and monotone_r and len(panels) == 15 and elapsed < 60.0)
    _verdict(9, ok,
             f"median I radius {np.round(med, 2).tolist()} strictly "
             f"increasing: {spread}, recovered counts monotone in all seeds: "
             f"{monotone_r}, {len(panels)} class panels, "
             f"runtime {elapsed:.1f}s (gate 60s)")


def test_10_contact_microprobabilities():
    # (a) 1e5 isolated S-I pairs, one step: transmission frequency 0.75
    n = 100_000
    params = ABMParams(nx=1000, ny=100, p_transmit=0.75, p_recover=0.0,
                       p_wane=0.0, p_reorient=0.0, n_dirs=1)
    cells = np.arange(n, dtype=np.int64)
    world = AgentWorld(
        params=params, seed=2024,
        cls=np.concatenate([np.zeros(n, np.int64), np.ones(n, np.int64)]),
        xs=np.tile(cells // 100, 2), ys=np.tile(cells % 100, 2),
        dirs=np.zeros(2 * n, np.int64))
    abm_step(world)
    freq = float((world.cls[:n] == 1).mean())

    # (b) 1e5 infectious agents, p_recover = 0.5: mean lifetime 2 steps
    params = ABMParams(nx=100, ny=100, p_transmit=0.0, p_recover=0.5,
                       p_wane=0.0, p_reorient=0.0, n_dirs=1)
    world = init_population(params, (0, n, 0), seed=2025)
    res = run_abm(world, 100)
    everyone_done = res.counts[-1, 1] == 0
    lifetime = float(res.counts[:-1, 1].sum()) / n

    ok = (abs(freq - 0.75) <= 0.005 and everyone_done
          and abs(lifetime - 2.0) <= 0.02)
    _verdict(10, ok,
             f"transmission frequency {freq:.4f} (gate 0.75 +- 0.005), "
             f"mean infectious lifetime {lifetime:.4f} steps "
             f"(gate 2.0 +- 0.02)")


def test_11_final_size_matches_the_fixed_point():
    # R0 = 1.5, s0 = 0.995; the run ends by early exit once the infection
    # is extinct, and S(inf) must solve s = s0 exp(-R0 (1 - s))
    s0, beta, gamma = 0.995, 0.75, 0.5
    res = run_sirs(np.array([s0, 1.0 - s0, 0.0]), 0.005, 200.0,
                   0.0, beta, gamma, output_every=200)
    s_end = float(res.y[-1, 0])

    s_star = s0
    for _ in range(200):
        s_star = s0 * np.exp(-(beta / gamma) * (1.0 - s_star))
    rel = abs(s_end - s_star) / s_star

    ok = rel <= 1e-4
    _verdict(11, ok,
             f"integrator s_inf {s_end:.6f} vs fixed point {s_star:.6f}, "
             f"rel error {rel:.3g} (gate 1e-4, stopped early: "
             f"{res.stopped_early})")
