"""Command line interface.

Subcommands: kinetic, meso, sirs, abm, validate, closure.  Every one takes
--config (JSON document, schema in docs/FORMATS.md); --out overrides the
output directory and --seed the stream seed.  Exit codes: 0 on success,
1 when a validation check fails, 2 for configuration or usage errors.
"""

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .abm import ABMParams, init_population, run_abm
from .closure import compute_closure, confinement_coefficients
from .config import (ConfigError, build_grid, build_init_densities,
                     build_params, build_scales, build_velocity, parse_config,
                     validate_options)
from .grids import CLASSES, MesoField, PhaseField, SpatialGrid
from .io import ensure_dir, render_class_panels, render_ppm, write_grid_csv, \
    write_timeseries
from .kinetic import KineticConfig, run_kinetic
from .meso import MesoCoefficients, MesoConfig, diffusion_dt_limit, run_meso
from .sirs import basic_reproduction_number, run_sirs
from .validation import run_check


def _steps_for(t_end, dt_max):
    return max(1, int(np.ceil(t_end / dt_max * (1 - 1e-12))))


def _fill(value, grid):
    from .config import _fill_field
    return _fill_field(value, grid)


def _cmd_kinetic(cfg, out_dir, prefix):
    grid = build_grid(cfg.grid)
    vs = build_velocity(cfg.velocity)
    scales = build_scales(cfg.scales)
    params = build_params(cfg.params, grid, vs)
    rho0 = build_init_densities(cfg.init, grid)
    spec = cfg.kinetic

    if spec.dt is None:
        dt_max = spec.cfl * scales.epsilon * grid.h_min / vs.speed_max
        n = _steps_for(spec.t_end, dt_max)
        dt = spec.t_end / n
    else:
        dt = spec.dt
    run_cfg = KineticConfig(dt=dt, t_end=spec.t_end, eps=scales.epsilon,
                            cfl_target=min(1.0, spec.cfl + 1e-9),
                            splitting=spec.splitting,
                            output_every=spec.output_every)
    res = run_kinetic(PhaseField.from_densities(rho0, vs), run_cfg,
                      params, vs, grid)

    write_timeseries(
        os.path.join(out_dir, f"{prefix}_timeseries.csv"), res.times,
        [("S", res.totals[:, 0]), ("I", res.totals[:, 1]),
         ("R", res.totals[:, 2]), ("l2_rho_I", res.l2_rho[:, 1])])
    for j, name in enumerate(CLASSES):
        write_grid_csv(os.path.join(out_dir, f"{prefix}_rho_{name}.csv"),
                       res.rho_final[j])
    if cfg.output.ppm:
        render_ppm(os.path.join(out_dir, f"{prefix}_final.ppm"),
                   res.rho_final, cfg.output.ppm_normalization)
        render_class_panels(os.path.join(out_dir, f"{prefix}_final"),
                            res.rho_final, cfg.output.ppm_normalization)
    print(f"kinetic: {res.n_steps} steps, dt={dt:g}, eps={scales.epsilon:g}")
    print(f"kinetic: final totals S={res.totals[-1, 0]:.6g} "
          f"I={res.totals[-1, 1]:.6g} R={res.totals[-1, 2]:.6g} "
          f"clipped={res.clipped_total:.3g}")
    return 0


def _meso_coefficients(cfg, grid):
    params_spec = cfg.params
    spec = cfg.meso
    if spec.coefficients == "closure":
        vs = build_velocity(cfg.velocity)
        params = build_params(params_spec, grid, vs)
        closure = compute_closure(params, vs)
        return MesoCoefficients.from_closure(
            closure, grid, diffusion_reading=spec.diffusion_reading)
    # confinement: per-class two-speed coefficients on a 1-D grid
    eta = _fill(params_spec.eta, grid)
    xi = _fill(params_spec.xi, grid)
    conf = confinement_coefficients(spec.speeds, params_spec.lam, 0.0, 0.0)
    d = np.broadcast_to(conf.D[:, None, None], (3, grid.nx, grid.ny)).copy()
    gamma_drift = (eta + xi) * spec.speeds[0] ** 2 / params_spec.lam[0]
    return MesoCoefficients(
        D=d, Gamma=gamma_drift,
        alpha0=_fill(params_spec.alpha, grid),
        beta0=_fill(params_spec.beta, grid),
        gamma0=_fill(params_spec.gamma, grid),
    )


def _cmd_meso(cfg, out_dir, prefix):
    grid = build_grid(cfg.grid)
    coeff = _meso_coefficients(cfg, grid)
    rho0 = build_init_densities(cfg.init, grid)
    spec = cfg.meso

    if spec.dt is None:
        dt_max = diffusion_dt_limit(coeff, grid, spec.safety)
        if not np.isfinite(dt_max):
            dt_max = spec.t_end
        n = _steps_for(spec.t_end, dt_max)
        dt = spec.t_end / n
    else:
        dt = spec.dt
    run_cfg = MesoConfig(dt=dt, t_end=spec.t_end,
                         output_every=spec.output_every,
                         safety=min(1.0, spec.safety * 1.5))
    res = run_meso(MesoField(rho0), run_cfg, coeff, grid)

    write_timeseries(
        os.path.join(out_dir, f"{prefix}_timeseries.csv"), res.times,
        [("S", res.totals[:, 0]), ("I", res.totals[:, 1]),
         ("R", res.totals[:, 2]), ("l2_rho_I", res.l2_rho[:, 1])])
    for j, name in enumerate(CLASSES):
        write_grid_csv(os.path.join(out_dir, f"{prefix}_rho_{name}.csv"),
                       res.rho_final[j])
    if cfg.output.ppm:
        render_ppm(os.path.join(out_dir, f"{prefix}_final.ppm"),
                   res.rho_final, cfg.output.ppm_normalization)
    print(f"meso: {res.n_steps} steps, dt={dt:g}")
    print(f"meso: final totals S={res.totals[-1, 0]:.6g} "
          f"I={res.totals[-1, 1]:.6g} R={res.totals[-1, 2]:.6g} "
          f"clipped={res.clipped_total:.3g}")
    return 0


def _cmd_sirs(cfg, out_dir, prefix):
    spec = cfg.sirs
    rates = cfg.params or None
    alpha = rates.alpha if rates and np.isscalar(rates.alpha) else 0.0
    beta = rates.beta if rates and np.isscalar(rates.beta) else 0.0
    gamma = rates.gamma if rates and np.isscalar(rates.gamma) else 0.0
    res = run_sirs(np.array(spec.y0), spec.dt, spec.t_end, alpha, beta, gamma,
                   output_every=spec.output_every)
    write_timeseries(
        os.path.join(out_dir, f"{prefix}_timeseries.csv"), res.times,
        [("S", res.y[:, 0]), ("I", res.y[:, 1]), ("R", res.y[:, 2])])
    if gamma > 0:
        print(f"sirs: R0 = {basic_reproduction_number(beta, gamma):.6g}")
    print(f"sirs: final S={res.y[-1, 0]:.6g} I={res.y[-1, 1]:.6g} "
          f"R={res.y[-1, 2]:.6g}"
          + (" (stopped early: disease extinct)" if res.stopped_early else ""))
    return 0


def _cmd_abm(cfg, out_dir, prefix):
    spec = cfg.abm
    params = ABMParams(nx=spec.nx, ny=spec.ny, p_transmit=spec.p_transmit,
                       p_recover=spec.p_recover, p_wane=spec.p_wane,
                       p_reorient=spec.p_reorient, n_dirs=spec.n_dirs)
    world = init_population(params, spec.counts, cfg.seed,
                            block_side=spec.block_side,
                            i_block_side=spec.i_block_side)
    res = run_abm(world, spec.n_steps, grid_steps=spec.grid_steps)
    steps = np.arange(res.counts.shape[0], dtype=float)
    write_timeseries(
        os.path.join(out_dir, f"{prefix}_counts.csv"), steps,
        [("S", res.counts[:, 0]), ("I", res.counts[:, 1]),
         ("R", res.counts[:, 2])])
    if cfg.output.ppm and res.grids:
        norm = cfg.output.ppm_normalization
        if norm is None:
            norm = max(float(g.max()) for g in res.grids.values())
        for step, occupancy in sorted(res.grids.items()):
            base = os.path.join(out_dir, f"{prefix}_step{step:03d}")
            render_ppm(base + ".ppm", occupancy.astype(float), norm)
            render_class_panels(base, occupancy.astype(float), norm)
    print(f"abm: {spec.n_steps} steps, {res.n_agents} agents, seed={cfg.seed}")
    print(f"abm: final counts S={res.counts[-1, 0]} I={res.counts[-1, 1]} "
          f"R={res.counts[-1, 2]}")
    return 0


def _cmd_validate(cfg, out_dir, prefix):
    report = run_check(cfg.validate.check, validate_options(cfg.validate))
    summary = report.summary_lines()
    for line in summary:
        print(line)
    base = os.path.join(out_dir, prefix)
    with open(base + "_report.json", "w") as fh:
        fh.write(report.to_json())
    with open(base + "_summary.txt", "w") as fh:
        fh.write("\n".join(summary) + "\n")
    from .io import _fmt
    names = sorted(report.metrics)
    with open(base + "_metrics.csv", "w") as fh:
        fh.write("metric,value\n")
        for k in names:
            fh.write(f"{k},{_fmt(report.metrics[k])}\n")
    if report.rows and all(
            isinstance(r, dict) and all(np.isscalar(v) for v in r.values())
            for r in report.rows):
        cols = sorted(report.rows[0])
        with open(base + "_rows.csv", "w") as fh:
            fh.write(",".join(cols) + "\n")
            for row in report.rows:
                fh.write(",".join(_fmt(row[c]) for c in cols) + "\n")
    print(f"report written to {base}_report.json")
    return 0 if report.passed else 1


def _cmd_closure(cfg, out_dir, prefix):
    grid = build_grid(cfg.grid) if cfg.grid else SpatialGrid.square(1, 1.0)
    vs = build_velocity(cfg.velocity)
    params = build_params(cfg.params, grid, vs)
    closure = compute_closure(params, vs)
    means = closure.spatial_means()
    for j, name in enumerate(CLASSES):
        print(f"D_{name} = {means['D'][j]:.12g}")
    print(f"Gamma = {means['Gamma']:.12g}")
    print(f"alpha0 = {means['alpha']:.12g}")
    print(f"beta0 = {means['beta']:.12g}")
    print(f"gamma0 = {means['gamma']:.12g}")
    print(f"per-axis D_S = {means['D'][0] / grid.dim:.12g} (dim {grid.dim})")
    return 0


_COMMANDS = {
    "kinetic": _cmd_kinetic,
    "meso": _cmd_meso,
    "sirs": _cmd_sirs,
    "abm": _cmd_abm,
    "validate": _cmd_validate,
    "closure": _cmd_closure,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="kinsirs",
        description="Multiscale kinetic SIRS simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--seed", type=int, default=None, help="seed override")
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else 0

    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        return 2

    missing = _section_gaps(cfg, args.command)
    if missing:
        for m in missing:
            print(f"config: {m}", file=sys.stderr)
        return 2

    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    out_dir = args.out or cfg.output.dir
    ensure_dir(out_dir)
    prefix = cfg.output.prefix or cfg.scenario

    try:
        return _COMMANDS[args.command](cfg, out_dir, prefix)
    except (ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def _section_gaps(cfg, command):
    """Sections the chosen subcommand needs but the config lacks."""
    needs = {
        "kinetic": ("grid", "velocity", "params", "init", "kinetic"),
        "meso": ("grid", "params", "init", "meso"),
        "sirs": ("sirs", "params"),
        "abm": ("abm",),
        "validate": ("validate",),
        "closure": ("velocity", "params"),
    }[command]
    missing = [f"section '{s}' is required by the {command} subcommand"
               for s in needs if getattr(cfg, s) is None]
    if command == "meso" and cfg.meso is not None \
            and cfg.meso.coefficients == "closure" and cfg.velocity is None:
        missing.append("section 'velocity' is required for closure-based meso runs")
    return missing


if __name__ == "__main__":
    sys.exit(main())
