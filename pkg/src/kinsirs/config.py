"""JSON run configuration: schema, validation, and object builders.

`parse_config` validates the whole document before giving up: every
violation is collected with its JSON path and reported in one ConfigError.
`serialize_config` inverts `parse_config` (round-trip equality on the
dataclass tree).  The schema is documented in docs/FORMATS.md.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .grids import (CLASSES, ParamFields, ScaleParams, SpatialGrid,
                    make_circle_velocity_set, make_two_speed_set)

SCALES = ("kinetic", "meso", "sirs", "abm", "compare", "validate", "closure")


class ConfigError(ValueError):
    """Carries every violation found in a config document."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n" + "\n".join(
            f"  {path}: {msg}" for path, msg in self.violations))


@dataclass(frozen=True)
class RegionSpec:
    rect: tuple          # (x0, x1, y0, y1) in domain coordinates
    value: float


@dataclass(frozen=True)
class FieldSpec:
    base: float
    regions: tuple = ()


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int = 1
    lx: float = 1.0
    ly: float = 1.0


@dataclass(frozen=True)
class VelocitySpec:
    kind: str            # 'circle' | 'two_speed'
    n: int = 16
    v0: float = 1.0
    v_plus: float = 1.0


@dataclass(frozen=True)
class ScaleSpec:
    epsilon: float = None
    t0: float = 1.0
    x0: float = 1.0
    v0: float = 1.0


@dataclass(frozen=True)
class ParamSpec:
    alpha: object = 0.0          # float or FieldSpec
    beta: object = 0.0
    gamma: object = 0.0
    lam: tuple = (1.0, 1.0, 1.0)
    eta: object = 0.0
    xi: object = 0.0


@dataclass(frozen=True)
class InitSpec:
    kind: str                    # 'uniform' | 'gaussian_bump' | 'piecewise_x'
    values: tuple = (1.0, 0.0, 0.0)
    bump_class: str = "I"
    amplitude: float = 0.0
    center: tuple = (0.5, 0.5)
    sigma: float = 0.1
    edge: float = 0.5
    left: tuple = (0.0, 0.0, 0.0)
    right: tuple = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class KineticSpec:
    t_end: float
    dt: float = None             # None -> from the CFL bound
    cfl: float = 0.95
    output_every: int = 1
    splitting: str = "strang"


@dataclass(frozen=True)
class MesoSpec:
    t_end: float
    dt: float = None             # None -> from the diffusion limit
    output_every: int = 1
    diffusion_reading: str = "per_dim"
    safety: float = 0.45
    coefficients: str = "closure"        # or 'confinement'
    speeds: tuple = (1.0, 1.0, 1.0)      # per-class, confinement only


@dataclass(frozen=True)
class SirsSpec:
    t_end: float
    dt: float = 1e-3
    output_every: int = 1
    y0: tuple = (0.99, 0.01, 0.0)


@dataclass(frozen=True)
class AbmSpec:
    nx: int
    ny: int
    counts: tuple
    p_transmit: float
    p_recover: float
    p_wane: float = 0.0
    p_reorient: float = 0.0
    n_dirs: int = 8
    block_side: int = None
    i_block_side: int = None
    n_steps: int = 1
    grid_steps: tuple = ()


@dataclass(frozen=True)
class ValidateSpec:
    check: str
    options: tuple = ()          # sorted (key, json-encoded value) pairs


@dataclass(frozen=True)
class OutputSpec:
    dir: str = "out"
    prefix: str = None
    ppm: bool = True
    ppm_normalization: float = None


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "run"
    scale: str = "kinetic"
    seed: int = 0
    grid: GridSpec = None
    velocity: VelocitySpec = None
    scales: ScaleSpec = None
    params: ParamSpec = None
    init: InitSpec = None
    kinetic: KineticSpec = None
    meso: MesoSpec = None
    sirs: SirsSpec = None
    abm: AbmSpec = None
    validate: ValidateSpec = None
    output: OutputSpec = OutputSpec()


class _Checker:
    def __init__(self):
        self.violations = []

    def err(self, path, msg):
        self.violations.append((path, msg))

    def known_keys(self, d, path, allowed):
        for k in d:
            if k not in allowed:
                self.err(f"{path}.{k}", "unknown key")

    def get(self, d, path, key, types, required=False, default=None,
            minimum=None, maximum=None, choices=None):
        if key not in d or d[key] is None:
            if required:
                self.err(f"{path}.{key}", "missing required value")
            return default
        v = d[key]
        if types is float and isinstance(v, int) and not isinstance(v, bool):
            v = float(v)
        if not isinstance(v, types) or isinstance(v, bool) and types is not bool:
            self.err(f"{path}.{key}", f"expected {getattr(types, '__name__', types)}")
            return default
        if minimum is not None and v < minimum:
            self.err(f"{path}.{key}", f"must be >= {minimum}")
            return default
        if maximum is not None and v > maximum:
            self.err(f"{path}.{key}", f"must be <= {maximum}")
            return default
        if choices is not None and v not in choices:
            self.err(f"{path}.{key}", f"must be one of {sorted(choices)}")
            return default
        return v


def _class_triple(ck, d, path, key, default=None, minimum=None, required=False):
    """A per-class value: scalar or {'S':..,'I':..,'R':..} to an (S,I,R) tuple."""
    if key not in d or d[key] is None:
        if required:
            ck.err(f"{path}.{key}", "missing required value")
        return default
    v = d[key]
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        if minimum is not None and v < minimum:
            ck.err(f"{path}.{key}", f"must be >= {minimum}")
            return default
        return (float(v),) * 3
    if isinstance(v, dict):
        ck.known_keys(v, f"{path}.{key}", set(CLASSES))
        out = []
        for c in CLASSES:
            out.append(ck.get(v, f"{path}.{key}", c, float, required=True,
                              default=0.0, minimum=minimum))
        return tuple(out)
    ck.err(f"{path}.{key}", "expected a number or an S/I/R table")
    return default


def _rate_field(ck, d, path, key, default=0.0):
    """A non-negative rate: scalar or {'base':..,'regions':[{'rect','value'}]}."""
    if key not in d or d[key] is None:
        return float(default)
    v = d[key]
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        if v < 0:
            ck.err(f"{path}.{key}", "must be >= 0")
            return float(default)
        return float(v)
    if isinstance(v, dict):
        ck.known_keys(v, f"{path}.{key}", {"base", "regions"})
        base = ck.get(v, f"{path}.{key}", "base", float, required=True,
                      default=0.0, minimum=0.0)
        regions = []
        for i, reg in enumerate(v.get("regions") or []):
            rpath = f"{path}.{key}.regions[{i}]"
            if not isinstance(reg, dict):
                ck.err(rpath, "expected an object")
                continue
            ck.known_keys(reg, rpath, {"rect", "value"})
            rect = reg.get("rect")
            if (not isinstance(rect, list) or len(rect) != 4
                    or not all(isinstance(r, (int, float)) and not isinstance(r, bool)
                               for r in rect)):
                ck.err(f"{rpath}.rect", "expected [x0, x1, y0, y1]")
                continue
            if rect[0] >= rect[1] or rect[2] >= rect[3]:
                ck.err(f"{rpath}.rect", "rectangle must have positive extent")
                continue
            value = ck.get(reg, rpath, "value", float, required=True,
                           default=0.0, minimum=0.0)
            regions.append(RegionSpec(rect=tuple(float(r) for r in rect),
                                      value=value))
        return FieldSpec(base=base, regions=tuple(regions))
    ck.err(f"{path}.{key}", "expected a number or a base/regions field")
    return float(default)


def _parse_grid(ck, d):
    ck.known_keys(d, "grid", {"nx", "ny", "lx", "ly"})
    return GridSpec(
        nx=ck.get(d, "grid", "nx", int, required=True, default=1, minimum=1),
        ny=ck.get(d, "grid", "ny", int, default=1, minimum=1),
        lx=ck.get(d, "grid", "lx", float, default=1.0, minimum=1e-300),
        ly=ck.get(d, "grid", "ly", float, default=1.0, minimum=1e-300),
    )


def _parse_velocity(ck, d):
    ck.known_keys(d, "velocity", {"kind", "n", "v0", "v_plus"})
    kind = ck.get(d, "velocity", "kind", str, required=True, default="circle",
                  choices={"circle", "two_speed"})
    spec = VelocitySpec(
        kind=kind,
        n=ck.get(d, "velocity", "n", int, default=16, minimum=4),
        v0=ck.get(d, "velocity", "v0", float, default=1.0, minimum=1e-300),
        v_plus=ck.get(d, "velocity", "v_plus", float, default=1.0, minimum=1e-300),
    )
    if kind == "circle" and spec.n % 4 != 0:
        ck.err("velocity.n", "circle sets need a multiple of 4")
    return spec


def _parse_scales(ck, d):
    ck.known_keys(d, "scales", {"epsilon", "t0", "x0", "v0"})
    return ScaleSpec(
        epsilon=ck.get(d, "scales", "epsilon", float, minimum=1e-300),
        t0=ck.get(d, "scales", "t0", float, default=1.0, minimum=1e-300),
        x0=ck.get(d, "scales", "x0", float, default=1.0, minimum=1e-300),
        v0=ck.get(d, "scales", "v0", float, default=1.0, minimum=1e-300),
    )


def _parse_params(ck, d):
    ck.known_keys(d, "params", {"alpha", "beta", "gamma", "lambda", "eta", "xi"})
    return ParamSpec(
        alpha=_rate_field(ck, d, "params", "alpha"),
        beta=_rate_field(ck, d, "params", "beta"),
        gamma=_rate_field(ck, d, "params", "gamma"),
        lam=_class_triple(ck, d, "params", "lambda", default=(1.0,) * 3,
                          minimum=1e-300),
        eta=_rate_field(ck, d, "params", "eta"),
        xi=_rate_field(ck, d, "params", "xi"),
    )


def _parse_init(ck, d):
    ck.known_keys(d, "init", {"kind", "values", "bump_class", "amplitude",
                              "center", "sigma", "edge", "left", "right"})
    kind = ck.get(d, "init", "kind", str, required=True, default="uniform",
                  choices={"uniform", "gaussian_bump", "piecewise_x"})
    center = d.get("center", [0.5, 0.5])
    if (not isinstance(center, list) or len(center) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool)
                       for c in center)):
        ck.err("init.center", "expected [x, y]")
        center = [0.5, 0.5]
    return InitSpec(
        kind=kind,
        values=_class_triple(ck, d, "init", "values",
                             default=(1.0, 0.0, 0.0), minimum=0.0),
        bump_class=ck.get(d, "init", "bump_class", str, default="I",
                          choices=set(CLASSES)),
        amplitude=ck.get(d, "init", "amplitude", float, default=0.0, minimum=0.0),
        center=tuple(float(c) for c in center),
        sigma=ck.get(d, "init", "sigma", float, default=0.1, minimum=1e-300),
        edge=ck.get(d, "init", "edge", float, default=0.5),
        left=_class_triple(ck, d, "init", "left", default=(0.0,) * 3, minimum=0.0),
        right=_class_triple(ck, d, "init", "right", default=(0.0,) * 3, minimum=0.0),
    )


def _parse_kinetic(ck, d):
    ck.known_keys(d, "kinetic", {"t_end", "dt", "cfl", "output_every", "splitting"})
    return KineticSpec(
        t_end=ck.get(d, "kinetic", "t_end", float, required=True, default=1.0,
                     minimum=0.0),
        dt=ck.get(d, "kinetic", "dt", float, minimum=1e-300),
        cfl=ck.get(d, "kinetic", "cfl", float, default=0.95, minimum=1e-6,
                   maximum=1.0),
        output_every=ck.get(d, "kinetic", "output_every", int, default=1, minimum=1),
        splitting=ck.get(d, "kinetic", "splitting", str, default="strang",
                         choices={"strang", "lie"}),
    )


def _parse_meso(ck, d):
    ck.known_keys(d, "meso", {"t_end", "dt", "output_every", "diffusion_reading",
                              "safety", "coefficients", "speeds"})
    return MesoSpec(
        t_end=ck.get(d, "meso", "t_end", float, required=True, default=1.0,
                     minimum=0.0),
        dt=ck.get(d, "meso", "dt", float, minimum=1e-300),
        output_every=ck.get(d, "meso", "output_every", int, default=1, minimum=1),
        diffusion_reading=ck.get(d, "meso", "diffusion_reading", str,
                                 default="per_dim",
                                 choices={"per_dim", "scalar"}),
        safety=ck.get(d, "meso", "safety", float, default=0.45, minimum=1e-6,
                      maximum=1.0),
        coefficients=ck.get(d, "meso", "coefficients", str, default="closure",
                            choices={"closure", "confinement"}),
        speeds=_class_triple(ck, d, "meso", "speeds", default=(1.0,) * 3,
                             minimum=0.0),
    )


def _parse_sirs(ck, d):
    ck.known_keys(d, "sirs", {"t_end", "dt", "output_every", "y0"})
    return SirsSpec(
        t_end=ck.get(d, "sirs", "t_end", float, required=True, default=1.0,
                     minimum=0.0),
        dt=ck.get(d, "sirs", "dt", float, default=1e-3, minimum=1e-300),
        output_every=ck.get(d, "sirs", "output_every", int, default=1, minimum=1),
        y0=_class_triple(ck, d, "sirs", "y0", default=(0.99, 0.01, 0.0),
                         minimum=0.0, required=True),
    )


def _parse_abm(ck, d):
    ck.known_keys(d, "abm", {"nx", "ny", "counts", "p_transmit", "p_recover",
                             "p_wane", "p_reorient", "n_dirs", "block_side",
                             "i_block_side", "n_steps", "grid_steps"})
    counts = d.get("counts")
    triple = (0, 0, 0)
    if not isinstance(counts, dict):
        ck.err("abm.counts", "expected an S/I/R table of agent counts")
    else:
        ck.known_keys(counts, "abm.counts", set(CLASSES))
        triple = tuple(
            ck.get(counts, "abm.counts", c, int, required=True, default=0,
                   minimum=0)
            for c in CLASSES)
    grid_steps = d.get("grid_steps", [])
    if (not isinstance(grid_steps, list)
            or not all(isinstance(s, int) and not isinstance(s, bool) and s >= 0
                       for s in grid_steps)):
        ck.err("abm.grid_steps", "expected a list of non-negative step numbers")
        grid_steps = []
    return AbmSpec(
        nx=ck.get(d, "abm", "nx", int, required=True, default=1, minimum=1),
        ny=ck.get(d, "abm", "ny", int, required=True, default=1, minimum=1),
        counts=triple,
        p_transmit=ck.get(d, "abm", "p_transmit", float, required=True,
                          default=0.0, minimum=0.0, maximum=1.0),
        p_recover=ck.get(d, "abm", "p_recover", float, required=True,
                         default=0.0, minimum=0.0, maximum=1.0),
        p_wane=ck.get(d, "abm", "p_wane", float, default=0.0, minimum=0.0,
                      maximum=1.0),
        p_reorient=ck.get(d, "abm", "p_reorient", float, default=0.0,
                          minimum=0.0, maximum=1.0),
        n_dirs=ck.get(d, "abm", "n_dirs", int, default=8, choices={1, 4, 8}),
        block_side=ck.get(d, "abm", "block_side", int, minimum=1),
        i_block_side=ck.get(d, "abm", "i_block_side", int, minimum=1),
        n_steps=ck.get(d, "abm", "n_steps", int, default=1, minimum=0),
        grid_steps=tuple(grid_steps),
    )


def _parse_validate(ck, d):
    from .validation import available_checks
    ck.known_keys(d, "validate", {"check", "scenario", "tol", "rate_min",
                                  "se_factor"})
    check = ck.get(d, "validate", "check", str, required=True, default="all",
                   choices=set(available_checks()) | {"all"})
    options = []
    for key in ("tol", "rate_min", "se_factor"):
        v = ck.get(d, "validate", key, float, minimum=0.0)
        if v is not None:
            options.append((key, json.dumps(v)))
    scen = d.get("scenario")
    if scen is not None:
        if not isinstance(scen, dict):
            ck.err("validate.scenario", "expected an object of overrides")
        else:
            options.append(("scenario", json.dumps(scen, sort_keys=True)))
    return ValidateSpec(check=check, options=tuple(sorted(options)))


def _parse_output(ck, d):
    ck.known_keys(d, "output", {"dir", "prefix", "ppm", "ppm_normalization"})
    return OutputSpec(
        dir=ck.get(d, "output", "dir", str, default="out"),
        prefix=ck.get(d, "output", "prefix", str),
        ppm=ck.get(d, "output", "ppm", bool, default=True),
        ppm_normalization=ck.get(d, "output", "ppm_normalization", float,
                                 minimum=1e-300),
    )


_SECTIONS = {
    "grid": _parse_grid,
    "velocity": _parse_velocity,
    "scales": _parse_scales,
    "params": _parse_params,
    "init": _parse_init,
    "kinetic": _parse_kinetic,
    "meso": _parse_meso,
    "sirs": _parse_sirs,
    "abm": _parse_abm,
    "validate": _parse_validate,
    "output": _parse_output,
}

_REQUIRED_BY_SCALE = {
    "kinetic": ("grid", "velocity", "scales", "params", "init", "kinetic"),
    "meso": ("grid", "params", "init", "meso"),
    "sirs": ("sirs", "params"),
    "abm": ("abm",),
    "compare": (),
    "validate": ("validate",),
    "closure": ("velocity", "params"),
}


def parse_config(text):
    """Parse and validate a JSON config document.

    Raises ConfigError listing every violation (path and message); never
    stops at the first problem.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([("$", f"not valid JSON: {e}")]) from None
    if not isinstance(doc, dict):
        raise ConfigError([("$", "top level must be an object")])

    ck = _Checker()
    ck.known_keys(doc, "$", {"scenario", "scale", "seed"} | set(_SECTIONS))
    scenario = ck.get(doc, "$", "scenario", str, default="run")
    scale = ck.get(doc, "$", "scale", str, default="kinetic", choices=set(SCALES))
    seed = ck.get(doc, "$", "seed", int, default=0, minimum=0)

    parsed = {}
    for name, parser in _SECTIONS.items():
        section = doc.get(name)
        if section is None:
            continue
        if not isinstance(section, dict):
            ck.err(name, "expected an object")
            continue
        parsed[name] = parser(ck, section)

    for needed in _REQUIRED_BY_SCALE.get(scale, ()):
        if needed not in parsed:
            ck.err(needed, f"section required for scale '{scale}'")
    if scale == "meso" and parsed.get("meso") is not None:
        if parsed["meso"].coefficients == "closure" and "velocity" not in parsed:
            ck.err("velocity", "section required for closure-based meso runs")

    if ck.violations:
        raise ConfigError(ck.violations)

    return RunConfig(
        scenario=scenario, scale=scale, seed=seed,
        output=parsed.get("output", OutputSpec()),
        **{k: parsed.get(k) for k in _SECTIONS if k != "output"},
    )


def _strip_none(obj):
    if isinstance(obj, dict):
        return {k: _strip_none(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, (list, tuple)):
        return [_strip_none(v) for v in obj]
    return obj


def serialize_config(cfg):
    """Canonical JSON for a RunConfig; parse_config inverts it."""
    doc = {"scenario": cfg.scenario, "scale": cfg.scale, "seed": cfg.seed}
    for name in _SECTIONS:
        spec = getattr(cfg, name)
        if spec is None:
            continue
        d = asdict(spec)
        if name == "params":
            d["lambda"] = {c: v for c, v in zip(CLASSES, d.pop("lam"))}
            for k in ("alpha", "beta", "gamma", "eta", "xi"):
                if isinstance(d[k], dict):
                    d[k]["regions"] = [
                        {"rect": list(r["rect"]), "value": r["value"]}
                        for r in d[k]["regions"]]
        elif name in ("init", "sirs", "meso"):
            for k in ("values", "left", "right", "y0", "speeds"):
                if k in d and isinstance(d[k], tuple):
                    d[k] = {c: v for c, v in zip(CLASSES, d[k])}
        if name == "abm":
            d["counts"] = {c: v for c, v in zip(CLASSES, d["counts"])}
            d["grid_steps"] = list(d["grid_steps"])
        if name == "validate":
            d = {"check": d["check"]}
            for key, blob in spec.options:
                d[key] = json.loads(blob)
        if name == "init":
            d["center"] = list(d["center"])
        doc[name] = _strip_none(d)
    return json.dumps(doc, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# builders from specs to simulation objects


def build_grid(spec):
    dim = 1 if spec.ny == 1 else 2
    ly = 1.0 if dim == 1 else spec.ly
    return SpatialGrid(nx=spec.nx, ny=spec.ny, lx=spec.lx, ly=ly, dim=dim)


def build_velocity(spec):
    if spec.kind == "circle":
        return make_circle_velocity_set(spec.n, spec.v0)
    return make_two_speed_set(spec.v_plus)


def build_scales(spec):
    if spec is None:
        return ScaleParams.from_epsilon(1.0)
    if spec.epsilon is not None:
        return ScaleParams(epsilon=spec.epsilon, t0=spec.t0, x0=spec.x0, v0=spec.v0)
    return ScaleParams.from_scales(spec.t0, spec.x0, spec.v0)


def _fill_field(value, grid):
    out = np.empty((grid.nx, grid.ny))
    if isinstance(value, FieldSpec):
        out[:] = value.base
        x = grid.x_centers[:, None]
        y = grid.y_centers[None, :]
        for reg in value.regions:
            x0, x1, y0, y1 = reg.rect
            inside = (x >= x0) & (x < x1) & (y >= y0) & (y < y1)
            out[inside] = reg.value
    else:
        out[:] = value
    return out


def build_params(spec, grid, vs):
    nv = vs.nv
    lam = np.empty((3, grid.nx, grid.ny))
    for j in range(3):
        lam[j] = spec.lam[j]
    return ParamFields(
        alpha=np.repeat(_fill_field(spec.alpha, grid)[..., None], nv, axis=-1),
        beta=np.repeat(_fill_field(spec.beta, grid)[..., None], nv, axis=-1),
        gamma=np.repeat(_fill_field(spec.gamma, grid)[..., None], nv, axis=-1),
        lam=lam,
        eta=_fill_field(spec.eta, grid),
        xi=_fill_field(spec.xi, grid),
    )


def build_init_densities(spec, grid):
    """(3, nx, ny) class densities from an InitSpec."""
    rho = np.empty((3, grid.nx, grid.ny))
    if spec.kind == "uniform":
        for j in range(3):
            rho[j] = spec.values[j]
    elif spec.kind == "gaussian_bump":
        for j in range(3):
            rho[j] = spec.values[j]
        x = grid.x_centers[:, None]
        y = grid.y_centers[None, :]
        r2 = (x - spec.center[0]) ** 2
        if grid.dim == 2:
            r2 = r2 + (y - spec.center[1]) ** 2
        j = CLASSES.index(spec.bump_class)
        rho[j] += spec.amplitude * np.exp(-r2 / (2.0 * spec.sigma ** 2))
    elif spec.kind == "piecewise_x":
        left = grid.x_centers < spec.edge
        for j in range(3):
            rho[j] = np.where(left[:, None], spec.left[j], spec.right[j])
    else:
        raise ValueError(f"unknown init kind {spec.kind!r}")
    return rho


def validate_options(spec):
    """ValidateSpec back to the plain dict validation.run_check expects."""
    return {key: json.loads(blob) for key, blob in spec.options}
