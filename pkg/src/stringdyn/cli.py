"""Scenario runner: parse a config, build, evolve, write CSV + metadata.

Configuration files are flat key=value text with sections ([scenario],
[couplings], [time], [output]); `stringdyn presets` lists the built-in
scenarios.  Each member of a plaquette-coupling sweep writes
`<prefix>_J<value>.csv` with the header

    t,fidelity,overlap_other_strings,matter_occupation,energy,norm_error

at 12 significant digits, plus a `.meta.json` sidecar with the resolved
parameters, basis dimensions and wall time.  Exit codes: 2 config parse
error, 3 infeasible lattice or scenario, 4 size cap exceeded,
5 propagator non-convergence.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .dynamics import (
    PropagatorError,
    TimeGrid,
    basis_state,
    evolve_dense,
    evolve_krylov,
    measure,
)
from .gauge import (
    ChargeLayout,
    SectorBasis,
    SectorSizeError,
    U1_QLM,
    Z2,
    enumerate_sector,
)
from .lattice import (
    CYLINDER,
    HEXAGONAL,
    OPEN,
    SQUARE,
    LatticeError,
    LatticeSpec,
    build_lattice,
    chain_lattice,
)
from .models import Couplings, build_u1_qlm, build_u1_qlm_hex, build_z2
from .strings import (
    ManifoldSizeError,
    StringValidationError,
    all_shortest_paths,
    build_minimal_model,
    build_string_state,
    enumerate_minimal_strings,
    enumerate_resonant_manifold,
    export_manifold,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_CAP = 4
EXIT_PROPAGATOR = 5

MODELS = ("u1_square", "u1_hex", "z2_square", "z2_hex", "qlm1d", "minimal_model")
CSV_HEADER = "t,fidelity,overlap_other_strings,matter_occupation,energy,norm_error"

BOUNDARY_NOTE = (
    "cylinder_periodic_y: periodic along y, open along x; open boundaries "
    "treat missing links as frozen at the vacuum orientation"
)


class ConfigError(ValueError):
    pass


@dataclass
class Scenario:
    name: str
    model: str
    geometry: str
    extent_x: int
    extent_y: int
    boundary: str
    charge_from: tuple          # positive charge site (flux origin)
    charge_to: tuple            # negative charge site
    string_shape: str
    kappa: float = 1.0
    mass: float = 0.0
    efield: float = 0.0
    plaq_values: tuple = (0.0,)
    t_max: float = 10.0
    n_points: int = 201
    prefix: str = "run"
    string_path: tuple = ()
    description: str = ""

    def couplings(self, j: float) -> Couplings:
        return Couplings(self.kappa, self.mass, self.efield, j)


def _preset_list():
    presets = [
        Scenario(
            name="square-L-resonant",
            model="minimal_model", geometry=SQUARE,
            extent_x=7, extent_y=6, boundary=CYLINDER,
            charge_from=(1, 0), charge_to=(5, 3), string_shape="l_shaped",
            mass=12.0, efield=24.0, plaq_values=(0.0, 1.0, 2.0),
            t_max=10.0, n_points=201, prefix="square-L-resonant",
            description="resonant (2m=g) L-string on the 7x6 cylinder, plaquette sweep",
        ),
        Scenario(
            name="square-L-offres",
            model="minimal_model", geometry=SQUARE,
            extent_x=7, extent_y=6, boundary=CYLINDER,
            charge_from=(1, 0), charge_to=(5, 3), string_shape="l_shaped",
            mass=12.0, efield=8.0, plaq_values=(0.0, 0.5, 1.0, 2.0),
            t_max=10.0, n_points=201, prefix="square-L-offres",
            description="off-resonant L-string (m=12, g=8): strings-only manifold",
        ),
        Scenario(
            name="square-diag-resonant",
            model="minimal_model", geometry=SQUARE,
            extent_x=7, extent_y=6, boundary=CYLINDER,
            charge_from=(1, 0), charge_to=(5, 3), string_shape="diagonal",
            mass=12.0, efield=24.0, plaq_values=(0.0, 1.0, 2.0),
            t_max=10.0, n_points=201, prefix="square-diag-resonant",
            description="resonant staircase string on the 7x6 cylinder",
        ),
        Scenario(
            name="hex-S-resonant",
            model="minimal_model", geometry=HEXAGONAL,
            extent_x=6, extent_y=6, boundary=CYLINDER,
            charge_from=(1, 0), charge_to=(2, 2), string_shape="s_shaped_hex",
            mass=2.0, efield=4.0, plaq_values=(0.0, 1.0, 2.0),
            t_max=10.0, n_points=201, prefix="hex-S-resonant",
            description="resonant S-string on the hexagonal cylinder (3-string manifold)",
        ),
        Scenario(
            name="hex-1d-resonant",
            model="minimal_model", geometry=HEXAGONAL,
            extent_x=6, extent_y=6, boundary=CYLINDER,
            charge_from=(1, 0), charge_to=(4, 2), string_shape="straight",
            mass=2.0, efield=4.0, plaq_values=(0.0, 2.0),
            t_max=10.0, n_points=201, prefix="hex-1d-resonant",
            description="maximally stretched hex string: no flippable plaquettes",
        ),
        Scenario(
            name="qlm1d-resonant",
            model="qlm1d", geometry=SQUARE,
            extent_x=8, extent_y=2, boundary=OPEN,
            charge_from=(0, 0), charge_to=(7, 0), string_shape="straight",
            mass=12.0, efield=24.0, plaq_values=(0.0,),
            t_max=10.0, n_points=201, prefix="qlm1d-resonant",
            description="1+1D reference chain of 8 sites, full gauge sector",
        ),
        Scenario(
            name="z2-diag-2ndres",
            model="z2_square", geometry=SQUARE,
            extent_x=3, extent_y=3, boundary=OPEN,
            charge_from=(0, 0), charge_to=(2, 2), string_shape="diagonal",
            mass=3.0, efield=3.0, plaq_values=(0.0,),
            t_max=20.0, n_points=201, prefix="z2-diag-2ndres",
            description="Z2 staircase at the second-order resonance m=g, no plaquette term",
        ),
        Scenario(
            name="z2-diag-detuned",
            model="z2_square", geometry=SQUARE,
            extent_x=3, extent_y=3, boundary=OPEN,
            charge_from=(0, 0), charge_to=(2, 2), string_shape="diagonal",
            mass=6.0, efield=3.0, plaq_values=(0.0,),
            t_max=20.0, n_points=201, prefix="z2-diag-detuned",
            description="Z2 staircase detuned to m=2g: corner moves suppressed",
        ),
        Scenario(
            name="square-ed-small",
            model="u1_square", geometry=SQUARE,
            extent_x=4, extent_y=2, boundary=OPEN,
            charge_from=(1, 0), charge_to=(3, 1), string_shape="l_shaped",
            mass=12.0, efield=24.0, plaq_values=(0.0, 1.0),
            t_max=10.0, n_points=201, prefix="square-ed-small",
            description="full exact diagonalization on a 4x2 patch (cross-validation)",
        ),
    ]
    return {p.name: p for p in presets}


PRESETS = _preset_list()


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def _parse_pair(text, key):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"key '{key}' must be 'x,y', got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"key '{key}': {exc}") from None


def parse_config(path) -> Scenario:
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from None

    def get(section, key, default=None, required=False):
        if cp.has_option(section, key):
            return cp.get(section, key)
        if required:
            raise ConfigError(f"missing key '{key}' in section [{section}]")
        return default

    model = get("scenario", "model", required=True)
    if model not in MODELS:
        raise ConfigError(
            f"unknown model {model!r}; valid models: {', '.join(MODELS)}"
        )
    geometry = get("scenario", "geometry",
                   HEXAGONAL if model in ("u1_hex", "z2_hex") else SQUARE)
    if model in ("u1_hex", "z2_hex") and geometry != HEXAGONAL:
        raise ConfigError(f"model {model} requires geometry = hexagonal")
    if model in ("u1_square", "z2_square", "qlm1d") and geometry != SQUARE:
        raise ConfigError(f"model {model} requires geometry = square")

    def get_int(section, key, default=None, required=False, minimum=None):
        raw = get(section, key, default=None, required=required)
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"key '{key}' must be an integer, got {raw!r}") from None
        if minimum is not None and value < minimum:
            raise ConfigError(f"key '{key}' must be >= {minimum}, got {value}")
        return value

    def get_float(section, key, default=None, required=False):
        raw = get(section, key, default=None, required=required)
        if raw is None:
            return default
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"key '{key}' must be a number, got {raw!r}") from None
        if not np.isfinite(value):
            raise ConfigError(f"key '{key}' must be finite, got {value}")
        return value

    plaq_raw = get("couplings", "plaq", "0")
    try:
        plaq_values = tuple(float(p.strip()) for p in plaq_raw.split(","))
    except ValueError:
        raise ConfigError(f"key 'plaq' must be a comma list of numbers, got {plaq_raw!r}") from None

    path_raw = get("scenario", "string_path", "")
    string_path = ()
    if path_raw:
        try:
            string_path = tuple(
                _parse_pair(part, "string_path") for part in path_raw.split(";")
            )
        except ConfigError:
            raise
    shape = get("scenario", "string_shape", "explicit" if string_path else "l_shaped")

    scenario = Scenario(
        name=get("scenario", "name", os.path.splitext(os.path.basename(path))[0]),
        model=model,
        geometry=geometry,
        extent_x=get_int("scenario", "extent_x", required=True, minimum=2),
        extent_y=get_int("scenario", "extent_y", required=True, minimum=1),
        boundary=get("scenario", "boundary", CYLINDER),
        charge_from=_parse_pair(get("scenario", "charge_from", required=True), "charge_from"),
        charge_to=_parse_pair(get("scenario", "charge_to", required=True), "charge_to"),
        string_shape=shape,
        string_path=string_path,
        kappa=get_float("couplings", "kappa", 1.0),
        mass=get_float("couplings", "mass", 0.0),
        efield=get_float("couplings", "efield", 0.0),
        plaq_values=plaq_values,
        t_max=get_float("time", "t_max", 10.0),
        n_points=get_int("time", "n_points", 201, minimum=2),
        prefix=get("output", "prefix", get("scenario", "name", "run")),
    )
    if scenario.t_max <= 0:
        raise ConfigError(f"key 't_max' must be positive, got {scenario.t_max}")
    return scenario


# ---------------------------------------------------------------------------
# scenario resolution and execution
# ---------------------------------------------------------------------------

@dataclass
class Resolved:
    scenario: Scenario
    lattice: object = None
    layout: object = None
    seed: object = None
    strings: list = field(default_factory=list)
    manifold: object = None
    sector: object = None
    initial_bits: int = 0
    string_bits: list = field(default_factory=list)
    patch_sites: tuple = ()
    dims: dict = field(default_factory=dict)


def _cached_sector(lattice, layout, model, cap):
    cache_dir = os.environ.get("STRINGDYN_CACHE_DIR")
    if not cache_dir:
        return enumerate_sector(lattice, layout, model, cap=cap)
    os.makedirs(cache_dir, exist_ok=True)
    key = (
        f"{lattice.geometry}-{lattice.extent_x}x{lattice.extent_y}-{lattice.boundary}"
        f"-{model}-" + "-".join(f"{s}q{q}" for s, q in layout.static_charges)
    )
    path = os.path.join(cache_dir, f"sector-{key}.bin")
    if os.path.exists(path):
        return SectorBasis.load(path, lattice, layout, model)
    basis = enumerate_sector(lattice, layout, model, cap=cap)
    basis.save(path)
    return basis


def resolve_scenario(scenario: Scenario, sector_cap=20_000_000,
                     minimal_cap=20_000) -> Resolved:
    res = Resolved(scenario)
    if scenario.model == "qlm1d":
        length = scenario.extent_x
        if length % 2:
            raise LatticeError("qlm1d needs an even number of sites")
        lattice = chain_lattice(length)
        layout = ChargeLayout.string_pair(lattice, 0, length - 1)
        res.lattice, res.layout = lattice, layout
        seed = build_string_state(lattice, layout, "straight")
        res.seed, res.strings = seed, [seed]
        res.sector = _cached_sector(lattice, layout, U1_QLM, sector_cap)
        res.initial_bits = seed.bits
        res.string_bits = []
        res.patch_sites = tuple(range(lattice.n_sites))
        res.dims = {"sector_dimension": res.sector.dimension, "n_strings": 1}
        return res

    spec = LatticeSpec(scenario.geometry, scenario.extent_x, scenario.extent_y,
                       scenario.boundary)
    lattice = build_lattice(spec)
    res.lattice = lattice
    for name, (x, y) in (("charge_from", scenario.charge_from),
                         ("charge_to", scenario.charge_to)):
        if not lattice.has_site(x, y):
            raise LatticeError(f"{name} site ({x}, {y}) is outside the lattice")
    site_from = lattice.site_id(*scenario.charge_from)
    site_to = lattice.site_id(*scenario.charge_to)

    if scenario.model in ("z2_square", "z2_hex"):
        res.layout = ChargeLayout.neutral()
        paths = all_shortest_paths(lattice, site_from, site_to)
        shaped = _z2_path(lattice, scenario, site_from, site_to, paths)
        res.initial_bits = _z2_bits(lattice, shaped)
        res.string_bits = [
            _z2_bits(lattice, p) for p in paths if _z2_bits(lattice, p) != res.initial_bits
        ]
        res.sector = _cached_sector(lattice, res.layout, Z2, sector_cap)
        path_sites = {s for p in paths for s in p}
        xs = sorted({int(lattice.coords[s][0]) for s in path_sites})
        ys = sorted({int(lattice.coords[s][1]) for s in path_sites})
        res.patch_sites = tuple(
            lattice.site_id(x, y)
            for y in range(ys[0], ys[-1] + 1)
            for x in range(xs[0], xs[-1] + 1)
            if lattice.has_site(x, y)
        )
        res.dims = {
            "sector_dimension": res.sector.dimension,
            "n_strings": len(paths),
        }
        return res

    layout = ChargeLayout.string_pair(lattice, site_from, site_to)
    res.layout = layout
    seed = build_string_state(
        lattice, layout, scenario.string_shape,
        path=[lattice.site_id(*p) for p in scenario.string_path] or None,
    )
    res.seed = seed
    res.strings = enumerate_minimal_strings(lattice, layout, seed)
    res.initial_bits = seed.bits
    res.string_bits = [s.bits for s in res.strings if s.bits != seed.bits]
    res.dims = {"n_strings": len(res.strings)}

    if scenario.model == "minimal_model":
        res.manifold = enumerate_resonant_manifold(
            lattice, layout, res.strings, scenario.couplings(0.0), cap=minimal_cap
        )
        res.patch_sites = res.manifold.patch_sites
        res.dims.update(
            manifold_dimension=res.manifold.dimension,
            manifold_labels=res.manifold.n_labels,
            off_resonant=res.manifold.off_resonant,
        )
    else:
        res.sector = _cached_sector(lattice, layout, U1_QLM, sector_cap)
        res.patch_sites = _strings_patch(lattice, res.strings)
        res.dims.update(sector_dimension=res.sector.dimension)
    return res


def _strings_patch(lattice, strings):
    xs = sorted({int(lattice.coords[s][0]) for sp in strings for s in sp.sites})
    ys = sorted({int(lattice.coords[s][1]) for sp in strings for s in sp.sites})
    return tuple(
        lattice.site_id(x, y)
        for y in range(ys[0], ys[-1] + 1)
        for x in range(xs[0], xs[-1] + 1)
        if lattice.has_site(x, y)
    )


def _z2_path(lattice, scenario, site_from, site_to, shortest_paths):
    if scenario.string_shape == "explicit" and scenario.string_path:
        return [lattice.site_id(*p) for p in scenario.string_path]
    if lattice.geometry == SQUARE:
        from .strings import _square_steps

        x, y = scenario.charge_from
        steps = _square_steps(scenario.string_shape,
                              scenario.charge_to[0] - x, scenario.charge_to[1] - y)
        sites = [site_from]
        for ddx, ddy in steps:
            x += ddx
            y = (y + ddy) % lattice.extent_y
            if not lattice.has_site(x, y):
                raise LatticeError(f"string path leaves the lattice at ({x}, {y})")
            sites.append(lattice.site_id(x, y))
        return sites
    # hexagonal Z2: take the first shortest path (deterministic order)
    return list(shortest_paths[0])


def _z2_bits(lattice, sites):
    bits = 0
    for a, b in zip(sites[:-1], sites[1:]):
        link, _ = lattice.link_between(a, b)
        bits |= 1 << (lattice.n_sites + link)
    return bits


def _pick_propagator(choice, dim):
    if choice != "auto":
        return choice
    return "dense" if dim <= 600 else "krylov"


def run_member(scenario: Scenario, j: float, outdir: str, propagator: str,
               sector_cap: int, minimal_cap: int) -> dict:
    t_start = time.monotonic()
    res = resolve_scenario(scenario, sector_cap, minimal_cap)
    c = scenario.couplings(j)
    lattice = res.lattice

    if scenario.model == "minimal_model":
        manifold = res.manifold
        op = build_minimal_model(manifold, c)
        dim = op.dimension
        i0 = manifold.index[res.initial_bits]
        psi0 = basis_state(dim, i0)
        others = [basis_state(dim, manifold.index[b]) for b in res.string_bits]
        patch = manifold.patch_sites
    else:
        basis = res.sector
        if scenario.model in ("u1_square", "qlm1d"):
            op = build_u1_qlm(lattice, basis, c)
        elif scenario.model == "u1_hex":
            op = build_u1_qlm_hex(lattice, basis, c)
        else:
            op = build_z2(lattice, basis, c)
        dim = op.dimension
        psi0 = basis_state(dim, basis.index(res.initial_bits))
        others = [basis_state(dim, basis.index(b)) for b in res.string_bits]
        patch = res.patch_sites

    grid = TimeGrid(scenario.t_max, scenario.n_points)
    method = _pick_propagator(propagator, dim)
    if method == "dense":
        traj = evolve_dense(op, psi0, grid)
    else:
        traj = evolve_krylov(op, psi0, grid)
    series = measure(traj, psi0, others, patch)

    os.makedirs(outdir, exist_ok=True)
    jtxt = f"{j:g}"
    csv_path = os.path.join(outdir, f"{scenario.prefix}_J{jtxt}.csv")
    with open(csv_path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in series.rows():
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")

    meta = {
        "name": scenario.name,
        "model": scenario.model,
        "geometry": scenario.geometry,
        "lattice": {
            "extent_x": res.lattice.extent_x,
            "extent_y": res.lattice.extent_y,
            "boundary": res.lattice.boundary,
            "convention": BOUNDARY_NOTE,
        },
        "charges": {
            "positive": list(scenario.charge_from),
            "negative": list(scenario.charge_to),
        },
        "string_shape": scenario.string_shape,
        "couplings": {
            "kappa": scenario.kappa,
            "mass": scenario.mass,
            "efield": scenario.efield,
            "plaq": j,
        },
        "time": {"t_max": scenario.t_max, "n_points": scenario.n_points},
        "dimensions": res.dims,
        "propagator": method,
        "evolution": "minimal_model" if scenario.model == "minimal_model" else "full_ed",
        "code_version": __version__,
        "wall_time_s": round(time.monotonic() - t_start, 3),
        "csv": os.path.basename(csv_path),
    }
    meta_path = os.path.join(outdir, f"{scenario.prefix}_J{jtxt}.meta.json")
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"csv": csv_path, "meta": meta_path}


def run_scenario(scenario: Scenario, outdir: str, workers: int = 1,
                 propagator: str = "auto", sector_cap: int = 20_000_000,
                 minimal_cap: int = 20_000) -> list:
    members = list(scenario.plaq_values)
    if workers > 1 and len(members) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_member, scenario, j, outdir, propagator,
                            sector_cap, minimal_cap)
                for j in members
            ]
            return [f.result() for f in futures]
    return [
        run_member(scenario, j, outdir, propagator, sector_cap, minimal_cap)
        for j in members
    ]


# ---------------------------------------------------------------------------
# CLI verbs
# ---------------------------------------------------------------------------

def _load_scenario(args) -> Scenario:
    if args.preset:
        if args.preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {args.preset!r}; run 'stringdyn presets' for the list"
            )
        return PRESETS[args.preset]
    if not args.config:
        raise ConfigError("provide a config file or --preset NAME")
    return parse_config(args.config)


def cmd_run(args) -> int:
    scenario = _load_scenario(args)
    files = run_scenario(
        scenario, args.outdir, workers=args.workers, propagator=args.propagator,
        sector_cap=args.sector_cap, minimal_cap=args.minimal_cap,
    )
    for f in files:
        print(f["csv"])
    return EXIT_OK


def cmd_presets(_args) -> int:
    width = max(len(n) for n in PRESETS)
    for name in sorted(PRESETS):
        p = PRESETS[name]
        print(f"{name:<{width}}  {p.description}")
    return EXIT_OK


def cmd_validate(args) -> int:
    scenario = parse_config(args.config)
    res = resolve_scenario(scenario, args.sector_cap, args.minimal_cap)
    report = {
        "status": "ok",
        "name": scenario.name,
        "model": scenario.model,
        "lattice": f"{scenario.geometry} {scenario.extent_x}x{scenario.extent_y} "
                   f"{scenario.boundary}",
        "sweep_members": len(scenario.plaq_values),
        "dimensions": res.dims,
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_export_manifold(args) -> int:
    scenario = _load_scenario(args)
    if scenario.model != "minimal_model":
        raise ConfigError("export-manifold needs a minimal_model scenario")
    res = resolve_scenario(scenario, args.sector_cap, args.minimal_cap)
    export_manifold(res.manifold, args.out)
    print(args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stringdyn",
        description="string dynamics in 2+1D lattice gauge theories",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("config", nargs="?", help="scenario config file")
            p.add_argument("--preset", help="built-in scenario name")
        p.add_argument("--sector-cap", type=int, default=20_000_000,
                       help="maximum sector dimension")
        p.add_argument("--minimal-cap", type=int, default=20_000,
                       help="maximum minimal-model dimension")

    p_run = sub.add_parser("run", help="run a scenario and write CSV output")
    common(p_run)
    p_run.add_argument("--outdir", default="out", help="output directory")
    p_run.add_argument("--workers", type=int, default=1,
                       help="worker processes for coupling sweeps")
    p_run.add_argument("--propagator", choices=("auto", "dense", "krylov"),
                       default="auto")
    p_run.set_defaults(fn=cmd_run)

    p_presets = sub.add_parser("presets", help="list built-in scenarios")
    p_presets.set_defaults(fn=cmd_presets)

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config", help="scenario config file")
    common(p_val, config=False)
    p_val.set_defaults(fn=cmd_validate)

    p_exp = sub.add_parser("export-manifold",
                           help="dump the minimal-string manifold as text")
    common(p_exp)
    p_exp.add_argument("--out", required=True, help="output text file")
    p_exp.set_defaults(fn=cmd_export_manifold)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (LatticeError, StringValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SectorSizeError, ManifoldSizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except PropagatorError as exc:
        print(f"error: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_PROPAGATOR


if __name__ == "__main__":
    sys.exit(main())
