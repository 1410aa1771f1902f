"""Batch front-end: scenario files in, spectrum tables and reports out.

A scenario is one JSON document with a fixed key schema; unknown keys are
hard errors and every violated invariant is reported, not just the first.
Outputs are deterministic: tables carry a sha256 of their canonical metadata,
floats print with 17 significant digits, and nothing time- or host-dependent
is written, so identical configs produce byte-identical files at any worker
count.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import analysis, semiclassical, stationary, wavepacket
from .core import (
    MomentumDistribution,
    NormConvention,
    PotentialConfig,
    RecoilKind,
    RecoilModel,
    ValidationError,
)

__all__ = ["main", "run_scenario", "read_table", "write_table"]

_FMT = "%.17e"


# --------------------------------------------------------------------------
# scenario schema
# --------------------------------------------------------------------------

_SCHEMA: dict[str, Any] = {
    "route": str,
    "physics": {"p0": float, "kappa": float, "beta": float, "v1": float},
    "recoil": {"kind": str, "k0": float, "k_nodes": int},
    "wavepacket": {"sigma_z": float, "z0": float, "k_z": float},
    "numerics": {
        "p_grid": {"lo": float, "hi": float, "n": int},
        "k_sweep": int,
        "window_refine": float,
        "t_end": float,
        "n_tau": int,
        "dt": float,
        "grid": {"z_lo": float, "z_hi": float, "n": int},
        "n_samples": int,
        "fringe_region": list,
    },
    "inputs": list,
    "outputs": {"dir": str, "prefix": str, "plot": bool},
}

_ROUTES = ("semiclassical", "stationary", "wavepacket", "compare")


def _check_keys(raw: Any, schema: Any, path: str, violations: list[str]):
    if not isinstance(schema, dict):
        expected = schema
        if expected is float:
            ok = isinstance(raw, (int, float)) and not isinstance(raw, bool)
        elif expected is int:
            ok = isinstance(raw, int) and not isinstance(raw, bool)
        elif expected is bool:
            ok = isinstance(raw, bool)
        elif expected is list:
            ok = isinstance(raw, list)
        else:
            ok = isinstance(raw, expected)
        if not ok and raw is not None:
            violations.append(
                f"{path}: expected {expected.__name__}, got {type(raw).__name__}"
            )
        return
    if not isinstance(raw, dict):
        violations.append(f"{path}: expected an object")
        return
    for key, value in raw.items():
        if key not in schema:
            violations.append(f"{path}.{key}: unknown key")
            continue
        _check_keys(value, schema[key], f"{path}.{key}", violations)


@dataclass
class Scenario:
    """Fully resolved run configuration; every default is materialized."""

    route: str
    p0: float = 2.0
    config: PotentialConfig | None = None
    recoil: RecoilModel = field(default_factory=RecoilModel)
    k_nodes: int = 41
    sigma_z: float = 4.0
    z0: float | None = None
    k_z: float | None = None
    p_grid: np.ndarray | None = None
    k_sweep: int = 0
    window_refine: float = 1.0
    t_end: float = 70.0
    n_tau: int = 64
    dt: float | None = None
    grid: wavepacket.SpatialGrid | None = None
    n_samples: int = 0
    fringe_region: tuple[float, float] | None = None
    inputs: list[str] = field(default_factory=list)
    out_dir: str = "out"
    prefix: str = "run"
    plot: bool = False
    seed: int = 0
    deterministic: bool = False

    def meta(self) -> dict[str, Any]:
        m: dict[str, Any] = {
            "code": "ewraman",
            "version": _package_version(),
            "route": self.route,
            "p0": self.p0,
            **(self.config.as_dict() if self.config else {}),
            "recoil": self.recoil.as_dict(),
            "k_nodes": self.k_nodes,
            "deterministic": self.deterministic,
        }
        if self.route == "wavepacket":
            m.update(
                sigma_z=self.sigma_z,
                sigma_p=1.0 / self.sigma_z,
                z0=self.z0,
                k_z=self.k_z,
                t_end=self.t_end,
                n_tau=self.n_tau,
                dt=self.dt,
                n_samples=self.n_samples,
                seed=self.seed,
            )
            if self.grid is not None:
                m["grid"] = {
                    "z_lo": self.grid.z_lo,
                    "z_hi": self.grid.z_hi,
                    "n": self.grid.n,
                }
        if self.route == "stationary":
            m.update(k_sweep=self.k_sweep, window_refine=self.window_refine)
        if self.p_grid is not None:
            m["p_grid"] = {
                "lo": float(self.p_grid[0]),
                "hi": float(self.p_grid[-1]),
                "n": int(self.p_grid.size),
            }
        if self.route == "compare":
            m["inputs"] = list(self.inputs)
            if self.fringe_region:
                m["fringe_region"] = list(self.fringe_region)
        return m


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("ewraman")
    except Exception:
        return "0.1.0"


def load_scenario(path: str | None, route: str, overrides: argparse.Namespace
                  ) -> Scenario:
    """Parse, validate, and resolve a scenario; collects every violation."""
    violations: list[str] = []
    raw: dict[str, Any] = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError([f"cannot read scenario {path}: {exc}"])
        _check_keys(raw, _SCHEMA, "scenario", violations)
    declared = raw.get("route")
    if declared is not None and declared not in _ROUTES:
        violations.append(f"scenario.route: must be one of {_ROUTES}, got {declared!r}")
    if declared is not None and declared in _ROUTES and declared != route:
        violations.append(
            f"scenario.route={declared!r} does not match the {route!r} subcommand"
        )

    phys = dict(raw.get("physics") or {})
    rec = dict(raw.get("recoil") or {})
    wp = dict(raw.get("wavepacket") or {})
    num = dict(raw.get("numerics") or {})
    outs = dict(raw.get("outputs") or {})

    if overrides.p0 is not None:
        phys["p0"] = overrides.p0
    if overrides.kappa is not None:
        phys["kappa"] = overrides.kappa
    if overrides.beta is not None:
        phys["beta"] = overrides.beta
    if overrides.recoil is not None:
        rec["kind"] = overrides.recoil
    if overrides.k_nodes is not None:
        rec["k_nodes"] = overrides.k_nodes
    if overrides.out is not None:
        outs["dir"] = overrides.out

    scn = Scenario(route=route)
    scn.p0 = float(phys.get("p0", 2.0))
    try:
        scn.config = PotentialConfig(
            v1=float(phys.get("v1", 1.0)),
            kappa=float(phys.get("kappa", 0.125)),
            beta=float(phys.get("beta", 0.2)),
        )
    except ValidationError as exc:
        violations.extend(f"scenario.physics: {v}" for v in exc.violations)
    if not scn.p0 > 0:
        violations.append(f"scenario.physics.p0: must be > 0, got {scn.p0}")

    kind_name = str(rec.get("kind", "isotropic")).lower()
    try:
        kind = RecoilKind(kind_name)
    except ValueError:
        kind = RecoilKind.ISOTROPIC
        violations.append(
            f"scenario.recoil.kind: must be one of "
            f"{[k.value for k in RecoilKind]}, got {kind_name!r}"
        )
    try:
        scn.recoil = RecoilModel(kind, float(rec.get("k0", 1.0)))
    except ValidationError as exc:
        violations.extend(f"scenario.recoil: {v}" for v in exc.violations)
    scn.k_nodes = int(rec.get("k_nodes", 41 if route == "stationary" else 9))
    if scn.k_nodes < 1 or scn.k_nodes % 2 == 0:
        violations.append(
            f"scenario.recoil.k_nodes: must be odd and >= 1, got {scn.k_nodes}"
        )

    scn.sigma_z = float(wp.get("sigma_z", 4.0))
    if scn.sigma_z <= 0:
        violations.append(f"scenario.wavepacket.sigma_z: must be > 0, got {scn.sigma_z}")
    scn.z0 = wp.get("z0")
    scn.k_z = wp.get("k_z")
    scn.t_end = float(num.get("t_end", 70.0))
    scn.n_tau = int(num.get("n_tau", 64))
    scn.dt = num.get("dt")
    scn.k_sweep = int(num.get("k_sweep", 0))
    scn.window_refine = float(num.get("window_refine", 1.0))
    scn.n_samples = int(num.get("n_samples", 0))
    if scn.k_sweep and (scn.k_sweep < 2):
        violations.append(f"scenario.numerics.k_sweep: need >= 2 values, got {scn.k_sweep}")
    if "fringe_region" in num and num["fringe_region"] is not None:
        fr = num["fringe_region"]
        if not (isinstance(fr, list) and len(fr) == 2):
            violations.append("scenario.numerics.fringe_region: expected [lo, hi]")
        else:
            scn.fringe_region = (float(fr[0]), float(fr[1]))
    if "p_grid" in num and num["p_grid"] is not None:
        pg = num["p_grid"]
        lo, hi, n = pg.get("lo"), pg.get("hi"), pg.get("n", 600)
        if lo is None or hi is None or not (hi > lo) or n < 2:
            violations.append("scenario.numerics.p_grid: need lo < hi and n >= 2")
        else:
            scn.p_grid = np.linspace(float(lo), float(hi), int(n))
    if "grid" in num and num["grid"] is not None:
        g = num["grid"]
        try:
            scn.grid = wavepacket.SpatialGrid(
                float(g.get("z_lo")), float(g.get("z_hi")), int(g.get("n"))
            )
        except (TypeError, ValidationError) as exc:
            violations.append(f"scenario.numerics.grid: {exc}")

    scn.inputs = list(raw.get("inputs") or [])
    if route == "compare" and len(scn.inputs) != 2:
        violations.append("scenario.inputs: compare needs exactly two spectrum tables")
    scn.out_dir = str(outs.get("dir", "out"))
    scn.prefix = str(outs.get("prefix", route))
    scn.plot = bool(outs.get("plot", False)) or bool(overrides.plot)
    scn.seed = int(overrides.seed) if overrides.seed is not None else 0
    scn.deterministic = bool(overrides.deterministic)

    if violations:
        raise ValidationError(violations)
    return scn


# --------------------------------------------------------------------------
# table IO
# --------------------------------------------------------------------------

def _canonical_meta(meta: dict[str, Any]) -> str:
    return json.dumps(meta, sort_keys=True, separators=(",", ":"))


def write_table(path: str, dist: MomentumDistribution, meta: dict[str, Any]):
    """Spectrum table: hash-stamped comment header, then 'p density' pairs."""
    digest = hashlib.sha256(_canonical_meta(meta).encode()).hexdigest()
    lines = ["# ewraman spectrum", f"# meta_sha256 = {digest}"]
    for key in sorted(meta):
        lines.append(f"# {key} = {json.dumps(meta[key], sort_keys=True)}")
    lines.append(f"# norm_convention = {dist.norm_convention.value}")
    lines.append("# columns: p density")
    for p, d in zip(dist.p_grid, dist.density):
        lines.append(f"{_FMT % p} {_FMT % d}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_table(path: str) -> MomentumDistribution:
    meta: dict[str, Any] = {}
    convention = NormConvention.RAW
    ps, ds = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    key = key.strip()
                    value = value.strip()
                    if key == "norm_convention":
                        convention = NormConvention(value)
                    elif key != "meta_sha256":
                        try:
                            meta[key] = json.loads(value)
                        except json.JSONDecodeError:
                            meta[key] = value
                continue
            a, b = line.split()
            ps.append(float(a))
            ds.append(float(b))
    return MomentumDistribution(np.array(ps), np.array(ds), convention, meta)


def _write_meta(path: str, meta: dict[str, Any]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _maybe_plot(path: str, curves, xlabel: str, ylabel: str):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise RuntimeError(
            "plotting requires matplotlib (install ewraman[plots])"
        ) from exc
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for x, y, label in curves:
        ax.plot(x, y, lw=1.0, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(curves) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# --------------------------------------------------------------------------
# route runners
# --------------------------------------------------------------------------

def _run_semiclassical(scn: Scenario) -> list[str]:
    cfg = scn.config
    meta = scn.meta()
    band_lo, band_hi = semiclassical.classical_band(scn.p0, cfg.beta, 0.0)
    width = band_hi - band_lo
    p_f = np.linspace(band_lo + 1e-4 * width, band_hi - 1e-4 * width, 400)
    phases = np.array([semiclassical.phase_difference(scn.p0, p, cfg) for p in p_f])
    files = []
    phase_path = os.path.join(scn.out_dir, f"{scn.prefix}_phase.dat")
    write_table(
        phase_path,
        MomentumDistribution(p_f, phases, NormConvention.RAW,
                             {**meta, "columns": "p phase"}),
        {**meta, "table": "phase"},
    )
    files.append(phase_path)

    k_list = [0.0]
    if scn.recoil.kind is not RecoilKind.NONE:
        k_list += [-scn.recoil.k0, scn.recoil.k0]
    fringe_lines = ["# ewraman fringe predictions", "# columns: k n p_f"]
    for k in k_list:
        roots = semiclassical.predicted_fringe_momenta(scn.p0, cfg, k)
        for n, root in enumerate(roots, start=1):
            fringe_lines.append(f"{_FMT % k} {n:d} {_FMT % root}")
    fringe_path = os.path.join(scn.out_dir, f"{scn.prefix}_fringes.dat")
    with open(fringe_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(fringe_lines) + "\n")
    files.append(fringe_path)
    meta_path = os.path.join(scn.out_dir, f"{scn.prefix}.meta.json")
    _write_meta(meta_path, {**meta, "band": [band_lo, band_hi]})
    files.append(meta_path)
    if scn.plot:
        plot_path = os.path.join(scn.out_dir, f"{scn.prefix}.svg")
        _maybe_plot(plot_path, [(p_f, phases, "phase")], "p_f", "phase [rad]")
        files.append(plot_path)
    return files


def _run_stationary(scn: Scenario) -> list[str]:
    cfg = scn.config
    meta = scn.meta()
    oc = stationary.OverlapConfig.auto(
        scn.p0, cfg, p_grid=scn.p_grid, recoil=scn.recoil,
        k_nodes=scn.k_nodes, refine=scn.window_refine,
    )
    engine = stationary.OverlapEngine(scn.p0, cfg, oc)
    files = []
    curves = []
    if scn.k_sweep:
        k_values = np.linspace(-scn.recoil.k0, scn.recoil.k0, scn.k_sweep)
        sweep = []
        for k in k_values:
            dist = engine.spectrum(float(k))
            sweep.append(dist.density)
            path = os.path.join(scn.out_dir, f"{scn.prefix}_k{k:+.3f}.dat")
            write_table(path, dist, {**meta, "recoil_k": float(k)})
            files.append(path)
        combined = os.path.join(scn.out_dir, f"{scn.prefix}_ksweep.dat")
        header = ["# ewraman k-sweep", "# columns: p " +
                  " ".join(f"density_k{k:+.3f}" for k in k_values)]
        rows = [
            " ".join([_FMT % p] + [_FMT % s[i] for s in sweep])
            for i, p in enumerate(oc.p_grid)
        ]
        with open(combined, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(header + rows) + "\n")
        files.append(combined)
    averaged = engine.averaged()
    main_path = os.path.join(scn.out_dir, f"{scn.prefix}.dat")
    write_table(main_path, averaged, meta)
    files.append(main_path)
    curves.append((averaged.p_grid, averaged.density, "recoil averaged"))
    meta_path = os.path.join(scn.out_dir, f"{scn.prefix}.meta.json")
    _write_meta(meta_path, {**meta, "z_min": oc.z_min, "z_max": oc.z_max,
                            "n_z": oc.n_z})
    files.append(meta_path)
    if scn.plot:
        plot_path = os.path.join(scn.out_dir, f"{scn.prefix}.svg")
        _maybe_plot(plot_path, curves, "p [hbar k0]", "|phi(p)|^2")
        files.append(plot_path)
    return files


def _run_wavepacket(scn: Scenario) -> list[str]:
    cfg = scn.config
    k_z = scn.k_z if scn.k_z is not None else -scn.p0
    z0 = scn.z0 if scn.z0 is not None else wavepacket.default_z0(cfg, k_z, scn.t_end)
    grid = scn.grid or wavepacket.auto_grid(
        scn.sigma_z, k_z, cfg, scn.recoil, scn.t_end, z0
    )
    spec = wavepacket.WavePacketSpec(z0, scn.sigma_z, k_z, grid)
    schedule = wavepacket.build_jump_schedule(
        spec, cfg, scn.t_end, n_tau=scn.n_tau, dt=scn.dt
    )
    workers = 1 if scn.deterministic else None
    dist = wavepacket.final_spectrum(
        spec, cfg, schedule, scn.recoil, scn.t_end,
        k_nodes=scn.k_nodes, p_grid=scn.p_grid, dt=scn.dt, workers=workers,
    )
    meta = scn.meta()
    meta["z0"] = z0
    meta["k_z"] = k_z
    meta["grid"] = {"z_lo": grid.z_lo, "z_hi": grid.z_hi, "n": grid.n}
    meta["dt"] = dist.meta.get("dt")
    files = []
    main_path = os.path.join(scn.out_dir, f"{scn.prefix}.dat")
    write_table(main_path, dist, meta)
    files.append(main_path)
    meta_path = os.path.join(scn.out_dir, f"{scn.prefix}.meta.json")
    _write_meta(meta_path, meta)
    files.append(meta_path)
    if scn.n_samples > 0:
        sampled = wavepacket.sample_spectrum(
            spec, cfg, scn.recoil, scn.t_end, scn.n_samples, scn.seed,
            p_grid=scn.p_grid, dt=scn.dt,
        )
        spath = os.path.join(scn.out_dir, f"{scn.prefix}_sampled.dat")
        write_table(spath, sampled, {**meta, "estimator": "sampled"})
        files.append(spath)
    if scn.plot:
        plot_path = os.path.join(scn.out_dir, f"{scn.prefix}.svg")
        _maybe_plot(plot_path, [(dist.p_grid, dist.density, "wavepacket")],
                    "p [hbar k0]", "|phi(p)|^2")
        files.append(plot_path)
    return files


def _report_lines(name: str, rep: analysis.FringeReport) -> list[str]:
    lines = [f"[{name}]"]
    lines.append(f"region = [{rep.region[0]:.6g}, {rep.region[1]:.6g}]")
    lines.append("minima = " + " ".join(_FMT % m for m in rep.minima))
    lines.append("maxima = " + " ".join(_FMT % m for m in rep.maxima))
    lines.append(f"mean_spacing = {rep.mean_spacing!r}")
    lines.append(f"visibility = {rep.visibility!r}")
    return lines


def _run_compare(scn: Scenario) -> list[str]:
    a = read_table(scn.inputs[0]).normalized()
    b = read_table(scn.inputs[1]).normalized()
    region = scn.fringe_region or (
        float(max(a.p_grid[0], b.p_grid[0])),
        float(min(a.p_grid[-1], b.p_grid[-1])),
    )
    rep_a = analysis.extract_fringes(a, region)
    rep_b = analysis.extract_fringes(b, region)
    l1, shift = analysis.compare_routes(a, b)
    lines = ["# ewraman comparison"]
    lines += _report_lines(scn.inputs[0], rep_a)
    lines += _report_lines(scn.inputs[1], rep_b)
    lines.append("[summary]")
    lines.append(f"l1 = {_FMT % l1}")
    lines.append(f"minima_shift = {shift!r}")
    path = os.path.join(scn.out_dir, f"{scn.prefix}_compare.txt")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    summary = {
        "inputs": scn.inputs,
        "region": list(region),
        "l1": l1,
        "minima_shift": None if math.isnan(shift) else shift,
        "a": {
            "minima": rep_a.minima.tolist(),
            "maxima": rep_a.maxima.tolist(),
            "mean_spacing": None if math.isnan(rep_a.mean_spacing) else rep_a.mean_spacing,
            "visibility": None if math.isnan(rep_a.visibility) else rep_a.visibility,
        },
        "b": {
            "minima": rep_b.minima.tolist(),
            "maxima": rep_b.maxima.tolist(),
            "mean_spacing": None if math.isnan(rep_b.mean_spacing) else rep_b.mean_spacing,
            "visibility": None if math.isnan(rep_b.visibility) else rep_b.visibility,
        },
    }
    jpath = os.path.join(scn.out_dir, f"{scn.prefix}_compare.json")
    _write_meta(jpath, summary)
    return [path, jpath]


_RUNNERS = {
    "semiclassical": _run_semiclassical,
    "stationary": _run_stationary,
    "wavepacket": _run_wavepacket,
    "compare": _run_compare,
}


def run_scenario(scn: Scenario) -> list[str]:
    os.makedirs(scn.out_dir, exist_ok=True)
    return _RUNNERS[scn.route](scn)


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ewraman",
        description="Interference of atoms bouncing inelastically from an "
        "evanescent-wave mirror",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _ROUTES:
        p = sub.add_parser(name, help=f"run the {name} route")
        p.add_argument("--scenario", help="scenario JSON file")
        p.add_argument("--p0", type=float, help="incident momentum override")
        p.add_argument("--kappa", type=float, help="decay constant override")
        p.add_argument("--beta", type=float, help="potential reduction override")
        p.add_argument(
            "--recoil", choices=[k.value for k in RecoilKind],
            help="recoil distribution override",
        )
        p.add_argument("--k-nodes", dest="k_nodes", type=int,
                       help="recoil quadrature nodes (odd)")
        p.add_argument("--out", help="output directory override")
        p.add_argument("--deterministic", action="store_true",
                       help="pin reduction order and worker count")
        p.add_argument("--seed", type=int,
                       help="seed for the sampling cross-check estimator")
        p.add_argument("--plot", action="store_true", help="emit an SVG plot")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        scn = load_scenario(args.scenario, args.command, args)
        files = run_scenario(scn)
    except ValidationError as exc:
        record = {"error": "validation", "violations": exc.violations}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 2
    except (RuntimeError, OSError, ValueError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 1
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
