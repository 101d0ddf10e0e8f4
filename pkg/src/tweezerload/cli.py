"""Command-line front end: spectra, fidelities, depth optimisation and rates.

Configuration comes from an optional TOML file; flags override it. Every
output starts with a header holding the resolved configuration and the
package version, so a table can always be regenerated.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import math
import sys

import numpy as np
from scipy import linalg

from . import __version__
from .quantities import CONSTANTS, Species, builtin_species, convert, get_species
from .radial import SingularityError
from .spectrum import BasisParams, DepthPoint, scan_depths
from .thermo import (
    CondensedReservoirError,
    NoBlockadeWindowError,
    elastic_rates,
    fidelity_at_optimum,
    fugacity,
    optimize_depth,
    reservoir_from_psd,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("tweezerload")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICS = 0, 2, 3

DEFAULTS = {
    "species": None,
    "tweezer": {"waist_nm": None, "depth_kHz": None, "depth_scan": None},
    "basis": {
        "l_max": 6,
        "n_contractions": 20,
        "grid_refine": 1.0,
        "r_max_nm": None,
        "min_trapped": 0.0,
        "j_max": 2,
    },
    "reservoir": {
        "temperature_nK": None,
        "temp_scan": None,
        "density_cm3": None,
        "psd": None,
        "statistics": "bose",
    },
    "output": {"format": "csv", "path": None},
    "jobs": 1,
}

COLUMNS = {
    "spectrum": ["D_kHz", "regime", "kind", "index", "epsilon_kHz", "l1", "g", "U_kHz", "J", "energy_kHz"],
    "fidelity": [
        "T_nK", "n_cm3", "psd", "z", "D_star_kHz", "epsilon_kHz", "U_kHz", "p0", "p1", "p2",
        "F_sp", "F_gs", "infidelity_sp", "infidelity_gs", "p3_over_p2", "flag",
    ],
    "optimize": [
        "T_nK", "n_cm3", "psd", "z", "D_star_kHz", "D_max_gap_kHz", "max_gap_kHz", "window_lo_kHz",
        "window_hi_kHz", "epsilon_kHz", "U_kHz", "F_sp", "F_gs", "flag",
    ],
    "rates": ["species", "T_nK", "n_cm3", "sigma_um2", "v_m_s", "beta_cm3_s", "tau_s"],
    "species": ["name", "mass_u", "R6_a0", "R6_nm", "c6_J_m6", "E6_Hz", "dipole_D", "reference_waists_nm"],
}


class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


# ---------------------------------------------------------------- config


def _merge(base: dict, over: dict, path="") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        where = f"{path}.{k}" if path else k
        if k not in base:
            raise ConfigError(where, "unknown key")
        if isinstance(base[k], dict) and isinstance(v, dict) and k != "species":
            out[k] = _merge(base[k], v, where)
        else:
            out[k] = v
    return out


def parse_scan(spec, path: str) -> dict:
    """'min,max,count[,log|linear]' or a table with the same keys."""
    if isinstance(spec, str):
        parts = [p.strip() for p in spec.split(",")]
        if len(parts) not in (3, 4):
            raise ConfigError(path, "expected min,max,count[,log|linear]")
        try:
            spec = {"min": float(parts[0]), "max": float(parts[1]), "count": int(parts[2]),
                    "scale": parts[3] if len(parts) == 4 else "log"}
        except ValueError:
            raise ConfigError(path, f"cannot parse {spec!r}") from None
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected a scan table")
    try:
        lo, hi, count = float(spec["min"]), float(spec["max"]), int(spec["count"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError(path, "needs numeric min, max and count") from None
    scale = spec.get("scale", "log")
    if scale not in ("log", "linear"):
        raise ConfigError(f"{path}.scale", "must be 'log' or 'linear'")
    if not lo < hi:
        raise ConfigError(path, "min must be below max")
    if count < 2:
        raise ConfigError(f"{path}.count", "must be at least 2")
    if scale == "log" and lo <= 0:
        raise ConfigError(f"{path}.min", "log scans need a positive minimum")
    return {"min": lo, "max": hi, "count": count, "scale": scale}


def scan_values(scan: dict) -> np.ndarray:
    if scan["scale"] == "log":
        return np.geomspace(scan["min"], scan["max"], scan["count"])
    return np.linspace(scan["min"], scan["max"], scan["count"])


def _as_list(x):
    if x is None:
        return None
    return [float(v) for v in (x if isinstance(x, (list, tuple)) else [x])]


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(path, f"invalid TOML: {exc}") from None


def resolve_config(args) -> dict:
    """Defaults, then the config file, then command-line flags."""
    cfg = _merge(DEFAULTS, load_config(args.config))
    if getattr(args, "species", None) is not None:
        cfg["species"] = args.species
    if getattr(args, "waist", None) is not None:
        cfg["tweezer"]["waist_nm"] = args.waist
    if getattr(args, "depth", None) is not None:
        cfg["tweezer"]["depth_kHz"] = args.depth
    if getattr(args, "depth_scan", None) is not None:
        cfg["tweezer"]["depth_scan"] = args.depth_scan
    if getattr(args, "temperature", None) is not None:
        cfg["reservoir"]["temperature_nK"] = args.temperature
    if getattr(args, "temp_scan", None) is not None:
        cfg["reservoir"]["temp_scan"] = args.temp_scan
    if getattr(args, "density", None) is not None:
        cfg["reservoir"]["density_cm3"] = args.density
    if getattr(args, "psd", None) is not None:
        cfg["reservoir"]["psd"] = args.psd
    if getattr(args, "statistics", None) is not None:
        cfg["reservoir"]["statistics"] = args.statistics
    if getattr(args, "l_max", None) is not None:
        cfg["basis"]["l_max"] = args.l_max
    if getattr(args, "j_max", None) is not None:
        cfg["basis"]["j_max"] = args.j_max
    if getattr(args, "format", None) is not None:
        cfg["output"]["format"] = args.format
    if getattr(args, "out", None) is not None:
        cfg["output"]["path"] = args.out
    if getattr(args, "jobs", None) is not None:
        cfg["jobs"] = args.jobs
    return validate(cfg)


def validate(cfg: dict) -> dict:
    tw = cfg["tweezer"]
    if tw["depth_scan"] is not None:
        tw["depth_scan"] = parse_scan(tw["depth_scan"], "tweezer.depth_scan")
    if tw["waist_nm"] is not None and not float(tw["waist_nm"]) > 0:
        raise ConfigError("tweezer.waist_nm", "must be positive")
    if tw["depth_kHz"] is not None and not float(tw["depth_kHz"]) > 0:
        raise ConfigError("tweezer.depth_kHz", "must be positive")
    res = cfg["reservoir"]
    if res["temp_scan"] is not None:
        res["temp_scan"] = parse_scan(res["temp_scan"], "reservoir.temp_scan")
    if res["statistics"] not in ("classical", "bose"):
        raise ConfigError("reservoir.statistics", "must be 'classical' or 'bose'")
    for key in ("temperature_nK", "density_cm3", "psd"):
        vals = _as_list(res[key])
        if vals is not None and any(not v >= 0 or (key != "psd" and v == 0) for v in vals):
            raise ConfigError(f"reservoir.{key}", "values must be positive")
        res[key] = vals
    if res["density_cm3"] is not None and res["psd"] is not None:
        raise ConfigError("reservoir", "give either density_cm3 or psd, not both")
    b = cfg["basis"]
    for key in ("l_max", "n_contractions", "j_max"):
        if not isinstance(b[key], int) or b[key] < 0:
            raise ConfigError(f"basis.{key}", "must be a non-negative integer")
    if b["n_contractions"] < 1:
        raise ConfigError("basis.n_contractions", "must be at least 1")
    if cfg["output"]["format"] not in ("csv", "json"):
        raise ConfigError("output.format", "must be 'csv' or 'json'")
    if not isinstance(cfg["jobs"], int) or cfg["jobs"] < 1:
        raise ConfigError("jobs", "must be a positive integer")
    return cfg


def species_from_config(entry, path="species") -> Species:
    if isinstance(entry, dict):
        try:
            return Species.from_dict(entry)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(path, f"bad inline species: {exc}") from None
    try:
        return get_species(str(entry))
    except KeyError as exc:
        raise ConfigError(path, str(exc.args[0])) from None


def species_list(cfg) -> list[Species]:
    entry = cfg["species"]
    if entry is None:
        raise ConfigError("species", "give --species or a [species] entry")
    if isinstance(entry, str) and "," in entry:
        entry = [e.strip() for e in entry.split(",") if e.strip()]
    if isinstance(entry, list):
        return [species_from_config(e, f"species[{i}]") for i, e in enumerate(entry)]
    return [species_from_config(entry)]


def basis_params(cfg) -> BasisParams:
    b = cfg["basis"]
    r_max = b["r_max_nm"] * 1e-9 if b["r_max_nm"] else None
    return BasisParams(l_max=b["l_max"], n_contractions=b["n_contractions"], grid_refine=float(b["grid_refine"]),
                       r_max=r_max, min_trapped=float(b["min_trapped"]))


def _waist(cfg, sp: Species) -> float:
    w = cfg["tweezer"]["waist_nm"]
    if w is not None:
        return float(w) * 1e-9
    if sp.reference_waists:
        return sp.reference_waists[0]
    raise ConfigError("tweezer.waist_nm", "required for species without a reference waist")


def _depths_kHz(cfg) -> np.ndarray:
    tw = cfg["tweezer"]
    if tw["depth_scan"] is not None:
        return scan_values(tw["depth_scan"])
    if tw["depth_kHz"] is not None:
        return np.array([float(tw["depth_kHz"])])
    raise ConfigError("tweezer.depth_scan", "give --depth-scan or --depth")


def _temperatures_nK(cfg) -> list[float]:
    res = cfg["reservoir"]
    if res["temp_scan"] is not None:
        return list(scan_values(res["temp_scan"]))
    if res["temperature_nK"] is not None:
        return res["temperature_nK"]
    raise ConfigError("reservoir.temp_scan", "give --temp-scan or --temperature")


def _reservoirs(cfg, sp: Species):
    """(T_nK, label, ReservoirState) for every requested reservoir point."""
    res = cfg["reservoir"]
    stats = res["statistics"]
    out = []
    for T in _temperatures_nK(cfg):
        if res["psd"] is not None:
            for psd in res["psd"]:
                out.append((T, reservoir_from_psd(T * 1e-9, psd, sp.mass, stats)))
        else:
            dens = res["density_cm3"]
            if dens is None:
                raise ConfigError("reservoir.density_cm3", "give --density or --psd")
            for n in dens:
                out.append((T, fugacity(T * 1e-9, n * 1e6, sp.mass, stats)))
    return out


# ---------------------------------------------------------------- output


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return f"{v:.9g}"
    return str(v)


def _json_value(v):
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(_fmt(v)) if math.isfinite(float(v)) else _fmt(v)
    return str(v)


def render(command: str, rows: list[dict], cfg: dict) -> str:
    cols = COLUMNS[command]
    header = {"tweezerload_version": __version__, "command": command, "config": cfg}
    if cfg["output"]["format"] == "json":
        doc = {"header": header, "columns": cols,
               "rows": [{c: _json_value(r.get(c)) for c in cols} for r in rows]}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    for line in json.dumps(header, sort_keys=True).splitlines():
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in cols])
    return buf.getvalue()


def emit(command, rows, cfg):
    text = render(command, rows, cfg)
    path = cfg["output"]["path"]
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

_kHz = CONSTANTS.h * 1e3


def _scan(cfg, sp) -> list[DepthPoint]:
    return scan_depths(sp, _waist(cfg, sp), _depths_kHz(cfg) * _kHz, basis_params(cfg), (0,), cfg["jobs"])


def rows_spectrum(cfg) -> list[dict]:
    rows = []
    for sp in species_list(cfg):
        for p in _scan(cfg, sp):
            D = p.depth / _kHz
            base = {"D_kHz": D, "regime": p.regime}
            if not p.single.bound:
                rows.append({**base, "kind": "none"})
                continue
            for i, lv in enumerate(p.single.levels):
                eps = lv.epsilon if i else p.single.epsilon
                rows.append({**base, "kind": "single", "index": i, "epsilon_kHz": eps / _kHz, "l1": lv.l1,
                             "g": lv.degeneracy, "energy_kHz": -eps / _kHz})
            for i, lv in enumerate(p.pair.levels):
                rows.append({**base, "kind": "pair", "index": i, "U_kHz": lv.U / _kHz, "J": lv.J,
                             "g": lv.degeneracy, "energy_kHz": lv.energy / _kHz})
    return rows


def _optimize_rows(cfg, full: bool) -> list[dict]:
    rows = []
    for sp in species_list(cfg):
        points = _scan(cfg, sp)
        cache = {}
        for T, res in _reservoirs(cfg, sp):
            base = {"T_nK": T, "n_cm3": res.density * 1e-6, "psd": res.psd, "z": res.fugacity}
            try:
                if full:
                    r = fidelity_at_optimum(points, res, sp, _waist(cfg, sp), basis_params(cfg),
                                            cfg["basis"]["j_max"], cache)
                else:
                    best = optimize_depth(points, res)
            except NoBlockadeWindowError:
                log.warning("T = %.6g nK: no depth with 2*eps > U > eps", T)
                rows.append({**base, "flag": "no-blockade-window"})
                continue
            if full:
                rows.append({**base, "D_star_kHz": r.depth / _kHz, "epsilon_kHz": r.epsilon / _kHz,
                             "U_kHz": r.U / _kHz, "p0": r.p0, "p1": r.p1, "p2": r.p2, "F_sp": r.F_sp,
                             "F_gs": r.F_gs, "infidelity_sp": 1 - r.F_sp, "infidelity_gs": 1 - r.F_gs,
                             "p3_over_p2": r.p3_over_p2,
                             "flag": "ok" if (r.p3_over_p2 or 0) < 1e-3 else "triple-occupancy"})
            else:
                lo, hi = best.extra["window"]
                rows.append({**base, "D_star_kHz": best.depth / _kHz,
                             "D_max_gap_kHz": best.extra["depth_max_gap"] / _kHz,
                             "max_gap_kHz": best.extra["max_gap"] / _kHz, "window_lo_kHz": lo / _kHz,
                             "window_hi_kHz": hi / _kHz, "epsilon_kHz": best.epsilon / _kHz,
                             "U_kHz": best.U / _kHz, "F_sp": best.F_sp, "F_gs": best.F_gs, "flag": "ok"})
    return rows


def rows_fidelity(cfg):
    return _optimize_rows(cfg, full=True)


def rows_optimize(cfg):
    return _optimize_rows(cfg, full=False)


def rows_rates(cfg) -> list[dict]:
    rows = []
    for sp in species_list(cfg):
        for T in _temperatures_nK(cfg):
            for n in cfg["reservoir"]["density_cm3"] or []:
                r = elastic_rates(sp, T * 1e-9, n * 1e6)
                rows.append({"species": sp.name, "T_nK": T, "n_cm3": n, "sigma_um2": r.sigma * 1e12,
                             "v_m_s": r.velocity, "beta_cm3_s": r.beta * 1e6, "tau_s": r.tau})
    return rows


def rows_species(cfg) -> list[dict]:
    out = []
    for sp in builtin_species():
        d = sp.to_dict()
        E6 = CONSTANTS.hbar**2 / (2 * sp.mass * sp.R6**2)
        out.append({"name": sp.name, "mass_u": d["mass_u"], "R6_a0": d["R6_a0"],
                    "R6_nm": convert(sp.R6, "m", "nm"), "c6_J_m6": sp.c6, "E6_Hz": E6 / CONSTANTS.h,
                    "dipole_D": sp.dipole, "reference_waists_nm": " ".join(f"{w:g}" for w in d["reference_waists_nm"])})
    return out


COMMANDS = {
    "spectrum": rows_spectrum,
    "fidelity": rows_fidelity,
    "optimize": rows_optimize,
    "rates": rows_rates,
    "species": rows_species,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML configuration file")
    common.add_argument("--species", help="builtin species name, or a comma-separated list")
    common.add_argument("--waist", type=float, help="tweezer waist in nm")
    common.add_argument("--depth", type=float, help="single tweezer depth in h*kHz")
    common.add_argument("--depth-scan", help="min,max,count[,log|linear] in h*kHz")
    common.add_argument("--temperature", type=float, nargs="+", help="temperatures in nK")
    common.add_argument("--temp-scan", help="min,max,count[,log|linear] in nK")
    common.add_argument("--density", type=float, nargs="+", help="reservoir density in cm^-3")
    common.add_argument("--psd", type=float, nargs="+", help="reservoir phase-space density")
    common.add_argument("--statistics", choices=("classical", "bose"))
    common.add_argument("--l-max", type=int, help="largest partial wave in the pair basis")
    common.add_argument("--j-max", type=int, help="largest pair J in thermodynamic sums")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--jobs", type=int, help="worker processes for depth scans")
    common.add_argument("-v", "--verbose", action="store_true", help="progress on standard error")

    p = argparse.ArgumentParser(prog="tweezerload", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="binding and interaction energies over a depth scan")
    sub.add_parser("fidelity", parents=[common], help="loading fidelity at the optimal depth per reservoir point")
    sub.add_parser("optimize", parents=[common], help="optimal depth and blockade window per reservoir point")
    sub.add_parser("rates", parents=[common], help="elastic collision estimates")
    sub.add_parser("species", parents=[common], help="list builtin species")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "rates" and cfg["species"] is None:
            cfg["species"] = [sp.name for sp in builtin_species()]
        rows = COMMANDS[args.command](cfg)
        emit(args.command, rows, cfg)
    except (ConfigError, CondensedReservoirError) as exc:
        print(f"tweezerload: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (linalg.LinAlgError, SingularityError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"tweezerload: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
