"""Command-line front end.

Every run reads one JSON configuration file. Frequencies in configuration
and outputs are in MHz (δ/2π, Δ/2π); the conversion to rad/s happens here
and nowhere else. Outputs are long-format CSV (with a ``#`` metadata header)
or JSON and contain no timestamps or paths, so identical configurations
give byte-identical files for any ``--threads`` value.

Exit codes: 0 ok, 1 configuration error, 2 numerical error, 3 fit did not
converge.
"""

from __future__ import annotations

import argparse
import copy
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import SWEEPS, SpectrumModel, fit_decoherence, fit_temperature, metrics_sweep
from .atomic import AtomSystem, FieldConfig, Model
from .constants import OMEGA_D1, TWO_PI
from .dressed import calibrate_branches, calibration_grid, dressed_eigenvalues, resonance_branches, vanish_point
from .doppler import doppler_fwhm
from .errors import ConfigurationError, FitConvergenceError, NumericalError
from .rbdata import BeamConfig, atom_system, constants_report, isotope, rabi_from_power, transition_config
from .spectra import CellConfig, Spectrum, contour_scan, spectrum_scan, transmission

__all__ = ["main", "RunConfig", "load_config", "preset_path", "list_presets"]

MHZ = TWO_PI * 1e6
CELSIUS_ZERO = 273.15

#: ``control.Delta_MHz`` value that puts the control on the upper excited state.
UPPER_RESONANCE = "upper_resonance"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_FIT = 3

_KNOWN_KEYS = {
    "model",
    "isotope",
    "transition",
    "temperature_C",
    "length_cm",
    "density_m3",
    "control",
    "gamma21_over_gamma",
    "omega43_MHz",
    "broadening",
    "scan",
    "output",
    "series",
    "sweep",
    "fit",
    "noise",
    "branches",
    "description",
}


# ------------------------------------------------------------------ config


def _num(x, name):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigurationError(f"{name} must be a finite number")
    return float(x)


def _grid(spec, name, allow_empty=False):
    """Uniform grid from {min, max, points} (MHz)."""
    if not isinstance(spec, dict):
        raise ConfigurationError(f"{name} must be an object with min, max, points")
    extra = set(spec) - {"min", "max", "points"}
    if extra:
        raise ConfigurationError(f"{name}: unknown keys {sorted(extra)}")
    try:
        lo, hi, n = spec["min"], spec["max"], spec["points"]
    except KeyError as exc:
        raise ConfigurationError(f"{name} is missing {exc.args[0]!r}") from None
    lo, hi = _num(lo, f"{name}.min"), _num(hi, f"{name}.max")
    if isinstance(n, bool) or not isinstance(n, int):
        raise ConfigurationError(f"{name}.points must be an integer")
    if n < (0 if allow_empty else 1):
        raise ConfigurationError(f"{name}.points must be >= {0 if allow_empty else 1}")
    if not lo < hi:
        raise ConfigurationError(f"{name}: min must be < max")
    return np.linspace(lo, hi, n)


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass(frozen=True)
class RunConfig:
    """One resolved model configuration (one series of a run).

    Attributes mirror the JSON keys; frequencies are converted to rad/s
    and lengths to metres.
    """

    label: str
    model: Model
    atom: AtomSystem
    cell: CellConfig
    fields: FieldConfig
    broadening: str
    beam_diameter: float | None
    raw: dict

    @classmethod
    def from_dict(cls, d: dict, label: str | None = None) -> "RunConfig":
        unknown = set(d) - _KNOWN_KEYS - {"label"}
        if unknown:
            raise ConfigurationError(f"unknown configuration keys {sorted(unknown)}")
        try:
            model = Model(d.get("model", "four_level"))
        except ValueError:
            raise ConfigurationError(f"unknown model {d.get('model')!r}") from None
        iso = isotope(d.get("isotope", "Rb85")).name
        tr = d.get("transition", {})
        if not isinstance(tr, dict):
            raise ConfigurationError("transition must be an object")
        cg = tr.get("control_ground_F", 2 if iso == "Rb85" else 1)
        pg = tr.get("probe_ground_F")
        temperature = _num(d.get("temperature_C", 50.0), "temperature_C") + CELSIUS_ZERO
        length = _num(d.get("length_cm", 2.54), "length_cm") * 1e-2
        density = d.get("density_m3")
        density = None if density is None else _num(density, "density_m3")
        cell = CellConfig(iso, temperature, length, density)
        g21 = _num(d.get("gamma21_over_gamma", 0.0), "gamma21_over_gamma")
        if g21 < 0:
            raise ConfigurationError("gamma21_over_gamma must be >= 0")
        extra = {}
        if d.get("omega43_MHz") is not None:
            extra["omega43"] = _num(d["omega43_MHz"], "omega43_MHz") * MHZ
        gamma = isotope(iso).gamma.value
        atom = atom_system(iso, cg, pg, gamma21=g21 * gamma, **extra)

        ctl = d.get("control", {"rabi_over_gamma": 0.0})
        if not isinstance(ctl, dict):
            raise ConfigurationError("control must be an object")
        unknown = set(ctl) - {"power_mW", "rabi_over_gamma", "diameter_mm", "Delta_MHz"}
        if unknown:
            raise ConfigurationError(f"control: unknown keys {sorted(unknown)}")
        has_p, has_r = "power_mW" in ctl, "rabi_over_gamma" in ctl
        if has_p == has_r:
            raise ConfigurationError("control needs exactly one of power_mW or rabi_over_gamma")
        diameter = ctl.get("diameter_mm")
        diameter = None if diameter is None else _num(diameter, "control.diameter_mm") * 1e-3
        if has_p:
            if diameter is None:
                raise ConfigurationError("control.power_mW needs control.diameter_mm")
            power = _num(ctl["power_mW"], "control.power_mW") * 1e-3
            omega_c = rabi_from_power(BeamConfig(power, diameter), transition_config(iso, cg, pg).d31)
        else:
            r = _num(ctl["rabi_over_gamma"], "control.rabi_over_gamma")
            if r < 0:
                raise ConfigurationError("control.rabi_over_gamma must be >= 0")
            omega_c = r * gamma
        if ctl.get("Delta_MHz") == UPPER_RESONANCE:
            Delta = -atom.omega43
        else:
            Delta = _num(ctl.get("Delta_MHz", 0.0), "control.Delta_MHz") * MHZ
        fields = FieldConfig(omega_c, Delta, 0.0, omega_control=OMEGA_D1)
        broadening = d.get("broadening", "doppler_analytic")
        if broadening not in ("none", "doppler_analytic", "doppler_numeric"):
            raise ConfigurationError(f"unknown broadening {broadening!r}")
        return cls(label or d.get("label") or model.value, model, atom, cell, fields, broadening, diameter, d)

    def metadata(self) -> dict:
        return {
            "label": self.label,
            "model": self.model.value,
            "broadening": self.broadening,
            "atom": self.atom.to_dict(),
            "cell": self.cell.to_dict(),
            "omega_c31_rad_s": float(self.fields.omega_c31),
            "omega_c31_over_gamma": float(self.fields.omega_c31 / self.atom.gamma_nat),
            "Delta_MHz": float(self.fields.delta_1 / MHZ),
            "omega_control_rad_s": float(self.fields.omega_control),
            "omega_probe_rabi_rad_s": float(self.fields.omega_p32),
        }


def load_config(path) -> dict:
    """Read a JSON configuration file into a dict."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {p}: {exc.strerror}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"malformed JSON in {p}: {exc}") from None
    if not isinstance(d, dict):
        raise ConfigurationError("configuration must be a JSON object")
    return d


def _series(d: dict) -> list[RunConfig]:
    base = {k: v for k, v in d.items() if k != "series"}
    series = d.get("series")
    if series is None:
        return [RunConfig.from_dict(base)]
    if not isinstance(series, list) or not series:
        raise ConfigurationError("series must be a non-empty list of override objects")
    out = []
    for i, s in enumerate(series):
        if not isinstance(s, dict):
            raise ConfigurationError(f"series[{i}] must be an object")
        over = {k: v for k, v in s.items() if k != "label"}
        out.append(RunConfig.from_dict(_merge(base, over), label=s.get("label")))
    labels = [r.label for r in out]
    if len(set(labels)) != len(labels):
        raise ConfigurationError("series labels must be unique")
    return out


def _output_opts(d: dict, args) -> dict:
    o = d.get("output", {})
    if not isinstance(o, dict):
        raise ConfigurationError("output must be an object")
    fmt = o.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigurationError("output.format must be csv or json")
    norm = o.get("normalization", "raw")
    if norm not in ("raw", "per_column_max"):
        raise ConfigurationError("output.normalization must be raw or per_column_max")
    path = args.out if args.out is not None else o.get("path")
    return {"format": fmt, "normalization": norm, "path": path}


# ---------------------------------------------------------------- emitters


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x) if x != 0 else "0.0"


def _json_safe(v):
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.ndarray):
        return _json_safe(v.tolist())
    return v


def _csv_text(meta: dict, columns: list, rows: list) -> str:
    buf = io.StringIO()
    for k in sorted(meta):
        buf.write(f"# {k}: {json.dumps(_json_safe(meta[k]), sort_keys=True)}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    return buf.getvalue()


def _json_text(meta: dict, columns: list, rows: list, extra=None) -> str:
    doc = {"metadata": meta, "records": [dict(zip(columns, r)) for r in rows]}
    if extra:
        doc.update(extra)
    return json.dumps(_json_safe(doc), indent=1, sort_keys=True) + "\n"


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
        return
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", newline="\n") as fh:
        fh.write(text)


def _sidecar_path(path) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    return p.with_name(p.stem + ".branches.csv")


def _base_meta(command: str, cfg: dict, runs) -> dict:
    resolved = {k: v for k, v in cfg.items() if k != "output"}
    out = {k: v for k, v in cfg.get("output", {}).items() if k != "path"}
    if out:
        resolved["output"] = out
    return {
        "code_version": __version__,
        "command": command,
        "config": resolved,
        "series": [r.metadata() for r in runs],
        "units": "frequencies in MHz (angular frequency / 2 pi); chi dimensionless",
    }


# -------------------------------------------------------------- subcommands


SPECTRUM_COLUMNS = [
    "series",
    "Delta_MHz",
    "delta_MHz",
    "transmission",
    "transmission_32",
    "transmission_42",
    "chi32_re",
    "chi32_im",
    "chi42_re",
    "chi42_im",
]


def _spectrum_rows(run: RunConfig, spec: Spectrum, t_total):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        t32 = np.reshape(transmission(spec.chi32, run.cell.length, run.fields.omega_control), -1)
        t42 = np.reshape(transmission(spec.chi42, run.cell.length, run.fields.omega_control), -1)
    D = run.fields.delta_1 / MHZ
    return [
        [run.label, D, x / MHZ, t, a, b, c32.real, c32.imag, c42.real, c42.imag]
        for x, t, a, b, c32, c42 in zip(spec.delta, t_total, t32, t42, spec.chi32, spec.chi42)
    ]


def run_spectrum(cfg: dict, args) -> int:
    runs = _series(cfg)
    out = _output_opts(cfg, args)
    scan = cfg.get("scan", {})
    grid = _grid(scan.get("delta_MHz"), "scan.delta_MHz") * MHZ
    noise = cfg.get("noise")
    rng = None
    if noise is not None:
        if not isinstance(noise, dict) or set(noise) != {"relative_sigma"}:
            raise ConfigurationError("noise must be {\"relative_sigma\": value}")
        sigma = _num(noise["relative_sigma"], "noise.relative_sigma")
        if sigma < 0:
            raise ConfigurationError("noise.relative_sigma must be >= 0")
        rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    rows = []
    fallback = []
    for run in runs:
        spec = spectrum_scan(run.model, run.atom, run.cell, run.fields, grid, run.broadening, threads=args.threads)
        t = spec.transmission
        if rng is not None:
            t = t * (1.0 + sigma * rng.standard_normal(t.shape))
        rows.extend(_spectrum_rows(run, spec, t))
        fallback.append(spec.metadata.get("numeric_fallback_points", 0))
    meta = _base_meta("spectrum", cfg, runs)
    meta["numeric_fallback_points"] = fallback
    if rng is not None:
        meta["noise"] = {"relative_sigma": sigma, "seed": args.seed if args.seed is not None else 0}
    text = _csv_text(meta, SPECTRUM_COLUMNS, rows) if out["format"] == "csv" else _json_text(meta, SPECTRUM_COLUMNS, rows)
    _emit(text, out["path"])
    return EXIT_OK


BRANCH_COLUMNS = ["series", "Delta_MHz", "branch", "delta_MHz"]


def _branch_rows(run: RunConfig, Delta):
    br, cal = resonance_branches(run.atom, run.fields, Delta)
    rows = [[run.label, D / MHZ, k, br[i, k] / MHZ] for i, D in enumerate(Delta) for k in range(3)]
    return rows, cal


def run_contour(cfg: dict, args) -> int:
    runs = _series(cfg)
    out = _output_opts(cfg, args)
    scan = cfg.get("scan", {})
    dg = _grid(scan.get("delta_MHz"), "scan.delta_MHz") * MHZ
    if scan.get("Delta_MHz") is None:
        Dg = np.array([runs[0].fields.delta_1])
    else:
        Dg = _grid(scan["Delta_MHz"], "scan.Delta_MHz") * MHZ
    want_branches = bool(cfg.get("branches", False))
    rows, brows, cals, fallback = [], [], [], []
    for run in runs:
        cm = contour_scan(run.model, run.atom, run.cell, run.fields, dg, Dg, run.broadening, out["normalization"], args.threads)
        fallback.append(cm.metadata.get("numeric_fallback_points", 0))
        for i, D in enumerate(Dg):
            for j, x in enumerate(dg):
                c32, c42 = cm.chi32[i, j], cm.chi42[i, j]
                rows.append([run.label, D / MHZ, x / MHZ, cm.transmission[i, j], c32.real, c32.imag, c42.real, c42.imag])
        if want_branches:
            b, cal = _branch_rows(run, Dg)
            brows.extend(b)
            cals.append(cal.to_dict())
    columns = ["series", "Delta_MHz", "delta_MHz", "transmission", "chi32_re", "chi32_im", "chi42_re", "chi42_im"]
    meta = _base_meta("contour", cfg, runs)
    meta["layout"] = "row-major over Delta then delta"
    meta["numeric_fallback_points"] = fallback
    if want_branches:
        meta["branch_calibration"] = cals
    if out["format"] == "csv":
        _emit(_csv_text(meta, columns, rows), out["path"])
        if want_branches:
            side = _sidecar_path(out["path"])
            bmeta = {"code_version": __version__, "command": "contour-branches", "branch_calibration": cals}
            text = _csv_text(bmeta, BRANCH_COLUMNS, brows)
            if side is None:
                sys.stdout.write(text)
            else:
                _emit(text, side)
    else:
        extra = {"branches": [dict(zip(BRANCH_COLUMNS, r)) for r in brows]} if want_branches else None
        _emit(_json_text(meta, columns, rows, extra), out["path"])
    return EXIT_OK


METRIC_COLUMNS = [
    "series",
    "parameter",
    "value",
    "omega_c31_over_gamma",
    "transparency",
    "delta_peak_MHz",
    "fwhm_MHz",
]

_SWEEP_UNITS = {
    "control_power": "mW",
    "gamma21": "gamma",
    "omega43_norm": "omega43 / Doppler FWHM",
    "rabi_over_gamma": "gamma",
}


def _sweep_values(cfg: dict):
    sw = cfg.get("sweep")
    if not isinstance(sw, dict):
        raise ConfigurationError("metrics needs a sweep object")
    param = sw.get("parameter")
    if param not in SWEEPS:
        raise ConfigurationError(f"sweep.parameter must be one of {list(SWEEPS)}")
    if "values" in sw:
        vals = sw["values"]
        if not isinstance(vals, list):
            raise ConfigurationError("sweep.values must be a list")
        vals = np.array([_num(v, "sweep.values[]") for v in vals], dtype=float)
    else:
        vals = _grid({k: sw[k] for k in ("min", "max", "points") if k in sw}, "sweep", allow_empty=True)
    return param, vals, bool(sw.get("fwhm", True))


def run_metrics(cfg: dict, args) -> int:
    runs = _series(cfg)
    out = _output_opts(cfg, args)
    param, vals, want_fwhm = _sweep_values(cfg)
    tasks = []
    for run in runs:
        if param == "control_power" and run.beam_diameter is None:
            raise ConfigurationError("control_power sweeps need control.diameter_mm")
        for v in vals:
            tasks.append((run, v))
    scale = 1e-3 if param == "control_power" else 1.0

    def work(task):
        run, v = task
        fields = run.fields
        if param == "omega43_norm" and run.raw.get("control", {}).get("Delta_MHz") == UPPER_RESONANCE:
            fields = fields.with_(delta_1=-v * doppler_fwhm(run.cell.thermal, fields.omega_control))
        (row,) = metrics_sweep(
            run.model, run.atom, run.cell, fields, param, [v * scale], run.broadening,
            beam_diameter=run.beam_diameter, fwhm=want_fwhm,
        )
        g = run.atom.gamma_nat
        return [run.label, param, v, row["omega_c31"] / g, row["transparency"], row["delta_peak"] / MHZ, row["fwhm"] / MHZ]

    threads = max(1, min(int(args.threads), len(tasks) or 1))
    if threads == 1:
        rows = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, tasks))
    meta = _base_meta("metrics", cfg, runs)
    meta["sweep"] = {"parameter": param, "unit": _SWEEP_UNITS[param], "points": int(vals.size)}
    text = _csv_text(meta, METRIC_COLUMNS, rows) if out["format"] == "csv" else _json_text(meta, METRIC_COLUMNS, rows)
    _emit(text, out["path"])
    return EXIT_OK


def read_spectrum_csv(path, series: str | None = None) -> Spectrum:
    """Load ``delta_MHz`` and ``transmission`` columns from a CSV file.

    Lines starting with ``#`` are skipped. If a ``series`` column exists and
    holds several labels, ``series`` selects one.
    """
    import csv

    p = Path(path)
    try:
        lines = [ln for ln in p.read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    except OSError as exc:
        raise ConfigurationError(f"cannot read data {p}: {exc.strerror}") from None
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or not {"delta_MHz", "transmission"} <= set(reader.fieldnames):
        raise ConfigurationError(f"{p}: need delta_MHz and transmission columns")
    recs = list(reader)
    if "series" in reader.fieldnames:
        labels = sorted({r["series"] for r in recs})
        if series is None and len(labels) > 1:
            raise ConfigurationError(f"{p}: several series {labels}; select one with 'series'")
        if series is not None:
            recs = [r for r in recs if r["series"] == series]
            if not recs:
                raise ConfigurationError(f"{p}: no rows for series {series!r}")
    try:
        x = np.array([float(r["delta_MHz"]) for r in recs]) * MHZ
        y = np.array([float(r["transmission"]) for r in recs])
    except (TypeError, ValueError):
        raise ConfigurationError(f"{p}: non-numeric data") from None
    return Spectrum(x, y, np.zeros_like(x, complex), np.zeros_like(x, complex))


def run_fit(cfg: dict, args) -> int:
    fit = cfg.get("fit")
    if not isinstance(fit, dict):
        raise ConfigurationError("fit needs a fit object")
    param = fit.get("parameter")
    base_dir = Path(args.config).parent
    base = {k: v for k, v in cfg.items() if k not in ("fit", "series")}

    def data_path(p):
        p = Path(p)
        return p if p.is_absolute() else base_dir / p

    if param == "temperature":
        path = args.data[0] if args.data else fit.get("data")
        if path is None:
            raise ConfigurationError("temperature fit needs --data or fit.data")
        if args.data and len(args.data) != 1:
            raise ConfigurationError("temperature fit takes one data file")
        run = RunConfig.from_dict(base)
        measured = read_spectrum_csv(path if args.data else data_path(path), fit.get("series"))
        kw = {}
        if "bounds_C" in fit:
            lo, hi = (_num(b, "fit.bounds_C") + CELSIUS_ZERO for b in fit["bounds_C"])
            kw["bounds"] = (lo, hi)
        res = fit_temperature(measured, run.atom, run.cell, run.fields, broadening=run.broadening, **kw)
        doc = res.to_dict()
        doc["parameters"]["temperature_C"] = res.parameters["temperature"] - CELSIUS_ZERO
        doc["units"]["temperature_C"] = "degC"
    elif param == "gamma21":
        sets = fit.get("datasets")
        if not isinstance(sets, list) or not sets:
            raise ConfigurationError("gamma21 fit needs a non-empty fit.datasets list")
        if args.data and len(args.data) != len(sets):
            raise ConfigurationError("number of --data files must match fit.datasets")
        measured, setups = [], []
        for i, s in enumerate(sets):
            if not isinstance(s, dict):
                raise ConfigurationError(f"fit.datasets[{i}] must be an object")
            over = {k: v for k, v in s.items() if k not in ("data", "series")}
            run = RunConfig.from_dict(_merge(base, over))
            if args.data:
                path = args.data[i]
            elif "data" in s:
                path = data_path(s["data"])
            else:
                raise ConfigurationError(f"fit.datasets[{i}] has no data path")
            measured.append(read_spectrum_csv(path, s.get("series")))
            setups.append(SpectrumModel(run.atom, run.cell, run.fields, run.model, run.broadening))
        kw = {}
        if "bounds_over_gamma" in fit:
            g = setups[0].atom.gamma_nat
            kw["bounds"] = tuple(_num(b, "fit.bounds_over_gamma") * g for b in fit["bounds_over_gamma"])
        res = fit_decoherence(measured, setups, **kw)
        doc = res.to_dict()
    else:
        raise ConfigurationError("fit.parameter must be temperature or gamma21")
    doc["code_version"] = __version__
    out = args.out if args.out is not None else fit.get("path")
    _emit(json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n", out)
    if not res.converged:
        print(f"fit did not converge: {res.message}", file=sys.stderr)
        return EXIT_FIT
    return EXIT_OK


DRESSED_COLUMNS = ["series", "Delta_MHz", "branch", "lambda_MHz", "delta_MHz"]


def run_dressed(cfg: dict, args) -> int:
    runs = _series(cfg)
    out = _output_opts(cfg, args)
    scan = cfg.get("scan", {})
    if scan.get("Delta_MHz") is None:
        raise ConfigurationError("dressed needs scan.Delta_MHz")
    Dg = _grid(scan["Delta_MHz"], "scan.Delta_MHz") * MHZ
    dg = None if scan.get("delta_MHz") is None else _grid(scan["delta_MHz"], "scan.delta_MHz") * MHZ
    rows, cals, vanish = [], [], []
    for run in runs:
        cal = calibrate_branches(run.atom, run.fields, dg if dg is not None else calibration_grid(run.atom, run.fields))
        br, _ = resonance_branches(run.atom, run.fields, Dg, calibration=cal)
        for i, D in enumerate(Dg):
            lam = dressed_eigenvalues(run.atom, run.fields, D)
            for k in range(3):
                rows.append([run.label, D / MHZ, k, lam[k] / MHZ, br[i, k] / MHZ])
        cals.append(cal.to_dict())
        Dv, dv = vanish_point(run.atom, run.fields.omega_c31) if run.fields.omega_c31 > 0 else (math.nan, math.nan)
        vanish.append({"Delta_MHz": Dv / MHZ, "delta_MHz": dv / MHZ})
    meta = _base_meta("dressed", cfg, runs)
    meta["branch_calibration"] = cals
    meta["vanish_point"] = vanish
    meta["lambda_convention"] = "eigenvalues of 2H/hbar; dressed energies are hbar*lambda/2"
    text = _csv_text(meta, DRESSED_COLUMNS, rows) if out["format"] == "csv" else _json_text(meta, DRESSED_COLUMNS, rows)
    _emit(text, out["path"])
    return EXIT_OK


def run_constants(cfg: dict | None, args) -> int:
    doc = {"code_version": __version__, "constants": constants_report()}
    _emit(json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


_COMMANDS = {
    "spectrum": run_spectrum,
    "contour": run_contour,
    "metrics": run_metrics,
    "fit": run_fit,
    "dressed": run_dressed,
    "constants": run_constants,
}


# ---------------------------------------------------------------- presets


def list_presets() -> list[str]:
    """Names of the bundled figure presets."""
    root = resources.files("fourlevel_eit") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def preset_path(name: str) -> Path:
    """Filesystem path of a bundled preset."""
    p = resources.files("fourlevel_eit") / "presets" / f"{name}.json"
    if not p.is_file():
        raise ConfigurationError(f"unknown preset {name!r}")
    return Path(str(p))


# ------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fourlevel-eit", description="Four-level EIT spectra, maps, metrics and fits.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        if name != "constants":
            src = p.add_mutually_exclusive_group(required=True)
            src.add_argument("--config", help="JSON run configuration")
            src.add_argument("--preset", help="bundled preset name, e.g. fig3a")
        p.add_argument("--out", help="output file (default: config output.path or stdout)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for scans")
        p.add_argument("--seed", type=int, default=None, help="seed for noise injection")
        if name == "fit":
            p.add_argument("--data", action="append", help="measured CSV (repeat for several spectra)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if not hasattr(args, "data"):
        args.data = None
    try:
        if args.threads < 1:
            raise ConfigurationError("--threads must be >= 1")
        cfg = None
        if args.command != "constants":
            if args.preset is not None:
                args.config = str(preset_path(args.preset))
            cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except FitConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except NumericalError as exc:
        idx = getattr(exc, "index", None)
        where = f" [grid index {idx}]" if idx is not None else ""
        print(f"numerical error{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigurationError, ValueError, TypeError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
