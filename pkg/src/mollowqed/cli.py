"""Command-line front end.

Settings come from an INI-style file (sections ``[params]``, ``[coupling]``,
``[grid]``, ``[time]``, ``[output]``) and/or flags; flags win. Data goes to
``--out`` or stdout, diagnostics to stderr. Exit status: 0 success,
2 validation error, 3 numerical convergence failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .core import ConvergenceError, ParameterError, make_params
from .dynamics import correlation, mollow_generator, spectrum_numeric, steady_state_solve
from .mollow import A2_VARIANTS, DEFAULT_A2_VARIANT, incoherent_density, steady_state
from .resolvent import LevelShifts, extract_generator
from .selfenergy import COUPLING_KINDS, CouplingModel, width_report

MODES = ("spectrum", "steady-state", "correlation", "linewidths", "compare", "generator")
FORMATS = ("csv", "json")
SCHEMA_VERSION = 1

#: versioned column layouts of the tabular outputs
COLUMNS = {
    "spectrum": ["omega", "density_analytic", "density_numeric", "abs_diff", "omega_over_gamma",
                 "offset_over_gamma"],
    "steady-state": ["alpha", "beta", "coh_re", "coh_im", "coh_abs", "coherent_weight"],
    "correlation": ["tau", "tau_times_gamma", "c_re", "c_im"],
    "linewidths": ["omega_l", "omega_l_over_gamma", "detuning", "detuning_over_gamma",
                   "gamma_natural", "gamma0", "gamma_plus", "gamma_minus",
                   "gamma0_over_gamma", "gamma_plus_over_gamma", "gamma_minus_over_gamma",
                   "lamb_residual"],
    "compare": ["quantity", "value"],
    "generator": ["source", "entry", "row", "col", "re", "im"],
}

COMPARE_RTOL = 1e-8


class ConfigError(ParameterError):
    pass


@dataclass
class RunConfig:
    mode: str
    omega0: float
    omega_l: float
    gamma: float
    rabi_abs: float
    rabi_phase: float = 0.0
    n_photons: int = 10**6
    coupling: str = "linear"
    coupling_exponent: float | None = None
    coupling_cutoff: float | None = None
    shifts: str = "mollow"
    grid: tuple | None = None
    a2_variant: str = DEFAULT_A2_VARIANT
    time: tuple | None = None
    fmt: str = "csv"
    out: str | None = None
    source: dict = field(default_factory=dict)

    def params(self):
        return make_params(self.omega0, self.omega_l, self.gamma,
                           self.rabi_abs * np.exp(1j * self.rabi_phase), self.n_photons)


# (section, key, flag dest, converter)
_FILE_KEYS = [
    ("params", "omega0", "omega0", float),
    ("params", "omegaL", "omegaL", float),
    ("params", "gamma", "gamma", float),
    ("params", "rabi_abs", "rabi_abs", float),
    ("params", "rabi_phase", "rabi_phase", float),
    ("params", "n_photons", "n_photons", int),
    ("coupling", "kind", "coupling", str),
    ("coupling", "exponent", "coupling_exponent", float),
    ("coupling", "cutoff", "coupling_cutoff", float),
    ("coupling", "shifts", "shifts", str),
    ("grid", "min", "grid_min", float),
    ("grid", "max", "grid_max", float),
    ("grid", "n", "grid_n", int),
    ("grid", "a2_variant", "a2_variant", str),
    ("time", "tau_max", "tau_max", float),
    ("time", "n_samples", "n_samples", int),
    ("output", "mode", "mode", str),
    ("output", "format", "format", str),
    ("output", "path", "out", str),
]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mollowqed",
                                description="Resonance-fluorescence spectrum of a driven two-level atom.")
    p.add_argument("--config", help="INI-style configuration file")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--omega0", type=float)
    p.add_argument("--omegaL", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--rabi-abs", dest="rabi_abs", type=float)
    p.add_argument("--rabi-phase", dest="rabi_phase", type=float)
    p.add_argument("--n-photons", dest="n_photons", type=int)
    p.add_argument("--coupling", choices=COUPLING_KINDS)
    p.add_argument("--coupling-exponent", dest="coupling_exponent", type=float)
    p.add_argument("--coupling-cutoff", dest="coupling_cutoff", type=float)
    p.add_argument("--shifts", choices=("mollow", "coupling"),
                   help="level shifts fed to the resolvent in compare/generator modes")
    p.add_argument("--grid-min", dest="grid_min", type=float,
                   help="grid start: absolute frequency (spectrum) or detuning (linewidths)")
    p.add_argument("--grid-max", dest="grid_max", type=float)
    p.add_argument("--grid-n", dest="grid_n", type=int)
    p.add_argument("--a2-variant", dest="a2_variant", choices=A2_VARIANTS)
    p.add_argument("--tau-max", dest="tau_max", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=FORMATS)
    return p


def _read_file(path) -> dict:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    if not cp.read(path, encoding="utf-8"):
        raise ConfigError(f"cannot read config file {path}")
    values = {}
    known = {(s, k) for s, k, _, _ in _FILE_KEYS}
    for section in cp.sections():
        for key in cp[section]:
            if (section, key) not in known:
                raise ConfigError(f"unknown config key [{section}] {key}")
    for section, key, dest, conv in _FILE_KEYS:
        if cp.has_option(section, key):
            raw = cp.get(section, key).strip()
            try:
                values[dest] = conv(float(raw)) if conv is int else conv(raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge file values and flags (flags override) and validate per mode."""
    values = _read_file(args.config) if args.config else {}
    for _, _, dest, _ in _FILE_KEYS:
        v = getattr(args, dest, None)
        if v is not None:
            values[dest] = v
    mode = values.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    for req in ("omega0", "gamma", "rabi_abs"):
        if req not in values:
            raise ConfigError(f"missing required parameter {req}")
    grid = None
    if mode in ("spectrum", "linewidths"):
        try:
            grid = (values["grid_min"], values["grid_max"], values["grid_n"])
        except KeyError as exc:
            raise ConfigError(f"mode {mode} needs the grid block (missing {exc.args[0]})") from None
        if not grid[0] < grid[1] or grid[2] < 2:
            raise ConfigError(f"invalid grid {grid}")
    time = None
    if mode in ("spectrum", "correlation"):
        if "tau_max" not in values:
            raise ConfigError(f"mode {mode} needs tau_max")
        n = values.get("n_samples")
        if mode == "correlation" and n is None:
            raise ConfigError("mode correlation needs n_samples")
        time = (values["tau_max"], n)
    fmt = values.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    a2 = values.get("a2_variant", DEFAULT_A2_VARIANT)
    if a2 not in A2_VARIANTS:
        raise ConfigError(f"a2_variant must be one of {A2_VARIANTS}")
    kind = values.get("coupling", "linear")
    if kind not in COUPLING_KINDS:
        raise ConfigError(f"coupling must be one of {COUPLING_KINDS}")
    shifts = values.get("shifts", "mollow")
    if shifts not in ("mollow", "coupling"):
        raise ConfigError("shifts must be 'mollow' or 'coupling'")
    return RunConfig(
        mode=mode,
        omega0=values["omega0"],
        omega_l=values.get("omegaL", values["omega0"]),
        gamma=values["gamma"],
        rabi_abs=values["rabi_abs"],
        rabi_phase=values.get("rabi_phase", 0.0),
        n_photons=values.get("n_photons", 10**6),
        coupling=kind,
        coupling_exponent=values.get("coupling_exponent"),
        coupling_cutoff=values.get("coupling_cutoff"),
        shifts=shifts,
        grid=grid,
        a2_variant=a2,
        time=time,
        fmt=fmt,
        out=values.get("out"),
        source=dict(values),
    )


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (str, int, np.integer)):
        return str(x)
    return "%.17g" % float(x)


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _model(cfg: RunConfig, params):
    return CouplingModel.for_params(cfg.coupling, params, cfg.coupling_exponent, cfg.coupling_cutoff)


def _shifts(cfg: RunConfig, params):
    if cfg.shifts == "mollow":
        return LevelShifts.mollow(params.gamma)
    return width_report(_model(cfg, params), params).level_shifts()


def compute(cfg: RunConfig):
    """Run the selected mode; returns ``(rows, meta)``."""
    params = cfg.params()
    g = params.gamma
    meta = {}
    rows = []
    if cfg.mode == "steady-state":
        ss = steady_state(params)
        rows.append([ss.alpha, ss.beta, ss.coh.real, ss.coh.imag, abs(ss.coh),
                     2 * np.pi * abs(ss.coh) ** 2])
    elif cfg.mode == "spectrum":
        omega = np.linspace(*cfg.grid[:2], cfg.grid[2])
        tau_max, n = cfg.time
        num = spectrum_numeric(params, omega, tau_max, n)
        ana = np.asarray(incoherent_density(params, omega, cfg.a2_variant), dtype=float)
        diff = np.abs(ana - num.density)
        ref = np.abs(num.density).max()
        errors = {}
        for v in A2_VARIANTS:
            other = np.asarray(incoherent_density(params, omega, v), dtype=float)
            errors[v] = float(np.abs(other - num.density).max() / ref) if ref > 0 else 0.0
        ss = steady_state(params)
        meta.update(a2_variant=cfg.a2_variant, a2_relative_linf=errors,
                    a2_oracle_selected=min(errors, key=errors.get),
                    coherent_weight=2 * np.pi * abs(ss.coh) ** 2,
                    coherent_weight_numeric=num.coherent_weight,
                    max_abs_diff=float(diff.max()))
        for i, w in enumerate(omega):
            rows.append([w, ana[i], num.density[i], diff[i], w / g if g else math.nan,
                         (w - params.omega_l) / g if g else math.nan])
    elif cfg.mode == "correlation":
        series = correlation(params, cfg.time[0], cfg.time[1])
        meta.update(c_inf_re=series.c_inf.real, c_inf_im=series.c_inf.imag)
        for t, c in zip(series.tau, series.value):
            rows.append([t, t * g, c.real, c.imag])
    elif cfg.mode == "linewidths":
        # grid values are detunings; omega_l follows
        for det in np.linspace(*cfg.grid[:2], cfg.grid[2]):
            wl = params.omega0 + det
            p = make_params(params.omega0, wl, g, params.rabi, params.n_photons)
            rep = width_report(_model(cfg, p), p)
            d = p.detuning
            rows.append([wl, wl / g, d, d / g, rep.gamma_natural, rep.gamma0, rep.gamma_plus,
                         rep.gamma_minus, rep.gamma0 / g, rep.gamma_plus / g, rep.gamma_minus / g,
                         rep.lamb_residual])
        meta.update(coupling=cfg.coupling)
    elif cfg.mode == "compare":
        ext = extract_generator(params, _shifts(cfg, params))
        ref = mollow_generator(params)
        dev = ext.max_abs_diff(ref)
        tol = COMPARE_RTOL * params.scale
        rows += [["shifts", cfg.shifts], ["scale", params.scale],
                 ["max_abs_generator_deviation", dev], ["tolerance", tol],
                 ["passed", dev <= tol]]
        print(f"max|Δgenerator| = {dev:.3e} {'<=' if dev <= tol else '>'} "
              f"{COMPARE_RTOL:g}*scale = {tol:.3e}", file=sys.stderr)
    elif cfg.mode == "generator":
        ext = extract_generator(params, _shifts(cfg, params))
        for name, gen in (("mollow", mollow_generator(params)), ("resolvent", ext)):
            for i in range(3):
                for j in range(3):
                    rows.append([name, "m", i, j, gen.m[i, j].real, gen.m[i, j].imag])
            for i in range(3):
                rows.append([name, "b", i, 0, gen.b[i].real, gen.b[i].imag])
        ss = steady_state_solve(mollow_generator(params)) if g > 0 else None
        if ss is not None:
            meta.update(steady_beta=ss.beta.real)
    return rows, meta


def _meta(cfg: RunConfig, extra: dict) -> dict:
    d = asdict(cfg)
    d.pop("source")
    return {"library": {"name": "mollowqed", "version": __version__},
            "schema_version": SCHEMA_VERSION, "mode": cfg.mode, "config": d, "meta": extra}


def render(cfg: RunConfig, rows, meta) -> tuple[str, str | None]:
    """Serialised data and, for CSV, the metadata sidecar."""
    cols = COLUMNS[cfg.mode]
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
        side = json.dumps(_jsonable(_meta(cfg, meta)), indent=2, ensure_ascii=False) + "\n"
        return buf.getvalue(), side
    doc = _meta(cfg, meta)
    doc["columns"] = cols
    doc["rows"] = [dict(zip(cols, r)) for r in rows]
    return json.dumps(_jsonable(doc), indent=2, ensure_ascii=False) + "\n", None


def run(cfg: RunConfig) -> int:
    try:
        rows, meta = compute(cfg)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    data, side = render(cfg, rows, meta)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        if side is not None:
            with open(cfg.out + ".meta.json", "w", encoding="utf-8", newline="") as fh:
                fh.write(side)
    else:
        sys.stdout.write(data)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    warnings.simplefilter("default")
    try:
        cfg = resolve_config(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)



def main_exit():
    sys.exit(main())
