"""Command-line front end.

Every run is described by a flat set of keys (see :data:`KEYS`).  Values come
from built-in defaults, then an optional ``--config`` file, then command-line
flags, later sources winning.  A config file is either ``key = value`` text
(``#`` starts a comment) or a JSON object; the JSON written by ``--format json``
carries its resolved configuration under ``"config"`` and can be fed back in.

Exit codes: 0 success, 1 argument or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .covariance import covariance_at, eigenvalues, min_homodyne
from .detection import LoSpinor, lo_quadratures, sql, synodyne_psd_dc, tones_from_spinor
from .errors import InvalidInputError, NumericalError, SynodyneError
from .model import make_params, require_resonant
from .optimize import DEFAULT_GRID, optimal_force_spinor, optimal_noise_spinor, sweep

CSV_SCHEMA = "synodyne-csv v1"
JSON_SCHEMA = "synodyne-json v1"

# figure presets: omega_m / kappa = 0.2, gamma_m / kappa = 0.002, nbar = 0
FIGURE_PARAMS = {"omega_m": 0.2, "gamma_m": 0.002, "nbar": 0.0}
FIG2A_COOP = 0.9
FIG2A_POINTS = 401
FIG3B_INSET_COOPS = (0.08, 2.0)
FIG3B_WAVEFORM_POINTS = 129
FIGURES = ("fig2a", "fig2b", "fig3a", "fig3b")


class UsageError(Exception):
    """Bad command line or configuration (exit code 1)."""


@dataclass(frozen=True)
class Key:
    kind: type
    default: object
    help: str
    choices: tuple | None = None


KEYS = {
    "omega_m": Key(float, 0.2, "mechanical frequency [kappa]"),
    "gamma_m": Key(float, 0.002, "mechanical linewidth [kappa]"),
    "nbar": Key(float, 0.0, "thermal occupation"),
    "kappa": Key(float, 1.0, "cavity linewidth (unit of frequency)"),
    "delta": Key(float, 0.0, "pump detuning (only 0 is supported)"),
    "coop": Key(float, None, "cooperativity C_OM (default 0.9 unless g is given)"),
    "g": Key(float, None, "coupling G [kappa]; alternative to coop"),
    "omega_min": Key(float, None, "lowest frequency (default 0.5 omega_m)"),
    "omega_max": Key(float, None, "highest frequency (default 1.5 omega_m)"),
    "omega_points": Key(int, FIG2A_POINTS, "number of frequencies"),
    "coop_min": Key(float, float(DEFAULT_GRID[0]), "lowest cooperativity"),
    "coop_max": Key(float, float(DEFAULT_GRID[-1]), "highest cooperativity"),
    "coop_points": Key(int, DEFAULT_GRID.size, "number of log-spaced cooperativities"),
    "objective": Key(str, "noise", "LO optimization target", ("noise", "force")),
    "dt": Key(float, 0.02, "integration step [1/kappa]"),
    "duration": Key(float, None, "simulated time (default: just enough for `segments`)"),
    "seed": Key(int, 0, "master RNG seed"),
    "segments": Key(int, 8, "Welch segments for the dc estimate"),
    "lo": Key(str, "noise", "LO spinor for simulate", ("noise", "force", "pm", "am")),
    "method": Key(str, "zoh", "step rule", ("zoh", "euler")),
    "dump": Key(str, None, "write raw records here (plus a .json sidecar)"),
    "figure": Key(str, None, "figure dataset", FIGURES),
    "format": Key(str, None, "output format (default csv; json for simulate)", ("csv", "json")),
    "output": Key(str, None, "output file (default stdout)"),
}

PHYSICS = ("omega_m", "gamma_m", "nbar", "kappa", "delta")
COUPLING = ("coop", "g")
COMMON = ("format", "output")
COMMAND_KEYS = {
    "spectrum": PHYSICS + COUPLING + ("omega_min", "omega_max", "omega_points") + COMMON,
    "optimize": PHYSICS + ("coop_min", "coop_max", "coop_points", "objective") + COMMON,
    "sql": PHYSICS + COMMON,
    "simulate": PHYSICS + COUPLING + ("dt", "duration", "seed", "segments", "lo", "method", "dump") + COMMON,
    "figure": ("figure",) + COMMON,
}


# ---------------------------------------------------------------- configuration

def _coerce(name: str, raw):
    key = KEYS[name]
    if raw is None:
        return None
    try:
        if key.kind is int:
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError
            value = int(raw)
        elif key.kind is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
        else:
            value = str(raw)
    except (TypeError, ValueError):
        raise UsageError(f"{name}: cannot read {raw!r} as {key.kind.__name__}") from None
    if key.choices is not None and value not in key.choices:
        raise UsageError(f"{name}: {value!r} is not one of {', '.join(key.choices)}")
    return value


def parse_config_text(text: str) -> dict:
    """Parse a config file: a JSON object or flat ``key = value`` lines."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config: invalid JSON ({exc.msg} at line {exc.lineno})") from None
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]
        return dict(data)
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected 'key = value'")
        name, value = (part.strip() for part in line.split("=", 1))
        if name in values:
            raise UsageError(f"config line {lineno}: duplicate key {name!r}")
        values[name] = value
    return values


def resolve_config(command: str, file_values: dict, flag_values: dict) -> dict:
    """Merge defaults, file values and flags for ``command``; reject unknown keys."""
    allowed = COMMAND_KEYS[command]
    file_values = dict(file_values)
    file_command = file_values.pop("command", command)
    if file_command != command:
        raise UsageError(f"config is for command {file_command!r}, not {command!r}")
    for name in file_values:
        if name not in KEYS:
            raise UsageError(f"config: unknown key {name!r}")
        if name not in allowed:
            raise UsageError(f"config: key {name!r} does not apply to {command!r}")
    config = {name: KEYS[name].default for name in allowed}
    for source in (file_values, flag_values):
        for name, raw in source.items():
            if raw is not None:
                config[name] = _coerce(name, raw)
    if "coop" in config and config["coop"] is None and config["g"] is None:
        config["coop"] = FIG2A_COOP
    if command == "figure" and config["figure"] is None:
        raise UsageError("figure: name required (one of " + ", ".join(FIGURES) + ")")
    return config


def _params(config: dict, coupling: bool = True):
    kwargs = {name: config[name] for name in PHYSICS}
    if coupling:
        if config.get("coop") is not None and config.get("g") is not None:
            raise UsageError("give either coop or g, not both")
        if config.get("g") is not None:
            return make_params(kwargs.pop("omega_m"), kwargs.pop("gamma_m"), kwargs.pop("nbar"), g=config["g"], **kwargs)
        return make_params(kwargs.pop("omega_m"), kwargs.pop("gamma_m"), kwargs.pop("nbar"), c_om=config["coop"], **kwargs)
    return make_params(kwargs.pop("omega_m"), kwargs.pop("gamma_m"), kwargs.pop("nbar"), g=0.0, **kwargs)


# ---------------------------------------------------------------- datasets

@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list]
    params: dict | None = None


@dataclass
class Record:
    name: str
    values: dict


def _spectrum_table(params, omega, name="spectrum") -> Table:
    require_resonant(params)
    cov = covariance_at(params, omega)
    minus, plus = eigenvalues(cov)
    theta, hom = min_homodyne(cov)
    cols = ["omega", "c11", "re_c12", "im_c12", "c22", "eig_minus", "eig_plus", "hom_theta_star", "hom_min"]
    data = np.column_stack([omega, cov.c11, np.real(cov.c12), np.imag(cov.c12), cov.c22, minus, plus, theta, hom])
    return Table(name, cols, data.tolist())


def _coop_grid(config) -> np.ndarray:
    lo, hi, n = config["coop_min"], config["coop_max"], config["coop_points"]
    if not (0 < lo and (lo < hi or (lo == hi and n == 1)) and n >= 1):
        raise UsageError("need 0 < coop_min < coop_max and coop_points >= 1")
    return np.array([lo]) if n == 1 else np.logspace(math.log10(lo), math.log10(hi), n)


def _sweep_table(params, grid, objective, name) -> Table:
    rows = sweep(params, grid, objective)
    cols = ["c_om", "pow_am", "pow_pm", "objective", "reference"]
    return Table(name, cols, [[r.c_om, r.pow_am, r.pow_pm, r.objective, r.reference] for r in rows])


def cmd_spectrum(config) -> Table:
    params = _params(config)
    lo = 0.5 * params.omega_m if config["omega_min"] is None else config["omega_min"]
    hi = 1.5 * params.omega_m if config["omega_max"] is None else config["omega_max"]
    n = config["omega_points"]
    if n < 1 or hi < lo or (hi == lo and n > 1):
        raise UsageError("need omega_min <= omega_max and omega_points >= 1")
    return _spectrum_table(params, np.linspace(lo, hi, n))


def cmd_optimize(config) -> Table:
    params = _params(config, coupling=False)
    return _sweep_table(params, _coop_grid(config), config["objective"], "optimize-" + config["objective"])


def cmd_sql(config) -> Record:
    params = _params(config, coupling=False)
    require_resonant(params)
    c_om_star, s_sql = sql(params)
    return Record("sql", {"c_om_star": c_om_star, "s_sql": s_sql})


def _simulation_spinor(params, lo: str) -> LoSpinor:
    if lo == "am":
        return LoSpinor(1.0, 0.0)
    if lo == "pm":
        return LoSpinor(0.0, 1.0)
    if lo == "force":
        return optimal_force_spinor(params)[0]
    return optimal_noise_spinor(covariance_at(params, params.omega_m))[0]


def cmd_simulate(config) -> Record:
    from .langevin import (
        SimConfig,
        build_state_space,
        dc_segment_length,
        duration_for_segments,
        run_oracle,
    )
    from .langevin.demod import XI
    from .langevin.records import RecordWriter
    from .langevin.statespace import OUTPUT_NAMES

    params = _params(config)
    ss = build_state_space(params)
    spinor = _simulation_spinor(params, config["lo"])
    tones = tones_from_spinor(spinor, 1.0, params.omega_m)
    dt = config["dt"]
    if config["segments"] < 1:
        raise UsageError("segments must be >= 1")
    seg = dc_segment_length(params.gamma_m, dt)
    duration = config["duration"]
    if duration is None:
        duration = duration_for_segments(seg, config["segments"], dt)
    if duration < duration_for_segments(seg, config["segments"], dt) * (1 - 1e-12):
        raise UsageError(f"duration {duration!r} is too short for {config['segments']} segments of {seg * dt!r}")
    cfg = SimConfig(dt, duration, seed=config["seed"], segments=config["segments"], method=config["method"])
    writer = None
    if config["dump"] is not None:
        channels = list(OUTPUT_NAMES) + [XI]
        writer = RecordWriter(config["dump"], dt, channels, t0=dt / 2 if cfg.method == "zoh" else 0.0,
                              params=params, seed=cfg.seed)

    def dump(block, xi):
        writer.append({OUTPUT_NAMES[0]: block[OUTPUT_NAMES[0]], OUTPUT_NAMES[1]: block[OUTPUT_NAMES[1]], XI: xi})

    try:
        result = run_oracle(ss, cfg, tones, seg, on_block=dump if writer else None)
    finally:
        if writer is not None:
            writer.close()
    reference = float(synodyne_psd_dc(covariance_at(params, params.omega_m), spinor))
    return Record("simulate", {
        "psd_dc": result.psd_dc,
        "stderr": result.stderr_dc,
        "analytic_reference": reference,
        "z_score": (result.psd_dc - reference) / result.stderr_dc,
        "seed": cfg.seed,
        "n_segments": result.n_segments,
        "alpha_am": [spinor.alpha_am.real, spinor.alpha_am.imag],
        "alpha_pm": [spinor.alpha_pm.real, spinor.alpha_pm.imag],
    })


def figure_params(coop=None):
    if coop is None:
        return make_params(**FIGURE_PARAMS, g=0.0)
    return make_params(**FIGURE_PARAMS, c_om=coop)


def figure_dataset(name: str) -> Table:
    """Dataset behind one figure panel, at the caption parameters."""
    base = figure_params()
    meta = dict(FIGURE_PARAMS)
    if name == "fig2a":
        params = figure_params(FIG2A_COOP)
        omega = params.omega_m * np.linspace(0.5, 1.5, FIG2A_POINTS)
        table = _spectrum_table(params, omega, name)
        meta["coop"] = FIG2A_COOP
    elif name == "fig2b":
        table = _sweep_table(base, DEFAULT_GRID, "noise", name)
    elif name == "fig3a":
        _, s_sql = sql(base)
        rows = sweep(base, DEFAULT_GRID, "force")
        cols = ["c_om", "synodyne_rel", "homodyne_rel", "synodyne", "homodyne"]
        data = [[r.c_om, r.objective / s_sql, r.reference / s_sql, r.objective, r.reference] for r in rows]
        table = Table(name, cols, data)
        meta["s_sql"] = s_sql
    elif name == "fig3b":
        table = _fig3b()
    else:
        raise UsageError(f"unknown figure {name!r}")
    table.params = meta
    return table


def _fig3b() -> Table:
    cols = ["kind", "c_om", "pow_am", "pow_pm", "t", "re_alpha", "im_alpha"]
    rows = [["sweep", r.c_om, r.pow_am, r.pow_pm, None, None, None]
            for r in sweep(figure_params(), DEFAULT_GRID, "force")]
    for coop in FIG3B_INSET_COOPS:
        params = figure_params(coop)
        spinor, _ = optimal_force_spinor(params)
        tones = tones_from_spinor(spinor, 1.0, params.omega_m)
        t = np.linspace(0.0, 2 * math.pi / params.omega_m, FIG3B_WAVEFORM_POINTS)
        re, im = lo_quadratures(tones, t)
        rows += [["waveform", coop, spinor.pow_am, spinor.pow_pm, ti, a, b] for ti, a, b in zip(t, re, im)]
    return Table("fig3b", cols, rows)


def cmd_figure(config) -> Table:
    return figure_dataset(config["figure"])


COMMANDS = {
    "spectrum": cmd_spectrum,
    "optimize": cmd_optimize,
    "sql": cmd_sql,
    "simulate": cmd_simulate,
    "figure": cmd_figure,
}


# ---------------------------------------------------------------- output

def _num(value) -> str:
    """Shortest round-trip text of a number; empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def _jsonable(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, list):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def render(result, command: str, config: dict, fmt: str) -> str:
    shown = {"command": command, **{k: v for k, v in config.items() if k not in ("output", "format") and v is not None}}
    if fmt == "json":
        doc = {"schema": JSON_SCHEMA, "config": shown, "dataset": result.name}
        if isinstance(result, Table):
            if result.params is not None:
                doc["params"] = result.params
            doc["columns"] = result.columns
            doc["rows"] = result.rows
        else:
            doc["result"] = result.values
        return json.dumps(_jsonable(doc), indent=1, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# {CSV_SCHEMA} {result.name}\n")
    writer = csv.writer(buf, lineterminator="\n")
    if isinstance(result, Table):
        writer.writerow(result.columns)
        writer.writerows([_num(v) for v in row] for row in result.rows)
    else:
        flat = {}
        for k, v in result.values.items():
            if isinstance(v, list):
                flat[k + "_re"], flat[k + "_im"] = v
            else:
                flat[k] = v
        writer.writerow(list(flat))
        writer.writerow([_num(v) for v in flat.values()])
    return buf.getvalue()


# ---------------------------------------------------------------- argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="synodyne", description="Complex squeezing spectra and synodyne detector design.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "spectrum": "covariance matrix, eigenvalues and best homodyne over a frequency grid",
        "optimize": "optimal LO power split over a cooperativity grid",
        "sql": "standard quantum limit of phase-quadrature homodyne force sensing",
        "simulate": "time-domain oracle: synodyne dc noise of a simulated record",
        "figure": "dataset behind a figure panel (caption parameters)",
    }
    for command, keys in COMMAND_KEYS.items():
        p = sub.add_parser(command, help=helps[command], description=helps[command])
        p.add_argument("--config", help="config file (key = value lines or JSON)")
        for name in keys:
            key = KEYS[name]
            if name == "figure":
                p.add_argument("figure", nargs="?", help="one of " + ", ".join(FIGURES))
                continue
            p.add_argument(_flag(name), dest=name, default=None, help=key.help,
                           choices=key.choices, metavar=None if key.choices else name.upper())
    return parser


def run(argv=None, stdout=None) -> int:
    """Run the CLI; returns the process exit code."""
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        file_values = {}
        if args.config is not None:
            try:
                file_values = parse_config_text(Path(args.config).read_text())
            except OSError as exc:
                raise UsageError(f"config: {exc.strerror}: {args.config}") from None
        flags = {name: getattr(args, name) for name in COMMAND_KEYS[command]}
        config = resolve_config(command, file_values, flags)
        result = COMMANDS[command](config)
        fmt = config["format"] or ("json" if command == "simulate" else "csv")
        text = render(result, command, config, fmt)
        if config["output"] is None:
            stdout.write(text)
        else:
            try:
                Path(config["output"]).write_text(text)
            except OSError as exc:
                raise UsageError(f"cannot write {config['output']}: {exc.strerror}") from None
        return 0
    except (UsageError, InvalidInputError) as exc:
        print(f"synodyne: error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"synodyne: numerical failure: {exc}", file=sys.stderr)
        return 2
    except SynodyneError as exc:
        print(f"synodyne: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
