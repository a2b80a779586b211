"""Command-line front end.

Each invocation runs one command and writes a CSV data file plus a JSON
sidecar next to it (same stem, ``.json``).  Failures print a single JSON
line on stderr and exit with a code that identifies the failure class.

Config files are flat ``key = value`` text; keys are option names with or
without leading dashes (``sites = 5`` or ``v-over-j = 0.01``).  Flags on
the command line override the file, which overrides built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy

from . import __version__
from . import dynamics, experiments, splitter
from .core_model import BasisSizeError, ConfigurationError, ImpossibleLossError
from .experiments import ExperimentResult

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_SCHEMA = 3
EXIT_SIZE = 4
EXIT_IO = 5

COMMANDS = ("balance", "matrix", "interferometer", "scan-interactions", "scan-timing",
            "loss", "spectrum", "scaling", "tunneling")


class UsageError(Exception):
    """Unknown command or malformed command line."""


class SchemaError(Exception):
    """A parameter failed validation for the selected command."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _grid(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive linspace) or a comma list."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError
            return np.linspace(start, stop, count)
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use start:stop:count or a,b,c") from None


def _window(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad window {text!r}; use start:stop") from None
    return a, b


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ringsplit", description="Ring-lattice multiport splitter simulations.")
    parser.add_argument("--version", action="version", version=f"ringsplit {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    def command(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--out", type=Path, default=Path(f"{name}.csv"), help="CSV output path")
        p.add_argument("--config", type=Path, help="key=value config file")
        p.add_argument("--threads", type=int, default=1, help="workers for sweeps")
        p.add_argument("--seed", type=int, default=0, help="recorded only; all commands are deterministic")
        return p

    def sites(p, default=3):
        p.add_argument("--sites", "-S", type=int, default=default)

    def atoms(p, default=1):
        p.add_argument("--atoms", "-N", type=int, default=default)

    def tau(p):
        p.add_argument("--tau", type=float, help="splitter time Jt (default: balance time)")

    p = command("balance", "find the balanced-splitter time")
    sites(p)
    p.add_argument("--window", type=_window, default=(0.0, 5000.0))
    p.add_argument("--threshold", type=float, default=splitter.BALANCE_THRESHOLD)
    p.add_argument("--step", type=float, default=1e-3)

    p = command("matrix", "transfer matrix R_S(Jt)")
    sites(p)
    p.add_argument("--jt", type=float, help="evolution time (default: balance time)")

    p = command("interferometer", "splitter, phase ramp, inverse splitter")
    sites(p)
    atoms(p)
    p.add_argument("--v-over-j", type=float, default=0.0)
    tau(p)
    p.add_argument("--phi-grid", type=_grid, default=_grid("0:6.283185307179586:200"))

    p = command("scan-interactions", "fidelity against interaction strength")
    sites(p)
    atoms(p, 5)
    tau(p)
    p.add_argument("--vn-grid", type=_grid, default=_grid("0:1:51"))
    p.add_argument("--target", type=float, default=0.95)

    p = command("scan-timing", "fidelity against splitter timing error")
    sites(p)
    atoms(p, 5)
    tau(p)
    p.add_argument("--eps-grid", type=_grid, default=_grid("0:0.2:41"))
    p.add_argument("--target", type=float, default=0.95)

    p = command("loss", "lose one atom half-way through the splitter")
    sites(p)
    atoms(p, 3)
    p.add_argument("--v-over-j", type=float, default=0.0)
    tau(p)
    p.add_argument("--loss-site", type=int, help="default: every site")

    p = command("spectrum", "Bogoliubov spectrum and adiabaticity limit")
    sites(p)
    p.add_argument("--vn-over-j", type=float, default=0.85)
    p.add_argument("--s-max", type=int, default=20)

    p = command("scaling", "balance time against ring size")
    p.add_argument("--sites-list", type=_int_list, default=[3, 4, 5, 7, 9])

    p = command("tunneling", "tunneling rate and intensity-noise sensitivity")
    p.add_argument("--depth-grid", type=_grid, default=_grid("1:20:20"))
    p.add_argument("--depth-ratio", type=float, default=2.0)
    p.add_argument("--wavelength", type=float, default=dynamics.DEFAULT_WAVELENGTH)
    p.add_argument("--mass", type=float, default=dynamics.RB87_MASS)
    p.add_argument("--delta", type=float, default=0.001)
    return parser


def read_config(path: Path) -> dict[str, str]:
    """Parse a flat key=value file; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SchemaError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError(f"no command given; choose one of {', '.join(COMMANDS)}")
    if args.config is not None:
        try:
            cfg = read_config(args.config)
        except OSError as exc:
            raise SchemaError(f"cannot read config {args.config}: {exc}") from None
        sub = _subparser(parser, args.command)
        actions = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in cfg.items():
            if key in ("config", "help") or key not in actions:
                raise SchemaError(f"config key {key!r} is not an option of {args.command!r}")
            conv = actions[key].type or str
            try:
                defaults[key] = conv(value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise SchemaError(f"config key {key!r}: {exc}") from None
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    validate(args)
    return args


def validate(args: argparse.Namespace) -> None:
    """Check every parameter of the chosen command before any computation."""
    def need(cond, msg):
        if not cond:
            raise SchemaError(msg)

    ns = vars(args)
    if "sites" in ns:
        need(args.sites >= 2, f"--sites must be >= 2, got {args.sites}")
    if "atoms" in ns:
        need(args.atoms >= 1, f"--atoms must be >= 1, got {args.atoms}")
    need(args.threads >= 1, "--threads must be >= 1")
    if ns.get("tau") is not None:
        need(math.isfinite(args.tau), "--tau must be finite")
    for key in ("phi_grid", "vn_grid", "eps_grid", "depth_grid"):
        if key in ns:
            g = ns[key]
            need(g.size > 0 and np.all(np.isfinite(g)), f"--{key.replace('_', '-')} is empty or not finite")
            need(g.size < 2 or np.all(np.diff(g) > 0), f"--{key.replace('_', '-')} must be strictly increasing")
    cmd = args.command
    if cmd == "balance":
        lo, hi = args.window
        need(hi > lo, "--window must be nonempty")
        need(args.threshold > 0, "--threshold must be positive")
        need(0 < args.step <= 1e-3, "--step must be in (0, 1e-3]")
    elif cmd == "scan-interactions":
        need(np.all(args.vn_grid >= 0), "--vn-grid must be non-negative")
        need(0 < args.target < 1, "--target must lie in (0, 1)")
    elif cmd == "scan-timing":
        need(0 < args.target < 1, "--target must lie in (0, 1)")
    elif cmd == "loss":
        need(args.atoms >= 2, "loss needs --atoms >= 2")
    elif cmd == "spectrum":
        need(args.vn_over_j >= 0, "--vn-over-j must be non-negative")
        need(args.s_max >= 3, "--s-max must be >= 3")
    elif cmd == "scaling":
        need(len(args.sites_list) >= 2 and min(args.sites_list) >= 2,
             "--sites-list needs at least two sizes >= 2")
    elif cmd == "tunneling":
        need(np.all(args.depth_grid > 0) and args.depth_ratio > 0, "lattice depths must be positive")
        need(args.wavelength > 0 and args.mass > 0, "--wavelength and --mass must be positive")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def emit_csv(result: ExperimentResult, path: Path | str) -> Path:
    """Write ``result`` as comma-separated text with LF line endings."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(result.columns)
        for row in result.data:
            w.writerow([_fmt(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def emit_json(payload: dict, path: Path | str) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def _tau(args) -> float:
    return args.tau if args.tau is not None else splitter.balance_time(args.sites).tau


def _run(args) -> tuple[ExperimentResult, dict]:
    cmd = args.command
    summary: dict = {}
    if cmd == "balance":
        res = splitter.find_balance_time(args.sites, args.window, args.threshold, args.step)
        summary = res.as_dict()
        om = splitter.omegas(args.sites, res.tau)
        result = ExperimentResult("balance", {"S": args.sites}, ("offset", "modulus", "multiplicity"),
                                  [(o.offset, o.modulus, o.multiplicity) for o in om])
    elif cmd == "matrix":
        jt = args.jt if args.jt is not None else splitter.balance_time(args.sites).tau
        R = splitter.transfer_matrix(args.sites, jt)
        S = args.sites
        rows = [(r, c, R.matrix[r, c].real, R.matrix[r, c].imag, abs(R.matrix[r, c]))
                for r in range(S) for c in range(S)]
        result = ExperimentResult("matrix", {"S": S, "Jt": jt}, ("row", "col", "re", "im", "abs"), rows)
        summary = {"Jt": jt, "chi": splitter.chi(S, jt), "unitarity_error": R.unitarity_error(),
                   "inverse_fidelity": splitter.inverse_splitter_fidelity(S, jt)}
    elif cmd == "interferometer":
        result = experiments.interferometer_sweep(args.sites, args.atoms, args.phi_grid, _tau(args),
                                                  args.v_over_j, workers=args.threads)
        summary = {"tau": result.parameters["tau"]}
        if args.sites == 3 and args.v_over_j == 0:
            ref = experiments.three_path_populations(args.phi_grid)
            summary["max_deviation_from_closed_form"] = float(np.max(np.abs(result.data[:, 1:] - ref)))
    elif cmd == "scan-interactions":
        tau = _tau(args)
        result = experiments.interaction_fidelity_scan(args.sites, args.atoms, args.vn_grid, tau,
                                                       workers=args.threads)
        crit = experiments.critical_interaction(args.sites, args.atoms, args.target, tau)
        summary = {"tau": tau, "target": args.target, "status": crit.status,
                   "VN_over_J_critical": crit.value,
                   "V_over_J_critical": None if crit.value is None else crit.value / args.atoms,
                   "non_monotonic": crit.non_monotonic}
    elif cmd == "scan-timing":
        tau = _tau(args)
        result = experiments.timing_error_scan(args.sites, args.atoms, args.eps_grid, tau,
                                               workers=args.threads)
        summary = {"tau": tau, "eps_critical": result.parameters["eps_critical"],
                   "fractional_eps_critical": result.parameters["fractional_eps_critical"]}
    elif cmd == "loss":
        tau = _tau(args)
        sites_ = range(args.sites) if args.loss_site is None else [args.loss_site]
        rows = []
        for j in sites_:
            try:
                r = experiments.loss_experiment(args.sites, args.atoms, args.v_over_j, tau, j)
            except ImpossibleLossError:
                if args.loss_site is not None:
                    raise
                continue
            rows.append((r.loss_site, r.loss_weight, r.fidelity))
        result = ExperimentResult("loss", {"S": args.sites, "N": args.atoms, "V_over_J": args.v_over_j,
                                           "tau": tau}, ("loss_site", "loss_weight", "fidelity"), rows)
        summary = {"tau": tau, "min_fidelity": min(r[2] for r in rows)}
    elif cmd == "spectrum":
        spec = dynamics.bogoliubov_spectrum(args.sites, 1, 1.0, args.vn_over_j)
        result = ExperimentResult("spectrum", {"S": args.sites, "VN_over_J": args.vn_over_j},
                                  ("k", "omega_over_J"), list(enumerate(spec.omegas)))
        summary = dynamics.adiabaticity_limit(args.vn_over_j, args.s_max).as_dict()
    elif cmd == "scaling":
        result = experiments.jt_scaling(args.sites_list)
        summary = {"fit": result.fit.as_dict(), **result.flags}
    elif cmd == "tunneling":
        g = args.depth_grid
        result = ExperimentResult("tunneling", {}, ("depth_ratio", "hbarJ_over_ER"),
                                  np.column_stack([g, [dynamics.tunneling_rate(r) for r in g]]))
        summary = {
            "depth_ratio": args.depth_ratio,
            "hbarJ_over_ER": dynamics.tunneling_rate(args.depth_ratio),
            "recoil_energy_J": dynamics.recoil_energy(args.mass, args.wavelength),
            "J_Hz": dynamics.tunneling_frequency(args.depth_ratio, args.mass, args.wavelength),
            "delta": args.delta,
            "J_tilde_over_J": dynamics.intensity_fluctuation(1.0, args.delta),
        }
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(f"unknown command {cmd!r}")
    return result, summary


def _error(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "exit_code": code, "message": str(message)}), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        return _error("usage", exc, EXIT_USAGE)
    except SchemaError as exc:
        return _error("schema", exc, EXIT_SCHEMA)

    t0 = time.perf_counter()
    try:
        result, summary = _run(args)
    except BasisSizeError as exc:
        return _error("dimension", exc, EXIT_SIZE)
    except (ConfigurationError, ImpossibleLossError, ValueError) as exc:
        return _error("schema", exc, EXIT_SCHEMA)
    elapsed = time.perf_counter() - t0

    params = {k: v for k, v in vars(args).items() if k not in ("out", "config", "command")}
    payload = {
        "command": args.command,
        "parameters": params,
        "result": summary,
        "columns": list(result.columns),
        "units": result.units,
        "fit": result.fit.as_dict() if result.fit else None,
        "flags": result.flags,
        "versions": {"ringsplit": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "timings": {"wall_seconds": elapsed},
    }
    try:
        emit_csv(result, args.out)
        emit_json(payload, args.out.with_suffix(".json"))
    except OSError as exc:
        return _error("io", exc, EXIT_IO)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
