"""Command-line interface.

Four subcommands cover the workflow: `steady` for closed-form mode
temperatures and occupancies, `sweep` for a (coupling, cold-load) grid,
`simulate` for protocol trace generation, `analyze` for trace
reduction.  Exit codes: 0 success, 2 configuration problem, 3 I/O
failure, 4 malformed data file, 5 estimator non-convergence.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import (
    PORT_ROLE_COOLING,
    RunConfig,
    config_digest,
    config_items,
    default_run_config,
    load_run_config,
    with_seed,
)
from .errors import AnalysisError, ConfigError, DataFormatError, DomainError
from .pipeline import analyze_run, simulate_run
from .receiver import noise_power_reduction_curve, noise_power_reduction_db
from .thermal import mode_temperature, photon_occupancy, sweep_mode_temperature
from . import tracefile

_EXIT_CONFIG = 2
_EXIT_IO = 3
_EXIT_DATA = 4
_EXIT_NONCONVERGENCE = 5


def _fmt(value: float) -> str:
    return repr(float(value))


def _emit(args, items: list[tuple[str, str]], human_lines: list[str]) -> None:
    if args.porcelain:
        for key, value in items:
            print(f"{key}={value}")
    else:
        for line in human_lines:
            print(line)


def _outpath(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def cmd_steady(args, cfg: RunConfig) -> int:
    cooled = mode_temperature(cfg.baths)
    ambient_baths = cfg.baths.subset(cfg.persistent_port_indices())
    ambient = mode_temperature(ambient_baths)
    f0 = cfg.mode.frequency_hz
    n_cooled = photon_occupancy(f0, cooled)
    n_ambient = photon_occupancy(f0, ambient)
    deltap = noise_power_reduction_db(cfg.receiver, cooled, ambient)

    items = [
        ("t_mode_cooled_k", _fmt(cooled)),
        ("occupancy_cooled", _fmt(n_cooled)),
        ("t_mode_ambient_k", _fmt(ambient)),
        ("occupancy_ambient", _fmt(n_ambient)),
        ("deltap_predicted_db", _fmt(deltap)),
    ]
    human = [
        f"mode temperature, all ports connected : {cooled:10.3f} K"
        f"  ({n_cooled:9.1f} photons)",
        f"mode temperature, monitoring only     : {ambient:10.3f} K"
        f"  ({n_ambient:9.1f} photons)",
        f"predicted receiver noise level change : {deltap:10.3f} dB",
        "",
        "per-port delivered noise temperatures:",
    ]
    total = 1.0 + cfg.baths.total_coupling()
    items.append(("weight_intrinsic", _fmt(1.0 / total)))
    for port, role in zip(cfg.baths.ports, cfg.port_roles):
        delivered = port.delivered_temperature_k()
        weight = port.coupling / total
        label = port.name or "port"
        items.append((f"port.{label}.delivered_k", _fmt(delivered)))
        items.append((f"port.{label}.weight", _fmt(weight)))
        human.append(
            f"  {label:12s} ({role:10s}) coupling {port.coupling:7.3f}"
            f"  delivers {delivered:9.3f} K  weight {weight:6.3f}"
        )
    _emit(args, items, human)
    return 0


def cmd_sweep(args, cfg: RunConfig) -> int:
    if args.coupling_min <= 0 or args.coupling_max < args.coupling_min:
        raise ConfigError("need 0 < coupling-min <= coupling-max")
    if args.cold_min < 0 or args.cold_max < args.cold_min:
        raise ConfigError("need 0 <= cold-min <= cold-max")
    if args.coupling_points < 1 or args.cold_points < 1:
        raise ConfigError("point counts must be >= 1")

    port_index = None
    if args.port is not None:
        for i, port in enumerate(cfg.baths.ports):
            if port.name == args.port:
                port_index = i
                break
        if port_index is None:
            raise ConfigError(f"no port named '{args.port}' in the configuration")
    else:
        for i, role in enumerate(cfg.port_roles):
            if role == PORT_ROLE_COOLING:
                port_index = i
                break
        if port_index is None:
            port_index = 0

    couplings = np.geomspace(args.coupling_min, args.coupling_max, args.coupling_points)
    colds = np.linspace(args.cold_min, args.cold_max, args.cold_points)
    grid = sweep_mode_temperature(cfg.baths, port_index, couplings, colds)

    path = _outpath(args, "sweep.csv")
    rows = (
        (couplings[i], colds[j], grid[i, j])
        for i in range(len(couplings))
        for j in range(len(colds))
    )
    tracefile.write_table_csv(
        path, ("coupling", "load_temperature_k", "mode_temperature_k"), rows
    )
    _emit(
        args,
        [
            ("sweep_csv", path),
            ("swept_port", cfg.baths.ports[port_index].name or str(port_index)),
            ("rows", str(grid.size)),
        ],
        [f"wrote {grid.size} grid points to {path}"],
    )
    return 0


def cmd_simulate(args, cfg: RunConfig) -> int:
    result = simulate_run(cfg)
    trajectory_file = "trajectory.csv"
    tracefile.write_trajectory_csv(_outpath(args, trajectory_file), result.trajectory)
    trace_files = []
    for i, trace in enumerate(result.traces):
        name = f"trace_{i:03d}.csv"
        tracefile.write_trace_csv(_outpath(args, name), trace)
        trace_files.append(name)

    digest = config_digest(cfg)
    meta_items = [
        ("format", "cavitycool-run/1"),
        ("config_digest", digest),
        ("master_seed", str(cfg.synth.rng_seed)),
        ("n_shots", str(cfg.n_shots)),
        ("sample_interval_s", _fmt(cfg.synth.sample_interval_s)),
        ("disconnect_time_s", _fmt(result.disconnect_time_s)),
        ("trace_length_s", _fmt(cfg.protocol.trace_length_s)),
        ("trajectory_file", trajectory_file),
        ("trace_files", ",".join(trace_files)),
    ] + config_items(cfg)
    meta_path = _outpath(args, "run.meta")
    tracefile.write_key_values(meta_path, meta_items)

    _emit(
        args,
        [
            ("run_meta", meta_path),
            ("config_digest", digest),
            ("n_traces", str(len(trace_files))),
            ("trajectory_csv", os.path.join(args.out, trajectory_file)),
        ],
        [
            f"wrote {len(trace_files)} traces and {trajectory_file} to {args.out}",
            f"run sidecar: {meta_path}  (config digest {digest[:12]})",
        ],
    )
    return 0


def _load_analysis_inputs(args):
    """Resolve analyze inputs: either one .meta sidecar or trace CSVs."""
    disconnect = None
    paths = list(args.inputs)
    if len(paths) == 1 and paths[0].endswith(".meta"):
        meta = tracefile.read_key_values(paths[0])
        if "trace_files" not in meta:
            raise DataFormatError(f"{paths[0]}: missing 'trace_files' entry")
        base = os.path.dirname(paths[0])
        paths = [os.path.join(base, name) for name in meta["trace_files"].split(",")]
        if "disconnect_time_s" in meta:
            try:
                disconnect = float(meta["disconnect_time_s"])
            except ValueError:
                raise DataFormatError(
                    f"{args.inputs[0]}: bad disconnect_time_s value"
                ) from None
    traces = [tracefile.read_trace_csv(p) for p in paths]
    return traces, disconnect


def cmd_analyze(args, cfg: RunConfig) -> int:
    traces, meta_disconnect = _load_analysis_inputs(args)
    disconnect = (
        args.disconnect_time if args.disconnect_time is not None else meta_disconnect
    )
    report = analyze_run(traces, cfg, disconnect)

    items = [
        ("n_shots", str(report.n_shots)),
        ("deltap_direct_db", _fmt(report.deltap_direct.value_db)),
        ("deltap_direct_stderr_db", _fmt(report.deltap_direct.stderr_db)),
    ]
    human = [
        f"shots analyzed                    : {report.n_shots}",
        f"cooled vs ambient level (direct)  : {report.deltap_direct.value_db:8.3f}"
        f" +/- {report.deltap_direct.stderr_db:.3f} dB",
    ]
    if report.deltap_band is not None:
        items += [
            ("deltap_band_db", _fmt(report.deltap_band.value_db)),
            ("deltap_band_stderr_db", _fmt(report.deltap_band.stderr_db)),
        ]
        human.append(
            f"cooled vs ambient level (banded)  : {report.deltap_band.value_db:8.3f}"
            f" +/- {report.deltap_band.stderr_db:.3f} dB"
        )
    if report.fit is not None:
        fit = report.fit
        items += [
            ("fit_a1_db", _fmt(fit.a1_db)),
            ("fit_a2_db", _fmt(fit.a2_db)),
            ("fit_tau1_s", _fmt(fit.tau1_s)),
            ("fit_tau2_s", _fmt(fit.tau2_s)),
            ("fit_residual_rms_db", _fmt(fit.residual_rms_db)),
            ("fit_converged", str(fit.converged).lower()),
            ("fit_collapsed_single", str(fit.collapsed_single).lower()),
            ("warmup_time_s", _fmt(report.warmup_time_s)),
            ("warmup_stderr_s", _fmt(report.warmup_stderr_s)),
        ]
        human.append(
            f"warm-up time constant             : {report.warmup_time_s * 1e6:8.3f}"
            f" +/- {report.warmup_stderr_s * 1e6:.3f} us"
        )
        if report.depth_db is not None:
            items += [
                ("depth_fit_db", _fmt(report.depth_db.value_db)),
                ("depth_fit_stderr_db", _fmt(report.depth_db.stderr_db)),
            ]
            human.append(
                f"cooling depth (fit, at disconnect): {report.depth_db.value_db:8.3f}"
                f" +/- {report.depth_db.stderr_db:.3f} dB"
            )
    items += [
        ("t_mode_inferred_k", _fmt(report.t_mode_inferred_k)),
        ("t_ambient_reference_k", _fmt(report.t_ambient_reference_k)),
    ]
    human.append(
        f"inferred cooled mode temperature  : {report.t_mode_inferred_k:8.3f} K"
        f"  (ambient reference {report.t_ambient_reference_k:.3f} K)"
    )
    for i, note in enumerate(report.notes):
        items.append((f"note.{i}", note))
        human.append(f"note: {note}")

    if args.emit_series:
        path = _outpath(args, "warmup_series.csv")
        tracefile.write_table_csv(
            path,
            ("time_since_disconnect_s", "deltap_db"),
            zip(report.deltap_series_times_s, report.deltap_series_db),
        )
        items.append(("warmup_series_csv", path))
        human.append(f"warm-up series written to {path}")
    if args.emit_psd:
        for label, psd in (
            ("psd_cold.csv", report.cold_psd),
            ("psd_ambient.csv", report.ambient_psd),
        ):
            if psd is None:
                continue
            path = _outpath(args, label)
            tracefile.write_table_csv(
                path,
                ("frequency_hz", "density_v2_per_hz"),
                zip(psd.frequencies_hz, psd.density),
            )
            items.append((label.replace(".csv", "_csv"), path))
            human.append(f"spectral density written to {path}")
    if args.emit_deltap_curve:
        t_grid = np.linspace(0.0, report.t_ambient_reference_k, 256)
        curve = noise_power_reduction_curve(
            cfg.receiver, report.t_ambient_reference_k, t_grid
        )
        path = _outpath(args, "deltap_curve.csv")
        tracefile.write_table_csv(
            path, ("t_mode_k", "deltap_db"), zip(t_grid, curve)
        )
        items.append(("deltap_curve_csv", path))
        human.append(f"level-vs-temperature curve written to {path}")

    _emit(args, items, human)
    if report.fit is None or not report.fit.converged:
        print("analysis error: warm-up fit did not converge", file=sys.stderr)
        return _EXIT_NONCONVERGENCE
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavitycool",
        description=(
            "Predict, simulate, and analyze switched pre-cooling of a "
            "microwave cavity mode."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        metavar="PATH",
        help="run configuration file (defaults to the built-in bench calibration)",
    )
    common.add_argument(
        "--seed", type=int, metavar="N", help="override the master RNG seed"
    )
    common.add_argument(
        "--porcelain",
        action="store_true",
        help="stable machine-readable key=value output",
    )
    common.add_argument(
        "--out", metavar="DIR", default=".", help="directory for generated files"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "steady",
        parents=[common],
        help="closed-form mode temperatures and photon occupancies",
    )
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser(
        "sweep",
        parents=[common],
        help="mode temperature over a (coupling, cold load) grid",
    )
    p.add_argument("--coupling-min", type=float, default=0.1)
    p.add_argument("--coupling-max", type=float, default=100.0)
    p.add_argument("--coupling-points", type=int, default=25)
    p.add_argument("--cold-min", type=float, default=2.0, metavar="K")
    p.add_argument("--cold-max", type=float, default=290.0, metavar="K")
    p.add_argument("--cold-points", type=int, default=25)
    p.add_argument("--port", metavar="NAME", help="port to sweep (default: first cooling port)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "simulate",
        parents=[common],
        help="run the switching protocol and write trace CSVs",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "analyze",
        parents=[common],
        help="recover cooling depth and warm-up time from traces",
    )
    p.add_argument(
        "inputs", nargs="+", metavar="FILE",
        help="trace CSV files, or a single run.meta sidecar",
    )
    p.add_argument(
        "--disconnect-time", type=float, metavar="S",
        help="override the disconnect instant (seconds)",
    )
    p.add_argument("--emit-series", action="store_true",
                   help="write the windowed warm-up series CSV")
    p.add_argument("--emit-psd", action="store_true",
                   help="write cooled and ambient spectral density CSVs")
    p.add_argument("--emit-deltap-curve", action="store_true",
                   help="write the receiver level-vs-temperature curve CSV")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: "list[str] | None" = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_run_config(args.config) if args.config else default_run_config()
        if args.seed is not None:
            cfg = with_seed(cfg, args.seed)
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except DataFormatError as exc:
        print(f"data format error: {exc}", file=sys.stderr)
        return _EXIT_DATA
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return _EXIT_NONCONVERGENCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return _EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
