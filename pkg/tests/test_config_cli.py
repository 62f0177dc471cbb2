"""Configuration loading, on-disk formats, pipeline wiring, and the CLI."""

import subprocess
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

import cavitycool
from cavitycool import cli, tracefile
from cavitycool.config import (
    AnalysisConfig,
    ProtocolConfig,
    RunConfig,
    config_digest,
    config_items,
    default_run_config,
    load_run_config,
    with_seed,
)
from cavitycool.dynamics import PhotonTrajectory, steady_state_occupancy
from cavitycool.errors import (
    AnalysisError,
    ConfigError,
    DataFormatError,
    DomainError,
)
from cavitycool.pipeline import analyze_run, simulate_run
from cavitycool.receiver import noise_power_reduction_db
from cavitycool.synth import NoiseTrace
from cavitycool.thermal import mode_temperature, photon_occupancy


def _ini(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def _porcelain(out):
    return dict(line.split("=", 1) for line in out.strip().splitlines())


def _small_config(n_shots):
    cfg = default_run_config()
    return replace(cfg, n_shots=n_shots)


# ---------------------------------------------------------------- defaults


def test_default_config_values():
    cfg = default_run_config()
    assert cfg.mode.frequency_hz == 1.4495e9
    assert cfg.mode.intrinsic_q == 164000.0
    assert [p.name for p in cfg.baths.ports] == ["cooling", "monitoring"]
    assert cfg.port_roles == ("cooling", "monitoring")
    assert cfg.baths.intrinsic_temperature_k == 290.0
    assert cfg.receiver.lna.t_min_k == 11.6
    assert cfg.n_shots == 600
    assert cfg.synth.sample_interval_s == 50e-9
    assert cfg.synth.duration_s == cfg.protocol.trace_length_s
    assert cfg.persistent_port_indices() == (1,)


def test_protocol_config_validation():
    with pytest.raises(DomainError):
        ProtocolConfig(cool_duration_s=-1e-6)
    with pytest.raises(DomainError):
        ProtocolConfig(trace_length_s=0.0)
    with pytest.raises(DomainError):
        ProtocolConfig(cool_duration_s=100e-6, interrogate_delay_s=100e-6,
                       trace_length_s=160e-6)


def test_analysis_config_validation():
    with pytest.raises(DomainError):
        AnalysisConfig(boxcar_width_s=0.0)
    with pytest.raises(DomainError):
        AnalysisConfig(band_low_hz=10e6, band_high_hz=5e6)
    with pytest.raises(DomainError):
        AnalysisConfig(band_low_hz=-1.0)
    with pytest.raises(DomainError):
        AnalysisConfig(window_samples=0)
    with pytest.raises(DomainError):
        AnalysisConfig(exclude_before_s=-1e-6)
    with pytest.raises(DomainError):
        AnalysisConfig(cooled_window_s=0.0)
    with pytest.raises(DomainError):
        AnalysisConfig(psd_segment_samples=4)


def test_run_config_validation():
    base = default_run_config()
    with pytest.raises(DomainError):
        replace(base, port_roles=("cooling",))
    with pytest.raises(DomainError):
        replace(base, port_roles=("cooling", "bystander"))
    with pytest.raises(DomainError):
        replace(base, n_shots=0)


def test_persistent_indices_empty_when_all_ports_cool():
    base = default_run_config()
    cfg = replace(base, port_roles=("cooling", "cooling"))
    assert cfg.persistent_port_indices() == ()


# ------------------------------------------------------------ file loading


def test_load_empty_file_gives_defaults(tmp_path):
    cfg = load_run_config(_ini(tmp_path, ""))
    assert cfg == default_run_config()


def test_bundled_defaults_match_builtin():
    bundled = Path(cavitycool.__file__).parent / "data" / "bench.defaults"
    assert load_run_config(str(bundled)) == default_run_config()


def test_load_scalar_overrides(tmp_path):
    path = _ini(tmp_path, """\
[mode]
frequency_hz = 2.0e9
wall_temperature_k = 4.2

[receiver]
lna_gain_linear = 200
post_stage_noise_k = 40

[protocol]
trace_length_s = 200e-6

[synth]
rng_seed = 0xdeadbeef
n_shots = 7

[analysis]
window_samples = 80
""")
    cfg = load_run_config(path)
    assert cfg.mode.frequency_hz == 2.0e9
    assert cfg.mode.intrinsic_q == 164000.0
    assert cfg.baths.intrinsic_temperature_k == 4.2
    assert len(cfg.baths.ports) == 2
    assert cfg.baths.ports[0].coupling == 3.8
    assert cfg.receiver.lna_gain_linear == 200.0
    assert cfg.receiver.lna.t_min_k == 11.6
    assert cfg.protocol.trace_length_s == 200e-6
    assert cfg.synth.duration_s == 200e-6
    assert cfg.synth.rng_seed == 0xDEADBEEF
    assert cfg.n_shots == 7
    assert cfg.analysis.window_samples == 80
    assert cfg.analysis.band_low_hz == 5e6


def test_load_port_section_replaces_default_ports(tmp_path):
    path = _ini(tmp_path, """\
[port.cold]
coupling = 10.0
load_temperature_k = 4.0
role = cooling
""")
    cfg = load_run_config(path)
    assert len(cfg.baths.ports) == 1
    port = cfg.baths.ports[0]
    assert port.name == "cold"
    assert port.coupling == 10.0
    assert port.load_temperature_k == 4.0
    assert port.link_loss_db == 0.0
    assert port.link_temperature_k == 0.0
    assert cfg.port_roles == ("cooling",)
    assert cfg.persistent_port_indices() == ()
    assert cfg.baths.intrinsic_temperature_k == 290.0


def test_load_rejects_malformed_input(tmp_path):
    with pytest.raises(ConfigError, match="missing key 'role'"):
        load_run_config(_ini(tmp_path, (
            "[port.cold]\ncoupling = 1.0\nload_temperature_k = 4.0\n"
        ), "a.ini"))
    with pytest.raises(ConfigError, match="loss_model"):
        load_run_config(_ini(tmp_path, (
            "[port.cold]\ncoupling = 1.0\nload_temperature_k = 4.0\n"
            "role = cooling\nloss_model = sponge\n"
        ), "b.ini"))
    with pytest.raises(ConfigError, match="role"):
        load_run_config(_ini(tmp_path, (
            "[port.cold]\ncoupling = 1.0\nload_temperature_k = 4.0\n"
            "role = bystander\n"
        ), "c.ini"))
    with pytest.raises(ConfigError, match="unknown section"):
        load_run_config(_ini(tmp_path, "[turbo]\nboost = 11\n", "d.ini"))
    with pytest.raises(ConfigError, match="unknown key 'color'"):
        load_run_config(_ini(tmp_path, "[mode]\ncolor = red\n", "e.ini"))
    with pytest.raises(ConfigError, match="bad value"):
        load_run_config(_ini(tmp_path, "[mode]\nfrequency_hz = fast\n", "f.ini"))
    # no section header at all
    with pytest.raises(ConfigError):
        load_run_config(_ini(tmp_path, "coupling = 1.0\n", "g.ini"))


def test_load_wraps_out_of_range_values(tmp_path):
    # a value that parses but violates a dataclass invariant comes back
    # as ConfigError, not DomainError, with the file named
    path = _ini(tmp_path, "[protocol]\ncool_duration_s = 500e-6\n")
    with pytest.raises(ConfigError, match="extend past the trace"):
        load_run_config(path)
    try:
        load_run_config(path)
    except ConfigError as exc:
        assert "run.ini" in str(exc)


def test_load_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_run_config(str(tmp_path / "nope.ini"))


def test_load_accepts_inline_comments(tmp_path):
    path = _ini(tmp_path, "[synth]\nvoltage_scale = 2.0  # calibrated\n")
    assert load_run_config(path).synth.voltage_scale == 2.0


def test_with_seed():
    cfg = default_run_config()
    seeded = with_seed(cfg, 99)
    assert seeded.synth.rng_seed == 99
    assert cfg.synth.rng_seed == 20260817
    assert config_digest(seeded) != config_digest(cfg)
    with pytest.raises(ConfigError):
        with_seed(cfg, -1)
    with pytest.raises(ConfigError):
        with_seed(cfg, 2 ** 64)


def test_config_items_canonical():
    cfg = default_run_config()
    items = config_items(cfg)
    keys = [k for k, _ in items]
    assert len(keys) == len(set(keys))
    assert items == config_items(default_run_config())
    d = dict(items)
    assert d["mode.frequency_hz"] == repr(1.4495e9)
    assert d["port.cooling.coupling"] == repr(3.8)
    assert d["port.cooling.loss_model"] == "linear"
    assert d["port.monitoring.role"] == "monitoring"
    assert d["synth.n_shots"] == "600"
    assert d["receiver.lna_gamma_opt_imag"] == repr(0.125)


def test_config_digest_stable_and_sensitive():
    cfg = default_run_config()
    digest = config_digest(cfg)
    assert len(digest) == 64
    assert set(digest) <= set("0123456789abcdef")
    assert digest == config_digest(default_run_config())
    assert digest != config_digest(with_seed(cfg, 1))


# ------------------------------------------------------------- trace files


def test_trace_csv_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    trace = NoiseTrace(np.arange(48) * 5e-8, rng.normal(size=48))
    path = tmp_path / "trace.csv"
    tracefile.write_trace_csv(str(path), trace)
    back = tracefile.read_trace_csv(str(path))
    assert np.array_equal(back.times_s, trace.times_s)
    assert np.array_equal(back.voltages_v, trace.voltages_v)
    assert back.metadata["source"] == str(path)


def test_trace_csv_byte_determinism(tmp_path):
    trace = NoiseTrace(
        np.arange(16) * 1e-7, np.random.default_rng(9).normal(size=16)
    )
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    tracefile.write_trace_csv(str(a), trace)
    tracefile.write_trace_csv(str(b), trace)
    data = a.read_bytes()
    assert data == b.read_bytes()
    assert data.startswith(b"time_s,voltage_v\n")
    assert b"\r" not in data


def test_read_trace_rejects_malformed_files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    with pytest.raises(DataFormatError, match="line 1"):
        tracefile.read_trace_csv(write("empty.csv", ""))
    with pytest.raises(DataFormatError, match="line 1"):
        tracefile.read_trace_csv(
            write("header.csv", "volts,time\n0.0,0.0\n1e-7,0.0\n")
        )
    with pytest.raises(DataFormatError, match="line 3"):
        tracefile.read_trace_csv(
            write("fields.csv", "time_s,voltage_v\n0.0,0.0\n1e-7,0.0,9\n")
        )
    with pytest.raises(DataFormatError, match="line 2"):
        tracefile.read_trace_csv(
            write("alpha.csv", "time_s,voltage_v\nzero,0.0\n1e-7,0.0\n")
        )
    with pytest.raises(DataFormatError, match="at least 2"):
        tracefile.read_trace_csv(write("short.csv", "time_s,voltage_v\n0.0,0.0\n"))


def test_read_trace_rejects_bad_grids(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    with pytest.raises(DataFormatError, match="line 4"):
        tracefile.read_trace_csv(write(
            "dup.csv", "time_s,voltage_v\n0.0,0.0\n1e-7,0.0\n1e-7,0.0\n"
        ))
    with pytest.raises(DataFormatError, match="not uniform"):
        tracefile.read_trace_csv(write(
            "warp.csv", "time_s,voltage_v\n0.0,0.0\n1e-7,0.0\n3e-7,0.0\n"
        ))
    # interior blank lines are tolerated
    trace = tracefile.read_trace_csv(write(
        "blank.csv", "time_s,voltage_v\n0.0,0.0\n\n1e-7,0.5\n"
    ))
    assert len(trace) == 2


def test_trajectory_csv_format(tmp_path):
    traj = PhotonTrajectory(
        np.array([0.0, 1e-6, 2e-6]),
        np.array([10.0, 20.0, 30.0]),
        np.array([1.0, 2.0, 3.0]),
    )
    path = tmp_path / "traj.csv"
    tracefile.write_trajectory_csv(str(path), traj)
    lines = path.read_text().splitlines()
    assert lines[0] == "time_s,occupancy,temperature_k"
    assert lines[1] == "0.0,10.0,1.0"
    assert len(lines) == 4


def test_table_csv_format(tmp_path):
    path = tmp_path / "table.csv"
    tracefile.write_table_csv(str(path), ("a", "b"), [(1.0, 2.5), (3.0, 4.0)])
    assert path.read_text() == "a,b\n1.0,2.5\n3.0,4.0\n"


def test_key_value_sidecar_round_trip(tmp_path):
    path = tmp_path / "run.meta"
    tracefile.write_key_values(str(path), [("alpha", "1"), ("beta", "x=y")])
    # values may themselves contain '='; only the first one splits
    assert tracefile.read_key_values(str(path)) == {"alpha": "1", "beta": "x=y"}


def test_key_value_reader_is_forgiving_about_layout(tmp_path):
    path = tmp_path / "run.meta"
    path.write_text("# header comment\n\n  key = value \n")
    assert tracefile.read_key_values(str(path)) == {"key": "value"}
    bad = tmp_path / "bad.meta"
    bad.write_text("just words\n")
    with pytest.raises(DataFormatError, match="line 1"):
        tracefile.read_key_values(str(bad))


# ----------------------------------------------------------------- pipeline


def test_simulate_run_structure():
    cfg = _small_config(3)
    result = simulate_run(cfg)
    assert len(result.traces) == 3
    assert result.disconnect_time_s == cfg.protocol.cool_duration_s
    events = result.schedule.events
    assert [e.time_s for e in events] == [0.0, cfg.protocol.cool_duration_s]
    assert events[0].active_ports == (0, 1)
    assert events[1].active_ports == (1,)

    traj = result.trajectory
    assert len(traj) == cfg.synth.n_samples
    q_cold = steady_state_occupancy(cfg.mode, cfg.baths)
    q_ambient = steady_state_occupancy(cfg.mode, cfg.baths.subset((1,)))
    assert traj.occupancy[0] == pytest.approx(q_cold, rel=1e-12)
    assert traj.occupancy[-1] == pytest.approx(q_ambient, rel=1e-4)
    for i, trace in enumerate(result.traces):
        assert len(trace) == len(traj)
        assert trace.metadata["shot"] == str(i)
        assert trace.metadata["master_seed"] == str(cfg.synth.rng_seed)


def test_analyze_run_recovers_protocol():
    cfg = _small_config(100)
    result = simulate_run(cfg)
    report = analyze_run(result.traces, cfg, result.disconnect_time_s)
    assert report.n_shots == 100
    assert report.notes == []
    assert -4.5 < report.deltap_direct.value_db < -2.5
    assert report.deltap_band is not None
    assert -5.0 < report.deltap_band.value_db < -2.0
    assert report.cold_psd is not None and report.ambient_psd is not None
    assert report.fit is not None and report.fit.converged
    assert report.depth_db is not None
    assert 4e-6 < report.warmup_time_s < 16e-6
    assert 80.0 < report.t_mode_inferred_k < 140.0
    assert report.t_ambient_reference_k == pytest.approx(256.279052430086)


def test_analyze_run_single_shot_note():
    cfg = _small_config(1)
    result = simulate_run(cfg)
    report = analyze_run(result.traces, cfg)
    assert report.n_shots == 1
    assert any("single shot" in note for note in report.notes)


def test_analyze_run_notes_skipped_extraction():
    base = default_run_config()
    cfg = replace(
        base, n_shots=2, analysis=replace(base.analysis, boxcar_width_s=50e-9)
    )
    report = analyze_run(simulate_run(cfg).traces, cfg)
    assert any("extraction skipped" in note for note in report.notes)


def test_analyze_run_notes_short_spectral_sections():
    base = default_run_config()
    cfg = replace(
        base, n_shots=2, analysis=replace(base.analysis, psd_segment_samples=2048)
    )
    report = analyze_run(simulate_run(cfg).traces, cfg)
    assert report.deltap_band is None
    assert report.cold_psd is None
    assert any("band-averaged level skipped" in note for note in report.notes)


def test_analyze_run_window_validation():
    cfg = _small_config(2)
    traces = simulate_run(cfg).traces
    with pytest.raises(AnalysisError):
        analyze_run(traces, cfg, disconnect_time_s=10e-6)
    with pytest.raises(AnalysisError):
        analyze_run(traces, cfg, disconnect_time_s=110e-6)
    with pytest.raises(AnalysisError):
        analyze_run([], cfg)


# ---------------------------------------------------------------------- CLI


def test_cli_steady_porcelain_matches_library(capsys):
    assert cli.main(["steady", "--porcelain"]) == 0
    d = _porcelain(capsys.readouterr().out)
    cfg = default_run_config()
    cooled = mode_temperature(cfg.baths)
    ambient = mode_temperature(cfg.baths.subset(cfg.persistent_port_indices()))
    assert float(d["t_mode_cooled_k"]) == cooled
    assert float(d["t_mode_ambient_k"]) == ambient
    assert float(d["occupancy_cooled"]) == photon_occupancy(
        cfg.mode.frequency_hz, cooled
    )
    assert float(d["occupancy_ambient"]) == photon_occupancy(
        cfg.mode.frequency_hz, ambient
    )
    assert float(d["deltap_predicted_db"]) == noise_power_reduction_db(
        cfg.receiver, cooled, ambient
    )
    assert float(d["weight_intrinsic"]) == pytest.approx(1.0 / 5.8)
    assert float(d["port.cooling.weight"]) == pytest.approx(3.8 / 5.8)
    assert "port.monitoring.delivered_k" in d


def test_cli_steady_human_output(capsys):
    assert cli.main(["steady"]) == 0
    out = capsys.readouterr().out
    assert "mode temperature, all ports connected" in out
    assert "per-port delivered noise temperatures" in out
    assert "=" not in out.splitlines()[0]


def test_cli_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert cavitycool.__version__ in capsys.readouterr().out


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2


def test_cli_config_error_exit_codes(tmp_path, capsys):
    rc = cli.main(["steady", "--config", str(tmp_path / "nope.ini")])
    assert rc == 3
    assert "i/o error" in capsys.readouterr().err

    bad = _ini(tmp_path, "[rocket]\nthrust = 11\n")
    rc = cli.main(["steady", "--config", bad])
    assert rc == 2
    assert "config error" in capsys.readouterr().err

    rc = cli.main(["steady", "--seed", "-1"])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_cli_sweep_writes_grid(tmp_path, capsys):
    rc = cli.main([
        "sweep", "--porcelain", "--out", str(tmp_path),
        "--coupling-min", "0.5", "--coupling-max", "8.0",
        "--coupling-points", "4",
        "--cold-min", "2.0", "--cold-max", "20.0", "--cold-points", "3",
    ])
    assert rc == 0
    d = _porcelain(capsys.readouterr().out)
    assert d["rows"] == "12"
    assert d["swept_port"] == "cooling"
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "coupling,load_temperature_k,mode_temperature_k"
    assert len(lines) == 13
    first = [float(x) for x in lines[1].split(",")]
    assert first[0] == 0.5 and first[1] == 2.0
    # row 10 is the same cold load at the strongest coupling
    strong = [float(x) for x in lines[10].split(",")]
    assert strong[2] < first[2]


def test_cli_sweep_named_port_and_validation(tmp_path, capsys):
    rc = cli.main([
        "sweep", "--porcelain", "--out", str(tmp_path), "--port", "monitoring",
        "--coupling-points", "2", "--cold-points", "2",
    ])
    assert rc == 0
    assert _porcelain(capsys.readouterr().out)["swept_port"] == "monitoring"

    assert cli.main(["sweep", "--out", str(tmp_path), "--coupling-min", "0"]) == 2
    assert cli.main(["sweep", "--out", str(tmp_path), "--port", "nope"]) == 2


def test_cli_simulate_analyze_round_trip(tmp_path, capsys):
    ini = _ini(tmp_path, "[synth]\nn_shots = 40\n")
    out = tmp_path / "run"
    rc = cli.main(["simulate", "--config", ini, "--out", str(out), "--porcelain"])
    assert rc == 0
    d = _porcelain(capsys.readouterr().out)
    assert d["n_traces"] == "40"

    cfg = load_run_config(ini)
    meta = tracefile.read_key_values(str(out / "run.meta"))
    assert meta["format"] == "cavitycool-run/1"
    assert meta["config_digest"] == config_digest(cfg) == d["config_digest"]
    assert meta["n_shots"] == "40"
    assert float(meta["disconnect_time_s"]) == cfg.protocol.cool_duration_s
    names = meta["trace_files"].split(",")
    assert len(names) == 40
    assert all((out / name).is_file() for name in names)
    assert (out / meta["trajectory_file"]).is_file()

    rc = cli.main([
        "analyze", str(out / "run.meta"), "--config", ini, "--porcelain",
        "--out", str(out),
    ])
    assert rc == 0
    d = _porcelain(capsys.readouterr().out)
    assert d["n_shots"] == "40"
    assert d["fit_converged"] == "true"
    assert float(d["deltap_direct_db"]) < -1.0
    assert float(d["deltap_direct_stderr_db"]) > 0.0
    assert "depth_fit_db" in d
    assert float(d["warmup_time_s"]) > 0.0
    assert np.isfinite(float(d["t_mode_inferred_k"]))
    assert float(d["t_ambient_reference_k"]) == pytest.approx(256.279052430086)

    rc = cli.main([
        "analyze", str(out / "run.meta"), "--config", ini, "--porcelain",
        "--out", str(out), "--emit-series", "--emit-psd", "--emit-deltap-curve",
    ])
    assert rc == 0
    capsys.readouterr()
    series = (out / "warmup_series.csv").read_text().splitlines()
    assert series[0] == "time_since_disconnect_s,deltap_db"
    assert len(series) > 5
    assert (out / "psd_cold.csv").is_file()
    assert (out / "psd_ambient.csv").is_file()
    curve = (out / "deltap_curve.csv").read_text().splitlines()
    assert curve[0] == "t_mode_k,deltap_db"
    assert len(curve) == 257


def test_cli_analyze_accepts_raw_trace_list(tmp_path, capsys):
    ini = _ini(tmp_path, "[synth]\nn_shots = 2\n")
    out = tmp_path / "run"
    assert cli.main(["simulate", "--config", ini, "--out", str(out),
                     "--porcelain"]) == 0
    capsys.readouterr()
    paths = [str(out / f"trace_{i:03d}.csv") for i in range(2)]

    rc_default = cli.main(["analyze", *paths, "--config", ini, "--porcelain"])
    default_out = _porcelain(capsys.readouterr().out)
    rc_explicit = cli.main([
        "analyze", *paths, "--config", ini, "--porcelain",
        "--disconnect-time", "4e-05",
    ])
    explicit_out = _porcelain(capsys.readouterr().out)
    # without a sidecar the disconnect defaults to the configured cooling
    # duration, so an explicit override at that value changes nothing
    assert rc_default == rc_explicit
    assert default_out["deltap_direct_db"] == explicit_out["deltap_direct_db"]
    assert default_out["n_shots"] == "2"


def test_cli_analyze_data_error_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("volts,time\n0,0\n1,1\n")
    assert cli.main(["analyze", str(bad)]) == 4
    assert "data format error" in capsys.readouterr().err

    assert cli.main(["analyze", str(tmp_path / "missing.csv")]) == 3
    assert "i/o error" in capsys.readouterr().err

    meta = tmp_path / "run.meta"
    meta.write_text("format=cavitycool-run/1\n")
    assert cli.main(["analyze", str(meta)]) == 4
    assert "trace_files" in capsys.readouterr().err

    meta.write_text("trace_files=missing.csv\ndisconnect_time_s=soon\n")
    assert cli.main(["analyze", str(meta)]) == 4
    assert "disconnect_time_s" in capsys.readouterr().err


def test_cli_analyze_nonconvergence_exit_code(tmp_path, capsys):
    ini = _ini(tmp_path, "[synth]\nn_shots = 2\n")
    out = tmp_path / "run"
    assert cli.main(["simulate", "--config", ini, "--out", str(out),
                     "--porcelain"]) == 0
    # a warm-up window shorter than one averaging block leaves nothing to fit
    wide = _ini(tmp_path, (
        "[synth]\nn_shots = 2\n\n[analysis]\nwindow_samples = 100000\n"
    ), "wide.ini")
    rc = cli.main(["analyze", str(out / "run.meta"), "--config", wide])
    assert rc == 5
    assert "analysis error" in capsys.readouterr().err


def test_cli_simulate_byte_determinism(tmp_path, capsys):
    ini = _ini(tmp_path, "[synth]\nn_shots = 2\nrng_seed = 777\n")
    dirs = [tmp_path / n for n in ("a", "b", "c")]
    assert cli.main(["simulate", "--config", ini, "--out", str(dirs[0]),
                     "--porcelain"]) == 0
    assert cli.main(["simulate", "--config", ini, "--out", str(dirs[1]),
                     "--porcelain"]) == 0
    assert cli.main(["simulate", "--config", ini, "--seed", "778",
                     "--out", str(dirs[2]), "--porcelain"]) == 0
    capsys.readouterr()
    for name in ("trace_000.csv", "trace_001.csv", "trajectory.csv", "run.meta"):
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()
    assert (dirs[0] / "trace_000.csv").read_bytes() != (
        dirs[2] / "trace_000.csv"
    ).read_bytes()
    assert (dirs[0] / "run.meta").read_bytes() != (dirs[2] / "run.meta").read_bytes()


def test_cli_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cavitycool.cli", "--version"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert cavitycool.__version__ in proc.stdout
