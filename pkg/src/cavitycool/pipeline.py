"""End-to-end protocol runs: configuration in, traces and estimates out.

`simulate_run` turns a full run configuration into a mode-temperature
trajectory plus an ensemble of receiver traces; `analyze_run` reduces
such an ensemble back to cooling depth, warm-up time, and an inferred
mode temperature.  The CLI subcommands are thin wrappers over these.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import analysis
from .config import RunConfig
from .dynamics import (
    PhotonTrajectory,
    SwitchSchedule,
    build_protocol,
    evolve_occupancy,
)
from .errors import AnalysisError, DomainError
from .receiver import infer_mode_temperature
from .synth import NoiseTrace, SynthConfig, synthesize_shot_ensemble
from .thermal import mode_temperature


@dataclass
class SimulationResult:
    trajectory: PhotonTrajectory
    traces: list[NoiseTrace]
    schedule: SwitchSchedule
    disconnect_time_s: float


def simulate_run(cfg: RunConfig) -> SimulationResult:
    """Run the canonical protocol described by a full configuration.

    All ports cool from t = 0; at the end of the cooling window the
    non-persistent ports disconnect (one switch transient at each of the
    two actuations) and the trace continues to its configured length.
    """
    proto = cfg.protocol
    cool_ports = tuple(range(len(cfg.baths.ports)))
    hold_ports = cfg.persistent_port_indices()
    schedule = build_protocol(
        proto.cool_duration_s,
        proto.interrogate_delay_s,
        proto.trace_length_s,
        cool_ports=cool_ports,
        hold_ports=hold_ports,
    )
    trajectory = evolve_occupancy(
        cfg.mode,
        cfg.baths,
        schedule,
        proto.trace_length_s,
        cfg.synth.sample_interval_s,
    )
    synth_cfg = replace(
        cfg.synth,
        duration_s=proto.trace_length_s,
        switch_times_s=(0.0, proto.cool_duration_s),
    )
    traces = synthesize_shot_ensemble(
        trajectory, cfg.receiver, synth_cfg, cfg.n_shots
    )
    return SimulationResult(trajectory, traces, schedule, proto.cool_duration_s)


@dataclass
class AnalysisReport:
    """Everything the reduction recovers from one shot ensemble."""

    deltap_direct: analysis.DeltaPEstimate
    deltap_band: "analysis.DeltaPEstimate | None"
    cold_psd: "analysis.SpectralDensity | None"
    ambient_psd: "analysis.SpectralDensity | None"
    deltap_series_times_s: np.ndarray
    deltap_series_db: np.ndarray
    fit: "analysis.BiExpFit | None"
    depth_db: "analysis.DeltaPEstimate | None"
    warmup_time_s: float
    warmup_stderr_s: float
    t_mode_inferred_k: float
    t_ambient_reference_k: float
    n_shots: int
    notes: list[str]


def analyze_run(
    traces: list[NoiseTrace],
    cfg: RunConfig,
    disconnect_time_s: float | None = None,
) -> AnalysisReport:
    """Reduce a shot ensemble to cooling-depth and warm-up estimates.

    The shot-ensemble mean is subtracted when two or more shots are
    available (removing switch transients and any coherent signal).
    Time-domain level estimates work on those residuals directly, since
    a mean-square ratio needs the full noise variance.  The spectral
    path additionally applies the configured boxcar extraction when its
    window spans at least two samples; the extraction transfer function
    is common to both spectra and cancels in the band ratio.

    `disconnect_time_s` defaults to the configured cooling duration.
    """
    if not traces:
        raise AnalysisError("no traces to analyze")
    acfg = cfg.analysis
    if disconnect_time_s is None:
        disconnect_time_s = cfg.protocol.cool_duration_s
    notes: list[str] = []

    if len(traces) >= 2:
        residuals = analysis.subtract_mean_artifact(traces)
    else:
        residuals = [traces[0]]
        notes.append(
            "single shot: deterministic transients cannot be separated from noise"
        )

    extraction = analysis.NoiseExtractionConfig(acfg.boxcar_width_s)
    width = extraction.width_samples(residuals[0].sample_interval_s)
    if width >= 2:
        extracted = [analysis.extract_noise(r, extraction) for r in residuals]
    else:
        extracted = residuals
        notes.append(
            "boxcar width rounds to one sample; spectral extraction skipped"
        )

    t_end = float(residuals[0].times_s[-1])
    cooled_span = (disconnect_time_s - acfg.cooled_window_s, disconnect_time_s)
    ambient_span = (disconnect_time_s + acfg.ambient_settle_s, t_end + 1e-12)
    if cooled_span[0] < 0:
        raise AnalysisError(
            "cooled comparison window starts before the trace; "
            "cooling duration too short for the configured window"
        )
    if ambient_span[0] >= t_end:
        raise AnalysisError("no settled ambient section after the disconnect")

    deltap_direct = analysis.segment_deltap(residuals, cooled_span, ambient_span)
    ambient_ms, _ = analysis.pooled_mean_square(residuals, *ambient_span)

    deltap_band = None
    cold_psd = None
    ambient_psd = None
    seg = acfg.psd_segment_samples
    cold_sections = [r.slice_time(*cooled_span) for r in extracted]
    ambient_sections = [r.slice_time(*ambient_span) for r in extracted]
    if seg <= min(len(cold_sections[0]), len(ambient_sections[0])):
        cold_psd = analysis.ensemble_spectral_density(cold_sections, seg)
        ambient_psd = analysis.ensemble_spectral_density(ambient_sections, seg)
        try:
            deltap_band = analysis.band_averaged_deltap(
                cold_psd, ambient_psd, (acfg.band_low_hz, acfg.band_high_hz)
            )
        except (DomainError, AnalysisError) as exc:
            notes.append(f"band-averaged level unavailable: {exc}")
    else:
        notes.append(
            "sections shorter than one spectral segment; band-averaged level skipped"
        )

    warmup_stop = min(disconnect_time_s + acfg.fit_window_s, t_end)
    warmup_sections = [r.slice_time(disconnect_time_s, warmup_stop) for r in residuals]
    series_t, series_db = analysis.windowed_deltap_timeseries(
        warmup_sections, ambient_ms, acfg.window_samples
    )

    fit = None
    depth = None
    warmup_time = float("nan")
    warmup_stderr = float("nan")
    try:
        fit = analysis.fit_biexponential(series_t, series_db, acfg.exclude_before_s)
        depth = analysis.cooling_depth_from_fit(fit)
        warmup_time = fit.tau2_s
        warmup_stderr = fit.stderr[3]
    except AnalysisError as exc:
        notes.append(f"warm-up fit unavailable: {exc}")

    t_ambient_ref = mode_temperature(cfg.baths.subset(cfg.persistent_port_indices()))
    try:
        t_mode = infer_mode_temperature(
            cfg.receiver, min(deltap_direct.value_db, 0.0), t_ambient_ref
        )
    except DomainError as exc:
        t_mode = float("nan")
        notes.append(f"mode temperature inversion unavailable: {exc}")

    return AnalysisReport(
        deltap_direct=deltap_direct,
        deltap_band=deltap_band,
        cold_psd=cold_psd,
        ambient_psd=ambient_psd,
        deltap_series_times_s=series_t,
        deltap_series_db=series_db,
        fit=fit,
        depth_db=depth,
        warmup_time_s=warmup_time,
        warmup_stderr_s=warmup_stderr,
        t_mode_inferred_k=t_mode,
        t_ambient_reference_k=t_ambient_ref,
        n_shots=len(traces),
        notes=notes,
    )
