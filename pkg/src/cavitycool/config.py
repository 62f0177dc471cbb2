"""Run configuration: defaults, INI-style file loading, canonical dumps.

A run configuration bundles everything a protocol run needs: the mode,
its thermal environment, the receiver chain, protocol timing, trace
synthesis knobs, and analysis windows.  Files follow configparser
syntax with one section per group and repeated `[port.<name>]` sections
for the baths; every key carries its unit as a suffix.  Unknown
sections or keys are rejected rather than ignored.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, replace

from .errors import ConfigError, DomainError
from .receiver import LnaNoiseParameters, ReceiverChain
from .synth import SynthConfig
from .thermal import BathPort, BathSet, CavityMode, LossModel

PORT_ROLE_COOLING = "cooling"
PORT_ROLE_MONITORING = "monitoring"


@dataclass(frozen=True)
class ProtocolConfig:
    """Timing of the cool / disconnect / interrogate sequence."""

    cool_duration_s: float = 40e-6
    interrogate_delay_s: float = 0.0
    trace_length_s: float = 160e-6

    def __post_init__(self) -> None:
        if self.cool_duration_s < 0 or self.interrogate_delay_s < 0:
            raise DomainError("protocol durations must be >= 0")
        if self.trace_length_s <= 0:
            raise DomainError("trace length must be positive")
        if self.cool_duration_s + self.interrogate_delay_s > self.trace_length_s:
            raise DomainError("protocol events extend past the trace")


@dataclass(frozen=True)
class AnalysisConfig:
    """Windows and estimator knobs for the trace reduction."""

    boxcar_width_s: float = 100e-9
    band_low_hz: float = 5e6
    band_high_hz: float = 10e6
    window_samples: int = 60
    exclude_before_s: float = 2e-6
    cooled_window_s: float = 20e-6
    ambient_settle_s: float = 60e-6
    fit_window_s: float = 30e-6
    psd_segment_samples: int = 256

    def __post_init__(self) -> None:
        if self.boxcar_width_s <= 0:
            raise DomainError("boxcar width must be positive")
        if not 0 <= self.band_low_hz < self.band_high_hz:
            raise DomainError("need 0 <= band_low < band_high")
        if self.window_samples < 1:
            raise DomainError("window must be at least one sample")
        if self.exclude_before_s < 0:
            raise DomainError("exclusion must be >= 0")
        if min(self.cooled_window_s, self.ambient_settle_s, self.fit_window_s) <= 0:
            raise DomainError("analysis windows must be positive")
        if self.psd_segment_samples < 8:
            raise DomainError("spectral segment must be at least 8 samples")


@dataclass(frozen=True)
class RunConfig:
    mode: CavityMode
    baths: BathSet
    port_roles: tuple[str, ...]
    receiver: ReceiverChain
    protocol: ProtocolConfig
    synth: SynthConfig
    n_shots: int
    analysis: AnalysisConfig

    def __post_init__(self) -> None:
        if len(self.port_roles) != len(self.baths.ports):
            raise DomainError("one role per bath port required")
        for role in self.port_roles:
            if role not in (PORT_ROLE_COOLING, PORT_ROLE_MONITORING):
                raise DomainError(f"unknown port role {role!r}")
        if self.n_shots < 1:
            raise DomainError("need at least one shot")

    def persistent_port_indices(self) -> tuple[int, ...]:
        """Ports that stay connected after the cold path disconnects."""
        return tuple(
            i for i, role in enumerate(self.port_roles)
            if role == PORT_ROLE_MONITORING
        )


def default_run_config() -> RunConfig:
    """The bench calibration this package was validated against.

    A 1.4495 GHz mode with unloaded Q of 164000 at room temperature,
    cooled through a strongly overcoupled low-loss path terminated cold,
    monitored through a critically coupled port whose lossy stub and
    cable sit at room temperature in front of a cold LNA.
    """
    mode = CavityMode(frequency_hz=1.4495e9, intrinsic_q=164000.0)
    baths = BathSet(
        intrinsic_temperature_k=290.0,
        ports=(
            BathPort(
                coupling=3.8,
                load_temperature_k=18.4,
                link_loss_db=0.19,
                link_temperature_k=290.0,
                loss_model=LossModel.LINEAR,
                name="cooling",
            ),
            BathPort(
                coupling=1.0,
                load_temperature_k=18.4,
                link_loss_db=6.05,
                link_temperature_k=290.0,
                loss_model=LossModel.EXACT,
                name="monitoring",
            ),
        ),
    )
    chain = ReceiverChain(
        lna=LnaNoiseParameters(
            t_min_k=11.6,
            noise_resistance_ohm=2.0,
            gamma_opt=0.073 + 0.125j,
            reference_impedance_ohm=50.0,
            reference_temperature_k=290.0,
        ),
        lna_gain_linear=166.0,
        post_stage_noise_k=36.1,
    )
    synth = SynthConfig(
        sample_interval_s=50e-9,
        duration_s=160e-6,
        rng_seed=20260817,
        one_over_f_corner_hz=0.0,
        artifact_duration_s=2e-6,
        artifact_amplitude_v=600.0,
        voltage_scale=1.0,
    )
    return RunConfig(
        mode=mode,
        baths=baths,
        port_roles=(PORT_ROLE_COOLING, PORT_ROLE_MONITORING),
        receiver=chain,
        protocol=ProtocolConfig(),
        synth=synth,
        n_shots=600,
        analysis=AnalysisConfig(),
    )


_MODE_KEYS = {"frequency_hz", "intrinsic_q", "wall_temperature_k"}
_PORT_KEYS = {
    "coupling",
    "load_temperature_k",
    "link_loss_db",
    "link_temperature_k",
    "loss_model",
    "role",
}
_RECEIVER_KEYS = {
    "lna_gain_linear",
    "lna_t_min_k",
    "lna_noise_resistance_ohm",
    "lna_gamma_opt_real",
    "lna_gamma_opt_imag",
    "reference_impedance_ohm",
    "reference_temperature_k",
    "post_stage_noise_k",
    "cavity_reflection_real",
    "cavity_reflection_imag",
    "cavity_reflection_ref_real",
    "cavity_reflection_ref_imag",
    "image_noise_k",
}
_PROTOCOL_KEYS = {"cool_duration_s", "interrogate_delay_s", "trace_length_s"}
_SYNTH_KEYS = {
    "sample_interval_s",
    "rng_seed",
    "one_over_f_corner_hz",
    "artifact_duration_s",
    "artifact_amplitude_v",
    "voltage_scale",
    "n_shots",
}
_ANALYSIS_KEYS = {
    "boxcar_width_s",
    "band_low_hz",
    "band_high_hz",
    "window_samples",
    "exclude_before_s",
    "cooled_window_s",
    "ambient_settle_s",
    "fit_window_s",
    "psd_segment_samples",
}
_INT_KEYS = {"rng_seed", "n_shots", "window_samples", "psd_segment_samples"}
_STR_KEYS = {"loss_model", "role"}


def _check_keys(section: str, present, allowed) -> None:
    unknown = sorted(set(present) - allowed)
    if unknown:
        raise ConfigError(f"unknown key '{unknown[0]}' in section [{section}]")


def _value(parser, section: str, key: str):
    raw = parser.get(section, key)
    if key in _STR_KEYS:
        return raw.strip().lower()
    try:
        if key in _INT_KEYS:
            return int(raw, 0)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(
            f"bad value for '{key}' in section [{section}]: {raw!r}"
        ) from exc


def _collect(parser, section: str) -> dict:
    return {k: _value(parser, section, k) for k in parser.options(section)}


def load_run_config(path: str) -> RunConfig:
    """Parse a configuration file, overriding the built-in defaults.

    Sections may be omitted (their defaults survive), but any [port.*]
    section replaces the whole default port list.  Unknown sections,
    unknown keys, and malformed or out-of-range values raise
    ConfigError.
    """
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#",), interpolation=None
    )
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError:
        raise
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    base = default_run_config()
    known_plain = {
        "mode": _MODE_KEYS,
        "receiver": _RECEIVER_KEYS,
        "protocol": _PROTOCOL_KEYS,
        "synth": _SYNTH_KEYS,
        "analysis": _ANALYSIS_KEYS,
    }
    port_sections = []
    for section in parser.sections():
        if section.startswith("port."):
            name = section[len("port."):]
            if not name:
                raise ConfigError("port section needs a name: [port.<name>]")
            _check_keys(section, parser.options(section), _PORT_KEYS)
            port_sections.append((name, _collect(parser, section)))
        elif section in known_plain:
            _check_keys(section, parser.options(section), known_plain[section])
        else:
            raise ConfigError(f"unknown section [{section}]")

    def section_dict(name: str) -> dict:
        return _collect(parser, name) if parser.has_section(name) else {}

    try:
        mode_vals = section_dict("mode")
        mode = CavityMode(
            frequency_hz=mode_vals.get("frequency_hz", base.mode.frequency_hz),
            intrinsic_q=mode_vals.get("intrinsic_q", base.mode.intrinsic_q),
        )
        wall_t = mode_vals.get(
            "wall_temperature_k", base.baths.intrinsic_temperature_k
        )

        if port_sections:
            ports = []
            roles = []
            for name, vals in port_sections:
                missing = {"coupling", "load_temperature_k", "role"} - set(vals)
                if missing:
                    raise ConfigError(
                        f"section [port.{name}] missing key '{sorted(missing)[0]}'"
                    )
                model_name = vals.get("loss_model", "exact")
                try:
                    model = LossModel(model_name)
                except ValueError:
                    raise ConfigError(
                        f"bad loss_model '{model_name}' in [port.{name}]; "
                        "use 'exact' or 'linear'"
                    ) from None
                role = vals["role"]
                if role not in (PORT_ROLE_COOLING, PORT_ROLE_MONITORING):
                    raise ConfigError(
                        f"bad role '{role}' in [port.{name}]; "
                        "use 'cooling' or 'monitoring'"
                    )
                ports.append(
                    BathPort(
                        coupling=vals["coupling"],
                        load_temperature_k=vals["load_temperature_k"],
                        link_loss_db=vals.get("link_loss_db", 0.0),
                        link_temperature_k=vals.get("link_temperature_k", 0.0),
                        loss_model=model,
                        name=name,
                    )
                )
                roles.append(role)
            baths = BathSet(wall_t, tuple(ports))
            port_roles = tuple(roles)
        else:
            baths = replace(base.baths, intrinsic_temperature_k=wall_t)
            port_roles = base.port_roles

        rx = section_dict("receiver")
        base_lna = base.receiver.lna
        lna = LnaNoiseParameters(
            t_min_k=rx.get("lna_t_min_k", base_lna.t_min_k),
            noise_resistance_ohm=rx.get(
                "lna_noise_resistance_ohm", base_lna.noise_resistance_ohm
            ),
            gamma_opt=complex(
                rx.get("lna_gamma_opt_real", base_lna.gamma_opt.real),
                rx.get("lna_gamma_opt_imag", base_lna.gamma_opt.imag),
            ),
            reference_impedance_ohm=rx.get(
                "reference_impedance_ohm", base_lna.reference_impedance_ohm
            ),
            reference_temperature_k=rx.get(
                "reference_temperature_k", base_lna.reference_temperature_k
            ),
        )
        chain = ReceiverChain(
            lna=lna,
            lna_gain_linear=rx.get("lna_gain_linear", base.receiver.lna_gain_linear),
            post_stage_noise_k=rx.get(
                "post_stage_noise_k", base.receiver.post_stage_noise_k
            ),
            cavity_reflection=complex(
                rx.get("cavity_reflection_real", 0.0),
                rx.get("cavity_reflection_imag", 0.0),
            ),
            cavity_reflection_reference=complex(
                rx.get("cavity_reflection_ref_real", 0.0),
                rx.get("cavity_reflection_ref_imag", 0.0),
            ),
            image_noise_k=rx.get("image_noise_k", 0.0),
        )

        proto_vals = section_dict("protocol")
        protocol = ProtocolConfig(
            cool_duration_s=proto_vals.get(
                "cool_duration_s", base.protocol.cool_duration_s
            ),
            interrogate_delay_s=proto_vals.get(
                "interrogate_delay_s", base.protocol.interrogate_delay_s
            ),
            trace_length_s=proto_vals.get(
                "trace_length_s", base.protocol.trace_length_s
            ),
        )

        synth_vals = section_dict("synth")
        synth = SynthConfig(
            sample_interval_s=synth_vals.get(
                "sample_interval_s", base.synth.sample_interval_s
            ),
            duration_s=protocol.trace_length_s,
            rng_seed=synth_vals.get("rng_seed", base.synth.rng_seed),
            one_over_f_corner_hz=synth_vals.get(
                "one_over_f_corner_hz", base.synth.one_over_f_corner_hz
            ),
            artifact_duration_s=synth_vals.get(
                "artifact_duration_s", base.synth.artifact_duration_s
            ),
            artifact_amplitude_v=synth_vals.get(
                "artifact_amplitude_v", base.synth.artifact_amplitude_v
            ),
            voltage_scale=synth_vals.get("voltage_scale", base.synth.voltage_scale),
        )
        n_shots = synth_vals.get("n_shots", base.n_shots)

        ana = section_dict("analysis")
        analysis_cfg = AnalysisConfig(
            boxcar_width_s=ana.get("boxcar_width_s", base.analysis.boxcar_width_s),
            band_low_hz=ana.get("band_low_hz", base.analysis.band_low_hz),
            band_high_hz=ana.get("band_high_hz", base.analysis.band_high_hz),
            window_samples=ana.get("window_samples", base.analysis.window_samples),
            exclude_before_s=ana.get(
                "exclude_before_s", base.analysis.exclude_before_s
            ),
            cooled_window_s=ana.get("cooled_window_s", base.analysis.cooled_window_s),
            ambient_settle_s=ana.get(
                "ambient_settle_s", base.analysis.ambient_settle_s
            ),
            fit_window_s=ana.get("fit_window_s", base.analysis.fit_window_s),
            psd_segment_samples=ana.get(
                "psd_segment_samples", base.analysis.psd_segment_samples
            ),
        )

        return RunConfig(
            mode=mode,
            baths=baths,
            port_roles=port_roles,
            receiver=chain,
            protocol=protocol,
            synth=synth,
            n_shots=n_shots,
            analysis=analysis_cfg,
        )
    except DomainError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def with_seed(cfg: RunConfig, seed: int) -> RunConfig:
    """Copy of the configuration with a different master seed."""
    if seed < 0:
        raise ConfigError("seed must be >= 0")
    try:
        return replace(cfg, synth=replace(cfg.synth, rng_seed=seed))
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def config_items(cfg: RunConfig) -> list[tuple[str, str]]:
    """Canonical flat key=value view: porcelain output, sidecars, digests."""

    def fmt(x) -> str:
        if isinstance(x, float):
            return repr(x)
        return str(x)

    items: list[tuple[str, str]] = [
        ("mode.frequency_hz", fmt(cfg.mode.frequency_hz)),
        ("mode.intrinsic_q", fmt(cfg.mode.intrinsic_q)),
        ("mode.wall_temperature_k", fmt(cfg.baths.intrinsic_temperature_k)),
    ]
    for port, role in zip(cfg.baths.ports, cfg.port_roles):
        prefix = f"port.{port.name or 'unnamed'}"
        items += [
            (f"{prefix}.coupling", fmt(port.coupling)),
            (f"{prefix}.load_temperature_k", fmt(port.load_temperature_k)),
            (f"{prefix}.link_loss_db", fmt(port.link_loss_db)),
            (f"{prefix}.link_temperature_k", fmt(port.link_temperature_k)),
            (f"{prefix}.loss_model", port.loss_model.value),
            (f"{prefix}.role", role),
        ]
    rx = cfg.receiver
    items += [
        ("receiver.lna_gain_linear", fmt(rx.lna_gain_linear)),
        ("receiver.lna_t_min_k", fmt(rx.lna.t_min_k)),
        ("receiver.lna_noise_resistance_ohm", fmt(rx.lna.noise_resistance_ohm)),
        ("receiver.lna_gamma_opt_real", fmt(rx.lna.gamma_opt.real)),
        ("receiver.lna_gamma_opt_imag", fmt(rx.lna.gamma_opt.imag)),
        ("receiver.reference_impedance_ohm", fmt(rx.lna.reference_impedance_ohm)),
        ("receiver.reference_temperature_k", fmt(rx.lna.reference_temperature_k)),
        ("receiver.post_stage_noise_k", fmt(rx.post_stage_noise_k)),
        ("receiver.cavity_reflection_real", fmt(rx.cavity_reflection.real)),
        ("receiver.cavity_reflection_imag", fmt(rx.cavity_reflection.imag)),
        ("receiver.cavity_reflection_ref_real", fmt(rx.cavity_reflection_reference.real)),
        ("receiver.cavity_reflection_ref_imag", fmt(rx.cavity_reflection_reference.imag)),
        ("receiver.image_noise_k", fmt(rx.image_noise_k)),
        ("protocol.cool_duration_s", fmt(cfg.protocol.cool_duration_s)),
        ("protocol.interrogate_delay_s", fmt(cfg.protocol.interrogate_delay_s)),
        ("protocol.trace_length_s", fmt(cfg.protocol.trace_length_s)),
        ("synth.sample_interval_s", fmt(cfg.synth.sample_interval_s)),
        ("synth.rng_seed", str(cfg.synth.rng_seed)),
        ("synth.one_over_f_corner_hz", fmt(cfg.synth.one_over_f_corner_hz)),
        ("synth.artifact_duration_s", fmt(cfg.synth.artifact_duration_s)),
        ("synth.artifact_amplitude_v", fmt(cfg.synth.artifact_amplitude_v)),
        ("synth.voltage_scale", fmt(cfg.synth.voltage_scale)),
        ("synth.n_shots", str(cfg.n_shots)),
        ("analysis.boxcar_width_s", fmt(cfg.analysis.boxcar_width_s)),
        ("analysis.band_low_hz", fmt(cfg.analysis.band_low_hz)),
        ("analysis.band_high_hz", fmt(cfg.analysis.band_high_hz)),
        ("analysis.window_samples", str(cfg.analysis.window_samples)),
        ("analysis.exclude_before_s", fmt(cfg.analysis.exclude_before_s)),
        ("analysis.cooled_window_s", fmt(cfg.analysis.cooled_window_s)),
        ("analysis.ambient_settle_s", fmt(cfg.analysis.ambient_settle_s)),
        ("analysis.fit_window_s", fmt(cfg.analysis.fit_window_s)),
        ("analysis.psd_segment_samples", str(cfg.analysis.psd_segment_samples)),
    ]
    return items


def config_digest(cfg: RunConfig) -> str:
    """Stable hex digest of the canonical configuration dump."""
    text = "\n".join(f"{k}={v}" for k, v in config_items(cfg))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
