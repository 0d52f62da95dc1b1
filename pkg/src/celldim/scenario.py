"""Scenario presets, validation and the key-value config format.

A run is described by a bundle ``(Scenario, ServiceConfig, EfficiencyProfile)``.
The rural and urban presets carry the Swedish 2020 parameter set; the
efficiency profile depends on morphology, delivery mode and antenna counts.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
import re
from dataclasses import dataclass, fields, replace
from pathlib import Path

MORPHOLOGIES = ("rural", "urban")
MODES = ("broadcast", "unicast")
PATH_LOSS_MODELS = ("hata_open", "hata_suburban", "hata_urban", "cost231_urban")
RX_PATTERNS = ("isotropic", "directional_mask")
VIEWER_BASES = ("receiver", "household")

THERMAL_NOISE_DBM_HZ = -174.0
REFERENCE_BW_HZ = 20e6

# Overheads per (morphology, mode): ACLR, cyclic prefix, pilot/control.
OVERHEADS = {
    ("rural", "broadcast"): (0.1, 0.2, 0.1),
    ("urban", "broadcast"): (0.1, 0.07, 0.1),
    ("rural", "unicast"): (0.1, 0.2, 0.3),
    ("urban", "unicast"): (0.1, 0.07, 0.3),
}
BROADCAST_BETA = {"rural": 0.65, "urban": 0.75}
UNICAST_BETA_PER_STREAM = {"rural": 0.5, "urban": 0.59}
UNICAST_XI = 0.5

# Useful OFDM symbol length per morphology, microseconds.
USEFUL_SYMBOL_US = {"rural": 400.0 / 3.0, "urban": 200.0 / 3.0}


class ConfigError(ValueError):
    """Raised for malformed or invalid scenario configuration."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def derive_cp_lengths(morphology: str) -> tuple[float, float]:
    """Return ``(t_u, t_cp)`` in microseconds matching the CP overhead.

    The overhead is ``t_cp / (t_u + t_cp)``; 0.2 for rural and 0.07 for urban.
    """
    if morphology not in MORPHOLOGIES:
        raise ConfigError(f"unknown morphology {morphology!r}")
    overhead = OVERHEADS[(morphology, "broadcast")][1]
    t_u = USEFUL_SYMBOL_US[morphology]
    return t_u, t_u * overhead / (1.0 - overhead)


@dataclass(frozen=True)
class Scenario:
    morphology: str
    isd: float  # m
    carrier_freq: float = 630.0  # MHz
    bs_antenna_count: int = 4
    rx_antenna_count: int = 1
    bs_tx_power: float = 46.0  # dBm / 20 MHz / antenna
    bs_antenna_gain: float = 15.0  # dBi
    rx_antenna_gain: float = 0.0  # dBi
    bs_height: float = 30.0  # m
    rx_height: float = 1.5  # m
    downtilt: float = 2.5  # deg
    noise_figure: float = 10.0  # dB
    noise_floor: float = -91.0  # dBm / 20 MHz
    wall_loss: float = 0.0  # dB
    shadowing_sigma: float = 8.0  # dB
    population_density: float = 1.0  # inhabitants / km^2
    dtt_penetration: float = 0.6
    persons_per_household: float = 2.1
    tvs_per_household: float = 2.0
    viewing_ratio: float = 0.4
    viewer_base: str = "receiver"
    t_u: float = 400.0 / 3.0  # us
    t_cp: float = 100.0 / 3.0  # us
    reuse_K: int = 3
    regions_X: int = 3
    interferer_rings: int = 4
    rx_pattern: str = "isotropic"
    path_loss_model: str = "hata_open"

    def __post_init__(self):
        validate_scenario(self)

    @property
    def tx_power_total(self) -> float:
        """Per-site power in dBm per 20 MHz, aggregated over the BS antennas."""
        return self.bs_tx_power + 10.0 * math.log10(self.bs_antenna_count)

    @property
    def thermal_noise_floor(self) -> float:
        return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(REFERENCE_BW_HZ) + self.noise_figure


@dataclass(frozen=True)
class ServiceConfig:
    n_hd_total: int = 36
    n_sd_total: int = 24
    n_regional_hd: int = 3
    r_hd: float = 7.14  # Mbps
    r_sd: float = 1.83  # Mbps
    broadcast_share_of_viewers: float = 0.5
    n_broadcast_hybrid: int = 3
    blocking_target: float = 0.001
    coverage_percentile: float = 0.01
    zipf_exponent: float = 1.0
    extra_programs: int = 0
    extra_regional: bool = False
    class_width: float = 5.0  # percent of the SINR distribution per class
    link_bw_cap: float = 20.0  # MHz, per unicast link
    bw_unit: float = 0.1  # MHz, Kaufman-Roberts discretization

    def __post_init__(self):
        validate_service(self)


@dataclass(frozen=True)
class EfficiencyProfile:
    beta_eff: float
    xi_eff: float
    per_stream_cap: float = 9.0  # bps/Hz
    fading_margin: float = 5.0  # dB

    def __post_init__(self):
        if not self.beta_eff > 0:
            raise ConfigError("beta_eff must be > 0")
        if not self.xi_eff > 0:
            raise ConfigError("xi_eff must be > 0")
        if not self.per_stream_cap > 0:
            raise ConfigError("per_stream_cap must be > 0")
        if self.fading_margin < 0:
            raise ConfigError("fading_margin must be >= 0")


def _check(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


def validate_scenario(s: Scenario) -> None:
    _check(s.morphology in MORPHOLOGIES, f"morphology must be one of {MORPHOLOGIES}")
    _check(s.isd > 0, "isd > 0 violated")
    _check(s.carrier_freq > 0, "carrier_freq > 0 violated")
    _check(s.bs_antenna_count >= 1 and s.rx_antenna_count >= 1, "antenna counts must be >= 1")
    _check(s.bs_height > 0 and s.rx_height > 0, "antenna heights must be > 0")
    for name in ("dtt_penetration", "viewing_ratio"):
        value = getattr(s, name)
        _check(0.0 <= value <= 1.0, f"{name} in [0, 1] violated")
    _check(s.population_density >= 0, "population_density >= 0 violated")
    _check(s.persons_per_household > 0, "persons_per_household > 0 violated")
    _check(s.tvs_per_household >= 0, "tvs_per_household >= 0 violated")
    _check(s.shadowing_sigma >= 0, "shadowing_sigma >= 0 violated")
    _check(s.t_u > 0, "t_u > 0 violated")
    _check(0 <= s.t_cp < s.t_u, "t_cp < t_u violated")
    _check(s.reuse_K >= 1, "reuse_K >= 1 violated")
    _check(s.regions_X >= 1, "regions_X >= 1 violated")
    _check(s.interferer_rings >= 1, "interferer_rings >= 1 violated")
    _check(s.rx_pattern in RX_PATTERNS, f"rx_pattern must be one of {RX_PATTERNS}")
    _check(s.path_loss_model in PATH_LOSS_MODELS,
           f"path_loss_model must be one of {PATH_LOSS_MODELS}")
    _check(s.viewer_base in VIEWER_BASES, f"viewer_base must be one of {VIEWER_BASES}")
    _check(abs(s.noise_floor - s.thermal_noise_floor) <= 0.5,
           "noise_floor within 0.5 dB of -174 dBm/Hz + 10log10(20 MHz) + noise_figure violated")


def validate_service(c: ServiceConfig) -> None:
    _check(c.n_hd_total >= 0 and c.n_sd_total >= 0, "program counts must be >= 0")
    _check(0 <= c.n_regional_hd <= c.n_hd_total, "n_regional_hd <= n_hd_total violated")
    _check(0 <= c.n_broadcast_hybrid <= c.n_hd_total,
           "n_broadcast_hybrid <= n_hd_total violated")
    _check(c.r_hd > 0 and c.r_sd > 0, "program rates must be > 0")
    _check(0.0 <= c.broadcast_share_of_viewers <= 1.0,
           "broadcast_share_of_viewers in [0, 1] violated")
    _check(0.0 < c.blocking_target < 1.0,
           "blocking_target in (0, 1) violated")
    _check(0.0 < c.coverage_percentile < 1.0, "coverage_percentile in (0, 1) violated")
    _check(c.extra_programs >= 0, "extra_programs >= 0 violated")
    _check(c.class_width > 0 and c.class_width <= 100, "class_width in (0, 100] violated")
    ratio = 100.0 / c.class_width
    _check(abs(ratio - round(ratio)) < 1e-9, "class_width must divide 100")
    _check(c.link_bw_cap > 0, "link_bw_cap > 0 violated")
    _check(c.bw_unit > 0, "bw_unit > 0 violated")


_RURAL = dict(
    morphology="rural",
    isd=12000.0,
    rx_antenna_gain=8.0,
    bs_height=90.0,
    rx_height=10.0,
    noise_figure=7.0,
    noise_floor=-94.0,
    wall_loss=0.0,
    population_density=1.0,
    dtt_penetration=0.6,
    rx_pattern="directional_mask",
    path_loss_model="hata_open",
)

_URBAN = dict(
    morphology="urban",
    isd=500.0,
    rx_antenna_gain=0.0,
    bs_height=30.0,
    rx_height=1.5,
    noise_figure=10.0,
    noise_floor=-91.0,
    wall_loss=10.0,
    population_density=5000.0,
    dtt_penetration=0.15,
    rx_pattern="isotropic",
    path_loss_model="cost231_urban",
)

# Sweep ranges from the scenario tables, metres.
ISD_RANGE = {"rural": (4000.0, 16000.0), "urban": (100.0, 1500.0)}
BS_ANTENNA_OPTIONS = (4, 8)
RX_ANTENNA_OPTIONS = (1, 4, 8)


def preset_scenario(morphology: str, **overrides) -> Scenario:
    if morphology == "rural":
        base = dict(_RURAL)
    elif morphology == "urban":
        base = dict(_URBAN)
    else:
        raise ConfigError(f"unknown morphology {morphology!r}")
    base["t_u"], base["t_cp"] = derive_cp_lengths(morphology)
    base.update(overrides)
    return Scenario(**base)


def efficiency_profile(scenario: Scenario, mode: str) -> EfficiencyProfile:
    """Bandwidth and SINR implementation efficiency for one delivery mode."""
    m_t, m_r = scenario.bs_antenna_count, scenario.rx_antenna_count
    if mode == "broadcast":
        return EfficiencyProfile(beta_eff=BROADCAST_BETA[scenario.morphology],
                                 xi_eff=m_t * m_r / 2.0)
    if mode == "unicast":
        return EfficiencyProfile(
            beta_eff=UNICAST_BETA_PER_STREAM[scenario.morphology] * min(m_t, m_r),
            xi_eff=UNICAST_XI)
    raise ConfigError(f"unknown mode {mode!r}")


def builtin_scenario(morphology: str, mode: str = "broadcast"):
    scenario = preset_scenario(morphology)
    return scenario, ServiceConfig(), efficiency_profile(scenario, mode)


# ---------------------------------------------------------------------------
# Config file format
# ---------------------------------------------------------------------------

_SECTIONS = {"scenario": Scenario, "service": ServiceConfig, "efficiency": EfficiencyProfile}


def _convert(raw: str, ftype, name: str):
    if ftype in (bool, "bool"):
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if ftype in (int, "int"):
        return int(raw)
    if ftype in (float, "float"):
        return float(raw)
    return raw.strip()


def _field_types(cls) -> dict:
    return {f.name: f.type for f in fields(cls)}


def _find_line(text: str, section: str, key: str) -> int | None:
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        head = re.match(r"^\[([^\]]+)\]", stripped)
        if head:
            current = head.group(1).strip().lower()
        elif current == section and re.match(rf"^{re.escape(key)}\s*[=:]", stripped, re.I):
            return lineno
    return None


@dataclass(frozen=True)
class ParsedConfig:
    scenario: Scenario
    service: ServiceConfig
    profile: EfficiencyProfile
    mode: str  # efficiency column the profile was built for
    efficiency_overrides: dict  # keys set explicitly under [efficiency]


def parse_config(text: str, preset: str | None = None, mode: str | None = None):
    """Parse config text into a validated bundle.

    Keys missing from the file fall back to the builtin preset named by
    ``[preset] morphology`` (or the ``preset`` argument).
    """
    parsed = read_config(text, preset, mode)
    return parsed.scenario, parsed.service, parsed.profile


def read_config(text: str, preset: str | None = None, mode: str | None = None) -> ParsedConfig:
    """Like :func:`parse_config` but also reports the mode and explicit
    efficiency overrides."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys such as reuse_K are case-sensitive
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of a [section]", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("cannot parse line", lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(f"duplicate entry {exc.args[1]!r}", exc.lineno) from None

    for section in parser.sections():
        if section not in _SECTIONS and section != "preset":
            raise ConfigError(f"unknown section [{section}]",
                              _find_line_of_section(text, section))

    head = parser["preset"] if parser.has_section("preset") else {}
    morphology = head.get("morphology", preset) or "rural"
    mode = head.get("mode", mode) or "broadcast"
    for key in head:
        if key not in ("morphology", "mode"):
            raise ConfigError(f"unknown key {key!r} in [preset]", _find_line(text, "preset", key))
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}", _find_line(text, "preset", "mode"))

    values = {}
    for section, cls in _SECTIONS.items():
        types = _field_types(cls)
        values[section] = {}
        if not parser.has_section(section):
            continue
        for key, raw in parser[section].items():
            if key not in types:
                raise ConfigError(f"unknown key {key!r} in [{section}]",
                                  _find_line(text, section, key))
            try:
                values[section][key] = _convert(raw, types[key], key)
            except ValueError as exc:
                raise ConfigError(str(exc), _find_line(text, section, key)) from None

    try:
        scenario = preset_scenario(morphology, **values["scenario"])
        service = ServiceConfig(**values["service"])
        profile = replace(efficiency_profile(scenario, mode), **values["efficiency"])
    except ConfigError as exc:
        raise ConfigError(f"validation failed: {exc}") from None
    return ParsedConfig(scenario, service, profile, mode, dict(values["efficiency"]))


def _find_line_of_section(text: str, section: str) -> int | None:
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip().lower().startswith(f"[{section.lower()}]"):
            return lineno
    return None


def load_scenario(path, preset: str | None = None, mode: str | None = None):
    """Read a bundle from a config file; see :func:`parse_config`."""
    text = Path(path).read_text()
    return parse_config(text, preset=preset, mode=mode)


def load_config(path, preset: str | None = None, mode: str | None = None) -> ParsedConfig:
    return read_config(Path(path).read_text(), preset=preset, mode=mode)


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(scenario: Scenario, service: ServiceConfig, profile: EfficiencyProfile,
                mode: str = "broadcast") -> str:
    """Serialize a bundle so that :func:`parse_config` reproduces it exactly."""
    lines = ["[preset]", f"morphology = {scenario.morphology}", f"mode = {mode}", ""]
    for section, obj in (("scenario", scenario), ("service", service), ("efficiency", profile)):
        lines.append(f"[{section}]")
        for f in fields(obj):
            if section == "scenario" and f.name == "morphology":
                continue
            lines.append(f"{f.name} = {_format(getattr(obj, f.name))}")
        lines.append("")
    return "\n".join(lines)


def bundle_dict(scenario: Scenario, service: ServiceConfig, profile: EfficiencyProfile) -> dict:
    return {
        "scenario": dataclasses.asdict(scenario),
        "service": dataclasses.asdict(service),
        "efficiency": dataclasses.asdict(profile),
    }
