"""Shared domain types, constants, unit conventions and configuration.

Conventions used throughout the package:

* every energy is stored as a frequency E/h in Hz, so no hbar bookkeeping
  is needed anywhere;
* every time is in seconds internally; unit suffixes (us, MHz, mK, ...)
  are accepted in configuration files and converted at the boundary;
* kappa and chi are angular (rad/s) internally, while the corresponding
  config keys take the linear frequencies kappa_over_2pi / chi_over_2pi
  that instruments display.

All parameter types are frozen dataclasses: they validate on construction
and are safe to share between concurrent workers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .kinetics import QpKineticsParams, steady_state

PLANCK = 6.62607015e-34  # J s
BOLTZMANN = 1.380649e-23  # J / K
ELEMENTARY_CHARGE = 1.602176634e-19  # C
TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Raised for unparseable or invariant-violating configuration input."""


# ---------------------------------------------------------------------------
# parameter types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QubitParams:
    """Two-level qubit parameters.

    f_ge: transition frequency (Hz); f_gap: superconducting gap as a
    frequency Delta/h (Hz); f_inductive: inductive energy as a frequency
    E_L/h (Hz); gamma_background: relaxation rate from non-QP channels
    (1/s); temperature: effective bath temperature (K).
    """

    f_ge: float = 665e6
    f_gap: float = 48.4e9
    f_inductive: float = 0.5e9
    gamma_background: float = 0.0
    temperature: float = 0.045

    def __post_init__(self):
        if self.f_ge <= 0 or self.f_gap <= 0 or self.f_inductive <= 0:
            raise ValueError("qubit frequencies must be positive")
        if self.gamma_background < 0:
            raise ValueError("gamma_background must be non-negative")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.f_ge >= 2.0 * self.f_gap:
            raise ValueError("f_ge must be below twice f_gap (pair-breaking photon)")


@dataclass(frozen=True)
class MeasurementParams:
    """Dispersive readout parameters.

    n_photons: mean cavity photon number; kappa: cavity linewidth (rad/s);
    chi: dispersive shift (rad/s); t_meas: integration time per sample (s);
    efficiency: total measurement efficiency in (0, 1].
    """

    n_photons: float = 2.5
    kappa: float = TWO_PI * 4.7e6
    chi: float = TWO_PI * 1e6
    t_meas: float = 5e-6
    efficiency: float = 0.21

    def __post_init__(self):
        if self.n_photons < 0:
            raise ValueError("n_photons must be non-negative")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.t_meas <= 0:
            raise ValueError("t_meas must be positive")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("efficiency must be in (0, 1]")


@dataclass(frozen=True)
class ThermalParams:
    """Substrate heating model for strong generation pulses.

    power: dissipated power during a pulse (W); specific_heat (J/g/K) and
    mass (g) set the temperature rise per unit energy; tau_thermal (s) is
    the observed equilibration constant.  conductivity (W/m/K), area (m2)
    and length (m) feed the decay-constant helper and may be omitted.
    i_critical (A) and v_gap (V) record the junction values behind power.
    """

    power: float = 1.12e-10
    specific_heat: float = 1e-11
    mass: float = 0.1
    tau_thermal: float = 2e-3
    conductivity: float | None = 6e-5
    area: float | None = 2.5e-6
    length: float | None = 3e-3
    i_critical: float = 280e-9
    v_gap: float = 0.4e-3

    def __post_init__(self):
        for name in ("power", "specific_heat", "mass", "tau_thermal",
                     "i_critical", "v_gap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("conductivity", "area", "length"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive when given")


@dataclass(frozen=True)
class Pulse:
    """One generation pulse: starts at `start`, lasts `length`, injects
    `inject` QPs into the array when it ends."""

    start: float
    length: float
    inject: int

    def __post_init__(self):
        if self.start < 0 or self.length <= 0:
            raise ValueError("pulse start must be >= 0 and length > 0")
        if self.inject < 0:
            raise ValueError("pulse injection count must be non-negative")

    @property
    def end(self) -> float:
        return self.start + self.length


@dataclass(frozen=True)
class PeriodicPulses:
    """Compact description of an evenly spaced pulse train."""

    first: float
    period: float
    length: float
    inject: int
    count: int

    def __post_init__(self):
        if self.period <= 0 or self.length <= 0 or self.count < 1:
            raise ValueError("periodic pulse train needs period, length > 0 and count >= 1")
        if self.length >= self.period:
            raise ValueError("pulse length must be shorter than the period")

    def expand(self) -> tuple[Pulse, ...]:
        return tuple(
            Pulse(self.first + i * self.period, self.length, self.inject)
            for i in range(self.count)
        )


@dataclass(frozen=True)
class Modulation:
    """Slow two-state telegraph modulation of the QP generation rate.

    The generation coefficient switches between the kinetics value (noisy
    state) and quiet_generation (quiet state), with exponential residence
    times of the given means.
    """

    quiet_generation: float
    mean_quiet: float = 4.0
    mean_noisy: float = 4.0

    def __post_init__(self):
        if self.quiet_generation < 0:
            raise ValueError("quiet_generation must be non-negative")
        if self.mean_quiet <= 0 or self.mean_noisy <= 0:
            raise ValueError("modulation residence times must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete description of one simulated run."""

    duration: float
    rng_seed: int
    qubit: QubitParams = field(default_factory=QubitParams)
    meas: MeasurementParams = field(default_factory=MeasurementParams)
    kinetics: QpKineticsParams = field(default_factory=QpKineticsParams)
    thermal: ThermalParams | None = None
    pulses: tuple[Pulse, ...] = ()
    pulse_periodic: PeriodicPulses | None = None
    pulse_wait: float = 5e-6
    n_initial: int = -1  # -1: use the rounded steady-state mean
    gamma_scale: float = 1.0
    modulation: Modulation | None = None

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be an unsigned 64-bit integer")
        if self.gamma_scale <= 0:
            raise ValueError("gamma_scale must be positive")
        if self.pulse_wait < 0:
            raise ValueError("pulse_wait must be non-negative")
        if self.n_initial < -1:
            raise ValueError("n_initial must be -1 (auto) or a non-negative count")
        prev_end = -math.inf
        for p in sorted(self.pulses, key=lambda p: p.start):
            if p.start < prev_end:
                raise ValueError("pulses must not overlap")
            if p.end > self.duration:
                raise ValueError("pulses must end within duration")
            prev_end = p.end

    def initial_count(self) -> int:
        """Starting QP number: explicit n_initial, else rounded steady mean."""
        if self.n_initial >= 0:
            return self.n_initial
        try:
            return int(round(steady_state(self.kinetics) * self.kinetics.n_pairs))
        except ValueError:
            return 0


# ---------------------------------------------------------------------------
# physics conversions
# ---------------------------------------------------------------------------

def polarization_to_temperature(p_excited: float, f_ge: float) -> float:
    """Effective temperature with excited-state occupation p_excited.

    Inverts the Boltzmann ratio p_e/p_g = exp(-h f_ge / kB T).  Only
    defined for 0 < p_excited < 0.5 (positive temperature).
    """
    if not 0.0 < p_excited < 0.5:
        raise ValueError("p_excited must be in (0, 0.5) for a positive temperature")
    return (PLANCK * f_ge / BOLTZMANN) / math.log((1.0 - p_excited) / p_excited)


def temperature_to_polarization(temperature: float, f_ge: float) -> float:
    """Excited-state occupation of a two-level system at the given temperature."""
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    boltzmann_ratio = math.exp(-PLANCK * f_ge / (BOLTZMANN * temperature))
    return boltzmann_ratio / (1.0 + boltzmann_ratio)


def gap_frequency(v_gap: float) -> float:
    """Gap as a frequency Delta/h from the junction gap voltage 2Delta/e."""
    return ELEMENTARY_CHARGE * v_gap / (2.0 * PLANCK)


def junction_power(i_critical: float, v_gap: float) -> float:
    """Power dissipated by a junction driven into the resistive branch."""
    return i_critical * v_gap


# ---------------------------------------------------------------------------
# configuration text format
# ---------------------------------------------------------------------------
#
# One `key = value` per line, '#' starts a comment, values may carry a unit
# suffix appropriate for the key (times: s/ms/us/ns, frequencies:
# Hz/kHz/MHz/GHz, temperatures: K/mK).  docs/config_keys.md is generated
# from the schema below.

_UNIT_TABLES = {
    "time": {"": 1.0, "s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9},
    "freq": {"": 1.0, "Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "temp": {"": 1.0, "K": 1.0, "mK": 1e-3},
    "power": {"": 1.0, "W": 1.0, "nW": 1e-9, "pW": 1e-12},
    "current": {"": 1.0, "A": 1.0, "uA": 1e-6, "nA": 1e-9},
    "voltage": {"": 1.0, "V": 1.0, "mV": 1e-3, "uV": 1e-6},
    "mass": {"": 1.0, "g": 1.0, "mg": 1e-3},
    "plain": {"": 1.0},
}

_REQUIRED = object()


@dataclass(frozen=True)
class _Key:
    kind: str  # unit table name, or "int"/"seed" for integers
    default: object
    doc: str


CONFIG_SCHEMA: dict[str, _Key] = {
    "rng_seed": _Key("seed", _REQUIRED, "unsigned 64-bit seed for all random draws"),
    "duration": _Key("time", _REQUIRED, "total simulated time (s)"),
    # qubit
    "f_ge": _Key("freq", 665e6, "qubit transition frequency (Hz)"),
    "f_gap": _Key("freq", 48.4e9, "superconducting gap as a frequency Delta/h (Hz)"),
    "f_inductive": _Key("freq", 0.5e9,
                        "inductive energy as a frequency E_L/h (Hz); derived default, "
                        "chosen so the default QP density gives a ~100 us lifetime"),
    "gamma_background": _Key("plain", 0.0, "non-QP relaxation rate (1/s)"),
    "temperature": _Key("temp", 0.045, "effective bath temperature (K)"),
    # measurement
    "n_photons": _Key("plain", 2.5, "mean readout cavity photon number"),
    "kappa_over_2pi": _Key("freq", 4.7e6, "cavity linewidth kappa/2pi (Hz)"),
    "chi_over_2pi": _Key("freq", 1e6, "dispersive shift chi/2pi (Hz)"),
    "t_meas": _Key("time", 5e-6, "integration time per sample (s)"),
    "efficiency": _Key("plain", 0.21, "total measurement efficiency, in (0, 1]"),
    # kinetics
    "qp_generation": _Key("plain", 3.2e-4, "QP generation coefficient (1/s)"),
    "qp_trapping": _Key("plain", 8000.0, "single-QP trapping/diffusion rate (1/s)"),
    "qp_recombination": _Key("plain", 0.0, "QP recombination coefficient (1/s)"),
    "n_cooper_pairs": _Key("plain", 3.75e7,
                           "Cooper pairs in the array; derived default, back-computed "
                           "from 1-2 QPs at density 4e-8"),
    "n_initial": _Key("int", -1, "starting QP count; -1 uses the rounded steady mean"),
    "gamma_scale": _Key("plain", 1.0,
                        "optional multiplier on the relaxation rate (readout photons "
                        "shorten the lifetime by ~25% at the default drive)"),
    # modulation of the generation coefficient
    "mod_quiet_generation": _Key("plain", None,
                                 "quiet-state generation coefficient (1/s); absent "
                                 "disables modulation"),
    "mod_mean_quiet": _Key("time", 4.0, "mean residence in the quiet state (s)"),
    "mod_mean_noisy": _Key("time", 4.0, "mean residence in the noisy state (s)"),
    # pulse train
    "pulse_schedule": _Key("plain", None,
                           "explicit pulses as comma-separated start:length:count "
                           "(times may carry unit suffixes)"),
    "pulse_first": _Key("time", None, "start of the first periodic pulse (s)"),
    "pulse_period": _Key("time", None, "periodic pulse spacing (s)"),
    "pulse_length": _Key("time", None, "pulse length (s)"),
    "pulse_inject": _Key("int", None, "QPs injected into the array per pulse"),
    "pulse_count": _Key("int", None, "number of periodic pulses"),
    "pulse_wait": _Key("time", 5e-6, "dead time after each pulse before readout (s)"),
    # thermal (any thermal_* key enables the substrate heating model)
    "thermal_power": _Key("power", None,
                          "dissipated power during a pulse (W); default "
                          "i_critical * v_gap"),
    "thermal_specific_heat": _Key("plain", 1e-11, "substrate specific heat (J/g/K)"),
    "thermal_mass": _Key("mass", 0.1, "substrate mass (g)"),
    "thermal_tau": _Key("time", 2e-3, "observed temperature equilibration time (s)"),
    "thermal_conductivity": _Key("plain", 6e-5,
                                 "substrate heat conductivity (W/m/K); derived default, "
                                 "back-computed from a ~20 us intrinsic decay constant"),
    "thermal_area": _Key("plain", 2.5e-6, "contact cross-section to the sink (m2)"),
    "thermal_length": _Key("plain", 3e-3, "distance to the thermal sink (m)"),
    "thermal_i_critical": _Key("current", 280e-9, "junction critical current (A)"),
    "thermal_v_gap": _Key("voltage", 0.4e-3, "junction gap voltage (V)"),
}

_THERMAL_KEYS = tuple(k for k in CONFIG_SCHEMA if k.startswith("thermal_"))
_VALUE_RE = re.compile(r"^([-+0-9.eE]+)\s*([A-Za-z]*)$")


def _parse_number(key: str, text: str) -> float:
    kind = CONFIG_SCHEMA[key].kind
    m = _VALUE_RE.match(text.strip())
    if not m:
        raise ConfigError(f"{key}: cannot parse value {text!r}")
    num, suffix = m.groups()
    try:
        value = float(num)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {num!r}") from None
    if kind in ("int", "seed"):
        if suffix:
            raise ConfigError(f"{key}: integer keys take no unit suffix")
        if value != int(value):
            raise ConfigError(f"{key}: expected an integer, got {text!r}")
        return int(value)
    table = _UNIT_TABLES[kind]
    if suffix not in table:
        raise ConfigError(
            f"{key}: unknown unit {suffix!r} (expected one of "
            f"{sorted(u for u in table if u)})"
        )
    return value * table[suffix]


def _parse_pulse_schedule(text: str) -> tuple[Pulse, ...]:
    pulses = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise ConfigError(
                f"pulse_schedule: expected start:length:count, got {item!r}"
            )
        start = _parse_number("pulse_first", parts[0])
        length = _parse_number("pulse_length", parts[1])
        count = _parse_number("pulse_inject", parts[2])
        try:
            pulses.append(Pulse(start, length, int(count)))
        except ValueError as exc:
            raise ConfigError(f"pulse_schedule: {exc}") from None
    if not pulses:
        raise ConfigError("pulse_schedule: no pulses given")
    return tuple(pulses)


def validate_config(text: str) -> ScenarioConfig:
    """Parse and validate flat key-value configuration text.

    Unknown keys, bad numbers and invariant violations raise ConfigError
    naming the offending key; keys left out take the documented defaults.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{key}: empty value")
        raw[key] = value

    for key, spec in CONFIG_SCHEMA.items():
        if spec.default is _REQUIRED and key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    def get(key: str):
        spec = CONFIG_SCHEMA[key]
        if key in raw:
            return _parse_number(key, raw[key])
        return spec.default if spec.default is not _REQUIRED else None

    def build(cls, key_map: dict[str, str], **extra):
        kwargs = dict(extra)
        for field_name, key in key_map.items():
            kwargs[field_name] = get(key)
        try:
            return cls(**kwargs)
        except ValueError as exc:
            keys = ", ".join(key_map.values())
            raise ConfigError(f"invalid value among [{keys}]: {exc}") from None

    qubit = build(QubitParams, {
        "f_ge": "f_ge", "f_gap": "f_gap", "f_inductive": "f_inductive",
        "gamma_background": "gamma_background", "temperature": "temperature",
    })
    meas = build(MeasurementParams, {
        "n_photons": "n_photons", "t_meas": "t_meas", "efficiency": "efficiency",
    }, kappa=TWO_PI * get("kappa_over_2pi"), chi=TWO_PI * get("chi_over_2pi"))
    kin = build(QpKineticsParams, {
        "generation": "qp_generation", "trapping": "qp_trapping",
        "recombination": "qp_recombination", "n_pairs": "n_cooper_pairs",
    })

    thermal = None
    if any(k in raw for k in _THERMAL_KEYS):
        power = get("thermal_power")
        if power is None:
            power = junction_power(get("thermal_i_critical"), get("thermal_v_gap"))
        thermal = build(ThermalParams, {
            "specific_heat": "thermal_specific_heat", "mass": "thermal_mass",
            "tau_thermal": "thermal_tau", "conductivity": "thermal_conductivity",
            "area": "thermal_area", "length": "thermal_length",
            "i_critical": "thermal_i_critical", "v_gap": "thermal_v_gap",
        }, power=power)

    modulation = None
    if "mod_quiet_generation" in raw:
        modulation = build(Modulation, {
            "quiet_generation": "mod_quiet_generation",
            "mean_quiet": "mod_mean_quiet", "mean_noisy": "mod_mean_noisy",
        })

    pulses: tuple[Pulse, ...] = ()
    periodic = None
    periodic_keys = ("pulse_first", "pulse_period", "pulse_length",
                     "pulse_inject", "pulse_count")
    have_periodic = [k for k in periodic_keys if k in raw]
    if "pulse_schedule" in raw and have_periodic:
        raise ConfigError("give either pulse_schedule or pulse_first/period/... , not both")
    if "pulse_schedule" in raw:
        pulses = _parse_pulse_schedule(raw["pulse_schedule"])
    elif have_periodic:
        missing = [k for k in periodic_keys if k not in raw and k != "pulse_first"]
        if missing:
            raise ConfigError(f"periodic pulse train needs keys {missing}")
        try:
            periodic = PeriodicPulses(
                first=get("pulse_first") if "pulse_first" in raw else 0.0,
                period=get("pulse_period"), length=get("pulse_length"),
                inject=get("pulse_inject"), count=get("pulse_count"),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid pulse train: {exc}") from None
        pulses = periodic.expand()

    try:
        return ScenarioConfig(
            duration=get("duration"), rng_seed=get("rng_seed"),
            qubit=qubit, meas=meas, kinetics=kin, thermal=thermal,
            pulses=pulses, pulse_periodic=periodic, pulse_wait=get("pulse_wait"),
            n_initial=get("n_initial"), gamma_scale=get("gamma_scale"),
            modulation=modulation,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def serialize_config(config: ScenarioConfig) -> str:
    """Canonical text form of a config: SI base units, full float precision.

    validate_config(serialize_config(c)) reproduces c, and the serialized
    text is a fixed point of a parse/serialize round trip, which also makes
    it the hashable canonical form recorded in run manifests.
    """
    lines = [
        f"rng_seed = {config.rng_seed}",
        f"duration = {config.duration!r}",
        f"f_ge = {config.qubit.f_ge!r}",
        f"f_gap = {config.qubit.f_gap!r}",
        f"f_inductive = {config.qubit.f_inductive!r}",
        f"gamma_background = {config.qubit.gamma_background!r}",
        f"temperature = {config.qubit.temperature!r}",
        f"n_photons = {config.meas.n_photons!r}",
        f"kappa_over_2pi = {config.meas.kappa / TWO_PI!r}",
        f"chi_over_2pi = {config.meas.chi / TWO_PI!r}",
        f"t_meas = {config.meas.t_meas!r}",
        f"efficiency = {config.meas.efficiency!r}",
        f"qp_generation = {config.kinetics.generation!r}",
        f"qp_trapping = {config.kinetics.trapping!r}",
        f"qp_recombination = {config.kinetics.recombination!r}",
        f"n_cooper_pairs = {config.kinetics.n_pairs!r}",
        f"n_initial = {config.n_initial}",
        f"gamma_scale = {config.gamma_scale!r}",
        f"pulse_wait = {config.pulse_wait!r}",
    ]
    if config.modulation is not None:
        m = config.modulation
        lines += [
            f"mod_quiet_generation = {m.quiet_generation!r}",
            f"mod_mean_quiet = {m.mean_quiet!r}",
            f"mod_mean_noisy = {m.mean_noisy!r}",
        ]
    if config.pulse_periodic is not None:
        p = config.pulse_periodic
        lines += [
            f"pulse_first = {p.first!r}",
            f"pulse_period = {p.period!r}",
            f"pulse_length = {p.length!r}",
            f"pulse_inject = {p.inject}",
            f"pulse_count = {p.count}",
        ]
    elif config.pulses:
        items = ", ".join(
            f"{p.start!r}:{p.length!r}:{p.inject}" for p in config.pulses
        )
        lines.append(f"pulse_schedule = {items}")
    if config.thermal is not None:
        t = config.thermal
        lines += [
            f"thermal_power = {t.power!r}",
            f"thermal_specific_heat = {t.specific_heat!r}",
            f"thermal_mass = {t.mass!r}",
            f"thermal_tau = {t.tau_thermal!r}",
            f"thermal_i_critical = {t.i_critical!r}",
            f"thermal_v_gap = {t.v_gap!r}",
        ]
        if t.conductivity is not None:
            lines.append(f"thermal_conductivity = {t.conductivity!r}")
        if t.area is not None:
            lines.append(f"thermal_area = {t.area!r}")
        if t.length is not None:
            lines.append(f"thermal_length = {t.length!r}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_config(fh.read())


def config_reference() -> str:
    """Markdown reference for every configuration key (used to generate
    docs/config_keys.md)."""
    unit_hint = {
        "time": "time (s; suffixes s, ms, us, ns)",
        "freq": "frequency (Hz; suffixes Hz, kHz, MHz, GHz)",
        "temp": "temperature (K; suffixes K, mK)",
        "power": "power (W; suffixes W, nW, pW)",
        "current": "current (A; suffixes A, uA, nA)",
        "voltage": "voltage (V; suffixes V, mV, uV)",
        "mass": "mass (g; suffixes g, mg)",
        "plain": "number (no suffix)",
        "int": "integer",
        "seed": "integer",
    }
    lines = [
        "# Configuration keys",
        "",
        "Flat `key = value` text, one pair per line, `#` starts a comment.",
        "Values may carry the unit suffixes listed for their kind; bare",
        "numbers are read in SI base units.",
        "",
        "| key | kind | default | description |",
        "|-----|------|---------|-------------|",
    ]
    for key, spec in CONFIG_SCHEMA.items():
        if spec.default is _REQUIRED:
            default = "required"
        elif spec.default is None:
            default = "unset"
        else:
            default = f"`{spec.default!r}`"
        lines.append(f"| `{key}` | {unit_hint[spec.kind]} | {default} | {spec.doc} |")
    return "\n".join(lines) + "\n"
