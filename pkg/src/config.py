"""
Run configuration.

A run is described by a YAML document whose sections mirror the model
types (environment, pair, layer, transducer, signal, band, schedule,
simulation, sweep, validate). Numbers are SI unless they carry a unit
suffix such as "70 mM", "4 nm", "100 mV" or "4 KD". Every error names the
line of the offending key.
"""

import hashlib
import logging
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import yaml

from errors import ConfigParseError, ConfigurationError, ModelError
from kinetics import MessageSchedule
from noise import Band
from physchem import molar_to_molecules
from presets import PRESETS, Grid, SweepSpec
from receiver import (
    PARAMETER_FIELDS,
    Receiver,
    ReceiverBuilder,
    parameter_value,
)
from stosim import MIN_SER_SYMBOLS, SIMULATION_METHODS, InterfererSpecies, NoiseFlags

logger = logging.getLogger(__name__)

TOOL_NAME = "biofet-receiver"
TOOL_VERSION = "0.1.0"

MODES = ("response", "sensitivity", "snr", "lod", "simulate", "validate")
SWEEP_MODES = ("response", "sensitivity", "snr", "lod")
DEFAULT_SEED = 20160101
DEFAULT_CONCENTRATION_KD = 4.0
DEFAULT_SYMBOL_RATE = 1.0  # Hz

KD_UNIT = "KD"
LINES_KEY = "__lines__"

UNITS: Dict[str, Dict[str, float]] = {
    "ligand": {
        "M": molar_to_molecules(1.0),
        "mM": molar_to_molecules(1e-3),
        "uM": molar_to_molecules(1e-6),
        "nM": molar_to_molecules(1e-9),
        "pM": molar_to_molecules(1e-12),
    },
    "ion": {"M": 1e3, "mM": 1.0, "uM": 1e-3},
    "length": {"m": 1.0, "um": 1e-6, "nm": 1e-9, "pm": 1e-12},
    "voltage": {"V": 1.0, "mV": 1e-3},
    "capacitance": {"F": 1.0, "fF": 1e-15, "aF": 1e-18, "zF": 1e-21},
    "temperature": {"K": 1.0},
    "resistance": {"ohm": 1.0, "Mohm": 1e6, "Gohm": 1e9},
    "frequency": {"Hz": 1.0, "mHz": 1e-3, "kHz": 1e3},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6},
    "plain": {},
}

PARAMETER_KINDS: Dict[str, str] = {
    "c": "ligand",
    "temperature": "temperature",
    "c_ion": "ion",
    "eps_r": "plain",
    "k_on": "plain",
    "k_off": "plain",
    "l_r": "length",
    "n_e": "plain",
    "c_mol_r": "capacitance",
    "c_mol_l": "capacitance",
    "c_r": "plain",
    "width": "length",
    "length": "length",
    "t_ox": "length",
    "eps_ox": "plain",
    "mu_eff": "plain",
    "v_ds": "voltage",
    "c_dl": "plain",
    "c_s": "plain",
    "n_t": "plain",
    "tunneling_distance": "length",
    "r_layer": "resistance",
    "v_gs": "voltage",
    "v_th0": "voltage",
}
OPTIONAL_PARAMETERS = ("v_gs",)

MODEL_SECTIONS: Dict[str, List[str]] = {}
for _name, (_section, _) in PARAMETER_FIELDS.items():
    MODEL_SECTIONS.setdefault(_section, []).append(_name)

TOP_KEYS = (
    "mode",
    "preset",
    "seed",
    "output",
    "signal",
    "band",
    "schedule",
    "simulation",
    "sweep",
    "validate",
) + tuple(MODEL_SECTIONS)
SIGNAL_KEYS = ("c", "power", "lod_threshold_db")
BAND_KEYS = ("f_min", "f_max")
SCHEDULE_KEYS = ("levels", "symbol_rate", "start_time")
SIMULATION_KEYS = (
    "dt",
    "method",
    "thermal",
    "flicker",
    "start_at_steady_state",
    "interferers",
    "ser_symbols",
)
INTERFERER_KEYS = (
    "name",
    "concentration",
    "k_on",
    "k_off",
    "electrons",
    "receptor_length_equivalent",
)
SWEEP_KEYS = ("axis", "values", "grid", "scale", "family")
GRID_KEYS = ("start", "stop", "points", "scale")
FAMILY_KEYS = ("axis", "values")
VALIDATE_KEYS = ("tolerance_scale",)

_QUANTITY = re.compile(
    r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$"
)


@dataclass(frozen=True)
class SimulationSettings:
    """
    Monte-Carlo settings for the simulate and validate modes.
    """

    dt: Optional[float] = None  # s, None picks the largest admissible step
    method: str = "binomial"
    noise: NoiseFlags = NoiseFlags()
    start_at_steady_state: bool = True
    interferers: Tuple[InterfererSpecies, ...] = ()
    ser_symbols: Optional[int] = None

    def __post_init__(self) -> None:
        if self.method not in SIMULATION_METHODS:
            raise ConfigurationError(
                f"method must be one of {SIMULATION_METHODS}, got {self.method}"
            )
        if self.dt is not None and not self.dt > 0:
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")
        if self.ser_symbols is not None and self.ser_symbols < MIN_SER_SYMBOLS:
            raise ConfigurationError(
                f"ser_symbols must be >= {MIN_SER_SYMBOLS}, got {self.ser_symbols}"
            )


@dataclass(frozen=True)
class RunConfig:
    """
    Everything a run needs, fully resolved to SI.
    """

    mode: str = "response"
    preset: Optional[str] = None
    seed: int = DEFAULT_SEED
    output: Optional[str] = None
    receiver: Receiver = field(default_factory=Receiver)
    concentration: Optional[float] = None  # molecules/m^3
    lod_threshold_db: float = 0.0
    schedule: Optional[MessageSchedule] = None
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    sweep: Optional[SweepSpec] = None
    tolerance_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be an unsigned 64-bit integer")
        if not self.tolerance_scale >= 0:
            raise ConfigurationError(
                f"tolerance_scale must be >= 0, got {self.tolerance_scale}"
            )
        if self.concentration is not None and not self.concentration >= 0:
            raise ConfigurationError(
                f"concentration must be >= 0, got {self.concentration}"
            )

    def evaluation_concentration(self) -> float:
        """
        Concentration used by sweeps over other axes, 4 K_D by default.
        """
        if self.concentration is not None:
            return self.concentration
        return DEFAULT_CONCENTRATION_KD * self.receiver.dissociation_constant()

    def message_schedule(self) -> MessageSchedule:
        if self.schedule is not None:
            return self.schedule
        return MessageSchedule((self.evaluation_concentration(),), DEFAULT_SYMBOL_RATE)

    def sweep_spec(self) -> SweepSpec:
        """
        The configured sweep, or the single evaluation concentration.
        """
        if self.sweep is not None:
            return self.sweep
        return SweepSpec("c", (self.evaluation_concentration(),))


class _LineLoader(yaml.SafeLoader):
    """
    SafeLoader that records the 1-based line of every mapping key.
    """

    def construct_mapping(self, node, deep=False):
        mapping = super().construct_mapping(node, deep=deep)
        mapping[LINES_KEY] = {
            key.value: key.start_mark.line + 1 for key, _ in node.value
        }
        return mapping


class _Section:
    """
    A mapping read from the document, with the line of each key.
    """

    def __init__(self, name: str, data: Any, line: Optional[int]) -> None:
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigParseError(f"'{name}' must be a mapping", line)
        self.name = name
        self.line = line
        self.lines: Dict[str, int] = data.get(LINES_KEY, {})
        self.values = {k: v for k, v in data.items() if k != LINES_KEY}

    def __contains__(self, key: str) -> bool:
        return key in self.values

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    def line_of(self, key: str) -> Optional[int]:
        return self.lines.get(key, self.line)

    def check_keys(self, allowed) -> None:
        for key in self.values:
            if key not in allowed:
                raise ConfigParseError(
                    f"unknown key '{key}' in '{self.name}'", self.line_of(key)
                )

    def section(self, key: str) -> "_Section":
        return _Section(key, self.get(key), self.line_of(key))


def parse_quantity(
    value: Any, kind: str, line: Optional[int] = None, k_d: Optional[float] = None
) -> float:
    """
    Convert a plain number or a "<number> <unit>" string to SI.
    Ligand concentrations also accept multiples of K_D when k_d is given.
    """
    if isinstance(value, bool):
        raise ConfigParseError(f"expected a number, got {value}", line)
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigParseError(f"expected a number, got {value!r}", line)
    match = _QUANTITY.match(value)
    if match is None:
        raise ConfigParseError(f"cannot read quantity {value!r}", line)
    number, unit = float(match.group(1)), match.group(2)
    if not unit:
        return number
    if kind == "ligand" and unit == KD_UNIT:
        if k_d is None:
            raise ConfigParseError("KD multiples are not allowed here", line)
        return number * k_d
    if unit not in UNITS[kind]:
        raise ConfigParseError(
            f"unit '{unit}' does not fit a {kind} quantity ({value!r})", line
        )
    return number * UNITS[kind][unit]


def _parse_parameter(name: str, value: Any, line: Optional[int]) -> Any:
    match name:
        case "charge_sign":
            if value not in (-1, 1) or isinstance(value, bool):
                raise ConfigParseError(
                    f"charge_sign must be -1 or +1, got {value}", line
                )
            return int(value)
        case "channel":
            return str(value)
        case _:
            if value is None and name in OPTIONAL_PARAMETERS:
                return None
            return parse_quantity(value, PARAMETER_KINDS[name], line)


def _build(builder: ReceiverBuilder, line: Optional[int]) -> Receiver:
    try:
        return builder.build()
    except ModelError as error:
        raise ConfigParseError(str(error), line) from error


def _parse_flag(section: _Section, key: str, default: bool) -> bool:
    value = section.get(key, default)
    if not isinstance(value, bool):
        raise ConfigParseError(f"'{key}' must be true or false", section.line_of(key))
    return value


def _parse_int(section: _Section, key: str, default: Optional[int]) -> Optional[int]:
    value = section.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigParseError(f"'{key}' must be an integer", section.line_of(key))
    return value


def _parse_receiver(top: _Section, receiver: Receiver) -> Receiver:
    builder = ReceiverBuilder(receiver)
    for section_name, names in MODEL_SECTIONS.items():
        section = top.section(section_name)
        section.check_keys(names)
        for name in names:
            if name in section:
                line = section.line_of(name)
                builder.set_parameter(
                    name, _parse_parameter(name, section.get(name), line)
                )
                _build(builder, line)

    signal = top.section("signal")
    signal.check_keys(SIGNAL_KEYS)
    if "power" in signal:
        builder.set_signal_mode(signal.get("power"))

    band = top.section("band")
    band.check_keys(BAND_KEYS)
    if band.values:
        try:
            builder.set_band(
                Band(
                    parse_quantity(
                        band.get("f_min", receiver.band.f_min),
                        "frequency",
                        band.line_of("f_min"),
                    ),
                    parse_quantity(
                        band.get("f_max", receiver.band.f_max),
                        "frequency",
                        band.line_of("f_max"),
                    ),
                )
            )
        except ModelError as error:
            raise ConfigParseError(str(error), band.line) from error
    return _build(builder, signal.line_of("power"))


def _parse_schedule(section: _Section, k_d: float) -> Optional[MessageSchedule]:
    section.check_keys(SCHEDULE_KEYS)
    if not section.values:
        return None
    levels = section.get("levels")
    if not isinstance(levels, list) or not levels:
        raise ConfigParseError(
            "'levels' must be a non-empty list", section.line_of("levels")
        )
    line = section.line_of("levels")
    try:
        return MessageSchedule(
            tuple(parse_quantity(c, "ligand", line, k_d) for c in levels),
            parse_quantity(
                section.get("symbol_rate", DEFAULT_SYMBOL_RATE),
                "frequency",
                section.line_of("symbol_rate"),
            ),
            parse_quantity(
                section.get("start_time", 0.0), "time", section.line_of("start_time")
            ),
        )
    except ModelError as error:
        raise ConfigParseError(str(error), section.line) from error


def _parse_interferer(data: Any, line: Optional[int], k_d: float) -> InterfererSpecies:
    section = _Section("interferer", data, line)
    section.check_keys(INTERFERER_KEYS)
    if "concentration" not in section:
        raise ConfigParseError("interferer needs a concentration", line)
    fields = {
        "concentration": parse_quantity(
            section.get("concentration"),
            "ligand",
            section.line_of("concentration"),
            k_d,
        )
    }
    for key, kind in (
        ("k_on", "plain"),
        ("k_off", "plain"),
        ("electrons", "plain"),
        ("receptor_length_equivalent", "length"),
    ):
        if key in section:
            fields[key] = parse_quantity(section.get(key), kind, section.line_of(key))
    if "name" in section:
        fields["name"] = str(section.get("name"))
    for required in ("k_on", "k_off"):
        if required not in fields:
            raise ConfigParseError(f"interferer needs {required}", line)
    try:
        return InterfererSpecies(**fields)
    except ModelError as error:
        raise ConfigParseError(str(error), line) from error


def _parse_simulation(section: _Section, k_d: float) -> SimulationSettings:
    section.check_keys(SIMULATION_KEYS)
    dt = section.get("dt")
    if dt is not None:
        dt = parse_quantity(dt, "time", section.line_of("dt"))
    interferers = section.get("interferers") or []
    if not isinstance(interferers, list):
        raise ConfigParseError(
            "'interferers' must be a list", section.line_of("interferers")
        )
    try:
        return SimulationSettings(
            dt=dt,
            method=section.get("method", "binomial"),
            noise=NoiseFlags(
                thermal=_parse_flag(section, "thermal", False),
                flicker=_parse_flag(section, "flicker", False),
            ),
            start_at_steady_state=_parse_flag(section, "start_at_steady_state", True),
            interferers=tuple(
                _parse_interferer(item, section.line_of("interferers"), k_d)
                for item in interferers
            ),
            ser_symbols=_parse_int(section, "ser_symbols", None),
        )
    except ConfigParseError:
        raise
    except ModelError as error:
        raise ConfigParseError(str(error), section.line) from error


def _axis_values(
    axis: str, values: Any, line: Optional[int], k_d: float
) -> Tuple[float, ...]:
    if axis not in PARAMETER_KINDS:
        raise ConfigParseError(f"Invalid sweep axis: {axis}.", line)
    if not isinstance(values, list):
        raise ConfigParseError(f"values of {axis} must be a list", line)
    return tuple(parse_quantity(v, PARAMETER_KINDS[axis], line, k_d) for v in values)


def _parse_sweep(
    section: _Section, base: Optional[SweepSpec], k_d: float
) -> Optional[SweepSpec]:
    section.check_keys(SWEEP_KEYS)
    if not section.values:
        return base
    axis = section.get("axis", base.axis if base else None)
    if axis is None:
        raise ConfigParseError("sweep needs an axis", section.line)
    scale = section.get("scale", base.scale if base else "log")

    if "values" in section:
        values = _axis_values(
            axis, section.get("values"), section.line_of("values"), k_d
        )
    elif "grid" in section:
        grid = section.section("grid")
        grid.check_keys(GRID_KEYS)
        if axis not in PARAMETER_KINDS:
            raise ConfigParseError(
                f"Invalid sweep axis: {axis}.", section.line_of("axis")
            )
        kind = PARAMETER_KINDS[axis]
        scale = grid.get("scale", scale)
        try:
            values = Grid(
                parse_quantity(grid.get("start"), kind, grid.line_of("start"), k_d),
                parse_quantity(grid.get("stop"), kind, grid.line_of("stop"), k_d),
                _parse_int(grid, "points", 25),
                scale,
            ).values()
        except ConfigParseError:
            raise
        except ModelError as error:
            raise ConfigParseError(str(error), grid.line) from error
    elif base is not None and base.axis == axis:
        values = base.values
    else:
        raise ConfigParseError("sweep needs values or a grid", section.line)

    family_axis, family_values = None, ()
    if base is not None and base.axis == axis:
        family_axis, family_values = base.family_axis, base.family_values
    if "family" in section:
        family = section.section("family")
        family.check_keys(FAMILY_KEYS)
        family_axis = family.get("axis")
        family_values = _axis_values(
            family_axis, family.get("values"), family.line_of("values"), k_d
        )
    try:
        return SweepSpec(axis, values, scale, family_axis, family_values)
    except ModelError as error:
        raise ConfigParseError(str(error), section.line) from error


def load_config_text(text: str, preset: Optional[str] = None) -> RunConfig:
    """
    Parse a configuration document. Unset fields keep their defaults;
    preset, when given, overrides the document's own preset key.
    """
    try:
        document = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as error:
        mark = getattr(error, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigParseError(f"invalid YAML: {error}", line) from error
    top = _Section("document", document, 1)
    top.check_keys(TOP_KEYS)

    preset_name = preset if preset is not None else top.get("preset")
    mode = "response"
    if preset_name is not None:
        try:
            mode = PRESETS.get(preset_name).mode
        except ConfigurationError as error:
            raise ConfigParseError(str(error), top.line_of("preset")) from error
    mode = top.get("mode", mode)
    if mode not in MODES:
        raise ConfigParseError(
            f"mode must be one of {MODES}, got {mode}", top.line_of("mode")
        )

    receiver = _parse_receiver(top, Receiver())
    k_d = receiver.dissociation_constant()
    signal = top.section("signal")
    concentration = None
    if "c" in signal:
        concentration = parse_quantity(
            signal.get("c"), "ligand", signal.line_of("c"), k_d
        )
    lod_threshold_db = parse_quantity(
        signal.get("lod_threshold_db", 0.0), "plain", signal.line_of("lod_threshold_db")
    )

    base_sweep = PRESETS.get(preset_name).sweep(k_d) if preset_name else None
    validate = top.section("validate")
    validate.check_keys(VALIDATE_KEYS)
    seed = _parse_int(top, "seed", DEFAULT_SEED)
    output = top.get("output")

    try:
        return RunConfig(
            mode=mode,
            preset=preset_name,
            seed=seed,
            output=str(output) if output is not None else None,
            receiver=receiver,
            concentration=concentration,
            lod_threshold_db=lod_threshold_db,
            schedule=_parse_schedule(top.section("schedule"), k_d),
            simulation=_parse_simulation(top.section("simulation"), k_d),
            sweep=_parse_sweep(top.section("sweep"), base_sweep, k_d),
            tolerance_scale=parse_quantity(
                validate.get("tolerance_scale", 1.0),
                "plain",
                validate.line_of("tolerance_scale"),
            ),
        )
    except ConfigParseError:
        raise
    except ModelError as error:
        raise ConfigParseError(str(error), None) from error


def load_config(path: str, preset: Optional[str] = None) -> RunConfig:
    """
    Load a configuration file.
    """
    try:
        with open(path, encoding="utf-8") as stream:
            text = stream.read()
    except OSError as error:
        raise ConfigParseError(f"cannot read {path}: {error.strerror}") from error
    logger.debug("loaded configuration from %s", path)
    return load_config_text(text, preset)


def _interferer_document(species: InterfererSpecies) -> Dict[str, Any]:
    return {
        "name": species.name,
        "concentration": species.concentration,
        "k_on": species.k_on,
        "k_off": species.k_off,
        "electrons": species.electrons,
        "receptor_length_equivalent": species.receptor_length_equivalent,
    }


def emit_config(config: RunConfig) -> str:
    """
    Write a fully resolved SI document that loads back to the same config.
    """
    receiver = config.receiver
    document: Dict[str, Any] = {
        "mode": config.mode,
        "preset": config.preset,
        "seed": config.seed,
        "output": config.output,
    }
    for section_name, names in MODEL_SECTIONS.items():
        document[section_name] = {
            name: parameter_value(receiver, name) for name in names
        }
    signal: Dict[str, Any] = {
        "power": receiver.signal_mode,
        "lod_threshold_db": config.lod_threshold_db,
    }
    if config.concentration is not None:
        signal["c"] = config.concentration
    document["signal"] = signal
    document["band"] = {"f_min": receiver.band.f_min, "f_max": receiver.band.f_max}
    if config.schedule is not None:
        document["schedule"] = {
            "levels": list(config.schedule.levels),
            "symbol_rate": config.schedule.symbol_rate,
            "start_time": config.schedule.start_time,
        }
    simulation = config.simulation
    document["simulation"] = {
        "dt": simulation.dt,
        "method": simulation.method,
        "thermal": simulation.noise.thermal,
        "flicker": simulation.noise.flicker,
        "start_at_steady_state": simulation.start_at_steady_state,
        "interferers": [_interferer_document(s) for s in simulation.interferers],
        "ser_symbols": simulation.ser_symbols,
    }
    if config.sweep is not None:
        sweep: Dict[str, Any] = {
            "axis": config.sweep.axis,
            "values": list(config.sweep.values),
            "scale": config.sweep.scale,
        }
        if config.sweep.family_axis is not None:
            sweep["family"] = {
                "axis": config.sweep.family_axis,
                "values": list(config.sweep.family_values),
            }
        document["sweep"] = sweep
    document["validate"] = {"tolerance_scale": config.tolerance_scale}
    return yaml.safe_dump(document, sort_keys=False)


def config_hash(config: RunConfig) -> str:
    """
    Short digest of the resolved configuration, for provenance.
    """
    return hashlib.sha256(emit_config(config).encode("utf-8")).hexdigest()[:16]
