"""
The Receiver bundles every model input for one operating point and
exposes the figures of merit. ReceiverBuilder varies single parameters by
name, which is what the sweeps and the configuration loader use.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

from errors import ConfigurationError
from kinetics import LigandReceptorPair, RecognitionLayer, dissociation_constant
from noise import (
    DEFAULT_BAND,
    SIGNAL_MODES,
    Band,
    NoiseBudget,
    limit_of_detection,
    noise_budget,
    snr,
)
from physchem import Environment, debye_length
from transducer import (
    TransducerConfig,
    current_shift,
    potential_shift,
    sensitivity,
    transconductance,
)

DEFAULT_RECEPTOR_DENSITY = 2e16  # 1/m^2

# Public parameter name -> (section, dataclass field)
PARAMETER_FIELDS: Dict[str, Tuple[str, str]] = {
    "temperature": ("environment", "temperature"),
    "c_ion": ("environment", "ionic_concentration"),
    "eps_r": ("environment", "relative_permittivity"),
    "k_on": ("pair", "k_on"),
    "k_off": ("pair", "k_off"),
    "l_r": ("pair", "receptor_length"),
    "n_e": ("pair", "electrons_per_ligand"),
    "c_mol_r": ("pair", "receptor_capacitance"),
    "c_mol_l": ("pair", "ligand_capacitance"),
    "charge_sign": ("pair", "charge_sign"),
    "c_r": ("layer", "receptor_density"),
    "width": ("transducer", "width"),
    "length": ("transducer", "length"),
    "t_ox": ("transducer", "oxide_thickness"),
    "eps_ox": ("transducer", "oxide_rel_permittivity"),
    "mu_eff": ("transducer", "effective_mobility"),
    "v_ds": ("transducer", "drain_source_voltage"),
    "c_dl": ("transducer", "dl_capacitance_per_area"),
    "c_s": ("transducer", "semiconductor_capacitance_per_area"),
    "n_t": ("transducer", "trap_density"),
    "tunneling_distance": ("transducer", "tunneling_distance"),
    "r_layer": ("transducer", "layer_resistance"),
    "v_gs": ("transducer", "gate_source_voltage"),
    "v_th0": ("transducer", "baseline_threshold_voltage"),
    "channel": ("transducer", "channel_type"),
}

# Parameters that can be swept numerically, plus the ligand concentration
SWEEP_AXES = ("c",) + tuple(
    name for name in PARAMETER_FIELDS if name not in ("charge_sign", "channel")
)


@dataclass(frozen=True)
class Receiver:
    """
    A fully specified bioFET receiver at one operating point.
    """

    environment: Environment = field(default_factory=Environment)
    pair: LigandReceptorPair = field(default_factory=LigandReceptorPair)
    receptor_density: float = DEFAULT_RECEPTOR_DENSITY
    transducer: TransducerConfig = field(default_factory=TransducerConfig)
    band: Band = DEFAULT_BAND
    signal_mode: str = "deviation"

    def __post_init__(self) -> None:
        if self.signal_mode not in SIGNAL_MODES:
            raise ConfigurationError(
                f"signal mode must be one of {SIGNAL_MODES}, got {self.signal_mode}"
            )
        # Raises DomainError when the layer holds no receptor.
        RecognitionLayer.from_area(self.receptor_density, self.transducer.area())

    @property
    def layer(self) -> RecognitionLayer:
        return RecognitionLayer.from_area(
            self.receptor_density, self.transducer.area()
        )

    def dissociation_constant(self) -> float:
        return dissociation_constant(self.pair)

    def debye_length(self) -> float:
        return debye_length(self.environment)

    def transconductance(self) -> float:
        return transconductance(self.transducer)

    def response(self, c: float) -> float:
        """
        Threshold-voltage change in V at ligand concentration c.
        """
        return potential_shift(
            c, self.transducer, self.pair, self.layer, self.environment
        )

    def current_response(self, c: float) -> float:
        return current_shift(
            c, self.transducer, self.pair, self.layer, self.environment
        )

    def sensitivity(self, c: float) -> float:
        return sensitivity(c, self.transducer, self.pair, self.layer, self.environment)

    def noise_budget(self, c: float) -> NoiseBudget:
        return noise_budget(
            c,
            self.transducer,
            self.pair,
            self.layer,
            self.environment,
            self.band,
            self.signal_mode,
        )

    def snr(self, c: float) -> float:
        return snr(
            c,
            self.transducer,
            self.pair,
            self.layer,
            self.environment,
            self.band,
            self.signal_mode,
        )

    def limit_of_detection(self, threshold_db: float = 0.0) -> Optional[float]:
        return limit_of_detection(
            self.transducer,
            self.pair,
            self.layer,
            self.environment,
            self.band,
            threshold_db,
        )


class ReceiverBuilder:
    """
    Builder for creating Receiver instances.
    """

    def __init__(self, receiver: Optional[Receiver] = None) -> None:
        self.receiver = receiver if receiver is not None else Receiver()
        self.overrides: Dict[str, Dict[str, Any]] = {
            "environment": {},
            "pair": {},
            "layer": {},
            "transducer": {},
        }

    def set_environment(self, environment: Environment) -> "ReceiverBuilder":
        """
        Set the fluid environment.
        """
        self.receiver = replace(self.receiver, environment=environment)
        return self

    def set_pair(self, pair: LigandReceptorPair) -> "ReceiverBuilder":
        """
        Set the ligand-receptor pair.
        """
        self.receiver = replace(self.receiver, pair=pair)
        return self

    def set_transducer(self, transducer: TransducerConfig) -> "ReceiverBuilder":
        """
        Set the FET configuration.
        """
        self.receiver = replace(self.receiver, transducer=transducer)
        return self

    def set_band(self, band: Band) -> "ReceiverBuilder":
        """
        Set the SNR integration band.
        """
        self.receiver = replace(self.receiver, band=band)
        return self

    def set_signal_mode(self, signal_mode: str) -> "ReceiverBuilder":
        """
        Set what the SNR counts as signal power.
        """
        self.receiver = replace(self.receiver, signal_mode=signal_mode)
        return self

    def set_parameter(self, name: str, value: Any) -> "ReceiverBuilder":
        """
        Override a single model parameter by its public name.
        """
        if name not in PARAMETER_FIELDS:
            raise ConfigurationError(f"Unknown parameter: {name}.")
        section, attribute = PARAMETER_FIELDS[name]
        self.overrides[section][attribute] = value
        return self

    def build(self) -> Receiver:
        """
        Build and return the Receiver instance.
        """
        receiver = self.receiver
        density = self.overrides["layer"].get(
            "receptor_density", receiver.receptor_density
        )
        return replace(
            receiver,
            environment=replace(receiver.environment, **self.overrides["environment"]),
            pair=replace(receiver.pair, **self.overrides["pair"]),
            receptor_density=density,
            transducer=replace(receiver.transducer, **self.overrides["transducer"]),
        )


def parameter_value(receiver: Receiver, name: str) -> Any:
    """
    Current value of a public parameter.
    """
    if name not in PARAMETER_FIELDS:
        raise ConfigurationError(f"Unknown parameter: {name}.")
    section, attribute = PARAMETER_FIELDS[name]
    if section == "layer":
        return receiver.receptor_density
    return getattr(getattr(receiver, section), attribute)
