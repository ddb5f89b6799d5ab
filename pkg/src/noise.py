"""
Noise at the threshold-voltage node and the resulting SNR.

Three uncorrelated sources add up: binding (receptor occupancy
fluctuations), thermal (ligand layer resistance behind an RC filter) and
flicker (carrier trapping in the oxide). All PSDs are two-sided, so band
powers integrate over [-f_max, -f_min] and [f_min, f_max].
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from errors import DomainError, SingularityError
from kinetics import (
    LigandReceptorPair,
    RecognitionLayer,
    binding_noise_psd,
    binding_timescale,
    dissociation_constant,
    mean_bound_steady,
)
from physchem import CONSTANTS, Environment, debye_length, ligand_charge
from transducer import (
    TransducerConfig,
    baseline_current,
    capacitances,
    current_shift,
    response_polarity,
    transconductance,
)

logger = logging.getLogger(__name__)

QUAD_RELATIVE_TOLERANCE = 1e-6
SIGNAL_MODES = ("deviation", "absolute")


@dataclass(frozen=True)
class Band:
    """
    Positive-frequency integration band [f_min, f_max] in Hz.
    f_min must be positive because flicker noise diverges at 0 Hz.
    """

    f_min: float = 1e-2
    f_max: float = 1e3

    def __post_init__(self) -> None:
        if not (0 < self.f_min < self.f_max and math.isfinite(self.f_max)):
            raise DomainError(
                f"band needs 0 < f_min < f_max, got [{self.f_min}, {self.f_max}]"
            )

    def contains(self, f: float) -> bool:
        return self.f_min <= f <= self.f_max


DEFAULT_BAND = Band()


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    A two-sided, even PSD sampled on its positive-frequency side.
    """

    frequencies: np.ndarray  # Hz
    values: np.ndarray  # unit^2/Hz
    band: Band
    sidedness: str = "two-sided-symmetric"

    def __post_init__(self) -> None:
        frequencies = np.asarray(self.frequencies, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if frequencies.shape != values.shape or frequencies.ndim != 1:
            raise DomainError("frequencies and values must be 1-d of equal length")
        if np.any(np.diff(frequencies) <= 0):
            raise DomainError("frequencies must be strictly increasing")
        if np.any(values < 0):
            raise DomainError("PSD values must be >= 0")
        object.__setattr__(self, "frequencies", frequencies)
        object.__setattr__(self, "values", values)

    def at(self, f) -> np.ndarray:
        """
        Linearly interpolated PSD value(s).
        """
        return np.interp(np.abs(f), self.frequencies, self.values)

    def power(self) -> float:
        """
        Power over the band, counting both spectral sides.
        """
        inside = (self.frequencies >= self.band.f_min) & (
            self.frequencies <= self.band.f_max
        )
        return 2 * float(
            integrate.trapezoid(self.values[inside], self.frequencies[inside])
        )


@dataclass(frozen=True)
class NoiseBudget:
    """
    Band powers of the threshold-voltage noise and the resulting SNR.
    """

    binding_power: float  # V^2
    thermal_power: float  # V^2
    flicker_power: float  # V^2
    total_power: float  # V^2
    signal_power: float  # A^2 (W into 1 ohm)
    snr_db: float


def single_ligand_potential(
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
) -> float:
    """
    V_m, the mean threshold shift per bound ligand at concentration c.
    """
    n_bound = mean_bound_steady(c, pair, layer)
    return (
        ligand_charge(pair, debye_length(env))
        / capacitances(n_bound, cfg, pair, layer).c_eq
    )


def binding_voltage_psd(
    f,
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
) -> np.ndarray:
    """
    Binding noise referred to the threshold voltage, V^2/Hz.
    """
    v_m = single_ligand_potential(c, cfg, pair, layer, env)
    return binding_noise_psd(f, c, pair, layer) * v_m**2


def thermal_floor(cfg: TransducerConfig, env: Environment) -> float:
    """
    4 k_B T R_layer, the unfiltered thermal PSD of the ligand layer.
    """
    return 4 * env.thermal_energy() * cfg.layer_resistance


def thermal_corner_frequency(
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
) -> float:
    """
    Corner of the RC filter that shapes the thermal noise.
    """
    n_bound = mean_bound_steady(c, pair, layer)
    c_eq_prime = capacitances(n_bound, cfg, pair, layer).c_eq_prime
    return 1 / (2 * math.pi * cfg.layer_resistance * c_eq_prime)


def thermal_voltage_psd(
    f,
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
) -> np.ndarray:
    """
    Thermal noise of the ligand layer after the RC filter, V^2/Hz.
    """
    f = np.asarray(f, dtype=float)
    corner = thermal_corner_frequency(c, cfg, pair, layer)
    return thermal_floor(cfg, env) / (1 + (f / corner) ** 2)


def flicker_coefficient(cfg: TransducerConfig, env: Environment) -> float:
    """
    Numerator of the 1/|f| law, in V^2.
    The trap density is per eV; converting it to per joule turns one
    factor of q^2 into q.
    """
    c_ox = cfg.oxide_capacitance()
    return (
        cfg.tunneling_distance
        * env.thermal_energy()
        * CONSTANTS.elementary_charge
        * cfg.trap_density
        / (cfg.area() * c_ox**2)
    )


def flicker_voltage_psd(f, cfg: TransducerConfig, env: Environment) -> np.ndarray:
    """
    1/f noise of the channel referred to the threshold voltage, V^2/Hz.
    Independent of the received message.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f == 0):
        raise SingularityError("flicker PSD is singular at f = 0")
    return flicker_coefficient(cfg, env) / np.abs(f)


def total_voltage_psd(
    f,
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
) -> np.ndarray:
    """
    Sum of binding, thermal and flicker PSDs, V^2/Hz.
    """
    return (
        binding_voltage_psd(f, c, cfg, pair, layer, env)
        + thermal_voltage_psd(f, c, cfg, pair, layer, env)
        + flicker_voltage_psd(f, cfg, env)
    )


def current_psd(
    f,
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
) -> np.ndarray:
    """
    Total noise referred to the drain-source current, A^2/Hz.
    """
    return total_voltage_psd(f, c, cfg, pair, layer, env) * transconductance(cfg) ** 2


def band_power(
    psd: Callable[[float], float], band: Band, corners: Sequence[float] = ()
) -> float:
    """
    Two-sided power of an even PSD over the band, by adaptive quadrature.
    Corner frequencies inside the band are passed as breakpoints.
    """
    points = [f for f in corners if band.f_min < f < band.f_max] or None
    value, error = integrate.quad(
        lambda f: float(psd(f)),
        band.f_min,
        band.f_max,
        epsrel=QUAD_RELATIVE_TOLERANCE,
        epsabs=0.0,
        points=points,
        limit=200,
    )
    logger.debug("band power %.6g (quadrature error %.2g)", value, error)
    return 2 * value


def flicker_band_power(cfg: TransducerConfig, env: Environment, band: Band) -> float:
    """
    Closed-form two-sided flicker power over the band.
    """
    return 2 * flicker_coefficient(cfg, env) * math.log(band.f_max / band.f_min)


def signal_power(
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
    mode: str = "deviation",
) -> float:
    """
    Received signal power in A^2 (W into the 1 ohm reference channel).
    "deviation" uses the message-induced current change, "absolute" the
    full drain current including the bias point.
    """
    delta = current_shift(c, cfg, pair, layer, env)
    match mode:
        case "deviation":
            return delta**2
        case "absolute":
            polarity = response_polarity(cfg, pair.charge_sign)
            return (baseline_current(cfg) + polarity * delta) ** 2
        case _:
            raise DomainError(f"signal mode must be one of {SIGNAL_MODES}, got {mode}")


def noise_budget(
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
    band: Band = DEFAULT_BAND,
    signal: str = "deviation",
) -> NoiseBudget:
    """
    Integrate every noise component over the band and form the SNR.
    """
    binding = 0.0
    if c > 0:
        binding = band_power(
            lambda f: binding_voltage_psd(f, c, cfg, pair, layer, env),
            band,
            corners=[1 / (2 * math.pi * binding_timescale(c, pair))],
        )
    thermal = band_power(
        lambda f: thermal_voltage_psd(f, c, cfg, pair, layer, env),
        band,
        corners=[thermal_corner_frequency(c, cfg, pair, layer)],
    )
    flicker = flicker_band_power(cfg, env, band)
    total = binding + thermal + flicker
    power = signal_power(c, cfg, pair, layer, env, signal)
    noise_current = total * transconductance(cfg) ** 2
    snr_db = 10 * math.log10(power / noise_current) if power > 0 else -math.inf
    return NoiseBudget(
        binding_power=binding,
        thermal_power=thermal,
        flicker_power=flicker,
        total_power=total,
        signal_power=power,
        snr_db=snr_db,
    )


def snr(
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
    band: Band = DEFAULT_BAND,
    signal: str = "deviation",
) -> float:
    """
    Band-limited SNR in dB. Returns -inf when there is no signal.
    """
    return noise_budget(c, cfg, pair, layer, env, band, signal).snr_db


def voltage_spectrum(
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
    band: Band = DEFAULT_BAND,
    n_points: int = 512,
) -> Spectrum:
    """
    Total threshold-voltage PSD sampled on a log grid over the band.
    """
    frequencies = np.geomspace(band.f_min, band.f_max, n_points)
    values = total_voltage_psd(frequencies, c, cfg, pair, layer, env)
    return Spectrum(frequencies, values, band)


def limit_of_detection(
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
    band: Band = DEFAULT_BAND,
    threshold_db: float = 0.0,
    grid: Optional[Sequence[float]] = None,
) -> Optional[float]:
    """
    Smallest concentration on a log grid whose SNR reaches threshold_db.
    Returns None when no grid point does.
    """
    if grid is None:
        grid = dissociation_constant(pair) * np.logspace(-4, 4, 401)
    for c in grid:
        if c > 0 and snr(c, cfg, pair, layer, env, band) >= threshold_db:
            return float(c)
    logger.info("SNR stays below %.3g dB on the whole LoD grid", threshold_db)
    return None
