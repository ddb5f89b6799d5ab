"""
Statistics of the biorecognition layer.

Receptors bind ligands with pseudo-first-order kinetics in a well-mixed
reception space. This module gives the deterministic occupancy (steady state
and transient) and the statistics of its fluctuations (variance,
autocorrelation and power spectral density).
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from errors import DomainError

logger = logging.getLogger(__name__)

# Minimum number of binding time constants a symbol should last
STEADY_STATE_TIMESCALES = 10


@dataclass(frozen=True)
class LigandReceptorPair:
    """
    Kinetic and electrostatic description of the recognition chemistry.
    """

    k_on: float = 2e-18  # m^3/s
    k_off: float = 10.0  # 1/s
    receptor_length: float = 4e-9  # m
    electrons_per_ligand: float = 4.0
    receptor_capacitance: float = 2e-20  # F
    ligand_capacitance: float = 2e-20  # F
    charge_sign: int = -1

    def __post_init__(self) -> None:
        for name in (
            "k_on",
            "k_off",
            "receptor_length",
            "receptor_capacitance",
            "ligand_capacitance",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be > 0, got {value}")
        if not self.electrons_per_ligand >= 0:
            raise DomainError(
                f"electrons_per_ligand must be >= 0, got {self.electrons_per_ligand}"
            )
        if self.charge_sign not in (-1, 1):
            raise DomainError(f"charge_sign must be -1 or +1, got {self.charge_sign}")


@dataclass(frozen=True)
class RecognitionLayer:
    """
    The receptor population on the transducer surface.
    receptor_count is kept real valued; only the simulator rounds it.
    """

    receptor_density: float  # 1/m^2
    receptor_count: float

    def __post_init__(self) -> None:
        if not self.receptor_density > 0:
            raise DomainError(
                f"receptor_density must be > 0, got {self.receptor_density}"
            )
        if not self.receptor_count >= 1:
            raise DomainError(
                f"receptor_count must be >= 1, got {self.receptor_count}"
            )

    @classmethod
    def from_area(cls, receptor_density: float, area: float) -> "RecognitionLayer":
        """
        Build the layer covering an active area of the given size.
        """
        return cls(receptor_density, receptor_density * area)

    def discrete_count(self) -> int:
        """
        Receptor count rounded to the nearest integer, at least one.
        """
        return max(1, int(round(self.receptor_count)))


@dataclass(frozen=True)
class MessageSchedule:
    """
    A CSK symbol stream: one concentration level per symbol interval.
    """

    levels: Tuple[float, ...]  # molecules/m^3
    symbol_rate: float  # 1/s
    start_time: float = 0.0  # s

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(float(c) for c in self.levels))
        if not self.levels:
            raise DomainError("a schedule needs at least one level")
        if any(not (math.isfinite(c) and c >= 0) for c in self.levels):
            raise DomainError(f"levels must be finite and >= 0, got {self.levels}")
        if not self.symbol_rate > 0:
            raise DomainError(f"symbol_rate must be > 0, got {self.symbol_rate}")

    @property
    def symbol_duration(self) -> float:
        return 1.0 / self.symbol_rate

    @property
    def start_times(self) -> np.ndarray:
        """
        Transition times t_i = t_0 + i / B.
        """
        return self.start_time + np.arange(len(self.levels)) / self.symbol_rate

    @property
    def end_time(self) -> float:
        return self.start_time + len(self.levels) / self.symbol_rate

    def __len__(self) -> int:
        return len(self.levels)


def _check_concentration(c: float) -> None:
    if not c >= 0:
        raise DomainError(f"concentration must be >= 0, got {c}")


def dissociation_constant(pair: LigandReceptorPair) -> float:
    """
    K_D = k_off / k_on in molecules/m^3.
    """
    return pair.k_off / pair.k_on


def binding_timescale(c: float, pair: LigandReceptorPair) -> float:
    """
    Reaction time constant tau_B = 1 / (k_on c + k_off).
    """
    _check_concentration(c)
    return 1.0 / (pair.k_on * c + pair.k_off)


def occupancy_probability(c: float, pair: LigandReceptorPair) -> float:
    """
    Probability that a single receptor is bound at steady state.
    """
    _check_concentration(c)
    return pair.k_on * c / (pair.k_on * c + pair.k_off)


def mean_bound_steady(
    c: float, pair: LigandReceptorPair, layer: RecognitionLayer
) -> float:
    """
    Mean number of bound receptors at steady state (Langmuir isotherm).
    """
    return layer.receptor_count * occupancy_probability(c, pair)


def binding_ode_rhs(
    n_bound: float, c: float, pair: LigandReceptorPair, layer: RecognitionLayer
) -> float:
    """
    d<N_B>/dt for the pseudo-first-order binding kinetics.
    """
    return pair.k_on * c * (layer.receptor_count - n_bound) - pair.k_off * n_bound


def mean_bound_transient(
    prev_bound: float,
    c: float,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    elapsed: float,
) -> float:
    """
    Mean occupancy `elapsed` seconds after the concentration switched to c,
    starting from prev_bound bound receptors.
    """
    if not 0 <= prev_bound <= layer.receptor_count:
        raise DomainError(
            f"prev_bound must lie in [0, {layer.receptor_count}], got {prev_bound}"
        )
    if elapsed < 0:
        raise DomainError(f"elapsed must be >= 0, got {elapsed}")
    steady = mean_bound_steady(c, pair, layer)
    decay = math.exp(-elapsed / binding_timescale(c, pair))
    return steady + (prev_bound - steady) * decay


def bound_variance(
    c: float, pair: LigandReceptorPair, layer: RecognitionLayer
) -> float:
    """
    Binomial variance of the bound-receptor count at steady state.
    """
    _check_concentration(c)
    rate = pair.k_on * c + pair.k_off
    return layer.receptor_count * pair.k_off * pair.k_on * c / rate**2


def binding_acf(
    lag, c: float, pair: LigandReceptorPair, layer: RecognitionLayer
) -> np.ndarray:
    """
    Autocorrelation of the stationary occupancy fluctuations at the given
    lag(s) in seconds.
    """
    lag = np.asarray(lag, dtype=float)
    if np.any(lag < 0):
        raise DomainError("lag must be >= 0")
    tau = binding_timescale(c, pair)
    return bound_variance(c, pair, layer) * np.exp(-lag / tau)


def binding_noise_psd(
    f, c: float, pair: LigandReceptorPair, layer: RecognitionLayer
) -> np.ndarray:
    """
    Two-sided Lorentzian PSD of the occupancy fluctuations, in counts^2/Hz.
    """
    f = np.asarray(f, dtype=float)
    tau = binding_timescale(c, pair)
    variance = bound_variance(c, pair, layer)
    return variance * 2 * tau / (1 + (2 * np.pi * f * tau) ** 2)


def temporal_resolution(
    levels: Sequence[float], pair: LigandReceptorPair, tolerance: float = 1e-2
) -> float:
    """
    Time the slowest level needs for its transient to decay to `tolerance`
    of the initial offset. This bounds how fast the receiver can sample.
    """
    if not 0 < tolerance < 1:
        raise DomainError(f"tolerance must lie in (0, 1), got {tolerance}")
    slowest = max(binding_timescale(c, pair) for c in levels)
    return slowest * math.log(1 / tolerance)


def max_symbol_rate(
    levels: Sequence[float], pair: LigandReceptorPair, tolerance: float = 1e-2
) -> float:
    """
    Largest symbol rate that still lets every level settle.
    """
    return 1.0 / temporal_resolution(levels, pair, tolerance)


def check_symbol_rate(schedule: MessageSchedule, pair: LigandReceptorPair) -> bool:
    """
    Check that every symbol lasts long enough for steady-state sampling.
    Logs a warning and returns False otherwise.
    """
    slowest = max(binding_timescale(c, pair) for c in schedule.levels)
    required = STEADY_STATE_TIMESCALES * slowest
    if schedule.symbol_duration < required:
        logger.warning(
            "symbol duration %.3g s is shorter than %d tau_B = %.3g s; "
            "samples will not be at steady state",
            schedule.symbol_duration,
            STEADY_STATE_TIMESCALES,
            required,
        )
        return False
    return True
