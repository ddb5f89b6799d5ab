"""
Equivalent-circuit transduction of bound ligand charge into surface
potential, threshold voltage and channel current changes of a SiNW FET.
"""

import math
from dataclasses import dataclass
from typing import Optional

from errors import DomainError, UnsupportedOperationError
from kinetics import (
    LigandReceptorPair,
    RecognitionLayer,
    mean_bound_steady,
    dissociation_constant,
)
from physchem import CONSTANTS, Environment, debye_length, ligand_charge

CHANNEL_TYPES = ("p", "n")


@dataclass(frozen=True)
class TransducerConfig:
    """
    Geometry and electrical parameters of the FET.
    Defaults are the reference SiNW device.
    """

    width: float = 0.1e-6  # m
    length: float = 5e-6  # m
    oxide_thickness: float = 17.5e-9  # m
    oxide_rel_permittivity: float = 3.9
    effective_mobility: float = 16e-3  # m^2/(V s)
    drain_source_voltage: float = 0.1  # V
    dl_capacitance_per_area: float = 5e-2  # F/m^2
    semiconductor_capacitance_per_area: float = 2e-3  # F/m^2
    trap_density: float = 2.3e24  # 1/(eV m^3)
    tunneling_distance: float = 0.05e-9  # m
    layer_resistance: float = 5e10  # ohm
    gate_source_voltage: Optional[float] = None  # V
    baseline_threshold_voltage: float = 0.0  # V
    channel_type: str = "p"

    def __post_init__(self) -> None:
        for name in (
            "width",
            "length",
            "oxide_thickness",
            "oxide_rel_permittivity",
            "effective_mobility",
            "drain_source_voltage",
            "dl_capacitance_per_area",
            "semiconductor_capacitance_per_area",
            "trap_density",
            "tunneling_distance",
            "layer_resistance",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be > 0, got {value}")
        if self.channel_type not in CHANNEL_TYPES:
            raise DomainError(
                f"channel_type must be one of {CHANNEL_TYPES}, got {self.channel_type}"
            )

    def area(self) -> float:
        """
        Active area W * L in m^2.
        """
        return self.width * self.length

    def oxide_capacitance(self) -> float:
        """
        Oxide capacitance per unit area, eps_ox / t_ox.
        """
        return (
            self.oxide_rel_permittivity
            * CONSTANTS.vacuum_permittivity
            / self.oxide_thickness
        )


@dataclass(frozen=True)
class CapacitanceBreakdown:
    """
    Capacitances of the equivalent circuit for a given occupancy.
    When nothing is bound the ligand branch is open: series_layer is 0,
    c_p is infinite and degenerate is set.
    """

    c_ox_area: float  # F/m^2
    c_rec: float  # F
    c_layer: float  # F
    series_gate: float  # F, oxide in series with the semiconductor
    series_layer: float  # F, receptor, ligand and double layers in series
    c_eq: float  # F
    c_p: float  # 1/F
    c_eq_prime: float  # F
    degenerate: bool = False


def response_polarity(cfg: TransducerConfig, charge_sign: int) -> int:
    """
    Sign of the current change caused by binding a ligand with the given
    charge sign. Negative charge accumulates holes in a p-type channel.
    """
    accumulates = (cfg.channel_type == "p") == (charge_sign < 0)
    return 1 if accumulates else -1


def capacitances(
    n_bound: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
) -> CapacitanceBreakdown:
    """
    Evaluate the equivalent-circuit capacitances with n_bound bound ligands.
    """
    if n_bound < 0:
        raise DomainError(f"n_bound must be >= 0, got {n_bound}")
    area = cfg.area()
    c_ox = cfg.oxide_capacitance()
    c_rec = layer.receptor_count * pair.receptor_capacitance
    c_layer = n_bound * pair.ligand_capacitance
    c_dl = cfg.dl_capacitance_per_area * area
    c_s = cfg.semiconductor_capacitance_per_area * area
    series_gate = 1 / (1 / (c_ox * area) + 1 / c_s)
    stack = (
        1 / cfg.dl_capacitance_per_area
        + 1 / c_ox
        + 1 / cfg.semiconductor_capacitance_per_area
    ) / area
    c_eq_prime = c_layer + 1 / (stack + 1 / c_rec)

    if n_bound == 0:
        return CapacitanceBreakdown(
            c_ox_area=c_ox,
            c_rec=c_rec,
            c_layer=0.0,
            series_gate=series_gate,
            series_layer=0.0,
            c_eq=series_gate,
            c_p=math.inf,
            c_eq_prime=c_eq_prime,
            degenerate=True,
        )

    if c_layer == 0:
        raise DomainError(
            f"ligand-layer capacitance underflows to zero at n_bound = {n_bound:g}"
        )
    c_p = 1 / c_rec + 1 / c_layer + 1 / c_dl
    series_layer = 1 / c_p
    return CapacitanceBreakdown(
        c_ox_area=c_ox,
        c_rec=c_rec,
        c_layer=c_layer,
        series_gate=series_gate,
        series_layer=series_layer,
        c_eq=series_gate + series_layer,
        c_p=c_p,
        c_eq_prime=c_eq_prime,
    )


def count_potential(
    n_bound: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
) -> float:
    """
    Surface potential change produced by n_bound bound ligands.
    """
    charge = n_bound * ligand_charge(pair, debye_length(env))
    if charge == 0:
        return 0.0
    return charge / capacitances(n_bound, cfg, pair, layer).c_eq


def potential_shift(
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
) -> float:
    """
    Mean surface potential (and threshold voltage) change at ligand
    concentration c.
    """
    n_bound = mean_bound_steady(c, pair, layer)
    return count_potential(n_bound, cfg, pair, layer, env)


def transconductance(cfg: TransducerConfig) -> float:
    """
    g_m of the FET in the linear regime.
    """
    return (
        (cfg.width / cfg.length)
        * cfg.effective_mobility
        * cfg.oxide_capacitance()
        * cfg.drain_source_voltage
    )


def current_shift(
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
) -> float:
    """
    Mean drain-source current change at ligand concentration c.
    """
    return transconductance(cfg) * potential_shift(c, cfg, pair, layer, env)


def baseline_current(cfg: TransducerConfig) -> float:
    """
    Absolute drain-source current at the configured operating point.
    """
    if cfg.gate_source_voltage is None:
        raise UnsupportedOperationError(
            "baseline_current needs gate_source_voltage to be configured"
        )
    overdrive = cfg.gate_source_voltage - cfg.baseline_threshold_voltage
    if overdrive < 0:
        raise DomainError(
            f"device is off: V_GS={cfg.gate_source_voltage} V is below "
            f"V_TH0={cfg.baseline_threshold_voltage} V"
        )
    return transconductance(cfg) * overdrive


def small_signal_gain(
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
) -> float:
    """
    dPsi/dN_B at the mean occupancy for concentration c, in volts per
    bound ligand. Smaller than N_e q_eff / C_eq because every bound ligand
    also adds to the ligand-layer capacitance.
    """
    n_bound = mean_bound_steady(c, pair, layer)
    breakdown = capacitances(n_bound, cfg, pair, layer)
    unit = ligand_charge(pair, debye_length(env)) / breakdown.c_eq
    if breakdown.degenerate:
        return unit
    loading = 1 / (breakdown.c_eq * breakdown.c_layer * breakdown.c_p**2)
    return unit * (1 - loading)


def sensitivity(
    c: float,
    cfg: TransducerConfig,
    pair: LigandReceptorPair,
    layer: RecognitionLayer,
    env: Environment,
) -> float:
    """
    Derivative of the mean current change with respect to the ligand
    concentration, in A per (molecules/m^3).
    """
    if not c > 0:
        raise DomainError(f"sensitivity needs c > 0, got {c}")
    k_d = dissociation_constant(pair)
    occupancy_slope = layer.receptor_count * k_d / (c + k_d) ** 2
    return (
        transconductance(cfg)
        * small_signal_gain(c, cfg, pair, layer, env)
        * occupancy_slope
    )
