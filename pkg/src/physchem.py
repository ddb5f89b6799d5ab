"""
Physical constants, unit conversions and electrostatic screening.

Everything in the model is strict SI: lengths in m, ionic concentrations in
mol/m^3, ligand concentrations in molecules/m^3.
"""

import math
from dataclasses import dataclass

from errors import DomainError, InvalidEnvironmentError


@dataclass(frozen=True)
class PhysicalConstants:
    """
    CODATA 2018 values used throughout the model.
    """

    boltzmann: float = 1.380649e-23  # J/K
    avogadro: float = 6.02214076e23  # 1/mol
    elementary_charge: float = 1.602176634e-19  # C
    vacuum_permittivity: float = 8.8541878128e-12  # F/m


CONSTANTS = PhysicalConstants()

LITERS_PER_CUBIC_METER = 1e3


@dataclass(frozen=True)
class Environment:
    """
    Ionic, thermal and dielectric conditions of the fluid medium.
    Defaults are bovine serum in water at room temperature.
    """

    temperature: float = 298.0  # K
    ionic_concentration: float = 70.0  # mol/m^3
    relative_permittivity: float = 78.0

    def __post_init__(self) -> None:
        if not self.temperature > 0:
            raise InvalidEnvironmentError(
                f"temperature must be > 0 K, got {self.temperature}"
            )
        if not self.ionic_concentration > 0:
            raise InvalidEnvironmentError(
                f"ionic_concentration must be > 0 mol/m^3, "
                f"got {self.ionic_concentration}"
            )
        if not self.relative_permittivity >= 1:
            raise InvalidEnvironmentError(
                f"relative_permittivity must be >= 1, "
                f"got {self.relative_permittivity}"
            )

    def thermal_energy(self) -> float:
        """
        k_B * T in joules.
        """
        return CONSTANTS.boltzmann * self.temperature


def molar_to_molecules(concentration: float) -> float:
    """
    Convert a molar concentration (mol/L) into molecules per cubic meter.
    """
    return concentration * LITERS_PER_CUBIC_METER * CONSTANTS.avogadro


def molecules_to_molar(concentration: float) -> float:
    """
    Convert molecules per cubic meter into mol/L.
    """
    return concentration / (LITERS_PER_CUBIC_METER * CONSTANTS.avogadro)


def debye_length(env: Environment) -> float:
    """
    Electrostatic screening length of the electrolyte in meters.
    """
    c = CONSTANTS
    numerator = env.relative_permittivity * c.vacuum_permittivity * env.thermal_energy()
    denominator = (
        2 * c.avogadro * c.elementary_charge**2 * env.ionic_concentration
    )
    length = math.sqrt(numerator / denominator)
    if not math.isfinite(length) or length <= 0:
        raise InvalidEnvironmentError(f"Debye length is not finite for {env}")
    return length


def effective_charge_per_electron(r: float, lambda_d: float) -> float:
    """
    Mean charge a single ligand electron at distance r induces on the
    channel, after Debye screening.
    """
    if r < 0:
        raise DomainError(f"distance must be >= 0, got {r}")
    if not lambda_d > 0:
        raise DomainError(f"Debye length must be > 0, got {lambda_d}")
    return CONSTANTS.elementary_charge * math.exp(-r / lambda_d)


def ligand_charge(pair, lambda_d: float) -> float:
    """
    Effective charge of one bound ligand, N_e * q_eff.
    The ligand electrons are taken to sit at the tip of the receptor,
    so the screening distance is the receptor length.
    """
    return pair.electrons_per_ligand * effective_charge_per_electron(
        pair.receptor_length, lambda_d
    )
