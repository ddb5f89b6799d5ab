import math
import unittest

import numpy as np

from errors import DomainError, InvalidEnvironmentError
from kinetics import LigandReceptorPair
from physchem import (
    CONSTANTS,
    Environment,
    debye_length,
    effective_charge_per_electron,
    ligand_charge,
    molar_to_molecules,
    molecules_to_molar,
)


class EnvironmentTest(unittest.TestCase):
    """Test cases for Environment and the Debye length"""

    def setUp(self):
        """Set up the default serum environment"""
        self.env = Environment()

    def test_defaults(self):
        """Test the default operating conditions"""
        self.assertEqual(self.env.temperature, 298.0)
        self.assertEqual(self.env.ionic_concentration, 70.0)
        self.assertEqual(self.env.relative_permittivity, 78.0)

    def test_debye_length_serum(self):
        """Test the screening length of 70 mM serum is about 1.15 nm"""
        self.assertAlmostEqual(debye_length(self.env) * 1e9, 1.146, places=2)

    def test_debye_length_dilute(self):
        """Test the screening length at 1 mM and 100 mM"""
        dilute = Environment(ionic_concentration=1.0)
        concentrated = Environment(ionic_concentration=100.0)
        self.assertAlmostEqual(debye_length(dilute) * 1e9, 9.587, places=2)
        self.assertAlmostEqual(debye_length(concentrated) * 1e9, 0.9587, places=3)

    def test_debye_length_scaling(self):
        """Test that a hundredfold dilution lengthens the screening tenfold"""
        ratio = debye_length(Environment(ionic_concentration=0.7)) / debye_length(
            self.env
        )
        self.assertAlmostEqual(ratio, 10.0, places=9)

    def test_debye_length_rises_with_temperature(self):
        """Test the screening length grows with T over twelve points"""
        lengths = [
            debye_length(Environment(temperature=t)) for t in np.linspace(273, 373, 12)
        ]
        self.assertTrue(np.all(np.diff(lengths) > 0))

    def test_debye_length_rises_with_permittivity(self):
        """Test the screening length grows with eps_R over twelve points"""
        lengths = [
            debye_length(Environment(relative_permittivity=eps))
            for eps in np.linspace(2, 100, 12)
        ]
        self.assertTrue(np.all(np.diff(lengths) > 0))

    def test_invalid_environment(self):
        """Test that non-physical environments are rejected"""
        with self.assertRaises(InvalidEnvironmentError):
            Environment(ionic_concentration=0.0)
        with self.assertRaises(InvalidEnvironmentError):
            Environment(temperature=-1.0)
        with self.assertRaises(InvalidEnvironmentError):
            Environment(relative_permittivity=0.5)

    def test_thermal_energy(self):
        """Test k_B T at room temperature"""
        self.assertAlmostEqual(self.env.thermal_energy(), 4.114e-21, delta=1e-24)


class ChargeTest(unittest.TestCase):
    """Test cases for the screened ligand charge"""

    def setUp(self):
        """Set up the default pair and screening length"""
        self.pair = LigandReceptorPair()
        self.lambda_d = debye_length(Environment())

    def test_unscreened_at_surface(self):
        """Test that a charge at the surface is not screened"""
        self.assertEqual(
            effective_charge_per_electron(0.0, self.lambda_d),
            CONSTANTS.elementary_charge,
        )

    def test_one_debye_length(self):
        """Test the charge falls by e at one Debye length"""
        q = effective_charge_per_electron(self.lambda_d, self.lambda_d)
        self.assertAlmostEqual(q / CONSTANTS.elementary_charge, math.exp(-1))

    def test_ligand_charge(self):
        """Test the ligand charge scales with the electron count"""
        single = effective_charge_per_electron(4e-9, self.lambda_d)
        self.assertAlmostEqual(ligand_charge(self.pair, self.lambda_d) / single, 4.0)

    def test_domain_errors(self):
        """Test negative distances and lengths are rejected"""
        with self.assertRaises(DomainError):
            effective_charge_per_electron(-1e-9, self.lambda_d)
        with self.assertRaises(DomainError):
            effective_charge_per_electron(1e-9, 0.0)


class UnitsTest(unittest.TestCase):
    """Test cases for molar conversions"""

    def test_nanomolar(self):
        """Test 1 nM in molecules per cubic meter"""
        self.assertAlmostEqual(molar_to_molecules(1e-9) / 6.02214076e17, 1.0)

    def test_inverse(self):
        """Test the two conversions invert each other"""
        self.assertAlmostEqual(molecules_to_molar(molar_to_molecules(8.3e-9)), 8.3e-9)


if __name__ == "__main__":
    unittest.main()
