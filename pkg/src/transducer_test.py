import unittest
from dataclasses import replace

import numpy as np

from errors import DomainError, UnsupportedOperationError
from kinetics import LigandReceptorPair, RecognitionLayer, dissociation_constant
from physchem import Environment, debye_length, ligand_charge
from transducer import (
    TransducerConfig,
    baseline_current,
    capacitances,
    count_potential,
    current_shift,
    potential_shift,
    response_polarity,
    sensitivity,
    small_signal_gain,
    transconductance,
)


class TransducerTest(unittest.TestCase):
    """Test cases for the equivalent-circuit transduction"""

    def setUp(self):
        """Set up the reference device, pair and receptor layer"""
        self.cfg = TransducerConfig()
        self.pair = LigandReceptorPair()
        self.layer = RecognitionLayer.from_area(2e16, self.cfg.area())
        self.env = Environment()
        self.k_d = dissociation_constant(self.pair)

    def test_receptor_count(self):
        """Test the reference layer holds 10^4 receptors"""
        self.assertAlmostEqual(self.layer.receptor_count, 1e4)

    def test_oxide_capacitance(self):
        """Test C_ox of 17.5 nm SiO2"""
        self.assertAlmostEqual(self.cfg.oxide_capacitance() / 1.973e-3, 1.0, places=3)

    def test_transconductance(self):
        """Test g_m of the reference device"""
        self.assertAlmostEqual(transconductance(self.cfg) / 6.314e-8, 1.0, places=3)

    def test_capacitances_at_4kd(self):
        """Test the ligand-side equivalent capacitance at 4 K_D"""
        breakdown = capacitances(8000.0, self.cfg, self.pair, self.layer)
        self.assertAlmostEqual(breakdown.c_eq_prime / 3.018e-16, 1.0, places=3)
        self.assertAlmostEqual(breakdown.c_layer / 1.6e-16, 1.0)
        self.assertFalse(breakdown.degenerate)
        self.assertAlmostEqual(
            breakdown.c_eq, breakdown.series_gate + breakdown.series_layer
        )

    def test_capacitances_empty_layer(self):
        """Test the open ligand branch when nothing is bound"""
        breakdown = capacitances(0.0, self.cfg, self.pair, self.layer)
        self.assertTrue(breakdown.degenerate)
        self.assertEqual(breakdown.series_layer, 0.0)
        self.assertEqual(breakdown.c_eq, breakdown.series_gate)
        with self.assertRaises(DomainError):
            capacitances(-1.0, self.cfg, self.pair, self.layer)

    def test_potential_shift(self):
        """Test the threshold-voltage change at 4 K_D"""
        shift = potential_shift(4 * self.k_d, self.cfg, self.pair, self.layer, self.env)
        self.assertAlmostEqual(shift, 0.267, delta=2e-3)

    def test_zero_concentration(self):
        """Test that no ligand gives no response"""
        self.assertEqual(
            potential_shift(0.0, self.cfg, self.pair, self.layer, self.env), 0.0
        )
        empty = count_potential(0, self.cfg, self.pair, self.layer, self.env)
        self.assertEqual(empty, 0.0)

    def test_response_monotone(self):
        """Test the response grows with the concentration"""
        shifts = [
            potential_shift(m * self.k_d, self.cfg, self.pair, self.layer, self.env)
            for m in (0.1, 0.5, 1, 4, 20, 100)
        ]
        self.assertEqual(shifts, sorted(shifts))

    def test_dilution(self):
        """Test that diluting the buffer from 70 mM to 1 mM raises the response"""
        c = 4 * self.k_d
        dilute = potential_shift(
            c, self.cfg, self.pair, self.layer, Environment(ionic_concentration=1.0)
        )
        serum = potential_shift(c, self.cfg, self.pair, self.layer, self.env)
        self.assertAlmostEqual(dilute / serum, 21.6, delta=0.3)

    def test_current_shift(self):
        """Test the current change is g_m times the potential change"""
        c = 2 * self.k_d
        self.assertAlmostEqual(
            current_shift(c, self.cfg, self.pair, self.layer, self.env),
            transconductance(self.cfg)
            * potential_shift(c, self.cfg, self.pair, self.layer, self.env),
        )

    def test_sensitivity_finite_difference(self):
        """Test the analytical sensitivity against a central difference"""
        for multiple in (0.5, 1.0, 4.0, 8.0):
            c = multiple * self.k_d
            h = 1e-4 * c
            upper = current_shift(c + h, self.cfg, self.pair, self.layer, self.env)
            lower = current_shift(c - h, self.cfg, self.pair, self.layer, self.env)
            analytic = sensitivity(c, self.cfg, self.pair, self.layer, self.env)
            finite = (upper - lower) / (2 * h)
            self.assertAlmostEqual(analytic / finite, 1.0, places=4)

    def test_sensitivity_domain(self):
        """Test that the sensitivity needs a positive concentration"""
        with self.assertRaises(DomainError):
            sensitivity(0.0, self.cfg, self.pair, self.layer, self.env)

    def test_small_signal_gain(self):
        """Test the gain matches the slope of the count potential"""
        c = 4 * self.k_d
        n = 8000.0
        slope = (
            count_potential(n + 1, self.cfg, self.pair, self.layer, self.env)
            - count_potential(n - 1, self.cfg, self.pair, self.layer, self.env)
        ) / 2
        gain = small_signal_gain(c, self.cfg, self.pair, self.layer, self.env)
        self.assertAlmostEqual(gain / slope, 1.0, places=5)

    def test_polarity(self):
        """Test the sign of the current change for both channel types"""
        self.assertEqual(response_polarity(self.cfg, -1), 1)
        self.assertEqual(response_polarity(self.cfg, 1), -1)
        n_type = TransducerConfig(channel_type="n")
        self.assertEqual(response_polarity(n_type, -1), -1)

    def test_baseline_current(self):
        """Test the baseline current needs V_GS and an on device"""
        with self.assertRaises(UnsupportedOperationError):
            baseline_current(self.cfg)
        on = TransducerConfig(gate_source_voltage=1.0, baseline_threshold_voltage=0.2)
        self.assertAlmostEqual(baseline_current(on) / transconductance(on), 0.8)
        off = TransducerConfig(gate_source_voltage=0.1, baseline_threshold_voltage=0.2)
        with self.assertRaises(DomainError):
            baseline_current(off)

    def test_invalid_config(self):
        """Test that the device parameters are validated"""
        with self.assertRaises(DomainError):
            TransducerConfig(oxide_thickness=0.0)
        with self.assertRaises(DomainError):
            TransducerConfig(channel_type="x")


    def test_saturation_limit(self):
        """Test the response at 10^6 K_D approaches the fully bound layer"""
        area = self.cfg.area()
        n_r = self.layer.receptor_count
        c_ox = self.cfg.oxide_capacitance() * area
        c_s = self.cfg.semiconductor_capacitance_per_area * area
        c_dl = self.cfg.dl_capacitance_per_area * area
        ligand_side = 1 / (
            1 / (n_r * self.pair.receptor_capacitance)
            + 1 / (n_r * self.pair.ligand_capacitance)
            + 1 / c_dl
        )
        c_eq = 1 / (1 / c_ox + 1 / c_s) + ligand_side
        limit = n_r * ligand_charge(self.pair, debye_length(self.env)) / c_eq
        shift = potential_shift(
            1e6 * self.k_d, self.cfg, self.pair, self.layer, self.env
        )
        self.assertAlmostEqual(shift / limit, 1.0, delta=1e-3)

    def test_receptor_length_screening(self):
        """Test doubling L_R scales the response by exp(-L_R/lambda_D)"""
        c = 4 * self.k_d
        lambda_d = debye_length(self.env)
        for length in (1e-9, 2e-9, 4e-9):
            short = replace(self.pair, receptor_length=length)
            long = replace(self.pair, receptor_length=2 * length)
            ratio = potential_shift(
                c, self.cfg, long, self.layer, self.env
            ) / potential_shift(c, self.cfg, short, self.layer, self.env)
            self.assertAlmostEqual(
                ratio / np.exp(-length / lambda_d), 1.0, delta=1e-2
            )

    def test_sensitivity_falls_with_concentration(self):
        """Test the sensitivity falls strictly as c grows"""
        values = [
            sensitivity(m * self.k_d, self.cfg, self.pair, self.layer, self.env)
            for m in np.geomspace(0.5, 20, 12)
        ]
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_sensitivity_falls_with_ionic_strength(self):
        """Test the sensitivity falls strictly as the buffer gets saltier"""
        c = 4 * self.k_d
        values = [
            sensitivity(
                c, self.cfg, self.pair, self.layer, Environment(ionic_concentration=i)
            )
            for i in np.geomspace(7, 700, 12)
        ]
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_sensitivity_falls_with_receptor_length(self):
        """Test the sensitivity falls strictly as the receptor gets longer"""
        c = 4 * self.k_d
        values = [
            sensitivity(
                c,
                self.cfg,
                replace(self.pair, receptor_length=length),
                self.layer,
                self.env,
            )
            for length in np.linspace(1e-9, 8e-9, 12)
        ]
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_sensitivity_falls_with_oxide_thickness(self):
        """Test the sensitivity falls strictly as the gate oxide thickens"""
        c = 4 * self.k_d
        values = [
            sensitivity(
                c,
                TransducerConfig(oxide_thickness=t_ox),
                self.pair,
                self.layer,
                self.env,
            )
            for t_ox in np.geomspace(1.75e-9, 175e-9, 12)
        ]
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_ligand_capacitance_underflow(self):
        """Test a vanishing concentration raises a model error, not ZeroDivisionError"""
        with self.assertRaises(DomainError):
            capacitances(1e-305, self.cfg, self.pair, self.layer)
        with self.assertRaises(DomainError):
            sensitivity(1e-290, self.cfg, self.pair, self.layer, self.env)


if __name__ == "__main__":
    unittest.main()
