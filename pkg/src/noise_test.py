import math
import unittest

import numpy as np
from scipy import integrate

from errors import DomainError, SingularityError, UnsupportedOperationError
from kinetics import (
    LigandReceptorPair,
    RecognitionLayer,
    bound_variance,
    dissociation_constant,
)
from noise import (
    Band,
    Spectrum,
    band_power,
    binding_voltage_psd,
    current_psd,
    flicker_band_power,
    flicker_voltage_psd,
    limit_of_detection,
    noise_budget,
    signal_power,
    single_ligand_potential,
    snr,
    thermal_floor,
    thermal_voltage_psd,
    total_voltage_psd,
    voltage_spectrum,
)
from physchem import Environment
from transducer import TransducerConfig, transconductance


class NoiseTest(unittest.TestCase):
    """Test cases for the noise PSDs and the SNR"""

    def setUp(self):
        """Set up the reference receiver parts"""
        self.cfg = TransducerConfig()
        self.pair = LigandReceptorPair()
        self.layer = RecognitionLayer.from_area(2e16, self.cfg.area())
        self.env = Environment()
        self.k_d = dissociation_constant(self.pair)
        self.parts = (self.cfg, self.pair, self.layer, self.env)

    def test_band_validation(self):
        """Test that bands must start above 0 Hz and be ordered"""
        with self.assertRaises(DomainError):
            Band(0.0, 10.0)
        with self.assertRaises(DomainError):
            Band(10.0, 1.0)
        self.assertTrue(Band().contains(1.0))
        self.assertFalse(Band().contains(1e4))

    def test_thermal_floor(self):
        """Test 4 k_B T R at the reference resistance"""
        floor = thermal_floor(self.cfg, self.env)
        self.assertAlmostEqual(floor / 8.23e-10, 1.0, places=2)
        low = thermal_voltage_psd(1e-6, 4 * self.k_d, *self.parts)
        self.assertAlmostEqual(float(low) / thermal_floor(self.cfg, self.env), 1.0)

    def test_flicker_is_one_over_f(self):
        """Test the flicker PSD scales as 1/f and is singular at 0 Hz"""
        psd = flicker_voltage_psd(np.array([1.0, 10.0]), self.cfg, self.env)
        self.assertAlmostEqual(psd[0] / psd[1], 10.0)
        with self.assertRaises(SingularityError):
            flicker_voltage_psd(0.0, self.cfg, self.env)

    def test_flicker_independent_of_message(self):
        """Test the flicker PSD does not depend on the concentration"""
        low = total_voltage_psd(5.0, 0.5 * self.k_d, *self.parts) - (
            binding_voltage_psd(5.0, 0.5 * self.k_d, *self.parts)
            + thermal_voltage_psd(5.0, 0.5 * self.k_d, *self.parts)
        )
        self.assertAlmostEqual(
            float(low) / float(flicker_voltage_psd(5.0, self.cfg, self.env)), 1.0
        )

    def test_flicker_quadrature(self):
        """Test quadrature of the flicker PSD against its closed form"""
        band = Band()
        numeric = band_power(lambda f: flicker_voltage_psd(f, self.cfg, self.env), band)
        closed = flicker_band_power(self.cfg, self.env, band)
        self.assertAlmostEqual(numeric / closed, 1.0, places=5)

    def test_budget_at_4kd(self):
        """Test the noise components of the reference receiver at 4 K_D"""
        budget = noise_budget(4 * self.k_d, *self.parts)
        self.assertAlmostEqual(budget.binding_power / 1.77e-6, 1.0, places=2)
        self.assertAlmostEqual(budget.thermal_power / 1.64e-6, 1.0, places=2)
        self.assertAlmostEqual(budget.flicker_power / 8.97e-7, 1.0, places=2)
        self.assertAlmostEqual(
            budget.total_power,
            budget.binding_power + budget.thermal_power + budget.flicker_power,
        )
        self.assertAlmostEqual(budget.snr_db, 42.19, delta=0.05)

    def test_snr_grows_and_saturates(self):
        """Test the SNR increases with c and levels off under the binding ceiling"""
        values = [snr(m * self.k_d, *self.parts) for m in (0.5, 1, 2, 4, 8, 16, 32)]
        self.assertEqual(values, sorted(values))
        plateau = snr(1e6 * self.k_d, *self.parts)
        self.assertLess(plateau - values[-1], 1.0)
        # binding noise alone bounds the SNR at N_R p / (1 - p)
        for m in (1, 4, 32):
            occupancy = m / (1 + m)
            ceiling = 10 * math.log10(
                self.layer.receptor_count * occupancy / (1 - occupancy)
            )
            self.assertLess(snr(m * self.k_d, *self.parts), ceiling)

    def test_wider_band_never_raises_snr(self):
        """Test nested bands give a non-increasing SNR"""
        bands = [Band(1.0, 10.0), Band(0.1, 100.0), Band(0.01, 1e3), Band(1e-3, 1e4)]
        for m in (0.5, 4, 32):
            values = [snr(m * self.k_d, *self.parts, band=band) for band in bands]
            self.assertTrue(np.all(np.diff(values) <= 1e-9), values)

    def test_binding_psd_carries_variance(self):
        """Test the binding voltage PSD integrates to Var(N_B) V_m^2"""
        for m in (0.25, 1, 4):
            c = m * self.k_d
            half, _ = integrate.quad(
                lambda f: float(binding_voltage_psd(f, c, *self.parts)), 0, np.inf
            )
            v_m = single_ligand_potential(c, *self.parts)
            expected = bound_variance(c, self.pair, self.layer) * v_m**2
            self.assertAlmostEqual(2 * half / expected, 1.0, delta=5e-3)

    def test_snr_without_signal(self):
        """Test the SNR is -inf without ligand"""
        budget = noise_budget(0.0, *self.parts)
        self.assertEqual(budget.binding_power, 0.0)
        self.assertEqual(budget.snr_db, -math.inf)

    def test_snr_trap_density(self):
        """Test more oxide traps lower the SNR by over 3 dB from 1e23 to 1e25"""
        c = 4 * self.k_d
        values = [
            snr(c, TransducerConfig(trap_density=n_t), self.pair, self.layer, self.env)
            for n_t in np.geomspace(1e23, 1e25, 10)
        ]
        self.assertTrue(np.all(np.diff(values) < 0))
        self.assertGreater(values[0] - values[-1], 3.0)

    def test_snr_dilute_buffer(self):
        """Test the SNR falls strictly as the ionic strength grows from 1 to 300 mM"""
        c = 4 * self.k_d
        values = [
            snr(c, self.cfg, self.pair, self.layer, Environment(ionic_concentration=i))
            for i in np.geomspace(1, 300, 12)
        ]
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_snr_receptor_length_slope(self):
        """Test the SNR falls by about 8.686 / lambda_D dB per meter of receptor"""
        values = []
        for length in (6e-9, 7e-9, 8e-9):
            pair = LigandReceptorPair(receptor_length=length)
            values.append(snr(4 * self.k_d, self.cfg, pair, self.layer, self.env))
        slope = (values[2] - values[0]) / 2
        self.assertAlmostEqual(slope, -7.55, delta=0.2)

    def test_absolute_signal_needs_bias(self):
        """Test the absolute signal mode needs the gate voltage"""
        with self.assertRaises(UnsupportedOperationError):
            signal_power(self.k_d, *self.parts, mode="absolute")
        biased = TransducerConfig(gate_source_voltage=1.0)
        power = signal_power(
            self.k_d, biased, self.pair, self.layer, self.env, "absolute"
        )
        self.assertGreater(power, transconductance(biased) ** 2)
        with self.assertRaises(DomainError):
            signal_power(self.k_d, *self.parts, mode="other")

    def test_current_psd(self):
        """Test the current PSD is the voltage PSD times g_m^2"""
        c = self.k_d
        voltage = total_voltage_psd(3.0, c, *self.parts)
        ratio = current_psd(3.0, c, *self.parts) / voltage
        self.assertAlmostEqual(float(ratio) / transconductance(self.cfg) ** 2, 1.0)

    def test_spectrum_power(self):
        """Test the sampled spectrum integrates to the quadrature power"""
        c = 4 * self.k_d
        spectrum = voltage_spectrum(c, *self.parts, n_points=4000)
        budget = noise_budget(c, *self.parts)
        self.assertAlmostEqual(spectrum.power() / budget.total_power, 1.0, places=2)
        self.assertAlmostEqual(
            float(spectrum.at(spectrum.frequencies[10])), spectrum.values[10]
        )

    def test_spectrum_validation(self):
        """Test that malformed spectra are rejected"""
        with self.assertRaises(DomainError):
            Spectrum(np.array([2.0, 1.0]), np.array([1.0, 1.0]), Band())
        with self.assertRaises(DomainError):
            Spectrum(np.array([1.0, 2.0]), np.array([1.0, -1.0]), Band())

    def test_limit_of_detection(self):
        """Test the LoD is the first grid point whose SNR reaches the threshold"""
        lod = limit_of_detection(*self.parts, threshold_db=20.0)
        self.assertIsNotNone(lod)
        self.assertGreaterEqual(snr(lod, *self.parts), 20.0)
        grid = self.k_d * np.logspace(-4, 4, 401)
        below = grid[grid < lod]
        if below.size:
            self.assertLess(snr(below[-1], *self.parts), 20.0)

    def test_limit_of_detection_unreachable(self):
        """Test the LoD is None when the threshold is never reached"""
        with self.assertLogs("noise", level="INFO"):
            self.assertIsNone(limit_of_detection(*self.parts, threshold_db=100.0))


if __name__ == "__main__":
    unittest.main()
