import unittest

from errors import ConfigurationError, DomainError
from kinetics import LigandReceptorPair
from noise import Band
from physchem import Environment
from receiver import (
    PARAMETER_FIELDS,
    SWEEP_AXES,
    Receiver,
    ReceiverBuilder,
    parameter_value,
)
from transducer import TransducerConfig


class ReceiverTest(unittest.TestCase):
    """Test cases for the Receiver bundle"""

    def setUp(self):
        """Set up the reference receiver"""
        self.receiver = Receiver()
        self.k_d = self.receiver.dissociation_constant()

    def test_reference_layer(self):
        """Test the reference layer has 10^4 receptors"""
        self.assertAlmostEqual(self.receiver.layer.receptor_count, 1e4)

    def test_figures_of_merit(self):
        """Test the receiver forwards to the model functions"""
        self.assertAlmostEqual(self.receiver.response(4 * self.k_d), 0.267, delta=2e-3)
        self.assertAlmostEqual(
            self.receiver.current_response(4 * self.k_d),
            self.receiver.transconductance() * self.receiver.response(4 * self.k_d),
        )
        self.assertAlmostEqual(self.receiver.snr(4 * self.k_d), 42.19, delta=0.05)
        self.assertEqual(
            self.receiver.noise_budget(4 * self.k_d).snr_db,
            self.receiver.snr(4 * self.k_d),
        )
        self.assertAlmostEqual(self.receiver.debye_length() * 1e9, 1.146, places=2)
        self.assertGreater(self.receiver.sensitivity(self.k_d), 0.0)

    def test_signal_mode_validation(self):
        """Test that unknown signal modes are rejected"""
        with self.assertRaises(ConfigurationError):
            Receiver(signal_mode="peak")

    def test_empty_layer_rejected(self):
        """Test that a layer without receptors is rejected"""
        with self.assertRaises(DomainError):
            Receiver(receptor_density=1e10)


class ReceiverBuilderTest(unittest.TestCase):
    """Test cases for ReceiverBuilder"""

    def setUp(self):
        """Set up a builder on the reference receiver"""
        self.builder = ReceiverBuilder()

    def test_set_parts(self):
        """Test the part setters replace whole sections"""
        receiver = (
            self.builder.set_environment(Environment(ionic_concentration=1.0))
            .set_pair(LigandReceptorPair(k_off=20.0))
            .set_transducer(TransducerConfig(oxide_thickness=5e-9))
            .set_band(Band(1.0, 10.0))
            .set_signal_mode("deviation")
            .build()
        )
        self.assertEqual(receiver.environment.ionic_concentration, 1.0)
        self.assertAlmostEqual(receiver.dissociation_constant() / 1e19, 1.0)
        self.assertEqual(receiver.transducer.oxide_thickness, 5e-9)
        self.assertEqual(receiver.band, Band(1.0, 10.0))

    def test_set_parameter(self):
        """Test single parameters are set by their public name"""
        receiver = (
            self.builder.set_parameter("c_ion", 10.0)
            .set_parameter("n_e", 8.0)
            .set_parameter("c_r", 4e16)
            .set_parameter("t_ox", 10e-9)
            .build()
        )
        self.assertEqual(parameter_value(receiver, "c_ion"), 10.0)
        self.assertEqual(parameter_value(receiver, "n_e"), 8.0)
        self.assertEqual(parameter_value(receiver, "c_r"), 4e16)
        self.assertEqual(parameter_value(receiver, "t_ox"), 10e-9)
        self.assertAlmostEqual(receiver.layer.receptor_count, 2e4)

    def test_builder_keeps_base(self):
        """Test building does not modify the base receiver"""
        base = Receiver()
        ReceiverBuilder(base).set_parameter("k_on", 1e-18).build()
        self.assertEqual(base.pair.k_on, 2e-18)

    def test_invalid_values(self):
        """Test invariant violations surface on build"""
        with self.assertRaises(DomainError):
            self.builder.set_parameter("k_off", -1.0).build()

    def test_unknown_parameter(self):
        """Test unknown names are rejected"""
        with self.assertRaises(ConfigurationError):
            self.builder.set_parameter("gain", 1.0)
        with self.assertRaises(ConfigurationError):
            parameter_value(Receiver(), "gain")

    def test_sweep_axes(self):
        """Test every numeric parameter can be swept"""
        self.assertIn("c", SWEEP_AXES)
        self.assertNotIn("channel", SWEEP_AXES)
        self.assertEqual(len(SWEEP_AXES), len(PARAMETER_FIELDS) - 1)


if __name__ == "__main__":
    unittest.main()
