import unittest

from errors import ConfigurationError
from presets import PRESETS, Grid, Preset, PresetRegistry, SweepSpec


class SweepSpecTest(unittest.TestCase):
    """Test cases for SweepSpec validation"""

    def test_valid(self):
        """Test a family sweep lists its families"""
        spec = SweepSpec("c", (1.0, 2.0), family_axis="n_e", family_values=(1, 2))
        self.assertEqual(spec.families(), [1.0, 2.0])
        self.assertEqual(SweepSpec("c", (1.0,)).families(), [None])

    def test_invalid_axis(self):
        """Test unknown axes are rejected"""
        with self.assertRaises(ConfigurationError):
            SweepSpec("gain", (1.0,))
        with self.assertRaises(ConfigurationError):
            SweepSpec("c", (1.0,), family_axis="c", family_values=(1.0,))

    def test_invalid_grid(self):
        """Test empty, non-finite and non-monotone grids"""
        with self.assertRaises(ConfigurationError):
            SweepSpec("c", ())
        with self.assertRaises(ConfigurationError):
            SweepSpec("c", (1.0, float("nan")))
        with self.assertRaises(ConfigurationError):
            SweepSpec("c", (1.0, 3.0, 2.0))
        with self.assertRaises(ConfigurationError):
            SweepSpec("c", (1.0,), scale="cubic")
        with self.assertRaises(ConfigurationError):
            SweepSpec("c", (1.0,), family_values=(1.0,))

    def test_descending_grid(self):
        """Test strictly decreasing grids are allowed"""
        self.assertEqual(SweepSpec("t_ox", (2.0, 1.0)).values, (2.0, 1.0))


class GridTest(unittest.TestCase):
    """Test cases for Grid templates"""

    def test_log_grid(self):
        """Test a log grid hits its end points"""
        values = Grid(1.0, 100.0, points=3).values()
        self.assertAlmostEqual(values[1], 10.0)
        self.assertAlmostEqual(values[2], 100.0)

    def test_per_kd(self):
        """Test K_D-relative grids scale with the dissociation constant"""
        values = Grid(0.5, 2.0, points=2, scale="linear", per_kd=True).values(4.0)
        self.assertEqual(values, (2.0, 8.0))

    def test_single_point(self):
        """Test one-point grids use the start value"""
        self.assertEqual(Grid(4.0, 4.0, points=1).values(), (4.0,))
        with self.assertRaises(ConfigurationError):
            Grid(1.0, 2.0, points=0).values()


class PresetRegistryTest(unittest.TestCase):
    """Test cases for the preset registry"""

    def setUp(self):
        """Set up an empty registry"""
        self.registry = PresetRegistry("test")
        self.preset = Preset("p", "snr", "test preset", "c", Grid(1, 2, per_kd=True))

    def test_add_and_get(self):
        """Test presets are found by name"""
        self.registry.add(self.preset)
        self.assertIs(self.registry.get("p"), self.preset)
        with self.assertRaises(ValueError):
            self.registry.add(self.preset)
        with self.assertRaises(ConfigurationError):
            self.registry.get("q")

    def test_default_presets(self):
        """Test the default registry holds the reference point and figures"""
        expected = ["table1"] + [
            f"fig{n}{panel}" for n in (7, 9, 10) for panel in "abcd"
        ]
        self.assertEqual(sorted(expected), PRESETS.names())

    def test_figure_families(self):
        """Test the ionic-concentration figure has four families"""
        spec = PRESETS.get("fig7b").sweep(5e18)
        self.assertEqual(spec.axis, "c")
        self.assertEqual(spec.family_axis, "c_ion")
        self.assertEqual(spec.family_values, (1.0, 10.0, 70.0, 150.0))
        self.assertAlmostEqual(spec.values[0] / 5e17, 1.0)
        self.assertAlmostEqual(spec.values[-1] / 5e20, 1.0)

    def test_modes(self):
        """Test each figure family maps to its figure of merit"""
        self.assertEqual(PRESETS.get("table1").mode, "response")
        self.assertEqual(PRESETS.get("fig9c").mode, "sensitivity")
        self.assertEqual(PRESETS.get("fig10d").mode, "snr")
        self.assertEqual(PRESETS.get("fig10c").sweep(1.0).scale, "linear")


if __name__ == "__main__":
    unittest.main()
