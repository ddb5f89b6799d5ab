"""
Named sweep presets: the default operating point and one preset per
figure family of the receiver analysis (response, sensitivity, SNR).
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from errors import ConfigurationError
from receiver import SWEEP_AXES

SCALES = ("linear", "log")
DEFAULT_POINTS = 25


@dataclass(frozen=True)
class SweepSpec:
    """
    One swept axis and an optional family axis, all values in SI
    (the ligand concentration axis "c" in molecules/m^3).
    """

    axis: str
    values: Tuple[float, ...]
    scale: str = "log"
    family_axis: Optional[str] = None
    family_values: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(
            self, "family_values", tuple(float(v) for v in self.family_values)
        )
        if self.axis not in SWEEP_AXES:
            raise ConfigurationError(f"Invalid sweep axis: {self.axis}.")
        if self.scale not in SCALES:
            raise ConfigurationError(f"scale must be one of {SCALES}, got {self.scale}")
        _check_grid(self.axis, self.values)
        if self.family_axis is not None:
            if self.family_axis not in SWEEP_AXES or self.family_axis == self.axis:
                raise ConfigurationError(f"Invalid family axis: {self.family_axis}.")
            _check_grid(self.family_axis, self.family_values)
        elif self.family_values:
            raise ConfigurationError("family values given without a family axis")

    def families(self) -> List[Optional[float]]:
        return list(self.family_values) if self.family_axis else [None]


def _check_grid(axis: str, values: Tuple[float, ...]) -> None:
    if not values:
        raise ConfigurationError(f"grid of {axis} is empty")
    if not all(math.isfinite(v) for v in values):
        raise ConfigurationError(f"grid of {axis} has non-finite values")
    steps = np.diff(values)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ConfigurationError(f"grid of {axis} must be strictly monotone")


@dataclass(frozen=True)
class Grid:
    """
    A grid template. per_kd grids are multiples of the dissociation
    constant and only resolve once the pair is known.
    """

    start: float
    stop: float
    points: int = DEFAULT_POINTS
    scale: str = "log"
    per_kd: bool = False

    def values(self, k_d: float = 1.0) -> Tuple[float, ...]:
        if self.points < 1:
            raise ConfigurationError(f"points must be >= 1, got {self.points}")
        if self.points == 1:
            grid = np.array([self.start])
        elif self.scale == "log":
            grid = np.geomspace(self.start, self.stop, self.points)
        else:
            grid = np.linspace(self.start, self.stop, self.points)
        if self.per_kd:
            grid = grid * k_d
        return tuple(float(v) for v in grid)


@dataclass(frozen=True)
class Preset:
    """
    A named run: mode, sweep template and family.
    """

    name: str
    mode: str
    description: str
    axis: str
    grid: Grid
    family_axis: Optional[str] = None
    family_values: Tuple[float, ...] = ()

    def sweep(self, k_d: float) -> SweepSpec:
        return SweepSpec(
            axis=self.axis,
            values=self.grid.values(k_d),
            scale=self.grid.scale,
            family_axis=self.family_axis,
            family_values=self.family_values,
        )


class PresetRegistry:
    """
    Registry of named presets.
    """

    def __init__(self, name: str) -> None:
        self.name = name
        self.presets: Dict[str, Preset] = {}

    def add(self, preset: Preset) -> None:
        """
        Add a preset to the registry.
        """
        if preset.name in self.presets:
            raise ValueError(f"Duplicate preset: {preset.name}.")
        self.presets[preset.name] = preset

    def get(self, name: str) -> Preset:
        """
        Look up a preset by name.
        """
        if name not in self.presets:
            raise ConfigurationError(
                f"Unknown preset: {name}. Known: {', '.join(self.names())}."
            )
        return self.presets[name]

    def names(self) -> List[str]:
        return sorted(self.presets)


def _concentration_grid(start: float, stop: float) -> Grid:
    return Grid(start, stop, scale="log", per_kd=True)


def _default_registry() -> PresetRegistry:
    registry = PresetRegistry("bioFET receiver")
    registry.add(
        Preset(
            "table1",
            "response",
            "reference operating point at 4 K_D",
            "c",
            Grid(4.0, 4.0, points=1, per_kd=True),
        )
    )
    response_families = {
        "fig7a": ("n_e", (1.0, 2.0, 4.0, 8.0), "electrons per ligand"),
        "fig7b": ("c_ion", (1.0, 10.0, 70.0, 150.0), "ionic concentration"),
        "fig7c": ("c_r", (0.5e16, 1e16, 2e16, 4e16), "receptor density"),
        "fig7d": ("t_ox", (5e-9, 10e-9, 17.5e-9, 35e-9), "oxide thickness"),
    }
    for name, (family_axis, values, label) in response_families.items():
        registry.add(
            Preset(
                name,
                "response",
                f"threshold-voltage response vs c for several {label} values",
                "c",
                _concentration_grid(0.1, 100.0),
                family_axis,
                values,
            )
        )

    registry.add(
        Preset(
            "fig9a",
            "sensitivity",
            "sensitivity vs c",
            "c",
            _concentration_grid(0.5, 20.0),
        )
    )
    registry.add(
        Preset("fig9b", "sensitivity", "sensitivity vs c_ion", "c_ion", Grid(7, 700))
    )
    registry.add(
        Preset(
            "fig9c",
            "sensitivity",
            "sensitivity vs receptor length",
            "l_r",
            Grid(1e-9, 8e-9, points=15, scale="linear"),
        )
    )
    registry.add(
        Preset(
            "fig9d",
            "sensitivity",
            "sensitivity vs oxide thickness",
            "t_ox",
            Grid(1.75e-9, 175e-9),
        )
    )

    registry.add(Preset("fig10a", "snr", "SNR vs c", "c", _concentration_grid(0.5, 50)))
    registry.add(Preset("fig10b", "snr", "SNR vs c_ion", "c_ion", Grid(1, 300)))
    registry.add(
        Preset(
            "fig10c",
            "snr",
            "SNR vs receptor length",
            "l_r",
            Grid(1e-9, 8e-9, points=15, scale="linear"),
        )
    )
    registry.add(
        Preset("fig10d", "snr", "SNR vs trap density", "n_t", Grid(1e23, 1e25))
    )
    return registry


PRESETS = _default_registry()
