"""
Parameter sweeps and tabular output.

A sweep evaluates one figure of merit on a grid of one axis, optionally
repeated for every value of a family axis. Points are independent; a
failing point becomes an error record instead of a row.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple

import pandas as pd
import yaml

from config import (
    SWEEP_MODES,
    TOOL_NAME,
    TOOL_VERSION,
    RunConfig,
    config_hash,
)
from errors import ConfigurationError, ModelError
from receiver import Receiver, ReceiverBuilder
from stosim import estimate_ser, simulate_occupancy, synthesize_output

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.10g"

AXIS_UNITS: Dict[str, str] = {
    "c": "molecules/m^3",
    "temperature": "K",
    "c_ion": "mol/m^3",
    "eps_r": "1",
    "k_on": "m^3/s",
    "k_off": "1/s",
    "l_r": "m",
    "n_e": "1",
    "c_mol_r": "F",
    "c_mol_l": "F",
    "c_r": "1/m^2",
    "width": "m",
    "length": "m",
    "t_ox": "m",
    "eps_ox": "1",
    "mu_eff": "m^2/(V*s)",
    "v_ds": "V",
    "c_dl": "F/m^2",
    "c_s": "F/m^2",
    "n_t": "1/(eV*m^3)",
    "tunneling_distance": "m",
    "r_layer": "ohm",
    "v_gs": "V",
    "v_th0": "V",
}

MODE_COLUMNS: Dict[str, Tuple[str, ...]] = {
    "response": ("delta_vt[V]", "delta_ids[A]"),
    "sensitivity": ("sensitivity[A*m^3]", "sensitivity_per_kd[A]"),
    "snr": (
        "snr[dB]",
        "binding_power[V^2]",
        "thermal_power[V^2]",
        "flicker_power[V^2]",
    ),
    "lod": ("lod[molecules/m^3]", "lod_over_kd[1]"),
}


@dataclass
class RowError:
    """
    A grid point whose evaluation failed.
    """

    index: int
    point: Dict[str, float]
    message: str


@dataclass
class ResultTable:
    """
    Column-labelled rows plus the errors and provenance of a run.
    """

    columns: List[str]
    rows: List[Tuple[Any, ...]] = field(default_factory=list)
    errors: List[RowError] = field(default_factory=list)
    provenance: Dict[str, str] = field(default_factory=dict)
    failures: int = 0

    @property
    def ok(self) -> bool:
        """
        True when no row failed and no check failed.
        """
        return not self.errors and self.failures == 0

    def column(self, name: str) -> List[Any]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame.from_records(self.rows, columns=self.columns)

    def write_csv(self, stream: TextIO) -> None:
        """
        Header and data rows only; provenance and row errors are written
        separately by write_provenance.
        """
        self.to_frame().to_csv(
            stream, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
        )

    def provenance_document(self) -> Dict[str, Any]:
        return {
            "provenance": dict(self.provenance),
            "rows": len(self.rows),
            "failed_checks": self.failures,
            "errors": [
                {
                    "row": error.index,
                    "point": {k: float(v) for k, v in error.point.items()},
                    "message": error.message,
                }
                for error in self.errors
            ],
        }

    def write_provenance(self, stream: TextIO) -> None:
        yaml.safe_dump(self.provenance_document(), stream, sort_keys=False)


def provenance_path(path: str) -> str:
    """
    Sidecar file that goes with a CSV table: run.csv -> run.provenance.yaml
    """
    return str(Path(path).with_suffix(".provenance.yaml"))


def provenance(config: RunConfig) -> Dict[str, str]:
    """
    Entries that identify how a table was produced.
    """
    return {
        "tool": f"{TOOL_NAME} {TOOL_VERSION}",
        "mode": config.mode,
        "preset": config.preset or "none",
        "seed": str(config.seed),
        "config_hash": config_hash(config),
    }


def sweep_columns(mode: str, axis: str, family_axis: Optional[str]) -> List[str]:
    """
    Column set of a sweep table; depends only on the mode and the axes.
    """
    columns = []
    if family_axis is not None:
        columns.append(f"{family_axis}[{AXIS_UNITS[family_axis]}]")
    columns.append(f"{axis}[{AXIS_UNITS[axis]}]")
    if axis == "c":
        columns.append("c_over_kd[1]")
    return columns + list(MODE_COLUMNS[mode])


@dataclass(frozen=True)
class SweepPoint:
    """
    One independent evaluation task.
    """

    index: int
    mode: str
    receiver: Receiver
    axis: str
    value: float
    family_axis: Optional[str]
    family_value: Optional[float]
    concentration: float
    lod_threshold_db: float


def _point_receiver(point: SweepPoint) -> Receiver:
    builder = ReceiverBuilder(point.receiver)
    if point.family_axis not in (None, "c"):
        builder.set_parameter(point.family_axis, point.family_value)
    if point.axis != "c":
        builder.set_parameter(point.axis, point.value)
    return builder.build()


def _point_concentration(point: SweepPoint) -> float:
    if point.axis == "c":
        return point.value
    if point.family_axis == "c":
        return point.family_value
    return point.concentration


def evaluate_point(point: SweepPoint) -> Tuple[int, Optional[Tuple], Optional[str]]:
    """
    Evaluate one grid point. Returns (index, row, None) or
    (index, None, error message).
    """
    try:
        receiver = _point_receiver(point)
        c = _point_concentration(point)
        match point.mode:
            case "response":
                values = (receiver.response(c), receiver.current_response(c))
            case "sensitivity":
                slope = receiver.sensitivity(c)
                values = (slope, slope * receiver.dissociation_constant())
            case "snr":
                budget = receiver.noise_budget(c)
                values = (
                    budget.snr_db,
                    budget.binding_power,
                    budget.thermal_power,
                    budget.flicker_power,
                )
            case "lod":
                lod = receiver.limit_of_detection(point.lod_threshold_db)
                if lod is None:
                    raise ModelError(
                        f"SNR never reaches {point.lod_threshold_db} dB on the LoD grid"
                    )
                values = (lod, lod / receiver.dissociation_constant())
            case _:
                raise ConfigurationError(f"Unknown sweep mode: {point.mode}")
    except ModelError as error:
        return point.index, None, str(error)

    row: List[float] = []
    if point.family_axis is not None:
        row.append(point.family_value)
    row.append(point.value)
    if point.axis == "c":
        row.append(point.value / receiver.dissociation_constant())
    return point.index, tuple(row) + tuple(float(v) for v in values), None


def sweep_points(config: RunConfig) -> List[SweepPoint]:
    """
    Grid points in output order: family-major, then along the axis.
    """
    spec = config.sweep_spec()
    points = []
    for family_value in spec.families():
        for value in spec.values:
            points.append(
                SweepPoint(
                    index=len(points),
                    mode=config.mode,
                    receiver=config.receiver,
                    axis=spec.axis,
                    value=value,
                    family_axis=spec.family_axis,
                    family_value=family_value,
                    concentration=config.evaluation_concentration(),
                    lod_threshold_db=config.lod_threshold_db,
                )
            )
    return points


def _evaluate_all(
    points: Sequence[SweepPoint], workers: int
) -> List[Tuple[int, Optional[Tuple], Optional[str]]]:
    if workers <= 1 or len(points) <= 1:
        return [evaluate_point(point) for point in points]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        # map keeps submission order
        return list(executor.map(evaluate_point, points))


def run_sweep(config: RunConfig, workers: int = 1) -> ResultTable:
    """
    Evaluate the configured figure of merit over the sweep grid.
    """
    if config.mode not in SWEEP_MODES:
        raise ConfigurationError(
            f"run_sweep needs one of the modes {SWEEP_MODES}, got {config.mode}"
        )
    spec = config.sweep_spec()
    if config.mode == "lod" and "c" in (spec.axis, spec.family_axis):
        raise ConfigurationError("the limit of detection cannot be swept over c")

    table = ResultTable(
        sweep_columns(config.mode, spec.axis, spec.family_axis),
        provenance=provenance(config),
    )
    points = sweep_points(config)
    logger.info(
        "evaluating %s at %d points over %s", config.mode, len(points), spec.axis
    )
    for index, row, message in _evaluate_all(points, workers):
        if row is None:
            point = points[index]
            location = {point.axis: point.value}
            if point.family_axis is not None:
                location[point.family_axis] = point.family_value
            logger.warning("point %d %s failed: %s", index, location, message)
            table.errors.append(RowError(index, location, message))
        else:
            table.rows.append(row)
    return table


def run_simulation(config: RunConfig, progress: bool = False) -> ResultTable:
    """
    Simulate the configured schedule. Emits the output trace, or the
    symbol error rate when simulation.ser_symbols is set.
    """
    receiver = config.receiver
    settings = config.simulation
    schedule = config.message_schedule()
    args = (receiver.pair, receiver.layer)

    if settings.ser_symbols is not None:
        estimate = estimate_ser(
            schedule,
            *args,
            receiver.transducer,
            receiver.environment,
            settings.ser_symbols,
            config.seed,
            interferers=settings.interferers,
            dt=settings.dt,
            include_noise=settings.noise,
            method=settings.method,
            band=receiver.band,
            progress=progress,
        )
        table = ResultTable(
            ["errors[1]", "symbols[1]", "ser[1]", "ser_low[1]", "ser_high[1]"],
            provenance=provenance(config),
        )
        table.rows.append(
            (
                estimate.errors,
                estimate.n_symbols,
                estimate.rate,
                estimate.lower,
                estimate.upper,
            )
        )
        return table

    trace = simulate_occupancy(
        schedule,
        *args,
        settings.interferers,
        settings.dt,
        config.seed,
        settings.method,
        settings.start_at_steady_state,
        progress=progress,
    )
    trace = synthesize_output(
        trace,
        receiver.transducer,
        *args,
        receiver.environment,
        settings.noise,
        settings.interferers,
        receiver.band,
    )
    if len(trace.species) == 1:
        bound = ["n_bound[1]"]
    else:
        bound = [f"n_bound_{name}[1]" for name in trace.species]
    table = ResultTable(
        ["time[s]"] + bound + ["delta_vth[V]", "delta_ids[A]"],
        provenance=provenance(config),
    )
    for k, t in enumerate(trace.time):
        table.rows.append(
            (float(t),)
            + tuple(int(n) for n in trace.n_bound[:, k])
            + (float(trace.delta_vth[k]), float(trace.delta_ids[k]))
        )
    return table
