"""
Self-check suite: closed-form identities of the analytical model,
Monte-Carlo estimates compared against the analytical statistics, and
the expected trends of the SNR, sensitivity and error rate sweeps.

Each row has the status "pass" or "fail". A check that the model is
known to miss reports "deviation" instead of "fail" and does not count
as a failure.
"""

import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy import integrate

from config import RunConfig
from errors import ConfigurationError
from kinetics import (
    MessageSchedule,
    RecognitionLayer,
    binding_noise_psd,
    binding_timescale,
    bound_variance,
    occupancy_probability,
)
from noise import band_power, flicker_band_power, flicker_voltage_psd
from physchem import Environment, debye_length
from presets import PRESETS
from receiver import Receiver, ReceiverBuilder
from spectral import welch_spectrum
from stosim import (
    empirical_acf,
    estimate_ser,
    ser_versus_separation,
    simulate_occupancy,
    stationary_segment,
    synthesize_output,
)
from sweep import ResultTable, provenance
from transducer import small_signal_gain

logger = logging.getLogger(__name__)

COLUMNS = ["check", "measured", "expected", "tolerance", "status"]
KINDS = ("close", "at_most", "at_least")

REFERENCE_DEBYE_LENGTH = 1.15e-9  # m, at 70 mol/m^3, 298 K, eps_r 78
DILUTION_FOLD = 21.0
DILUTION_TOLERANCE = 6.0
TRACE_TIMESCALES = 1e4
WELCH_SEGMENT = 4096
CSK_SYMBOLS = 200
CSK_SYMBOL_TIMESCALES = 20

SNR_PLATEAU_DB = 25.0
SNR_PLATEAU_TOLERANCE_DB = 10.0
AFFINE_RESIDUAL_DB = 1.0
TRAP_DENSITY_DROP_DB = 3.0
TRAP_DENSITY_RANGE = (1e23, 1e25)  # 1/(eV m^3)
SER_RECEPTORS = 50
SER_SYMBOLS = 10_000
SER_RATIOS = (2.0, 4.0, 8.0, 16.0)


@dataclass(frozen=True)
class Check:
    """
    One measured-vs-expected comparison with an absolute tolerance.
    kind "close" bounds |measured - expected|, "at_most" and "at_least"
    bound measured from one side.
    """

    name: str
    measured: float
    expected: float
    tolerance: float
    kind: str = "close"
    known_deviation: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigurationError(f"kind must be one of {KINDS}, got {self.kind}")

    def passed(self, tolerance_scale: float) -> bool:
        tolerance = self.tolerance * tolerance_scale
        match self.kind:
            case "close":
                return abs(self.measured - self.expected) <= tolerance
            case "at_most":
                return self.measured <= self.expected + tolerance
            case "at_least":
                return self.measured >= self.expected - tolerance

    def status(self, tolerance_scale: float) -> str:
        if self.passed(tolerance_scale):
            return "pass"
        return "deviation" if self.known_deviation else "fail"


def _relative(measured: float, expected: float) -> float:
    return abs(measured - expected) / abs(expected)


def analytical_checks(receiver: Receiver) -> List[Check]:
    """
    Identities that hold exactly or to quadrature accuracy.
    """
    pair, layer = receiver.pair, receiver.layer
    cfg, env = receiver.transducer, receiver.environment
    k_d = receiver.dissociation_constant()
    checks = [
        Check(
            "debye_length_reference",
            debye_length(Environment()),
            REFERENCE_DEBYE_LENGTH,
            0.01 * REFERENCE_DEBYE_LENGTH,
        ),
        Check("occupancy_at_kd", occupancy_probability(k_d, pair), 0.5, 1e-12),
        Check("occupancy_at_4kd", occupancy_probability(4 * k_d, pair), 0.8, 1e-12),
    ]

    diluted = ReceiverBuilder(receiver).set_parameter("c_ion", 1.0).build()
    physiological = ReceiverBuilder(receiver).set_parameter("c_ion", 70.0).build()
    checks.append(
        Check(
            "dilution_fold_change",
            diluted.response(4 * k_d) / physiological.response(4 * k_d),
            DILUTION_FOLD,
            DILUTION_TOLERANCE,
        )
    )

    worst = 0.0
    for multiple in (0.5, 1.0, 2.0, 4.0, 8.0):
        c = multiple * k_d
        h = 1e-4 * c
        upper = receiver.current_response(c + h)
        lower = receiver.current_response(c - h)
        finite = (upper - lower) / (2 * h)
        worst = max(worst, _relative(receiver.sensitivity(c), finite))
    checks.append(Check("sensitivity_vs_finite_difference", worst, 0.0, 1e-3))

    quadrature = band_power(lambda f: flicker_voltage_psd(f, cfg, env), receiver.band)
    closed = flicker_band_power(cfg, env, receiver.band)
    checks.append(
        Check("flicker_quadrature", _relative(quadrature, closed), 0.0, 1e-4)
    )

    c = 4 * k_d
    half, _ = integrate.quad(
        lambda f: float(binding_noise_psd(f, c, pair, layer)), 0, np.inf
    )
    checks.append(
        Check(
            "binding_psd_integral",
            _relative(2 * half, bound_variance(c, pair, layer)),
            0.0,
            5e-3,
        )
    )
    return checks


def stochastic_checks(receiver: Receiver, config: RunConfig) -> List[Check]:
    """
    Monte-Carlo occupancy statistics against the analytical ones.
    """
    pair, layer = receiver.pair, receiver.layer
    cfg, env = receiver.transducer, receiver.environment
    k_d = receiver.dissociation_constant()
    checks = []
    for index, (label, multiple) in enumerate((("kd", 1.0), ("4kd", 4.0))):
        c = multiple * k_d
        tau = binding_timescale(c, pair)
        schedule = MessageSchedule((c,), 1 / (TRACE_TIMESCALES * tau))
        trace = simulate_occupancy(
            schedule,
            pair,
            layer,
            seed=config.seed + index,
            method=config.simulation.method,
            start_at_steady_state=True,
        )
        samples = stationary_segment(trace)
        p = occupancy_probability(c, pair)
        mean = trace.receptor_count * p
        variance = trace.receptor_count * p * (1 - p)
        standard_error = math.sqrt(variance * 2 * tau / (samples.size * trace.dt))
        checks.append(
            Check(f"mc_mean_{label}", float(samples.mean()), mean, 3 * standard_error)
        )
        checks.append(
            Check(
                f"mc_variance_{label}",
                float(samples.var(ddof=1)),
                variance,
                0.1 * variance,
            )
        )
        acf = empirical_acf(trace, 3 * tau)
        checks.append(
            Check(f"mc_acf_timescale_{label}", acf.fit_timescale(), tau, 0.1 * tau)
        )

        output = synthesize_output(trace, cfg, pair, layer, env)
        start = trace.time.size - samples.size
        spectrum = welch_spectrum(output.delta_vth[start:], trace.dt, WELCH_SEGMENT)
        corner = 1 / (2 * math.pi * tau)
        near = np.abs(spectrum.frequencies - corner) <= 0.1 * corner
        gain = small_signal_gain(c, cfg, pair, layer, env)
        expected = float(
            np.mean(binding_noise_psd(spectrum.frequencies[near], c, pair, layer))
            * gain**2
        )
        checks.append(
            Check(
                f"welch_psd_at_corner_{label}",
                float(np.mean(spectrum.values[near])),
                expected,
                0.2 * expected,
            )
        )

    levels = (k_d, 16 * k_d)
    slowest = max(binding_timescale(c, pair) for c in levels)
    alphabet = MessageSchedule(levels, 1 / (CSK_SYMBOL_TIMESCALES * slowest))
    estimate = estimate_ser(
        alphabet, pair, layer, cfg, env, CSK_SYMBOLS, config.seed + 2
    )
    checks.append(Check("csk_noiseless_ser", estimate.rate, 0.0, 0.0))
    return checks


def _max_step(values: np.ndarray) -> float:
    """
    Largest increase between neighbouring grid values, relative to the
    largest magnitude on the grid.
    """
    return float(np.max(np.diff(values)) / np.max(np.abs(values)))


def trend_checks(receiver: Receiver, c: float) -> List[Check]:
    """
    Shape of the SNR and sensitivity sweeps on the preset grids.
    Sweeps over a parameter other than c are evaluated at c.
    """
    k_d = receiver.dissociation_constant()

    def grid(preset: str) -> np.ndarray:
        return np.array(PRESETS.get(preset).grid.values(k_d))

    def along(axis: str, values: np.ndarray, figure) -> np.ndarray:
        return np.array(
            [
                figure(ReceiverBuilder(receiver).set_parameter(axis, v).build())
                for v in values
            ]
        )

    checks = []
    concentrations = grid("fig10a")
    checks.append(
        Check(
            "snr_plateau_db",
            receiver.snr(concentrations[-1]),
            SNR_PLATEAU_DB,
            SNR_PLATEAU_TOLERANCE_DB,
            known_deviation=True,
        )
    )

    lengths = grid("fig10c")
    snr_db = along("l_r", lengths, lambda r: r.snr(c))
    affine = np.polyval(np.polyfit(lengths, snr_db, 1), lengths)
    checks.append(
        Check(
            "snr_receptor_length_affine_residual_db",
            float(np.max(np.abs(snr_db - affine))),
            0.0,
            AFFINE_RESIDUAL_DB,
            "at_most",
            known_deviation=True,
        )
    )

    snr_db = along("c_ion", grid("fig10b"), lambda r: r.snr(c))
    checks.append(
        Check(
            "snr_ionic_strength_max_step_db",
            float(np.max(np.diff(snr_db))),
            0.0,
            0.0,
            "at_most",
        )
    )

    snr_db = along("n_t", np.array(TRAP_DENSITY_RANGE), lambda r: r.snr(c))
    checks.append(
        Check(
            "snr_trap_density_drop_db",
            float(snr_db[0] - snr_db[1]),
            TRAP_DENSITY_DROP_DB,
            0.0,
            "at_least",
        )
    )

    slopes = np.array([receiver.sensitivity(v) for v in grid("fig9a")])
    checks.append(
        Check("sensitivity_max_step_c", _max_step(slopes), 0.0, 0.0, "at_most")
    )
    for preset, axis in (("fig9b", "c_ion"), ("fig9c", "l_r"), ("fig9d", "t_ox")):
        slopes = along(axis, grid(preset), lambda r: r.sensitivity(c))
        checks.append(
            Check(
                f"sensitivity_max_step_{axis}", _max_step(slopes), 0.0, 0.0, "at_most"
            )
        )
    return checks


def ser_separation_checks(receiver: Receiver, seed: int) -> List[Check]:
    """
    Noiseless binary CSK on a small receptor layer with the low level at
    K_D. The error rate must not rise significantly as the high/low ratio
    grows, and must fall significantly across the whole ratio range.
    """
    cfg = receiver.transducer
    layer = RecognitionLayer(SER_RECEPTORS / cfg.area(), SER_RECEPTORS)
    estimates = ser_versus_separation(
        receiver.dissociation_constant(),
        SER_RATIOS,
        receiver.pair,
        layer,
        cfg,
        receiver.environment,
        SER_SYMBOLS,
        seed,
    )
    checks = []
    for k in range(1, len(SER_RATIOS)):
        checks.append(
            Check(
                f"ser_ratio_{SER_RATIOS[k]:g}_not_above_{SER_RATIOS[k - 1]:g}",
                estimates[k].lower,
                estimates[k - 1].upper,
                0.0,
                "at_most",
            )
        )
    checks.append(
        Check(
            f"ser_ratio_{SER_RATIOS[-1]:g}_below_{SER_RATIOS[0]:g}",
            estimates[-1].upper,
            estimates[0].lower,
            0.0,
            "at_most",
        )
    )
    return checks


def run_validate(config: RunConfig) -> ResultTable:
    """
    Run every check and report one row per check.
    The tolerances are multiplied by config.tolerance_scale.
    """
    if config.mode != "validate":
        raise ConfigurationError(f"run_validate needs mode validate, got {config.mode}")
    receiver = config.receiver
    table = ResultTable(list(COLUMNS), provenance=provenance(config))
    checks = (
        analytical_checks(receiver)
        + stochastic_checks(receiver, config)
        + trend_checks(receiver, config.evaluation_concentration())
        + ser_separation_checks(receiver, config.seed + 4)
    )
    deviations = 0
    for check in checks:
        status = check.status(config.tolerance_scale)
        tolerance = check.tolerance * config.tolerance_scale
        if status != "pass":
            logger.warning(
                "check %s %s: measured %.6g, expected %s %.6g +- %.3g",
                check.name,
                "deviates" if status == "deviation" else "failed",
                check.measured,
                check.kind,
                check.expected,
                tolerance,
            )
        if status == "fail":
            table.failures += 1
        elif status == "deviation":
            deviations += 1
        measured, expected = float(check.measured), float(check.expected)
        table.rows.append((check.name, measured, expected, tolerance, status))
    logger.info(
        "%d of %d checks passed, %d known deviations",
        len(checks) - table.failures - deviations,
        len(checks),
        deviations,
    )
    return table
